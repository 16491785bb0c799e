//! Parameter scans: advantage regions, fidelity-matched comparisons, benefit thresholds.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::diagsim::DiagonalState;
use crate::noise::{make_channel, GateNoiseModel, GlobalDepolarizing, PauliChannel};
use crate::optim::bisect_root;
use crate::{Result, SimError};

use super::code::{derive_correction_table, Code, CorrectionTable};
use super::effective::{effective_map, Method, Scenario};
use super::resource::{build_resource, Prep, ResourceState, Role};

/// One-parameter family of gate noise.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GateNoiseKind {
    /// Noiseless gates; the parameter is ignored.
    Perfect,
    Depolarizing,
    BinaryLike,
    Correlated,
}

impl GateNoiseKind {
    pub fn model(self, p: f64) -> Result<GateNoiseModel> {
        let m = match self {
            GateNoiseKind::Perfect => GateNoiseModel::Perfect,
            GateNoiseKind::Depolarizing => return GateNoiseModel::depolarizing(p),
            GateNoiseKind::BinaryLike => GateNoiseModel::BinaryLike { p },
            GateNoiseKind::Correlated => GateNoiseModel::Correlated { p },
        };
        m.validate()?;
        Ok(m)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Approach {
    EppPrep,
    DirectGates,
    GateBased,
    Unencoded,
}

impl Approach {
    pub const ALL: [Approach; 4] = [Approach::EppPrep, Approach::DirectGates, Approach::GateBased, Approach::Unencoded];

    pub fn name(self) -> &'static str {
        match self {
            Approach::EppPrep => "epp-prep",
            Approach::DirectGates => "direct-gates",
            Approach::GateBased => "gate-based",
            Approach::Unencoded => "unencoded",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionSpec {
    pub code: Code,
    pub scenario: Scenario,
    pub gate_noise: GateNoiseKind,
    /// Channel family name understood by [`make_channel`].
    pub channel: String,
    pub gate_params: Vec<f64>,
    pub channel_params: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegionPoint {
    pub p: f64,
    pub q: f64,
    pub approach: Approach,
    /// `NaN` when the approach has no resource at this `p` (purification fails).
    pub jam_fidelity: f64,
    pub beats_unencoded: bool,
}

pub const REGION_CSV_HEADER: &str = "p,q,approach,jam_fidelity,beats_unencoded";

/// Margin by which an encoded fidelity must exceed the unencoded one.
pub const BEAT_MARGIN: f64 = 1e-12;

fn fidelity_of(code: &Code, table: &CorrectionTable, scenario: Scenario, m: &Method, ch: &PauliChannel) -> Result<f64> {
    Ok(effective_map(code, table, scenario, m, ch)?.jamiolkowski_fidelity())
}

pub fn region_scan(spec: &RegionSpec) -> Result<Vec<RegionPoint>> {
    let code = spec.code;
    let table = derive_correction_table(&code)?;
    let channels: Vec<(f64, PauliChannel)> =
        spec.channel_params.iter().map(|&q| Ok((q, make_channel(&spec.channel, q)?))).collect::<Result<_>>()?;
    let per_p: Vec<Vec<RegionPoint>> = spec
        .gate_params
        .par_iter()
        .map(|&p| -> Result<Vec<RegionPoint>> {
            let model = spec.gate_noise.model(p)?;
            let epp = match build_resource(&code, Role::Decode, &Prep::Epp { model, end: None, aux_end: vec![] }) {
                Ok(r) => Some(r),
                Err(SimError::NotConverged(_)) | Err(SimError::ProtocolFailure(_)) => None,
                Err(e) => return Err(e),
            };
            let direct = build_resource(&code, Role::Decode, &Prep::DirectGates { model })?;
            let mut rows = Vec::new();
            for (q, ch) in &channels {
                let unenc = fidelity_of(&code, &table, Scenario::Unencoded, &Method::Gates { model }, ch)?;
                for a in Approach::ALL {
                    let f = match a {
                        Approach::EppPrep => match &epp {
                            Some(r) => fidelity_of(&code, &table, spec.scenario, &Method::Measurement { decoder: r, encoder: None }, ch)?,
                            None => f64::NAN,
                        },
                        Approach::DirectGates => {
                            fidelity_of(&code, &table, spec.scenario, &Method::Measurement { decoder: &direct, encoder: None }, ch)?
                        }
                        Approach::GateBased => fidelity_of(&code, &table, spec.scenario, &Method::Gates { model }, ch)?,
                        Approach::Unencoded => unenc,
                    };
                    rows.push(RegionPoint { p, q: *q, approach: a, jam_fidelity: f, beats_unencoded: f > unenc + BEAT_MARGIN });
                }
            }
            Ok(rows)
        })
        .collect::<Result<_>>()?;
    Ok(per_p.into_iter().flatten().collect())
}

pub fn region_csv(points: &[RegionPoint]) -> String {
    let mut s = String::from(REGION_CSV_HEADER);
    s.push('\n');
    for r in points {
        s.push_str(&format!("{},{},{},{},{}\n", r.p, r.q, r.approach.name(), r.jam_fidelity, r.beats_unencoded));
    }
    s
}

/// Advantage-region boundary: per approach and gate parameter, the smallest sampled
/// channel parameter at which the approach beats no encoding (`None` if it never does).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegionBoundary {
    pub approach: Approach,
    pub p: f64,
    pub q_min: Option<f64>,
}

pub fn region_boundaries(points: &[RegionPoint]) -> Vec<RegionBoundary> {
    let mut out: Vec<RegionBoundary> = Vec::new();
    for r in points {
        let pos = out.iter().position(|b| b.approach == r.approach && b.p == r.p);
        let i = pos.unwrap_or_else(|| {
            out.push(RegionBoundary { approach: r.approach, p: r.p, q_min: None });
            out.len() - 1
        });
        if r.beats_unencoded && out[i].q_min.map_or(true, |q| r.q < q) {
            out[i].q_min = Some(r.q);
        }
    }
    out
}

/// Decode-only fidelities of three resources with the same state fidelity: the EPP
/// fixed point, the pure resource under local white noise, and under global white noise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FidelityMatch {
    pub gate_param: f64,
    pub resource_fidelity: f64,
    pub local_param: f64,
    pub global_param: f64,
    pub epp: f64,
    pub local_depolarizing: f64,
    pub global_depolarizing: f64,
}

pub const BY_FIDELITY_CSV_HEADER: &str = "p,resource_fidelity,local_p,global_p,epp,local_depolarizing,global_depolarizing";

/// Local white-noise parameter giving a pure resource the fidelity `f`.
pub fn matching_local_param(g: &crate::graphstate::Graph, f: f64) -> Option<f64> {
    let pure = DiagonalState::pure(g);
    let fid = |w: f64| pure.apply_channel_everywhere(&PauliChannel::depolarizing(w).expect("w in [0,1]")).fidelity() - f;
    bisect_root(fid, 0.0, 1.0, 1e-12)
}

pub fn by_fidelity(code: &Code, gate_noise: GateNoiseKind, gate_params: &[f64]) -> Result<Vec<FidelityMatch>> {
    let table = derive_correction_table(code)?;
    let g = code.resource_graph();
    let dim = (1u64 << g.n()) as f64;
    gate_params
        .par_iter()
        .map(|&p| {
            let model = gate_noise.model(p)?;
            let epp = build_resource(code, Role::Decode, &Prep::Epp { model, end: None, aux_end: vec![] })?;
            let f = epp.fidelity();
            let w = matching_local_param(&g, f).ok_or(SimError::Infeasible)?;
            let local_state = DiagonalState::pure(&g).apply_channel_everywhere(&PauliChannel::depolarizing(w)?);
            let pg = ((f - 1.0 / dim) / (1.0 - 1.0 / dim)).clamp(0.0, 1.0);
            let global_state = DiagonalState::pure(&g).apply_global(&GlobalDepolarizing::new(pg, g.n())?);
            let decode = |s: DiagonalState| -> Result<f64> {
                let r = ResourceState { state: s, ..epp.clone() };
                fidelity_of(code, &table, Scenario::DecodeOnly, &Method::Measurement { decoder: &r, encoder: None }, &PauliChannel::identity())
            };
            Ok(FidelityMatch {
                gate_param: p,
                resource_fidelity: f,
                local_param: w,
                global_param: pg,
                epp: decode(epp.state.clone())?,
                local_depolarizing: decode(local_state)?,
                global_depolarizing: decode(global_state)?,
            })
        })
        .collect()
}

pub fn by_fidelity_csv(rows: &[FidelityMatch]) -> String {
    let mut s = String::from(BY_FIDELITY_CSV_HEADER);
    s.push('\n');
    for r in rows {
        s.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            r.gate_param, r.resource_fidelity, r.local_param, r.global_param, r.epp, r.local_depolarizing, r.global_depolarizing
        ));
    }
    s
}

/// Channel parameter below which encoding stops paying off: the root of
/// `F_encoded(q) − F_unencoded(q)` on `[lo, hi]` for the channel family `channel`.
pub fn benefit_threshold(
    code: &Code,
    scenario: Scenario,
    method: &Method,
    channel: &str,
    lo: f64,
    hi: f64,
) -> Result<Option<f64>> {
    let table = derive_correction_table(code)?;
    let gap = |q: f64| -> Result<f64> {
        let ch = make_channel(channel, q)?;
        Ok(fidelity_of(code, &table, scenario, method, &ch)? - fidelity_of(code, &table, Scenario::Unencoded, method, &ch)?)
    };
    // surface evaluation errors before bisecting
    gap(lo)?;
    gap(hi)?;
    Ok(bisect_root(|q| gap(q).unwrap_or(f64::NAN), lo, hi, 1e-10))
}

/// Benefit threshold of the cluster-ring code with perfect resources under white noise.
pub fn cluster_ring_white_noise_threshold() -> Result<Option<f64>> {
    let code = Code::cluster_ring();
    let r = build_resource(&code, Role::Decode, &Prep::Perfect)?;
    benefit_threshold(&code, Scenario::ChannelDecode, &Method::Measurement { decoder: &r, encoder: None }, "depolarizing", 0.3, 0.999)
}
