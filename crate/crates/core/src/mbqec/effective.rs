//! Effective logical channels of the encode / transmit / decode scenarios.
//!
//! All noise is Pauli and all operations are Clifford, so the logical map is a Pauli
//! channel. For measurement-based read-in an error `F` on the code legs of a resource acts
//! like `F` on the data, and the decoded output carries the table correction of the total
//! data error composed with the error on the logical leg.

use nalgebra::Matrix4;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::noise::{GateNoiseModel, PauliChannel};
use crate::pauli::Pauli;
use crate::{Result, SimError};

use super::circuits::{circuit_gate_noise, FrameDist, GateCircuits};
use super::code::{pauli_index, Code, CorrectionTable};
use super::resource::{ResourceState, Role};

/// Largest number of summed terms in one effective-map evaluation.
pub const ENUMERATION_CAP: u128 = 10_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    /// Perfectly encoded input, decoding only.
    DecodeOnly,
    /// Perfect encoding, noisy channel, decoding.
    ChannelDecode,
    /// Encoding, channel and decoding with the same method.
    EncodeChannelDecode,
    /// The channel on a bare qubit.
    Unencoded,
}

/// How encoding and decoding are carried out.
#[derive(Debug, Clone)]
pub enum Method<'a> {
    /// Bell-measurement read-in into resource states; the encoder uses `encoder` or, when
    /// absent, the decoding resource read as an encoding resource.
    Measurement { decoder: &'a ResourceState, encoder: Option<&'a ResourceState> },
    Gates { model: GateNoiseModel },
}

/// Logical Pauli channel, `[I, X, Y, Z]` weights.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EffectiveMap {
    pub probs: [f64; 4],
}

impl EffectiveMap {
    /// `(1 ⊗ E)(|Φ⁺⟩⟨Φ⁺|)` with the reference as the first qubit (basis index `2 r + o`).
    pub fn choi(&self) -> Matrix4<C64> {
        let phi = [C64::new(1.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(1.0, 0.0)];
        let mut rho = Matrix4::<C64>::zeros();
        for (k, &w) in self.probs.iter().enumerate() {
            let s = pauli_matrix(Pauli::from_index(k));
            // (1 ⊗ σ) |Φ⁺⟩, with |Φ⁺⟩ = (|00⟩ + |11⟩)/√2
            let mut v = [C64::new(0.0, 0.0); 4];
            for r in 0..2 {
                for o in 0..2 {
                    for i in 0..2 {
                        v[2 * r + o] += s[o][i] * phi[2 * r + i];
                    }
                }
            }
            for a in 0..4 {
                for b in 0..4 {
                    rho[(a, b)] += v[a] * v[b].conj() * (0.5 * w);
                }
            }
        }
        rho
    }

    pub fn jamiolkowski_fidelity(&self) -> f64 {
        jamiolkowski_fidelity(&self.choi())
    }
}

fn pauli_matrix(l: Pauli) -> [[C64; 2]; 2] {
    let (z, o, i) = (C64::new(0.0, 0.0), C64::new(1.0, 0.0), C64::new(0.0, 1.0));
    match l {
        Pauli::I => [[o, z], [z, o]],
        Pauli::X => [[z, o], [o, z]],
        Pauli::Y => [[z, -i], [i, z]],
        Pauli::Z => [[o, z], [z, -o]],
    }
}

/// `⟨Φ⁺| ρ |Φ⁺⟩` of a two-qubit Choi state.
pub fn jamiolkowski_fidelity(choi: &Matrix4<C64>) -> f64 {
    0.5 * (choi[(0, 0)] + choi[(0, 3)] + choi[(3, 0)] + choi[(3, 3)]).re
}

/// Pauli on (code legs, logical leg) of a resource for graph index `µ`.
fn resource_error(code: &Code, mu: usize) -> (usize, Pauli) {
    let n = code.n();
    let mut legs = 0usize;
    for q in 0..n {
        if mu >> q & 1 == 1 {
            legs |= match code.leg_gate(q) {
                Some(_) => 1 << q,
                None => 1 << (q + n),
            };
        }
    }
    let out = if mu >> n & 1 == 1 { Pauli::Z } else { Pauli::I };
    (legs, out)
}

fn check_resource(code: &Code, r: &ResourceState) -> Result<()> {
    if r.state.graph() != &code.resource_graph() {
        return Err(SimError::GraphMismatch(format!("resource does not match {}", code.name())));
    }
    if r.role == Role::EncodeDecode {
        return Err(SimError::Config("joint encode-decode resources are not evaluated here".into()));
    }
    Ok(())
}

fn check_cap(terms: u128) -> Result<()> {
    if terms > ENUMERATION_CAP {
        Err(SimError::EnumerationCap(terms))
    } else {
        Ok(())
    }
}

fn apply_channels(d: &mut FrameDist, chs: &[PauliChannel]) {
    for (q, ch) in chs.iter().enumerate() {
        d.apply_channel(q, ch);
    }
}

fn measurement_encode(code: &Code, table: &CorrectionTable, r: &ResourceState) -> Result<FrameDist> {
    let n = code.n();
    let reps = table.logical_representatives();
    let coeffs = r.state.coeffs();
    check_cap(coeffs.len() as u128)?;
    let mut p = vec![0.0; 1 << (2 * n)];
    for (mu, &w) in coeffs.iter().enumerate() {
        if w == 0.0 {
            continue;
        }
        let (legs, input) = resource_error(code, mu);
        p[legs ^ pauli_index(&reps[input.index()])] += w;
    }
    Ok(FrameDist::from_probs(n, p))
}

fn measurement_decode(code: &Code, table: &CorrectionTable, r: &ResourceState, data: &FrameDist) -> Result<[f64; 4]> {
    let coeffs = r.state.coeffs();
    let frames: Vec<(usize, f64)> = data.probs().iter().copied().enumerate().filter(|(_, v)| *v != 0.0).collect();
    let errs: Vec<(usize, Pauli, f64)> = coeffs
        .iter()
        .enumerate()
        .filter(|(_, w)| **w != 0.0)
        .map(|(mu, &w)| {
            let (legs, out) = resource_error(code, mu);
            (legs, out, w)
        })
        .collect();
    check_cap(frames.len() as u128 * errs.len() as u128)?;
    let mut out = [0.0; 4];
    for &(e, pe) in &frames {
        for &(legs, o, w) in &errs {
            let c = table.lookup_index(e ^ legs).ok_or_else(|| SimError::AmbiguousPattern("pattern outside the table".into()))?;
            out[c.mul_unsigned(o).index()] += pe * w;
        }
    }
    Ok(out)
}

/// Logical channel of a scenario. `channel` acts on every code qubit (or on the bare
/// qubit for [`Scenario::Unencoded`]).
pub fn effective_map(
    code: &Code,
    table: &CorrectionTable,
    scenario: Scenario,
    method: &Method,
    channel: &PauliChannel,
) -> Result<EffectiveMap> {
    if scenario == Scenario::Unencoded {
        return Ok(EffectiveMap { probs: *channel.probs() });
    }
    effective_map_per_qubit(code, table, scenario, method, &vec![*channel; code.n()])
}

/// [`effective_map`] with a separate channel on each code qubit.
pub fn effective_map_per_qubit(
    code: &Code,
    table: &CorrectionTable,
    scenario: Scenario,
    method: &Method,
    channels: &[PauliChannel],
) -> Result<EffectiveMap> {
    let n = code.n();
    if channels.len() != n {
        return Err(SimError::Config(format!("{} channels for {n} code qubits", channels.len())));
    }
    if scenario == Scenario::Unencoded {
        return Err(SimError::Config("the unencoded scenario has a single channel".into()));
    }
    check_cap(1u128 << (2 * n))?;
    let probs = match method {
        Method::Measurement { decoder, encoder } => {
            check_resource(code, decoder)?;
            let mut data = match scenario {
                Scenario::EncodeChannelDecode => {
                    let enc = encoder.unwrap_or(decoder);
                    check_resource(code, enc)?;
                    measurement_encode(code, table, enc)?
                }
                _ => FrameDist::identity(n),
            };
            if scenario != Scenario::DecodeOnly {
                apply_channels(&mut data, channels);
            }
            measurement_decode(code, table, decoder, &data)?
        }
        Method::Gates { model } => {
            let circuits = GateCircuits::for_code(code)?;
            let noise = circuit_gate_noise(code, model)?;
            let mut data = match scenario {
                Scenario::EncodeChannelDecode => circuits.encode_frames(&noise)?,
                _ => FrameDist::identity(n),
            };
            if scenario != Scenario::DecodeOnly {
                apply_channels(&mut data, channels);
            }
            circuits.decode_frames(data, &noise)?
        }
    };
    let total: f64 = probs.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(SimError::NotNormalized(total));
    }
    Ok(EffectiveMap { probs: probs.map(|x| x / total) })
}
