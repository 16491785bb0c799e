//! Closest local Pauli-noise description of a diagonal graph state.

use crate::diagsim::{fidelity_coeffs, DiagonalState};
use crate::graphstate::Graph;
use crate::noise::PauliChannel;
use crate::optim::nelder_mead;
use crate::{Result, SimError};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::FRAC_PI_2;

/// One Pauli channel per qubit, optionally tied into symmetry classes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalNoiseModel {
    channels: Vec<PauliChannel>,
    classes: Option<Vec<usize>>,
}

impl LocalNoiseModel {
    pub fn new(channels: Vec<PauliChannel>, classes: Option<Vec<usize>>) -> Result<Self> {
        if let Some(cl) = &classes {
            if cl.len() != channels.len() {
                return Err(SimError::Config("one class label per qubit required".into()));
            }
            for i in 0..cl.len() {
                for j in 0..i {
                    let differ = channels[i].probs().iter().zip(channels[j].probs()).any(|(a, b)| (a - b).abs() > 1e-12);
                    if cl[i] == cl[j] && differ {
                        return Err(SimError::InvalidChannel(format!("qubits {j} and {i} are tied but differ")));
                    }
                }
            }
        }
        Ok(LocalNoiseModel { channels, classes })
    }

    /// Channel `per_class[classes[q]]` on qubit `q`.
    pub fn from_classes(classes: &[usize], per_class: &[PauliChannel]) -> Result<Self> {
        let channels = classes
            .iter()
            .map(|&c| per_class.get(c).copied().ok_or_else(|| SimError::Config(format!("no channel for class {c}"))))
            .collect::<Result<Vec<_>>>()?;
        Ok(LocalNoiseModel { channels, classes: Some(classes.to_vec()) })
    }

    pub fn uniform(n: usize, c: PauliChannel) -> Self {
        LocalNoiseModel { channels: vec![c; n], classes: Some(vec![0; n]) }
    }

    pub fn n(&self) -> usize {
        self.channels.len()
    }

    pub fn channels(&self) -> &[PauliChannel] {
        &self.channels
    }

    pub fn classes(&self) -> Option<&[usize]> {
        self.classes.as_deref()
    }
}

/// `E^1(p_1) … E^N(p_N) |G⟩⟨G|` in the graph basis.
pub fn local_model_state(m: &LocalNoiseModel, g: &Graph) -> Result<DiagonalState> {
    if m.n() != g.n() {
        return Err(SimError::GraphMismatch(format!("model has {} qubits, graph {}", m.n(), g.n())));
    }
    m.channels.iter().enumerate().try_fold(DiagonalState::pure(g), |s, (q, c)| s.apply_local_channel(q, c))
}

/// Orbits of the automorphisms of `g` that keep every color class of `g.color()` fixed.
/// Labels are numbered by first appearance.
pub fn symmetry_classes(g: &Graph) -> Vec<usize> {
    let n = g.n();
    let colors = g.color().colors().to_vec();
    let mut label: Vec<Option<usize>> = vec![None; n];
    let mut reps: Vec<usize> = Vec::new();
    for v in 0..n {
        let found = reps.iter().position(|&r| {
            colors[r] == colors[v] && g.neighbor_mask(r).count_ones() == g.neighbor_mask(v).count_ones() && maps_to(g, &colors, r, v)
        });
        label[v] = Some(match found {
            Some(i) => i,
            None => {
                reps.push(v);
                reps.len() - 1
            }
        });
    }
    label.into_iter().map(|l| l.unwrap()).collect()
}

/// Whether some color-preserving automorphism sends `from` to `to`.
fn maps_to(g: &Graph, colors: &[usize], from: usize, to: usize) -> bool {
    let n = g.n();
    let mut perm = vec![usize::MAX; n];
    let mut used = 0u64;
    perm[from] = to;
    used |= 1 << to;
    let order: Vec<usize> = std::iter::once(from).chain((0..n).filter(|&v| v != from)).collect();
    extend(g, colors, &order, 1, &mut perm, &mut used)
}

fn extend(g: &Graph, colors: &[usize], order: &[usize], depth: usize, perm: &mut [usize], used: &mut u64) -> bool {
    if depth == order.len() {
        return true;
    }
    let v = order[depth];
    for w in 0..g.n() {
        if *used >> w & 1 == 1 || colors[w] != colors[v] {
            continue;
        }
        let consistent = order[..depth].iter().all(|&u| {
            let e1 = g.neighbor_mask(u) >> v & 1;
            let e2 = g.neighbor_mask(perm[u]) >> w & 1;
            e1 == e2
        });
        if !consistent {
            continue;
        }
        perm[v] = w;
        *used |= 1 << w;
        if extend(g, colors, order, depth + 1, perm, used) {
            return true;
        }
        *used &= !(1 << w);
        perm[v] = usize::MAX;
    }
    false
}

/// Optimizer settings for [`fit_closest_local`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FitOptions {
    pub restarts: usize,
    pub seed: u64,
    /// Stop the outer loop once a full cycle improves `F` by less than this.
    pub tolerance: f64,
    pub max_outer: usize,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions { restarts: 16, seed: 0, tolerance: 1e-11, max_outer: 200 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitDiagnostics {
    pub restarts: usize,
    pub restarts_converged: usize,
    pub iterations: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FitReport {
    pub model: LocalNoiseModel,
    /// Fidelity between target and best local model.
    pub fidelity: f64,
    /// Fidelity of the target with the pure graph state.
    pub fixed_point_fidelity: f64,
    pub one_minus_f: f64,
    /// `(1 − F)/(1 − f)`; absent when the target is pure.
    pub relative_deviation: Option<f64>,
    pub diagnostics: FitDiagnostics,
}

/// Channel from three angles: `p_0 = cos²θ_1`, `p_1 = sin²θ_1 cos²θ_2`, … (squares of a
/// point on the unit 3-sphere, so boundary values are reachable).
fn channel_from_angles(t: &[f64]) -> PauliChannel {
    let (s1, c1) = t[0].sin_cos();
    let (s2, c2) = t[1].sin_cos();
    let (s3, c3) = t[2].sin_cos();
    let p = [c1 * c1, s1 * s1 * c2 * c2, s1 * s1 * s2 * s2 * c3 * c3, s1 * s1 * s2 * s2 * s3 * s3];
    let sum: f64 = p.iter().sum();
    PauliChannel::new(p.map(|x| x / sum)).expect("squares of a unit vector")
}

fn angles_from_channel(c: &PauliChannel) -> [f64; 3] {
    let p = c.probs();
    let t1 = p[0].clamp(0.0, 1.0).sqrt().acos();
    let rest = 1.0 - p[0];
    let t2 = if rest > 0.0 { (p[1] / rest).clamp(0.0, 1.0).sqrt().acos() } else { 0.0 };
    let rest2 = rest - p[1];
    let t3 = if rest2 > 0.0 { (p[2] / rest2).clamp(0.0, 1.0).sqrt().acos() } else { 0.0 };
    [t1, t2, t3]
}

struct Objective<'a> {
    target: &'a DiagonalState,
    classes: &'a [usize],
    k: usize,
}

impl Objective<'_> {
    fn model(&self, theta: &[f64]) -> LocalNoiseModel {
        let per: Vec<PauliChannel> = (0..self.k).map(|c| channel_from_angles(&theta[3 * c..3 * c + 3])).collect();
        LocalNoiseModel::from_classes(self.classes, &per).expect("class labels in range")
    }

    fn infidelity(&self, theta: &[f64]) -> f64 {
        let s = local_model_state(&self.model(theta), self.target.graph()).expect("sizes match");
        1.0 - fidelity_coeffs(s.coeffs(), self.target.coeffs())
    }
}

struct RestartOutcome {
    theta: Vec<f64>,
    value: f64,
    iterations: usize,
    converged: bool,
}

fn run_restart(obj: &Objective, theta0: Vec<f64>, opts: &FitOptions) -> RestartOutcome {
    let mut theta = theta0;
    let mut value = obj.infidelity(&theta);
    let mut iterations = 0;
    let mut converged = false;
    for _ in 0..opts.max_outer {
        let before = value;
        for c in 0..obj.k {
            let f = |x: &[f64]| {
                let mut t = theta.clone();
                t[3 * c..3 * c + 3].copy_from_slice(x);
                obj.infidelity(&t)
            };
            let m = nelder_mead(f, &theta[3 * c..3 * c + 3], 0.2, 1e-16, 3000);
            iterations += m.iterations;
            if m.value < value {
                theta[3 * c..3 * c + 3].copy_from_slice(&m.x);
                value = m.value;
            }
        }
        if before - value < opts.tolerance {
            converged = true;
            break;
        }
    }
    // joint polish catches coupling between classes that block steps miss
    if obj.k > 1 {
        let m = nelder_mead(|x| obj.infidelity(x), &theta, 0.02, 1e-17, 20000);
        iterations += m.iterations;
        if m.value < value {
            theta = m.x;
            value = m.value;
        }
    }
    RestartOutcome { theta, value, iterations, converged }
}

/// Maximizes the fidelity between `target` and local Pauli noise on its graph, tying the
/// qubits of each class (`None` uses [`symmetry_classes`]).
pub fn fit_closest_local(target: &DiagonalState, classes: Option<&[usize]>, opts: &FitOptions) -> Result<FitReport> {
    let total = target.total();
    if (total - 1.0).abs() > crate::tol::NORM {
        return Err(SimError::NotNormalized(total));
    }
    if opts.restarts == 0 {
        return Err(SimError::Config("at least one restart required".into()));
    }
    let owned;
    let classes = match classes {
        Some(c) => c,
        None => {
            owned = symmetry_classes(target.graph());
            &owned
        }
    };
    if classes.len() != target.n() {
        return Err(SimError::Config("one class label per qubit required".into()));
    }
    let k = classes.iter().max().map_or(0, |m| m + 1);
    if (0..k).any(|c| !classes.contains(&c)) {
        return Err(SimError::Config("class labels must be 0..k without gaps".into()));
    }
    let obj = Objective { target, classes, k };

    let outcomes: Vec<RestartOutcome> = (0..opts.restarts)
        .into_par_iter()
        .map(|r| {
            let theta0: Vec<f64> = if r == 0 {
                // mild noise of every kind
                let start = angles_from_channel(&PauliChannel::new([0.94, 0.02, 0.02, 0.02]).unwrap());
                (0..k).flat_map(|_| start).collect()
            } else {
                let mut rng = ChaCha8Rng::seed_from_u64(opts.seed.wrapping_mul(0x9e37_79b9).wrapping_add(r as u64));
                (0..3 * k).map(|_| rng.gen_range(0.0..FRAC_PI_2)).collect()
            };
            run_restart(&obj, theta0, opts)
        })
        .collect();

    let best = outcomes.iter().enumerate().min_by(|a, b| a.1.value.total_cmp(&b.1.value).then(a.0.cmp(&b.0))).unwrap().1;
    let fidelity = (1.0 - best.value).clamp(0.0, 1.0);
    let f = target.fidelity();
    let one_minus_f = 1.0 - fidelity;
    Ok(FitReport {
        model: obj.model(&best.theta),
        fidelity,
        fixed_point_fidelity: f,
        one_minus_f,
        relative_deviation: (f < 1.0 - 1e-15).then(|| one_minus_f / (1.0 - f)),
        diagnostics: FitDiagnostics {
            restarts: opts.restarts,
            restarts_converged: outcomes.iter().filter(|o| o.converged).count(),
            iterations: outcomes.iter().map(|o| o.iterations).sum(),
            converged: best.converged,
        },
    })
}

/// Best fidelity over a simplex grid of the given step for every class (exhaustive).
/// Used as an upper-bound check on small instances.
pub fn grid_best_fidelity(target: &DiagonalState, classes: &[usize], step: f64) -> Result<f64> {
    let k = classes.iter().max().map_or(0, |m| m + 1);
    let m = (1.0 / step).round() as usize;
    let mut simplex = Vec::new();
    for a in 0..=m {
        for b in 0..=m - a {
            for c in 0..=m - a - b {
                let d = m - a - b - c;
                let p = [a, b, c, d].map(|x| x as f64 / m as f64);
                simplex.push(PauliChannel::new(p)?);
            }
        }
    }
    let points = (simplex.len() as u128).pow(k as u32);
    if points > 5_000_000 {
        return Err(SimError::EnumerationCap(points));
    }
    let best = (0..points as usize)
        .into_par_iter()
        .map(|mut idx| {
            let per: Vec<PauliChannel> = (0..k)
                .map(|_| {
                    let c = simplex[idx % simplex.len()];
                    idx /= simplex.len();
                    c
                })
                .collect();
            let s = local_model_state(&LocalNoiseModel::from_classes(classes, &per).unwrap(), target.graph()).unwrap();
            fidelity_coeffs(s.coeffs(), target.coeffs())
        })
        .reduce(|| 0.0, f64::max);
    Ok(best)
}

/// One row of a deviation sweep.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DeviationPoint {
    pub gate_param: f64,
    pub one_minus_f: Option<f64>,
    pub rel_dev: Option<f64>,
    pub f: Option<f64>,
    pub restarts_converged: usize,
    pub error: Option<String>,
}

/// Fits every fixed point `fixed_point(p)` for `p` in `grid`. Failures are recorded per
/// point and the sweep continues.
pub fn deviation_curve<F>(grid: &[f64], fixed_point: F, classes: Option<&[usize]>, opts: &FitOptions) -> Vec<DeviationPoint>
where
    F: Fn(f64) -> Result<DiagonalState> + Sync,
{
    grid.par_iter()
        .map(|&p| match fixed_point(p).and_then(|s| fit_closest_local(&s, classes, opts)) {
            Ok(r) => DeviationPoint {
                gate_param: p,
                one_minus_f: Some(r.one_minus_f),
                rel_dev: r.relative_deviation,
                f: Some(r.fixed_point_fidelity),
                restarts_converged: r.diagnostics.restarts_converged,
                error: None,
            },
            Err(e) => DeviationPoint {
                gate_param: p,
                one_minus_f: None,
                rel_dev: None,
                f: None,
                restarts_converged: 0,
                error: Some(e.to_string()),
            },
        })
        .collect()
}

pub const DEVIATION_CSV_HEADER: &str = "gate_param,one_minus_F,rel_dev,f,restarts_converged,error";

/// CSV rows for a sweep; missing values are written as `nan`.
pub fn deviation_csv(points: &[DeviationPoint]) -> String {
    let cell = |x: Option<f64>| x.map_or("nan".to_string(), |v| format!("{v:.12e}"));
    let mut out = String::from(DEVIATION_CSV_HEADER);
    out.push('\n');
    for p in points {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            p.gate_param,
            cell(p.one_minus_f),
            cell(p.rel_dev),
            cell(p.f),
            p.restarts_converged,
            p.error.as_deref().unwrap_or("").replace(',', ";")
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn angles_round_trip() {
        for p in [[1.0, 0.0, 0.0, 0.0], [0.7, 0.1, 0.15, 0.05], [0.0, 0.0, 0.0, 1.0], [0.25; 4]] {
            let c = PauliChannel::new(p).unwrap();
            let back = channel_from_angles(&angles_from_channel(&c));
            for i in 0..4 {
                assert!((back.probs()[i] - p[i]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn trivial_models() {
        let g = Graph::ghz(3).unwrap();
        let id = LocalNoiseModel::uniform(3, PauliChannel::identity());
        assert_eq!(local_model_state(&id, &g).unwrap(), DiagonalState::pure(&g));
        let mut ch = vec![PauliChannel::identity(); 3];
        ch[1] = PauliChannel::phaseflip(0.8).unwrap();
        let s = local_model_state(&LocalNoiseModel::new(ch, None).unwrap(), &g).unwrap();
        let nz: Vec<f64> = s.coeffs().iter().copied().filter(|&x| x > 0.0).collect();
        assert_eq!(nz.len(), 2);
        assert!((s.coeff(0) - 0.8).abs() < 1e-15 && (s.coeff(0b010) - 0.2).abs() < 1e-15);
    }

    #[test]
    fn classes_of_standard_graphs() {
        assert_eq!(symmetry_classes(&Graph::ghz(5).unwrap()), vec![0, 1, 1, 1, 1]);
        assert_eq!(symmetry_classes(&Graph::line(5).unwrap()), vec![0, 1, 2, 1, 0]);
        // colors are kept apart, so the even and odd vertices of a ring form two orbits
        assert_eq!(symmetry_classes(&Graph::ring(6).unwrap()), vec![0, 1, 0, 1, 0, 1]);
    }

    #[test]
    fn tied_classes_must_agree() {
        let ch = vec![PauliChannel::identity(), PauliChannel::bitflip(0.9).unwrap()];
        assert!(LocalNoiseModel::new(ch, Some(vec![0, 0])).is_err());
    }
}
