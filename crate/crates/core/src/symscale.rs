//! Permutation-symmetric binary-like GHZ mixtures.
//!
//! A binary-like GHZ state has `µ_A = 0` for the center and coefficients depending only
//! on the Hamming weight `k` of `µ_B`; `c_k` is the weight of one such index, so the
//! state is normalized when `Σ_k binom(N_b, k) c_k = 1`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::diagsim::DiagonalState;
use crate::error::{check_probability, Result, SimError};
use crate::graphstate::Graph;
use crate::optim;
use crate::tol;

/// `binom(n, k)` as a float.
pub fn binom(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Probability mass function of `Binomial(n, p)`.
pub fn binomial_pmf(n: usize, p: f64) -> Vec<f64> {
    (0..=n).map(|k| binom(n, k) * p.powi(k as i32) * (1.0 - p).powi((n - k) as i32)).collect()
}

/// Coefficients `c_0 ..= c_{N_b}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymmetricCoefficients {
    c: Vec<f64>,
}

impl SymmetricCoefficients {
    pub fn new(c: Vec<f64>) -> Result<Self> {
        if c.is_empty() || c.iter().any(|&x| !(x >= 0.0)) {
            return Err(SimError::InvalidChannel("coefficients must be nonnegative".into()));
        }
        let s = Self { c };
        let t = s.total();
        if (t - 1.0).abs() > 1e-10 {
            return Err(SimError::NotNormalized(t));
        }
        Ok(s)
    }

    /// Pure GHZ state on `n` qubits.
    pub fn pure(n: usize) -> Self {
        let mut c = vec![0.0; n];
        c[0] = 1.0;
        Self { c }
    }

    pub fn uniform(n: usize) -> Self {
        Self { c: vec![0.5f64.powi(n as i32 - 1); n] }
    }

    /// Number of set-B qubits.
    pub fn nb(&self) -> usize {
        self.c.len() - 1
    }

    pub fn n_qubits(&self) -> usize {
        self.c.len()
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.c
    }

    pub fn fidelity(&self) -> f64 {
        self.c[0]
    }

    pub fn total(&self) -> f64 {
        let nb = self.nb();
        self.c.iter().enumerate().map(|(k, &x)| binom(nb, k) * x).sum()
    }

    /// Probability that `µ_B` has weight `k`.
    pub fn weight_distribution(&self) -> Vec<f64> {
        let nb = self.nb();
        self.c.iter().enumerate().map(|(k, &x)| binom(nb, k) * x).collect()
    }

    pub fn max_diff(&self, other: &Self) -> f64 {
        self.c.iter().zip(&other.c).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }

    /// Expands to the `2^N` diagonal state of the star graph with center 0.
    pub fn to_diagonal(&self) -> Result<DiagonalState> {
        let n = self.n_qubits();
        if n > 24 {
            return Err(SimError::EnumerationCap(1u128 << n));
        }
        let g = Graph::ghz(n)?;
        let mut coeffs = vec![0.0; 1 << n];
        for kb in 0..1usize << self.nb() {
            coeffs[kb << 1] = self.c[kb.count_ones() as usize];
        }
        DiagonalState::new(g, coeffs)
    }

    /// Averages a GHZ diagonal state over weight classes of `µ_B`; fails if weight with
    /// `µ_A = 1` exceeds the normalization tolerance.
    pub fn from_diagonal(s: &DiagonalState) -> Result<Self> {
        let n = s.n();
        if s.graph() != &Graph::ghz(n)? {
            return Err(SimError::GraphMismatch("symmetric coefficients need the GHZ star".into()));
        }
        let off: f64 = s.coeffs().iter().enumerate().filter(|(mu, _)| mu & 1 == 1).map(|(_, &x)| x).sum();
        if off > 1e-10 {
            return Err(SimError::GraphMismatch(format!("state leaves the binary-like subspace (weight {off})")));
        }
        let nb = n - 1;
        let mut c = vec![0.0; n];
        for (mu, &x) in s.coeffs().iter().enumerate().filter(|(mu, _)| mu & 1 == 0) {
            c[(mu >> 1).count_ones() as usize] += x;
        }
        for (k, x) in c.iter_mut().enumerate() {
            *x /= binom(nb, k);
        }
        Ok(Self { c })
    }

    fn normalized(mut self) -> Self {
        let t = self.total();
        self.c.iter_mut().for_each(|x| *x /= t);
        self
    }
}

/// Transfer matrix of `D_z(p)` on every set-B qubit: `T[l][k]` is the weight moved from
/// one index of weight `k` to one index of weight `l`.
fn sigz_matrix(nb: usize, p: f64) -> Vec<Vec<f64>> {
    (0..=nb)
        .map(|l| {
            (0..=nb)
                .map(|k| {
                    // i = overlap of the two index strings; flips needed = l + k − 2i
                    (k.saturating_sub(nb - l)..=k.min(l))
                        .map(|i| {
                            let flips = (l + k - 2 * i) as i32;
                            binom(l, i) * binom(nb - l, k - i) * p.powi(nb as i32 - flips) * (1.0 - p).powi(flips)
                        })
                        .sum()
                })
                .collect()
        })
        .collect()
}

/// Phase-flip noise `D_z(p)` on every qubit of set B.
pub fn sigz_on_b(c: &SymmetricCoefficients, p: f64) -> Result<SymmetricCoefficients> {
    check_probability(p)?;
    Ok(apply_matrix(c, &sigz_matrix(c.nb(), p)))
}

fn apply_matrix(c: &SymmetricCoefficients, t: &[Vec<f64>]) -> SymmetricCoefficients {
    let out = t.iter().map(|row| row.iter().zip(&c.c).map(|(a, b)| a * b).sum()).collect();
    SymmetricCoefficients { c: out }
}

/// Bit-flip noise `D_x(p)` on the center.
pub fn sigx_on_a(c: &SymmetricCoefficients, p: f64) -> Result<SymmetricCoefficients> {
    check_probability(p)?;
    let nb = c.nb();
    Ok(SymmetricCoefficients { c: (0..=nb).map(|l| p * c.c[l] + (1.0 - p) * c.c[nb - l]).collect() })
}

/// Perfect purification step (squaring and renormalizing); returns the success probability.
pub fn purify_step(c: &SymmetricCoefficients) -> Result<(SymmetricCoefficients, f64)> {
    let sq = SymmetricCoefficients { c: c.c.iter().map(|x| x * x).collect() };
    let s = sq.total();
    if !(s > tol::MIN_SUCCESS) {
        return Err(SimError::ProtocolFailure(s));
    }
    Ok((sq.normalized(), s))
}

/// Gate noise of one purification step followed by the perfect step.
pub struct NoisyStep {
    p: f64,
    t: Vec<Vec<f64>>,
}

impl NoisyStep {
    pub fn new(nb: usize, p: f64) -> Result<Self> {
        check_probability(p)?;
        Ok(NoisyStep { p, t: sigz_matrix(nb, p) })
    }

    pub fn apply(&self, c: &SymmetricCoefficients) -> Result<(SymmetricCoefficients, f64)> {
        let x = sigx_on_a(c, self.p)?;
        purify_step(&apply_matrix(&x, &self.t))
    }
}

/// Fixed point of the noisy binary-like purification.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SymmetricFixedPoint {
    pub state: SymmetricCoefficients,
    pub steps: usize,
    pub converged: bool,
}

impl SymmetricFixedPoint {
    /// Whether the identity coefficient clearly dominates every other one. Below the
    /// purification threshold the iteration collapses onto the uniform state instead.
    pub fn is_purified(&self) -> bool {
        let c = self.state.coeffs();
        self.converged && c[1..].iter().all(|&x| c[0] > x + PURIFIED_MARGIN)
    }
}

const FIXED_POINT_TOL: f64 = 1e-14;
const PURIFIED_MARGIN: f64 = 1e-9;
const FIXED_POINT_MAX_STEPS: usize = 200_000;

/// Iterates noisy steps from the pure `n`-qubit GHZ state.
pub fn noisy_purify_fixed_point(n: usize, p: f64) -> Result<SymmetricFixedPoint> {
    iterate_to_fixed_point(SymmetricCoefficients::pure(n), p)
}

pub fn iterate_to_fixed_point(start: SymmetricCoefficients, p: f64) -> Result<SymmetricFixedPoint> {
    let step = NoisyStep::new(start.nb(), p)?;
    let mut c = start;
    for i in 1..=FIXED_POINT_MAX_STEPS {
        let (next, _) = step.apply(&c)?;
        let d = next.max_diff(&c);
        c = next;
        if d < FIXED_POINT_TOL {
            return Ok(SymmetricFixedPoint { state: c, steps: i, converged: true });
        }
    }
    Ok(SymmetricFixedPoint { state: c, steps: FIXED_POINT_MAX_STEPS, converged: false })
}

/// GHZ state prepared by the noisy CNOT chain `1→2, 2→3, …` from `|+⟩|0…0⟩`, each CNOT
/// preceded by `D_x(p)` on both qubits, then symmetrized over set B.
///
/// An X error on qubit `j` before either CNOT touching it flips all qubits from `j` on,
/// so flips relative to the first qubit are prefix parities of independent "walls".
pub fn prepare_initial_ghz(n: usize, p: f64) -> Result<SymmetricCoefficients> {
    check_probability(p)?;
    if n < 2 {
        return Err(SimError::GraphSize(n));
    }
    let nb = n - 1;
    // dist[parity][weight]
    let mut dist = vec![vec![0.0; nb + 1]; 2];
    dist[0][0] = 1.0;
    for j in 1..n {
        let wall = if j + 1 == n { 1.0 - p } else { 2.0 * p * (1.0 - p) };
        let mut next = vec![vec![0.0; nb + 1]; 2];
        for par in 0..2 {
            for w in 0..nb {
                let x = dist[par][w];
                if x == 0.0 {
                    continue;
                }
                for (flip, pr) in [(0, 1.0 - wall), (1, wall)] {
                    let np = par ^ flip;
                    next[np][w + np] += x * pr;
                }
            }
        }
        dist = next;
    }
    let c = (0..=nb).map(|k| (dist[0][k] + dist[1][k]) / binom(nb, k)).collect();
    Ok(SymmetricCoefficients { c })
}

/// Steps used by the distillability test.
pub const DISTILL_STEPS: usize = 200;
/// Fidelity tolerance of the distillability test.
pub const DISTILL_TOL: f64 = 1e-6;

/// Whether the prepared `n`-qubit state reaches the noisy fixed point within
/// [`DISTILL_STEPS`] steps, and that fixed point is genuinely purified.
pub fn is_distillable(n: usize, p: f64) -> Result<bool> {
    let fp = noisy_purify_fixed_point(n, p)?;
    if !fp.is_purified() {
        return Ok(false);
    }
    let step = NoisyStep::new(n - 1, p)?;
    let mut c = prepare_initial_ghz(n, p)?;
    for _ in 0..DISTILL_STEPS {
        c = match step.apply(&c) {
            Ok((next, _)) => next,
            Err(SimError::ProtocolFailure(_)) => return Ok(false),
            Err(e) => return Err(e),
        };
    }
    Ok((c.fidelity() - fp.state.fidelity()).abs() < DISTILL_TOL)
}

/// Threshold bisection tolerance.
pub const THRESHOLD_TOL: f64 = 1e-4;

/// Smallest gate parameter for which the prepared state is distillable.
pub fn prep_threshold(n: usize) -> Result<f64> {
    if n < 3 {
        return Err(SimError::GraphSize(n));
    }
    let pred = |p: f64| is_distillable(n, p).unwrap_or(false);
    Ok(optim::bisect_threshold(pred, 0.5, 1.0, THRESHOLD_TOL))
}

/// Approximations of the encoded-memory threshold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Scenario {
    /// Closest local model (center `D_x(a)`, leaves `D_z(b)`) of the fixed point.
    A,
    /// Independent leaf errors with a noise-free virtual center.
    B,
    /// Decoding with the fixed point itself.
    C,
}

impl Scenario {
    pub fn label(&self) -> &'static str {
        match self {
            Scenario::A => "A",
            Scenario::B => "B",
            Scenario::C => "C",
        }
    }
}

fn xor_prob(a: f64, b: f64) -> f64 {
    a * (1.0 - b) + b * (1.0 - a)
}

/// Probability that majority decoding of `n` qubits with independent flip probability
/// `e` succeeds.
fn majority_success(n: usize, e: f64) -> f64 {
    binomial_pmf(n, e).iter().take(n.div_ceil(2)).sum()
}

/// Fidelity of a logical qubit decoded by an `(n+1)`-qubit binary-like resource `c`
/// after every code qubit went through `D_z(q)`.
pub fn decode_fidelity(c: &SymmetricCoefficients, q: f64) -> f64 {
    let n = c.nb();
    let s = 1.0 - q;
    let resource = c.weight_distribution();
    let mut ok = 0.0;
    for (k, &pk) in resource.iter().enumerate() {
        if pk == 0.0 {
            continue;
        }
        let cancel = binomial_pmf(k, s);
        let add = binomial_pmf(n - k, s);
        for (a, &pa) in cancel.iter().enumerate() {
            for (b, &pb) in add.iter().enumerate() {
                if 2 * (k - a + b) < n {
                    ok += pk * pa * pb;
                }
            }
        }
    }
    ok
}

/// Local model of a symmetric state: center `D_x(a)`, set B `D_z(b)`.
pub fn local_model_coefficients(nb: usize, a: f64, b: f64) -> SymmetricCoefficients {
    let c = (0..=nb)
        .map(|k| {
            let (kk, rest) = (k as i32, (nb - k) as i32);
            a * b.powi(rest) * (1.0 - b).powi(kk) + (1.0 - a) * b.powi(kk) * (1.0 - b).powi(rest)
        })
        .collect();
    SymmetricCoefficients { c }
}

/// Fidelity between two symmetric states.
pub fn symmetric_fidelity(x: &SymmetricCoefficients, y: &SymmetricCoefficients) -> f64 {
    let nb = x.nb();
    x.c.iter().zip(&y.c).enumerate().map(|(k, (a, b))| binom(nb, k) * (a * b).max(0.0).sqrt()).sum()
}

/// Closest local model `(a, b, F)` of a symmetric state.
pub fn fit_local_symmetric(c: &SymmetricCoefficients) -> (f64, f64, f64) {
    let nb = c.nb();
    let f = |x: &[f64]| -> f64 {
        let a = x[0].sin().powi(2);
        let b = x[1].sin().powi(2);
        -symmetric_fidelity(c, &local_model_coefficients(nb, a, b))
    };
    let mut best: Option<optim::Minimum> = None;
    for &(a0, b0) in &[(0.95, 0.95), (0.8, 0.9), (0.99, 0.7), (0.6, 0.99)] {
        let x0 = [f64::asin(f64::sqrt(a0)), f64::asin(f64::sqrt(b0))];
        let m = optim::nelder_mead(f, &x0, 0.05, 1e-15, 5000);
        if best.as_ref().is_none_or(|b| m.value < b.value) {
            best = Some(m);
        }
    }
    let m = best.unwrap();
    (m.x[0].sin().powi(2), m.x[1].sin().powi(2), -m.value)
}

/// Logical-fidelity model of one scenario for `n` code qubits at a fixed gate parameter.
/// Unusable when the purification has no purified fixed point.
pub struct ScenarioModel {
    scenario: Scenario,
    n: usize,
    fixed: Option<SymmetricCoefficients>,
    local: Option<(f64, f64)>,
    leaf_error: Option<f64>,
}

impl ScenarioModel {
    pub fn new(scenario: Scenario, n: usize, p: f64) -> Result<Self> {
        check_probability(p)?;
        let mut m = ScenarioModel { scenario, n, fixed: None, local: None, leaf_error: None };
        match scenario {
            Scenario::A | Scenario::C => {
                let fp = noisy_purify_fixed_point(n + 1, p)?;
                if fp.is_purified() {
                    if scenario == Scenario::A {
                        let (a, b, _) = fit_local_symmetric(&fp.state);
                        m.local = Some((a, b));
                    }
                    m.fixed = Some(fp.state);
                }
            }
            Scenario::B => m.leaf_error = product_fixed_point(p),
        }
        Ok(m)
    }

    pub fn usable(&self) -> bool {
        self.fixed.is_some() || self.leaf_error.is_some()
    }

    pub fn fidelity(&self, q: f64) -> Option<f64> {
        let n = self.n;
        match self.scenario {
            Scenario::C => self.fixed.as_ref().map(|c| decode_fidelity(c, q)),
            Scenario::A => self.local.map(|(a, b)| {
                let pc = majority_success(n, xor_prob(1.0 - b, 1.0 - q));
                a * pc + (1.0 - a) * (1.0 - pc)
            }),
            Scenario::B => self.leaf_error.map(|e| {
                let pc = majority_success(n, xor_prob(e, 1.0 - q));
                (1.0 - e) * pc + e * (1.0 - pc)
            }),
        }
    }

    /// Largest advantage `F(q) − q` over channel parameters `q ∈ [1/2, 1]`.
    pub fn best_advantage(&self) -> Option<(f64, f64)> {
        if !self.usable() {
            return None;
        }
        let f = |q: f64| self.fidelity(q).unwrap() - q;
        Some(optim::grid_golden_max(f, 0.5, 1.0, 401, 1e-10))
    }
}

/// Per-qubit error of the purified leaves when errors stay independent:
/// `e = g(e ⊕ (1 − p))` with `g(x) = x² / (x² + (1 − x)²)`.
pub fn product_fixed_point(p: f64) -> Option<f64> {
    let s = 1.0 - p;
    let g = |x: f64| x * x / (x * x + (1.0 - x) * (1.0 - x));
    let mut e = 0.0;
    for _ in 0..FIXED_POINT_MAX_STEPS {
        let next = g(xor_prob(e, s));
        if (next - e).abs() < FIXED_POINT_TOL {
            e = next;
            return (e < 0.5 - 1e-9).then_some(e);
        }
        e = next;
    }
    None
}

/// Smallest gate parameter for which scenario `s` with `n` code qubits still has a
/// channel interval where encoding beats sending the qubit unencoded.
pub fn scaling_threshold(scenario: Scenario, n: usize) -> Result<f64> {
    if n < 3 || n % 2 == 0 {
        return Err(SimError::Config(format!("repetition size {n} must be odd and at least 3")));
    }
    let pred = |p: f64| {
        ScenarioModel::new(scenario, n, p)
            .ok()
            .and_then(|m| m.best_advantage())
            .is_some_and(|(_, adv)| adv > 1e-12)
    };
    Ok(optim::bisect_threshold(pred, 0.5, 1.0, THRESHOLD_TOL))
}

/// Thresholds for a list of sizes, computed in parallel.
pub fn scaling_table(scenario: Scenario, sizes: &[usize]) -> Result<Vec<(usize, f64)>> {
    sizes.par_iter().map(|&n| scaling_threshold(scenario, n).map(|t| (n, t))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn random_coeffs(n: usize, seed: u64) -> SymmetricCoefficients {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let c: Vec<f64> = (0..n).map(|_| rng.gen::<f64>()).collect();
        SymmetricCoefficients { c }.normalized()
    }

    #[test]
    fn binomials() {
        assert_eq!(binom(5, 2), 10.0);
        assert_eq!(binom(3, 4), 0.0);
        assert!((binomial_pmf(7, 0.3).iter().sum::<f64>() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn trivial_parameters() {
        let c = random_coeffs(6, 1);
        assert!(sigz_on_b(&c, 1.0).unwrap().max_diff(&c) < 1e-15);
        assert!(sigx_on_a(&c, 1.0).unwrap().max_diff(&c) < 1e-15);
        let u = sigz_on_b(&c, 0.5).unwrap();
        assert!(u.coeffs().iter().all(|&x| (x - 0.5f64.powi(5)).abs() < 1e-15));
        let sym = SymmetricCoefficients { c: vec![0.3, 0.1, 0.1, 0.3] }.normalized();
        assert!(sigx_on_a(&sym, 0.7).unwrap().max_diff(&sym) < 1e-15);
    }

    #[test]
    fn purify_pure_and_uniform() {
        let (p, s) = purify_step(&SymmetricCoefficients::pure(5)).unwrap();
        assert_eq!(s, 1.0);
        assert_eq!(p, SymmetricCoefficients::pure(5));
        let u = SymmetricCoefficients::uniform(5);
        let (q, s) = purify_step(&u).unwrap();
        assert!(q.max_diff(&u) < 1e-15);
        assert!((s - 0.5f64.powi(4)).abs() < 1e-15);
    }

    #[test]
    fn normalization_survives_many_updates() {
        let mut c = random_coeffs(9, 2);
        for i in 0..10_000 {
            let p = 0.6 + 0.4 * ((i * 37 % 101) as f64 / 101.0);
            c = match i % 3 {
                0 => sigz_on_b(&c, p).unwrap(),
                1 => sigx_on_a(&c, p).unwrap(),
                _ => purify_step(&c).unwrap().0,
            };
        }
        assert!((c.total() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn purification_increases_fidelity() {
        for seed in 0..20 {
            let c = random_coeffs(5, seed);
            let before = c.fidelity() / c.coeffs().iter().copied().fold(0.0, f64::max);
            let (d, _) = purify_step(&c).unwrap();
            if before >= 1.0 - 1e-12 {
                assert!(d.fidelity() >= c.fidelity());
            }
        }
    }

    #[test]
    fn fixed_point_and_preparation_edges() {
        let fp = noisy_purify_fixed_point(6, 1.0).unwrap();
        assert!(fp.converged && (fp.state.fidelity() - 1.0).abs() < 1e-12);
        assert_eq!(prepare_initial_ghz(5, 1.0).unwrap(), SymmetricCoefficients::pure(5));
        let c = prepare_initial_ghz(7, 0.97).unwrap();
        assert!((c.total() - 1.0).abs() < 1e-12);
        let fp = noisy_purify_fixed_point(5, 0.92).unwrap();
        let (again, _) = NoisyStep::new(4, 0.92).unwrap().apply(&fp.state).unwrap();
        assert!(again.max_diff(&fp.state) < 1e-10);
    }

    #[test]
    fn local_fit_is_exact_for_local_states() {
        let c = local_model_coefficients(4, 0.93, 0.88);
        let (a, b, f) = fit_local_symmetric(&c);
        assert!(1.0 - f < 1e-9, "{a} {b} {f}");
    }

    #[test]
    fn scenario_c_with_perfect_gates() {
        let m = ScenarioModel::new(Scenario::C, 3, 1.0).unwrap();
        // perfect resources: repetition-code fidelity beats q exactly on (1/2, 1)
        for q in [0.55, 0.7, 0.9, 0.99] {
            assert!(m.fidelity(q).unwrap() > q);
        }
        assert!((m.fidelity(0.5).unwrap() - 0.5).abs() < 1e-12);
        assert!((m.fidelity(1.0).unwrap() - 1.0).abs() < 1e-12);
    }
}
