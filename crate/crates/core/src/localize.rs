//! Making GHZ noise exactly local: twirl to standard form, then mix in separable states.
//!
//! Indices follow the star graph with center 0: `µ = µ_0 | k << 1`, so `|Ψ_k^+⟩` has
//! `µ_0 = 0` and `|Ψ_k^-⟩` has `µ_0 = 1`.

use crate::diagsim::DiagonalState;
use crate::graphstate::Graph;
use crate::localfit::LocalNoiseModel;
use crate::noise::PauliChannel;
use crate::optim::grid_golden_max;
use crate::{Result, SimError};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GhzStandardForm {
    n: usize,
    lambda0_plus: f64,
    lambda0_minus: f64,
    /// `λ_k` indexed by `k`; entry 0 is unused and zero.
    lambda: Vec<f64>,
}

impl GhzStandardForm {
    pub fn new(n: usize, lambda0_plus: f64, lambda0_minus: f64, lambda: Vec<f64>) -> Result<Self> {
        if n < 2 || n > 24 {
            return Err(SimError::GraphSize(n));
        }
        if lambda.len() != 1 << (n - 1) {
            return Err(SimError::Config(format!("expected {} entries for λ_k", 1usize << (n - 1))));
        }
        let all = [lambda0_plus, lambda0_minus].into_iter().chain(lambda[1..].iter().copied());
        if let Some(x) = all.clone().find(|x| !(*x >= -crate::tol::NORM)) {
            return Err(SimError::InvalidProbability(x));
        }
        let total = lambda0_plus + lambda0_minus + 2.0 * lambda[1..].iter().sum::<f64>();
        if (total - 1.0).abs() > crate::tol::NORM {
            return Err(SimError::NotNormalized(total));
        }
        let mut lambda = lambda;
        lambda[0] = 0.0;
        Ok(GhzStandardForm { n, lambda0_plus, lambda0_minus, lambda })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn lambda0_plus(&self) -> f64 {
        self.lambda0_plus
    }

    pub fn lambda0_minus(&self) -> f64 {
        self.lambda0_minus
    }

    pub fn lambda(&self, k: usize) -> f64 {
        self.lambda[k]
    }

    /// `λ̃_0 = λ_0^+ + λ_0^-`, `λ̃_k = 2 λ_k`.
    pub fn reduced(&self) -> Vec<f64> {
        let mut t: Vec<f64> = self.lambda.iter().map(|x| 2.0 * x).collect();
        t[0] = self.lambda0_plus + self.lambda0_minus;
        t
    }

    pub fn fidelity(&self) -> f64 {
        self.lambda0_plus
    }

    pub fn to_diagonal(&self) -> Result<DiagonalState> {
        let g = Graph::ghz(self.n)?;
        let mut c = vec![0.0; 1 << self.n];
        for (k, &l) in self.lambda.iter().enumerate().skip(1) {
            c[k << 1] = l;
            c[k << 1 | 1] = l;
        }
        c[0] = self.lambda0_plus;
        c[1] = self.lambda0_minus;
        DiagonalState::new(g, c)
    }
}

/// Averages `λ_k^+` and `λ_k^-` for `k ≠ 0`. This is the effect of applying, for every
/// leaf `a` independently with probability 1/2, the local Clifford `√(−iX_a) √(iZ_center)`.
pub fn twirl_to_standard_form(s: &DiagonalState) -> Result<GhzStandardForm> {
    let n = s.n();
    if s.graph() != &Graph::ghz(n)? {
        return Err(SimError::GraphMismatch("standard form needs the GHZ star with center 0".into()));
    }
    let c = s.coeffs();
    let lambda: Vec<f64> = (0..1usize << (n - 1)).map(|k| if k == 0 { 0.0 } else { 0.5 * (c[k << 1] + c[k << 1 | 1]) }).collect();
    GhzStandardForm::new(n, c[0], c[1], lambda)
}

/// `λ̃'_k` of the local model with `(p_A, p_B)`: center channel `p I + (1−p)/2 (X + Y)`,
/// leaves `p I + (1−p)/2 (Y + Z)`.
pub fn standard_form_target(n: usize, p_a: f64, p_b: f64) -> Vec<f64> {
    let nb = (n - 1) as i32;
    (0..1usize << (n - 1))
        .map(|k| {
            let w = k.count_ones() as i32;
            p_a * p_b.powi(nb - w) * (1.0 - p_b).powi(w) + (1.0 - p_a) * p_b.powi(w) * (1.0 - p_b).powi(nb - w)
        })
        .collect()
}

/// Largest admissible weight `Q` of the original state for local parameter `p`, i.e. the
/// minimum of `λ̃'_k / λ̃_k` over indices with `λ̃_k > 0`.
pub fn admissible_weight(reduced: &[f64], target: &[f64]) -> f64 {
    reduced
        .iter()
        .zip(target)
        .filter(|(t, _)| **t > 0.0)
        .map(|(t, tp)| tp / t)
        .fold(f64::INFINITY, f64::min)
        .min(1.0)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LocalizationReport {
    /// Local parameter `p`, shared by set A and set B.
    pub p: f64,
    /// Weight kept of the input state, `1 − Σ q_k`.
    pub q_total: f64,
    /// Mixing weights `q_k` of `ρ_k`, indexed by `k`.
    pub mixing_weights: Vec<f64>,
    /// Weight of the identity in the extra `σ_z` channel on the center that fixes `λ_0^+/λ_0^-`.
    pub center_phase_weight: f64,
    pub fidelity_before: f64,
    pub fidelity_after: f64,
    pub relative_reduction: f64,
}

impl LocalizationReport {
    /// The local channels that produce the localized state from `|GHZ⟩`.
    pub fn local_model(&self, n: usize) -> Result<LocalNoiseModel> {
        let (p, r) = (self.p, self.center_phase_weight);
        let e = (1.0 - p) / 2.0;
        let center = PauliChannel::new([p * r, e, e, p * (1.0 - r)])?;
        let mut ch = vec![PauliChannel::yz(p)?; n];
        ch[0] = center;
        let classes = (0..n).map(|q| usize::from(q > 0)).collect();
        LocalNoiseModel::new(ch, Some(classes))
    }
}

/// Grid points used to seed the maximization of `Q(p)`.
pub const Q_GRID_POINTS: usize = 2001;

/// Mixes separable states `ρ_k` into the standard form so that the result is exactly
/// the local model with the `Q`-maximizing `p ∈ [1/2, 1]`.
pub fn localize_noise(sf: &GhzStandardForm) -> Result<(DiagonalState, LocalizationReport)> {
    let n = sf.n();
    let t = sf.reduced();
    let q_of = |p: f64| admissible_weight(&t, &standard_form_target(n, p, p));
    let (p, q) = grid_golden_max(q_of, 0.5, 1.0, Q_GRID_POINTS, 1e-13);
    if !(q > 0.0) {
        return Err(SimError::Infeasible);
    }
    let target = standard_form_target(n, p, p);
    let mixing: Vec<f64> = t.iter().zip(&target).map(|(x, y)| (y - q * x).max(0.0)).collect();

    // λ_0^± can only move together; the split is set by extra σ_z noise on the center,
    // which can lower λ_0^+ but never raise it above the model value p^N + (1−p)^N/2
    let half_tail = 0.5 * (1.0 - p).powi(n as i32);
    let top = p.powi(n as i32);
    let plus = (q * sf.lambda0_plus() + 0.5 * mixing[0]).min(top + half_tail);
    let r = if top > 0.0 { (plus - half_tail) / top } else { 1.0 };
    if !(-1e-12..=1.0 + 1e-12).contains(&r) {
        return Err(SimError::Infeasible);
    }
    let r = r.clamp(0.0, 1.0);
    let plus = r * top + half_tail;
    let lambda: Vec<f64> = target.iter().map(|x| 0.5 * x).collect();
    let out = GhzStandardForm::new(n, plus, target[0] - plus, lambda)?;

    let before = sf.fidelity();
    let report = LocalizationReport {
        p,
        q_total: q,
        mixing_weights: mixing,
        center_phase_weight: r,
        fidelity_before: before,
        fidelity_after: plus,
        relative_reduction: if before > 0.0 { (before - plus) / before } else { 0.0 },
    };
    Ok((out.to_diagonal()?, report))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pure_state_standard_form() {
        let g = Graph::ghz(4).unwrap();
        let sf = twirl_to_standard_form(&DiagonalState::pure(&g)).unwrap();
        assert_eq!(sf.lambda0_plus(), 1.0);
        let (out, rep) = localize_noise(&sf).unwrap();
        assert!((rep.p - 1.0).abs() < 1e-9 && (rep.q_total - 1.0).abs() < 1e-9);
        assert!((out.fidelity() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn target_is_normalized() {
        for n in 2..8 {
            for (a, b) in [(0.9, 0.9), (0.7, 0.95), (0.5, 0.5)] {
                let s: f64 = standard_form_target(n, a, b).iter().sum();
                assert!((s - 1.0).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn rejects_other_graphs() {
        let s = DiagonalState::pure(&Graph::line(3).unwrap());
        assert!(twirl_to_standard_form(&s).is_err());
    }
}
