//! Graph-diagonal states and the dense oracle.

pub mod dense;

use serde::{Deserialize, Serialize};

use crate::error::{Result, SimError};
use crate::graphstate::{BasisIndex, Graph};
use crate::noise::{GlobalDepolarizing, PauliChannel, TwoQubitPauliChannel};
use crate::pauli::Pauli;
use crate::tol;

pub use dense::{DenseOperator, DenseStep};

const BIT_ORDER: &str = "little-endian: bit j of the coefficient index is mu_j of vertex j (0-based)";

/// Density operator diagonal in the graph-state basis: `Σ_µ λ_µ |µ⟩⟨µ|_G`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagonalState {
    graph: Graph,
    coeffs: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct DiagonalStateRepr {
    graph: Graph,
    #[serde(default)]
    bit_order: String,
    coeffs: Vec<f64>,
}

impl Serialize for DiagonalState {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        DiagonalStateRepr { graph: self.graph.clone(), bit_order: BIT_ORDER.into(), coeffs: self.coeffs.clone() }
            .serialize(s)
    }
}

impl<'de> Deserialize<'de> for DiagonalState {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = DiagonalStateRepr::deserialize(d)?;
        DiagonalState::new(r.graph, r.coeffs).map_err(serde::de::Error::custom)
    }
}

fn check_distribution(coeffs: &[f64]) -> Result<()> {
    if coeffs.iter().any(|&x| !(x >= -tol::NORM)) {
        return Err(SimError::InvalidChannel("negative coefficient".into()));
    }
    let s: f64 = coeffs.iter().sum();
    if (s - 1.0).abs() > 1e-10 {
        return Err(SimError::NotNormalized(s));
    }
    Ok(())
}

fn permuted_mixture(coeffs: &[f64], terms: &[(f64, u64)]) -> Vec<f64> {
    let mut out = vec![0.0; coeffs.len()];
    for &(w, m) in terms {
        if w == 0.0 {
            continue;
        }
        let m = m as usize;
        for (mu, o) in out.iter_mut().enumerate() {
            *o += w * coeffs[mu ^ m];
        }
    }
    out
}

impl DiagonalState {
    pub fn new(graph: Graph, coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.len() != 1usize << graph.n() {
            return Err(SimError::GraphMismatch(format!(
                "{} coefficients for {} vertices",
                coeffs.len(),
                graph.n()
            )));
        }
        check_distribution(&coeffs)?;
        Ok(DiagonalState { graph, coeffs })
    }

    pub(crate) fn from_raw(graph: Graph, coeffs: Vec<f64>) -> Self {
        debug_assert_eq!(coeffs.len(), 1usize << graph.n());
        DiagonalState { graph, coeffs }
    }

    pub fn pure(graph: &Graph) -> Self {
        Self::basis(graph, 0)
    }

    pub fn basis(graph: &Graph, mu: BasisIndex) -> Self {
        let mut coeffs = vec![0.0; 1usize << graph.n()];
        coeffs[mu as usize] = 1.0;
        DiagonalState { graph: graph.clone(), coeffs }
    }

    pub fn maximally_mixed(graph: &Graph) -> Self {
        let d = 1usize << graph.n();
        DiagonalState { graph: graph.clone(), coeffs: vec![1.0 / d as f64; d] }
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn n(&self) -> usize {
        self.graph.n()
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeff(&self, mu: BasisIndex) -> f64 {
        self.coeffs[mu as usize]
    }

    /// Fidelity with the pure graph state, `λ_0`.
    pub fn fidelity(&self) -> f64 {
        self.coeffs[0]
    }

    pub fn total(&self) -> f64 {
        self.coeffs.iter().sum()
    }

    /// Largest coefficient difference.
    pub fn max_diff(&self, other: &DiagonalState) -> f64 {
        self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }

    /// Mixture of index permutations `λ'_µ = Σ_t w_t λ_{µ ⊕ m_t}`.
    pub fn apply_mask_mixture(&self, terms: &[(f64, u64)]) -> DiagonalState {
        DiagonalState { graph: self.graph.clone(), coeffs: permuted_mixture(&self.coeffs, terms) }
    }

    pub fn apply_local_channel(&self, q: usize, c: &PauliChannel) -> Result<DiagonalState> {
        if q >= self.n() {
            return Err(SimError::VertexOutOfRange { vertex: q, n: self.n() });
        }
        let terms: Vec<(f64, u64)> =
            c.terms().map(|(w, l)| (w, self.graph.single_pauli_mask(q, l))).collect();
        Ok(self.apply_mask_mixture(&terms))
    }

    pub fn apply_two_qubit_channel(&self, a: usize, b: usize, c: &TwoQubitPauliChannel) -> Result<DiagonalState> {
        let n = self.n();
        for q in [a, b] {
            if q >= n {
                return Err(SimError::VertexOutOfRange { vertex: q, n });
            }
        }
        if a == b {
            return Err(SimError::InvalidQubits("two-qubit channel on one qubit".into()));
        }
        let terms: Vec<(f64, u64)> = c
            .terms()
            .map(|(w, la, lb)| (w, self.graph.single_pauli_mask(a, la) ^ self.graph.single_pauli_mask(b, lb)))
            .collect();
        Ok(self.apply_mask_mixture(&terms))
    }

    /// The same channel on every qubit.
    pub fn apply_channel_everywhere(&self, c: &PauliChannel) -> DiagonalState {
        let mut s = self.clone();
        for q in 0..self.n() {
            s = s.apply_local_channel(q, c).expect("qubit in range");
        }
        s
    }

    pub fn apply_global(&self, g: &GlobalDepolarizing) -> DiagonalState {
        let p = g.retention();
        let u = (1.0 - p) / self.coeffs.len() as f64;
        DiagonalState { graph: self.graph.clone(), coeffs: self.coeffs.iter().map(|&x| p * x + u).collect() }
    }

    /// The same state written in the basis of `τ_a(G)`: `U_a^τ |µ⟩_G ∝ |µ'⟩_{τ_a(G)}`.
    pub fn local_complement(&self, a: usize) -> Result<DiagonalState> {
        let g2 = self.graph.local_complement(a)?;
        let mut coeffs = vec![0.0; self.coeffs.len()];
        for (mu, &l) in self.coeffs.iter().enumerate() {
            coeffs[self.graph.lc_transform_index(mu as u64, a) as usize] = l;
        }
        Ok(DiagonalState { graph: g2, coeffs })
    }

    /// Reinterprets the coefficients on a relabeled graph: new vertex `perm[v]` is old `v`.
    pub fn permuted(&self, perm: &[usize]) -> Result<DiagonalState> {
        let g2 = self.graph.permuted(perm)?;
        let mut coeffs = vec![0.0; self.coeffs.len()];
        for (mu, &l) in self.coeffs.iter().enumerate() {
            let mut nu = 0usize;
            for (v, &pv) in perm.iter().enumerate() {
                nu |= (mu >> v & 1) << pv;
            }
            coeffs[nu] = l;
        }
        Ok(DiagonalState { graph: g2, coeffs })
    }

    pub fn to_dense(&self) -> Result<DenseOperator> {
        DenseOperator::from_graph_diagonal(&self.graph, &self.coeffs)
    }

    /// Weight of coefficients whose index vanishes on `mask`.
    pub fn weight_zero_on(&self, mask: u64) -> f64 {
        self.coeffs.iter().enumerate().filter(|(mu, _)| *mu as u64 & mask == 0).map(|(_, &l)| l).sum()
    }

}

/// Uhlmann fidelity of commuting diagonal states, `Σ_µ √(λ_µ ω_µ)`.
pub fn fidelity_diagonal(a: &DiagonalState, b: &DiagonalState) -> Result<f64> {
    if a.graph != b.graph {
        return Err(SimError::GraphMismatch("fidelity between states on different graphs".into()));
    }
    Ok(fidelity_coeffs(&a.coeffs, &b.coeffs))
}

pub(crate) fn fidelity_coeffs(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x.max(0.0) * y.max(0.0)).sqrt()).sum::<f64>().min(1.0)
}

/// Graph-basis diagonal of a dense operator (the result of twirling into diagonal form).
pub fn depolarize_to_diagonal(d: &DenseOperator, g: &Graph) -> Result<DiagonalState> {
    let t = d.trace();
    if (t - 1.0).abs() > tol::DENSE_TRACE {
        return Err(SimError::NotNormalized(t));
    }
    let coeffs = d.graph_diagonal(g)?;
    Ok(DiagonalState { graph: g.clone(), coeffs })
}

/// Two copies (possibly on different graphs): index `µ | ν << n_first`.
#[derive(Debug, Clone, PartialEq)]
pub struct JointDiagonalState {
    first: Graph,
    second: Graph,
    coeffs: Vec<f64>,
}

impl JointDiagonalState {
    pub fn product(a: &DiagonalState, b: &DiagonalState) -> Result<Self> {
        let na = a.n();
        if na + b.n() > 30 {
            return Err(SimError::EnumerationCap(1u128 << (na + b.n())));
        }
        let mut coeffs = vec![0.0; 1usize << (na + b.n())];
        for (nu, &y) in b.coeffs.iter().enumerate() {
            if y == 0.0 {
                continue;
            }
            for (mu, &x) in a.coeffs.iter().enumerate() {
                coeffs[mu | nu << na] = x * y;
            }
        }
        Ok(JointDiagonalState { first: a.graph.clone(), second: b.graph.clone(), coeffs })
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn first_graph(&self) -> &Graph {
        &self.first
    }

    pub fn second_graph(&self) -> &Graph {
        &self.second
    }

    pub fn split(&self, idx: usize) -> (u64, u64) {
        let na = self.first.n();
        ((idx & ((1 << na) - 1)) as u64, (idx >> na) as u64)
    }

    /// Applies a Pauli on a qubit of one copy.
    pub fn pauli_mask(&self, second: bool, q: usize, l: Pauli) -> u64 {
        if second {
            self.second.single_pauli_mask(q, l) << self.first.n()
        } else {
            self.first.single_pauli_mask(q, l)
        }
    }

    pub fn apply_mask_mixture(&self, terms: &[(f64, u64)]) -> JointDiagonalState {
        JointDiagonalState {
            first: self.first.clone(),
            second: self.second.clone(),
            coeffs: permuted_mixture(&self.coeffs, terms),
        }
    }

    /// Applies a deterministic index map.
    pub fn map_indices(&self, f: impl Fn(u64, u64) -> (u64, u64)) -> JointDiagonalState {
        let na = self.first.n();
        let mut coeffs = vec![0.0; self.coeffs.len()];
        for (idx, &w) in self.coeffs.iter().enumerate() {
            let (mu, nu) = self.split(idx);
            let (m2, n2) = f(mu, nu);
            coeffs[(m2 | n2 << na) as usize] += w;
        }
        JointDiagonalState { first: self.first.clone(), second: self.second.clone(), coeffs }
    }

    pub fn marginal_first(&self) -> DiagonalState {
        let na = self.first.n();
        let mut coeffs = vec![0.0; 1 << na];
        for (idx, &w) in self.coeffs.iter().enumerate() {
            coeffs[idx & ((1 << na) - 1)] += w;
        }
        DiagonalState { graph: self.first.clone(), coeffs }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn phaseflip_on_pure_state() {
        let g = Graph::ring(4).unwrap();
        let s = DiagonalState::pure(&g).apply_local_channel(2, &PauliChannel::phaseflip(0.8).unwrap()).unwrap();
        assert!((s.coeff(0) - 0.8).abs() < 1e-15 && (s.coeff(4) - 0.2).abs() < 1e-15);
        assert!((s.total() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn fidelity_examples() {
        let g = Graph::line(2).unwrap();
        let a = DiagonalState::new(g.clone(), vec![0.9, 0.1, 0.0, 0.0]).unwrap();
        let b = DiagonalState::new(g.clone(), vec![0.8, 0.2, 0.0, 0.0]).unwrap();
        let f = fidelity_diagonal(&a, &b).unwrap();
        assert!((f - (0.72f64.sqrt() + 0.02f64.sqrt())).abs() < 1e-15);
        assert!((f - 0.98994).abs() < 1e-5);
        assert!((fidelity_diagonal(&a, &a).unwrap() - 1.0).abs() < 1e-15);
        let o = fidelity_diagonal(&DiagonalState::basis(&g, 1), &DiagonalState::basis(&g, 2)).unwrap();
        assert_eq!(o, 0.0);
        let dense = a.to_dense().unwrap().fidelity(&b.to_dense().unwrap());
        assert!((dense - f).abs() < 1e-7);
    }

    #[test]
    fn json_roundtrip() {
        let g = Graph::ghz(3).unwrap();
        let s = DiagonalState::pure(&g).apply_channel_everywhere(&PauliChannel::depolarizing(0.9).unwrap());
        let text = serde_json::to_string(&s).unwrap();
        assert!(text.contains("little-endian"));
        let back: DiagonalState = serde_json::from_str(&text).unwrap();
        assert_eq!(back, s);
        assert!(serde_json::from_str::<DiagonalState>(r#"{"graph":{"n":1,"edges":[]},"coeffs":[0.5,0.6]}"#).is_err());
    }

    #[test]
    fn depolarize_pure_and_mixed() {
        let g = Graph::ghz(3).unwrap();
        let pure = DenseOperator::from_pure(&dense::graph_state_vector(&g).unwrap()).unwrap();
        let s = depolarize_to_diagonal(&pure, &g).unwrap();
        assert!((s.fidelity() - 1.0).abs() < 1e-12);
        let mixed = DenseOperator::maximally_mixed(3).unwrap();
        let s = depolarize_to_diagonal(&mixed, &g).unwrap();
        assert!(s.coeffs().iter().all(|&x| (x - 0.125).abs() < 1e-12));
    }

    #[test]
    fn lc_permutation_matches_dense() {
        let g = Graph::ring(5).unwrap();
        let s = DiagonalState::pure(&g).apply_channel_everywhere(&PauliChannel::new([0.9, 0.05, 0.02, 0.03]).unwrap());
        let t = s.local_complement(0).unwrap();
        // Dense: apply U_0^τ = SqrtX_0 ∏_{N_0} SqrtZDag and read the new diagonal.
        let mut d = s.to_dense().unwrap();
        d.apply_gate(&crate::pauli::Clifford::SqrtX(0));
        for b in g.neighborhood(0).unwrap() {
            d.apply_gate(&crate::pauli::Clifford::SqrtZDag(b));
        }
        let want = depolarize_to_diagonal(&d, t.graph()).unwrap();
        assert!(t.max_diff(&want) < 1e-12);
    }
}
