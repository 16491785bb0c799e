//! Dense density-operator oracle.
//!
//! Qubit `j` is bit `j` of the computational-basis index. Used only to validate the
//! diagonal and symmetric engines; limited to [`tol::DENSE_MAX_QUBITS`] qubits.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use crate::error::{Result, SimError};
use crate::graphstate::{bits, Graph};
use crate::noise::{GlobalDepolarizing, PauliChannel, TwoQubitPauliChannel};
use crate::pauli::{Clifford, Pauli, PauliString};
use crate::tol;

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
const ONE: C64 = C64 { re: 1.0, im: 0.0 };
const I: C64 = C64 { re: 0.0, im: 1.0 };

type Mat2 = [[C64; 2]; 2];

fn check_size(n: usize) -> Result<()> {
    if n > tol::DENSE_MAX_QUBITS {
        Err(SimError::DenseLimit { limit: tol::DENSE_MAX_QUBITS, requested: n })
    } else {
        Ok(())
    }
}

/// 2x2 matrix of a single-qubit Clifford.
pub fn gate_matrix(g: &Clifford) -> Option<Mat2> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let half = C64::new(0.5, 0.0);
    Some(match g {
        Clifford::H(_) => [[C64::new(h, 0.0), C64::new(h, 0.0)], [C64::new(h, 0.0), C64::new(-h, 0.0)]],
        Clifford::SqrtZ(_) => [[ONE, ZERO], [ZERO, I]],
        Clifford::SqrtZDag(_) => [[ONE, ZERO], [ZERO, -I]],
        Clifford::SqrtX(_) => [[half * (ONE + I), half * (ONE - I)], [half * (ONE - I), half * (ONE + I)]],
        Clifford::SqrtXDag(_) => [[half * (ONE - I), half * (ONE + I)], [half * (ONE + I), half * (ONE - I)]],
        _ => return None,
    })
}

/// Applies `X^x Z^z` (times `i^phase`) to a basis index: returns the new index and amplitude factor.
fn pauli_on_basis(p: &PauliString, j: usize) -> (usize, C64) {
    let sign = if (j as u64 & p.z_mask()).count_ones() % 2 == 1 { -1.0 } else { 1.0 };
    let phase = I.powu(p.phase() as u32) * sign;
    (j ^ p.x_mask() as usize, phase)
}

/// State vector helpers.
pub fn apply_gate_to_vector(v: &mut [C64], n: usize, g: &Clifford) {
    match *g {
        Clifford::Cnot { control, target } => {
            for j in 0..v.len() {
                if j >> control & 1 == 1 && j >> target & 1 == 0 {
                    v.swap(j, j | 1 << target);
                }
            }
        }
        Clifford::Cz(a, b) => {
            for (j, amp) in v.iter_mut().enumerate() {
                if j >> a & 1 == 1 && j >> b & 1 == 1 {
                    *amp = -*amp;
                }
            }
        }
        _ => {
            let q = g.qubits()[0];
            let u = gate_matrix(g).unwrap();
            debug_assert!(q < n);
            for j in 0..v.len() {
                if j >> q & 1 == 0 {
                    let k = j | 1 << q;
                    let (a, b) = (v[j], v[k]);
                    v[j] = u[0][0] * a + u[0][1] * b;
                    v[k] = u[1][0] * a + u[1][1] * b;
                }
            }
        }
    }
}

pub fn apply_pauli_to_vector(v: &[C64], p: &PauliString) -> Vec<C64> {
    let mut out = vec![ZERO; v.len()];
    for (j, &a) in v.iter().enumerate() {
        let (k, f) = pauli_on_basis(p, j);
        out[k] += f * a;
    }
    out
}

/// `|G⟩ = ∏ CZ |+⟩^n`.
pub fn graph_state_vector(g: &Graph) -> Result<Vec<C64>> {
    check_size(g.n())?;
    let dim = 1usize << g.n();
    let amp = 1.0 / (dim as f64).sqrt();
    Ok((0..dim)
        .map(|j| {
            let mut s = 1.0;
            for (a, b) in g.edges() {
                if j >> a & 1 == 1 && j >> b & 1 == 1 {
                    s = -s;
                }
            }
            C64::new(s * amp, 0.0)
        })
        .collect())
}

/// `|µ⟩_G = Z^µ |G⟩`.
pub fn graph_basis_vector(g: &Graph, mu: u64) -> Result<Vec<C64>> {
    let mut v = graph_state_vector(g)?;
    for (j, amp) in v.iter_mut().enumerate() {
        if (j as u64 & mu).count_ones() % 2 == 1 {
            *amp = -*amp;
        }
    }
    Ok(v)
}

pub fn inner(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// Equality of state vectors up to a global phase.
pub fn equal_up_to_phase(a: &[C64], b: &[C64], tol: f64) -> bool {
    let ov = inner(a, b);
    let na = inner(a, a).re.sqrt();
    let nb = inner(b, b).re.sqrt();
    (ov.norm() - na * nb).abs() < tol
}

/// Dense density operator on `n` qubits, row-major.
#[derive(Debug, Clone)]
pub struct DenseOperator {
    n: usize,
    dim: usize,
    data: Vec<C64>,
}

/// One step of a dense circuit.
#[derive(Debug, Clone)]
pub enum DenseStep {
    Gate(Clifford),
    Channel { qubit: usize, channel: PauliChannel },
    TwoQubitChannel { a: usize, b: usize, channel: TwoQubitPauliChannel },
    /// Local channels on both qubits followed by a perfect CNOT.
    NoisyCnot { control: usize, target: usize, channel: PauliChannel },
    /// Local channels on both qubits followed by a perfect CZ.
    NoisyCz { a: usize, b: usize, channel: PauliChannel },
    Global(GlobalDepolarizing),
    /// Postselect onto the `+1` (or `-1`) eigenspace of a Pauli observable.
    Postselect { observable: PauliString, plus: bool },
}

impl DenseOperator {
    pub fn zeros(n: usize) -> Result<Self> {
        check_size(n)?;
        let dim = 1 << n;
        Ok(DenseOperator { n, dim, data: vec![ZERO; dim * dim] })
    }

    pub fn from_pure(v: &[C64]) -> Result<Self> {
        let n = v.len().trailing_zeros() as usize;
        if 1 << n != v.len() {
            return Err(SimError::InvalidQubits("vector length not a power of two".into()));
        }
        let mut d = DenseOperator::zeros(n)?;
        for r in 0..d.dim {
            for c in 0..d.dim {
                d.data[r * d.dim + c] = v[r] * v[c].conj();
            }
        }
        Ok(d)
    }

    pub fn maximally_mixed(n: usize) -> Result<Self> {
        let mut d = DenseOperator::zeros(n)?;
        let w = 1.0 / d.dim as f64;
        for r in 0..d.dim {
            d.data[r * d.dim + r] = C64::new(w, 0.0);
        }
        Ok(d)
    }

    pub fn from_matrix(n: usize, data: Vec<C64>) -> Result<Self> {
        check_size(n)?;
        let dim = 1 << n;
        if data.len() != dim * dim {
            return Err(SimError::InvalidQubits("matrix size".into()));
        }
        Ok(DenseOperator { n, dim, data })
    }

    /// `Σ_µ λ_µ |µ⟩⟨µ|_G`.
    pub fn from_graph_diagonal(g: &Graph, coeffs: &[f64]) -> Result<Self> {
        let mut d = DenseOperator::zeros(g.n())?;
        if coeffs.len() != d.dim {
            return Err(SimError::GraphMismatch("coefficient length".into()));
        }
        for (mu, &l) in coeffs.iter().enumerate() {
            d.data[mu * d.dim + mu] = C64::new(l, 0.0);
        }
        // |µ⟩_G = CZ_all · H^n |µ⟩
        for q in 0..g.n() {
            d.apply_gate(&Clifford::H(q));
        }
        for (a, b) in g.edges() {
            d.apply_gate(&Clifford::Cz(a, b));
        }
        Ok(d)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, r: usize, c: usize) -> C64 {
        self.data[r * self.dim + c]
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|j| self.data[j * self.dim + j].re).sum()
    }

    pub fn scale(&mut self, s: f64) {
        self.data.iter_mut().for_each(|x| *x *= s);
    }

    fn add_scaled(&mut self, other: &DenseOperator, s: f64) {
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += b * s;
        }
    }

    fn left_1q(&mut self, q: usize, u: &Mat2) {
        let dim = self.dim;
        for r in 0..dim {
            if r >> q & 1 == 0 {
                let r1 = r | 1 << q;
                for c in 0..dim {
                    let a = self.data[r * dim + c];
                    let b = self.data[r1 * dim + c];
                    self.data[r * dim + c] = u[0][0] * a + u[0][1] * b;
                    self.data[r1 * dim + c] = u[1][0] * a + u[1][1] * b;
                }
            }
        }
    }

    fn right_1q_dag(&mut self, q: usize, u: &Mat2) {
        let dim = self.dim;
        for r in 0..dim {
            let row = &mut self.data[r * dim..(r + 1) * dim];
            for c in 0..dim {
                if c >> q & 1 == 0 {
                    let c1 = c | 1 << q;
                    let a = row[c];
                    let b = row[c1];
                    // (ρ U†)[r][c] = Σ_k ρ[r][k] conj(U[c][k])
                    row[c] = a * u[0][0].conj() + b * u[0][1].conj();
                    row[c1] = a * u[1][0].conj() + b * u[1][1].conj();
                }
            }
        }
    }

    /// `ρ → G ρ G†`.
    pub fn apply_gate(&mut self, g: &Clifford) {
        match *g {
            Clifford::Cnot { .. } | Clifford::Cz(..) => {
                let dim = self.dim;
                let perm_phase = |j: usize| -> (usize, f64) {
                    match *g {
                        Clifford::Cnot { control, target } => {
                            (if j >> control & 1 == 1 { j ^ 1 << target } else { j }, 1.0)
                        }
                        Clifford::Cz(a, b) => {
                            (j, if j >> a & 1 == 1 && j >> b & 1 == 1 { -1.0 } else { 1.0 })
                        }
                        _ => unreachable!(),
                    }
                };
                let mut out = vec![ZERO; dim * dim];
                for r in 0..dim {
                    let (r2, sr) = perm_phase(r);
                    for c in 0..dim {
                        let (c2, sc) = perm_phase(c);
                        out[r2 * dim + c2] = self.data[r * dim + c] * (sr * sc);
                    }
                }
                self.data = out;
            }
            _ => {
                let u = gate_matrix(g).unwrap();
                let q = g.qubits()[0];
                self.left_1q(q, &u);
                self.right_1q_dag(q, &u);
            }
        }
    }

    /// `ρ → P ρ P†`.
    pub fn conjugate_pauli(&self, p: &PauliString) -> DenseOperator {
        let dim = self.dim;
        let mut out = vec![ZERO; dim * dim];
        for r in 0..dim {
            let (r2, fr) = pauli_on_basis(p, r);
            for c in 0..dim {
                let (c2, fc) = pauli_on_basis(p, c);
                out[r2 * dim + c2] = fr * self.data[r * dim + c] * fc.conj();
            }
        }
        DenseOperator { n: self.n, dim, data: out }
    }

    /// Pauli mixture `Σ_k w_k P_k ρ P_k`.
    pub fn apply_mixture(&mut self, terms: &[(f64, PauliString)]) {
        let mut acc = DenseOperator { n: self.n, dim: self.dim, data: vec![ZERO; self.data.len()] };
        for (w, p) in terms {
            if *w != 0.0 {
                acc.add_scaled(&self.conjugate_pauli(p), *w);
            }
        }
        *self = acc;
    }

    pub fn apply_channel(&mut self, qubit: usize, ch: &PauliChannel) {
        let terms: Vec<(f64, PauliString)> = Pauli::ALL
            .iter()
            .map(|&l| (ch.probs()[l.index()], PauliString::single(self.n, qubit, l)))
            .collect();
        self.apply_mixture(&terms);
    }

    pub fn apply_two_qubit_channel(&mut self, a: usize, b: usize, ch: &TwoQubitPauliChannel) {
        let mut terms = Vec::with_capacity(16);
        for (i, &la) in Pauli::ALL.iter().enumerate() {
            for (j, &lb) in Pauli::ALL.iter().enumerate() {
                let mut p = PauliString::single(self.n, a, la);
                p.set(b, lb);
                terms.push((ch.probs()[4 * i + j], p));
            }
        }
        self.apply_mixture(&terms);
    }

    pub fn apply_global(&mut self, g: &GlobalDepolarizing) {
        let keep = g.retention();
        let t = self.trace();
        self.scale(keep);
        let w = (1.0 - keep) * t / self.dim as f64;
        for j in 0..self.dim {
            self.data[j * self.dim + j] += w;
        }
    }

    /// Projects onto the `±1` eigenspace of `obs`; returns the (unnormalized) weight kept.
    pub fn postselect(&mut self, obs: &PauliString, plus: bool) -> f64 {
        let s = if plus { 0.5 } else { -0.5 };
        let dim = self.dim;
        // P ρ P with P = (1 + s' K)/2
        let left = |m: &[C64]| -> Vec<C64> {
            let mut out: Vec<C64> = m.iter().map(|x| x * 0.5).collect();
            for r in 0..dim {
                let (r2, f) = pauli_on_basis(obs, r);
                for c in 0..dim {
                    out[r2 * dim + c] += f * m[r * dim + c] * s;
                }
            }
            out
        };
        let l = left(&self.data);
        // right multiplication by P (Hermitian): (L P) = (P L†)†
        let mut lt = vec![ZERO; dim * dim];
        for r in 0..dim {
            for c in 0..dim {
                lt[c * dim + r] = l[r * dim + c].conj();
            }
        }
        let pl = left(&lt);
        for r in 0..dim {
            for c in 0..dim {
                self.data[r * dim + c] = pl[c * dim + r].conj();
            }
        }
        self.trace()
    }

    /// Partial trace keeping `keep` (new qubit `k` is old `keep[k]`).
    pub fn partial_trace(&self, keep: &[usize]) -> Result<DenseOperator> {
        let m = keep.len();
        let mut out = DenseOperator::zeros(m)?;
        let keep_mask: usize = keep.iter().fold(0, |a, &q| a | 1 << q);
        let traced: Vec<usize> = (0..self.n).filter(|q| keep_mask >> q & 1 == 0).collect();
        let expand = |small: usize, rest: usize| -> usize {
            let mut j = 0;
            for (k, &q) in keep.iter().enumerate() {
                j |= (small >> k & 1) << q;
            }
            for (k, &q) in traced.iter().enumerate() {
                j |= (rest >> k & 1) << q;
            }
            j
        };
        for r in 0..out.dim {
            for c in 0..out.dim {
                let mut acc = ZERO;
                for t in 0..1usize << traced.len() {
                    acc += self.data[expand(r, t) * self.dim + expand(c, t)];
                }
                out.data[r * out.dim + c] = acc;
            }
        }
        Ok(out)
    }

    /// Runs a circuit; returns the product of postselection probabilities.
    /// The state is renormalized after each postselection.
    pub fn evolve(&mut self, steps: &[DenseStep]) -> Result<f64> {
        let mut prob = 1.0;
        for step in steps {
            match step {
                DenseStep::Gate(g) => {
                    for &q in &g.qubits() {
                        if q >= self.n {
                            return Err(SimError::VertexOutOfRange { vertex: q, n: self.n });
                        }
                    }
                    self.apply_gate(g)
                }
                DenseStep::Channel { qubit, channel } => self.apply_channel(*qubit, channel),
                DenseStep::TwoQubitChannel { a, b, channel } => {
                    self.apply_two_qubit_channel(*a, *b, channel)
                }
                DenseStep::NoisyCnot { control, target, channel } => {
                    self.apply_channel(*control, channel);
                    self.apply_channel(*target, channel);
                    self.apply_gate(&Clifford::Cnot { control: *control, target: *target });
                }
                DenseStep::NoisyCz { a, b, channel } => {
                    self.apply_channel(*a, channel);
                    self.apply_channel(*b, channel);
                    self.apply_gate(&Clifford::Cz(*a, *b));
                }
                DenseStep::Global(g) => self.apply_global(g),
                DenseStep::Postselect { observable, plus } => {
                    let before = self.trace();
                    let kept = self.postselect(observable, *plus);
                    if kept <= 0.0 {
                        return Ok(0.0);
                    }
                    prob *= kept / before;
                    self.scale(1.0 / kept);
                }
            }
        }
        Ok(prob)
    }

    /// Diagonal of `ρ` in the graph-state basis of `g`.
    pub fn graph_diagonal(&self, g: &Graph) -> Result<Vec<f64>> {
        if g.n() != self.n {
            return Err(SimError::GraphMismatch("dense operator size".into()));
        }
        let mut d = self.clone();
        for (a, b) in g.edges() {
            d.apply_gate(&Clifford::Cz(a, b));
        }
        for q in 0..self.n {
            d.apply_gate(&Clifford::H(q));
        }
        Ok((0..d.dim).map(|j| d.data[j * d.dim + j].re).collect())
    }

    pub fn expectation_pure(&self, v: &[C64]) -> f64 {
        let mut acc = ZERO;
        for r in 0..self.dim {
            for c in 0..self.dim {
                acc += v[r].conj() * self.data[r * self.dim + c] * v[c];
            }
        }
        acc.re
    }

    fn to_matrix(&self) -> DMatrix<C64> {
        DMatrix::from_row_slice(self.dim, self.dim, &self.data)
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        let m = self.to_matrix();
        let herm = (&m + m.adjoint()) * C64::new(0.5, 0.0);
        herm.symmetric_eigenvalues().iter().copied().collect()
    }

    pub fn max_hermitian_deviation(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for r in 0..self.dim {
            for c in 0..self.dim {
                worst = worst.max((self.get(r, c) - self.get(c, r).conj()).norm());
            }
        }
        worst
    }

    /// Checks Hermiticity, unit trace and positivity within the shared tolerances.
    pub fn validate(&self) -> Result<()> {
        if self.max_hermitian_deviation() > tol::HERMITIAN {
            return Err(SimError::InvalidChannel("operator not Hermitian".into()));
        }
        if (self.trace() - 1.0).abs() > tol::HERMITIAN {
            return Err(SimError::NotNormalized(self.trace()));
        }
        if self.eigenvalues().iter().any(|&e| e < tol::PSD_FLOOR) {
            return Err(SimError::InvalidChannel("operator not positive".into()));
        }
        Ok(())
    }

    /// Uhlmann fidelity `tr √(√ρ σ √ρ)`.
    pub fn fidelity(&self, other: &DenseOperator) -> f64 {
        let a = self.to_matrix();
        let b = other.to_matrix();
        let sa = psd_sqrt(&a);
        let m = &sa * b * &sa;
        let herm = (&m + m.adjoint()) * C64::new(0.5, 0.0);
        herm.symmetric_eigenvalues().iter().map(|&e| e.max(0.0).sqrt()).sum()
    }

    /// Maximum entrywise distance.
    pub fn distance(&self, other: &DenseOperator) -> f64 {
        self.data.iter().zip(&other.data).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }
}

fn psd_sqrt(m: &DMatrix<C64>) -> DMatrix<C64> {
    let herm = (m + m.adjoint()) * C64::new(0.5, 0.0);
    let eig = herm.symmetric_eigen();
    let d = DMatrix::from_diagonal(&eig.eigenvalues.map(|e| C64::new(e.max(0.0).sqrt(), 0.0)));
    &eig.eigenvectors * d * eig.eigenvectors.adjoint()
}

/// Matrix of a Pauli string acting on `n` qubits (oracle use).
pub fn pauli_matrix(p: &PauliString) -> Vec<C64> {
    let dim = 1usize << p.len();
    let mut out = vec![ZERO; dim * dim];
    for j in 0..dim {
        let (k, f) = pauli_on_basis(p, j);
        out[k * dim + j] = f;
    }
    out
}

/// Projector onto `+1` eigenspace of every correlation operator in `mask` (helper for tests).
pub fn stabilizer_checks(g: &Graph, mask: u64) -> Vec<PauliString> {
    bits(mask).map(|a| g.correlation_operator(a).expect("vertex in range")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: C64, b: C64) -> bool {
        (a - b).norm() < 1e-12
    }

    #[test]
    fn small_graph_states() {
        let g1 = Graph::empty(1).unwrap();
        let v = graph_state_vector(&g1).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!(close(v[0], C64::new(h, 0.0)) && close(v[1], C64::new(h, 0.0)));
        let g2 = Graph::line(2).unwrap();
        let v = graph_state_vector(&g2).unwrap();
        let expect = [0.5, 0.5, 0.5, -0.5];
        for (a, e) in v.iter().zip(expect) {
            assert!(close(*a, C64::new(e, 0.0)));
        }
    }

    #[test]
    fn stabilizers_fix_graph_state() {
        let g = Graph::ring(5).unwrap();
        let v = graph_state_vector(&g).unwrap();
        for a in 0..5 {
            let k = g.correlation_operator(a).unwrap();
            let w = apply_pauli_to_vector(&v, &k);
            assert!(v.iter().zip(&w).all(|(x, y)| close(*x, *y)));
        }
    }

    #[test]
    fn clifford_images_match_matrices() {
        // G P G† == P' for every gate and single-qubit generator
        let gates = [
            Clifford::H(0),
            Clifford::SqrtZ(0),
            Clifford::SqrtZDag(1),
            Clifford::SqrtX(1),
            Clifford::SqrtXDag(0),
            Clifford::Cnot { control: 0, target: 1 },
            Clifford::Cnot { control: 1, target: 0 },
            Clifford::Cz(0, 1),
        ];
        let basis = ["XI", "ZI", "IX", "IZ", "YI", "IY", "YX", "ZY"];
        for g in &gates {
            for b in basis {
                let p: PauliString = b.parse().unwrap();
                let img = p.conjugate(g).unwrap();
                let mut d = DenseOperator::from_matrix(2, pauli_matrix(&p)).unwrap();
                d.apply_gate(g);
                let want = pauli_matrix(&img);
                assert!(
                    d.data().iter().zip(&want).all(|(a, b)| close(*a, *b)),
                    "gate {g:?} on {b}: got {img}"
                );
            }
        }
    }

    #[test]
    fn graph_diagonal_of_basis_states() {
        let g = Graph::ghz(3).unwrap();
        for mu in 0..8u64 {
            let v = graph_basis_vector(&g, mu).unwrap();
            let d = DenseOperator::from_pure(&v).unwrap();
            let diag = d.graph_diagonal(&g).unwrap();
            for (j, x) in diag.iter().enumerate() {
                let want = if j as u64 == mu { 1.0 } else { 0.0 };
                assert!((x - want).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn postselection_and_partial_trace() {
        let bell = {
            let h = std::f64::consts::FRAC_1_SQRT_2;
            vec![C64::new(h, 0.0), ZERO, ZERO, C64::new(h, 0.0)]
        };
        let mut d = DenseOperator::from_pure(&bell).unwrap();
        let zz: PauliString = "ZZ".parse().unwrap();
        let p = d.evolve(&[DenseStep::Postselect { observable: zz, plus: true }]).unwrap();
        assert!((p - 1.0).abs() < 1e-12);
        let zi: PauliString = "ZI".parse().unwrap();
        let p = d.evolve(&[DenseStep::Postselect { observable: zi, plus: true }]).unwrap();
        assert!((p - 0.5).abs() < 1e-12);
        let r = d.partial_trace(&[1]).unwrap();
        assert!((r.get(0, 0).re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn size_limit() {
        assert!(matches!(DenseOperator::zeros(13), Err(SimError::DenseLimit { .. })));
    }
}
