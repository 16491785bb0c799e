//! Gate-based encoders and decoders, simulated exactly with Pauli-frame distributions.

use std::collections::HashMap;

use crate::noise::{GateNoiseModel, PauliChannel, TwoQubitPauliChannel};
use crate::pauli::{Clifford, Pauli, PauliString};
use crate::{Result, SimError};

use super::code::{pauli_from_index, pauli_index, Code, CodeKind};

/// Probability distribution over Pauli frames on `n` qubits, index `x | z << n`.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameDist {
    n: usize,
    p: Vec<f64>,
}

impl FrameDist {
    pub fn identity(n: usize) -> Self {
        let mut p = vec![0.0; 1 << (2 * n)];
        p[0] = 1.0;
        FrameDist { n, p }
    }

    pub fn from_probs(n: usize, p: Vec<f64>) -> Self {
        assert_eq!(p.len(), 1 << (2 * n));
        FrameDist { n, p }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn probs(&self) -> &[f64] {
        &self.p
    }

    fn letter_mask(&self, q: usize, l: Pauli) -> usize {
        let (x, z) = l.bits();
        (usize::from(x) << q) | (usize::from(z) << (q + self.n))
    }

    fn mix(&mut self, terms: &[(f64, usize)]) {
        let mut out = vec![0.0; self.p.len()];
        for &(w, m) in terms {
            for (i, &v) in self.p.iter().enumerate() {
                if v != 0.0 {
                    out[i ^ m] += w * v;
                }
            }
        }
        self.p = out;
    }

    pub fn apply_channel(&mut self, q: usize, ch: &PauliChannel) {
        let terms: Vec<(f64, usize)> = ch.terms().map(|(w, l)| (w, self.letter_mask(q, l))).collect();
        self.mix(&terms);
    }

    pub fn apply_pair(&mut self, a: usize, b: usize, ch: &TwoQubitPauliChannel) {
        let terms: Vec<(f64, usize)> =
            ch.terms().map(|(w, la, lb)| (w, self.letter_mask(a, la) ^ self.letter_mask(b, lb))).collect();
        self.mix(&terms);
    }

    /// Propagates every frame through a perfect gate.
    pub fn apply_gate(&mut self, g: &Clifford) -> Result<()> {
        g.check(self.n)?;
        let mut out = vec![0.0; self.p.len()];
        for (i, &v) in self.p.iter().enumerate() {
            if v != 0.0 {
                out[conjugate_index(self.n, i, g)?] += v;
            }
        }
        self.p = out;
        Ok(())
    }
}

pub(crate) fn conjugate_index(n: usize, idx: usize, g: &Clifford) -> Result<usize> {
    Ok(pauli_index(&pauli_from_index(n, idx).conjugate(g)?))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Basis {
    X,
    Z,
}

/// Encoder and decoder circuits for a code. The logical qubit is qubit 0; the decoder
/// runs the encoder backwards and measures the other qubits.
#[derive(Debug, Clone)]
pub struct GateCircuits {
    pub n: usize,
    /// Encoder, with ancillas prepared in the measurement basis of [`GateCircuits::measured`].
    pub encode: Vec<Clifford>,
    pub decode: Vec<Clifford>,
    pub measured: Vec<(usize, Basis)>,
    /// Syndrome bits to correction on qubit 0.
    table: HashMap<u64, Pauli>,
}

impl GateCircuits {
    pub fn for_code(code: &Code) -> Result<GateCircuits> {
        let n = code.n();
        let (encode, basis) = match code.kind() {
            CodeKind::RepetitionBitflip => ((1..n).map(|j| Clifford::Cnot { control: 0, target: j }).collect(), Basis::Z),
            CodeKind::RepetitionPhaseflip => {
                let mut c = vec![Clifford::H(0)];
                c.extend((1..n).map(|j| Clifford::Cnot { control: j, target: 0 }));
                (c, Basis::X)
            }
            CodeKind::ClusterRing => {
                let mut c = vec![Clifford::H(0)];
                c.extend((1..n).map(|j| Clifford::Cnot { control: j, target: 0 }));
                c.extend((0..n).map(|j| Clifford::Cz(j, (j + 1) % n)));
                (c, Basis::X)
            }
        };
        let decode: Vec<Clifford> = encode.iter().rev().map(|g| g.inverse()).collect();
        let measured = (1..n).map(|j| (j, basis)).collect();
        let mut gc = GateCircuits { n, encode, decode, measured, table: HashMap::new() };
        for e in code.correctable_errors() {
            let mut idx = pauli_index(&e);
            for g in &gc.decode {
                idx = conjugate_index(n, idx, g)?;
            }
            let (s, r) = gc.readout(idx);
            match gc.table.get(&s) {
                Some(&r0) if r0 != r => {
                    return Err(SimError::AmbiguousPattern(format!("syndrome {s:b} of {e}")));
                }
                _ => {
                    gc.table.insert(s, r);
                }
            }
        }
        Ok(gc)
    }

    /// Syndrome bits and residual Pauli on qubit 0 for a frame after the decoder.
    pub fn readout(&self, idx: usize) -> (u64, Pauli) {
        let n = self.n;
        let mut s = 0u64;
        for (k, &(q, b)) in self.measured.iter().enumerate() {
            let flip = match b {
                Basis::Z => idx >> q & 1,
                Basis::X => idx >> (q + n) & 1,
            };
            s |= (flip as u64) << k;
        }
        (s, Pauli::from_bits(idx & 1 == 1, idx >> n & 1 == 1))
    }

    /// Correction for a syndrome (identity for syndromes outside the table).
    pub fn correction(&self, syndrome: u64) -> Pauli {
        self.table.get(&syndrome).copied().unwrap_or(Pauli::I)
    }

    pub fn syndromes(&self) -> usize {
        self.table.len()
    }

    fn run(&self, dist: &mut FrameDist, gates: &[Clifford], noise: &Option<TwoQubitPauliChannel>) -> Result<()> {
        for g in gates {
            if let (Some(ch), [a, b]) = (noise, g.qubits().as_slice()) {
                dist.apply_pair(*a, *b, ch);
            }
            dist.apply_gate(g)?;
        }
        Ok(())
    }

    /// Frame distribution on the code qubits after the noisy encoder.
    pub fn encode_frames(&self, noise: &Option<TwoQubitPauliChannel>) -> Result<FrameDist> {
        let mut d = FrameDist::identity(self.n);
        self.run(&mut d, &self.encode, noise)?;
        Ok(d)
    }

    /// Logical Pauli distribution `[I, X, Y, Z]` after the noisy decoder and correction.
    pub fn decode_frames(&self, mut dist: FrameDist, noise: &Option<TwoQubitPauliChannel>) -> Result<[f64; 4]> {
        self.run(&mut dist, &self.decode, noise)?;
        let mut out = [0.0; 4];
        for (i, &v) in dist.probs().iter().enumerate() {
            if v != 0.0 {
                let (s, r) = self.readout(i);
                out[r.mul_unsigned(self.correction(s)).index()] += v;
            }
        }
        Ok(out)
    }
}

/// Noise attached to each two-qubit gate of a circuit. Binary-like noise is read as the
/// restricted error type of the code on both gate qubits.
pub fn circuit_gate_noise(code: &Code, model: &GateNoiseModel) -> Result<Option<TwoQubitPauliChannel>> {
    model.validate()?;
    Ok(match model {
        GateNoiseModel::Perfect => None,
        GateNoiseModel::BinaryLike { p } => {
            let c = code.restricted_channel(*p)?;
            Some(TwoQubitPauliChannel::product(&c, &c))
        }
        m => Some(m.pair_channel(false, false)?),
    })
}

/// Hermitian Pauli on `n` qubits with a single letter, as a frame index.
pub fn single_index(n: usize, q: usize, l: Pauli) -> usize {
    pauli_index(&PauliString::single(n, q, l))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn circuits_have_expected_gate_counts() {
        let c = GateCircuits::for_code(&Code::cluster_ring()).unwrap();
        let count = |f: fn(&Clifford) -> bool| c.encode.iter().filter(|g| f(g)).count();
        assert_eq!(count(|g| matches!(g, Clifford::H(_))), 1);
        assert_eq!(count(|g| matches!(g, Clifford::Cnot { .. })), 4);
        assert_eq!(count(|g| matches!(g, Clifford::Cz(..))), 5);
        assert_eq!(c.syndromes(), 16);
        assert_eq!(GateCircuits::for_code(&Code::repetition_bitflip(3).unwrap()).unwrap().syndromes(), 4);
    }

    #[test]
    fn perfect_round_trip_is_identity() {
        for code in [Code::repetition_bitflip(5).unwrap(), Code::repetition_phaseflip(3).unwrap(), Code::cluster_ring()] {
            let c = GateCircuits::for_code(&code).unwrap();
            let d = c.encode_frames(&None).unwrap();
            assert_eq!(c.decode_frames(d, &None).unwrap(), [1.0, 0.0, 0.0, 0.0]);
        }
    }
}
