//! Codes, their resource graphs and the Bell-pattern correction tables.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::diagsim::dense::{apply_pauli_to_vector, graph_state_vector, inner};
use crate::graphstate::Graph;
use crate::noise::PauliChannel;
use crate::pauli::{Clifford, Pauli, PauliString};
use crate::{Result, SimError};

/// Largest repetition code handled (tables have `4^n` entries).
pub const MAX_REPETITION: usize = 9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CodeKind {
    /// `|0_L⟩ = |0..0⟩`, `|1_L⟩ = |1..1⟩`.
    RepetitionBitflip,
    /// `|0_L⟩ = |+..+⟩`, `|1_L⟩ = |−..−⟩`; the resource is the star graph itself.
    RepetitionPhaseflip,
    /// Five-qubit ring code, `|0_L⟩ = |00000⟩_G`, `|1_L⟩ = |11111⟩_G`.
    ClusterRing,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Code {
    kind: CodeKind,
    n: usize,
}

impl Code {
    pub fn repetition_bitflip(n: usize) -> Result<Code> {
        Self::repetition(CodeKind::RepetitionBitflip, n)
    }

    pub fn repetition_phaseflip(n: usize) -> Result<Code> {
        Self::repetition(CodeKind::RepetitionPhaseflip, n)
    }

    fn repetition(kind: CodeKind, n: usize) -> Result<Code> {
        if n < 3 || n % 2 == 0 || n > MAX_REPETITION {
            return Err(SimError::Config(format!("repetition length must be odd in 3..={MAX_REPETITION}, got {n}")));
        }
        Ok(Code { kind, n })
    }

    pub fn cluster_ring() -> Code {
        Code { kind: CodeKind::ClusterRing, n: 5 }
    }

    /// Parses names such as `repetition3`, `repetition-bitflip5`, `phaseflip3`, `cluster-ring`.
    /// Plain `repetitionN` is the bit-flip code of the decoding-pattern table.
    pub fn from_name(name: &str) -> Result<Code> {
        let name = name.trim().to_ascii_lowercase();
        if name == "cluster-ring" || name == "cluster_ring" || name == "clusterring" {
            return Ok(Code::cluster_ring());
        }
        let split = name.find(|c: char| c.is_ascii_digit()).ok_or_else(|| SimError::Config(format!("unknown code {name:?}")))?;
        let (stem, digits) = name.split_at(split);
        let n: usize = digits.parse().map_err(|_| SimError::Config(format!("unknown code {name:?}")))?;
        match stem.trim_end_matches(['-', '_']) {
            "repetition" | "repetition-bitflip" | "bitflip" => Code::repetition_bitflip(n),
            "repetition-phaseflip" | "phaseflip" => Code::repetition_phaseflip(n),
            _ => Err(SimError::Config(format!("unknown code {name:?}"))),
        }
    }

    pub fn kind(&self) -> CodeKind {
        self.kind
    }

    /// Physical qubits.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn name(&self) -> String {
        match self.kind {
            CodeKind::RepetitionBitflip => format!("repetition-bitflip{}", self.n),
            CodeKind::RepetitionPhaseflip => format!("repetition-phaseflip{}", self.n),
            CodeKind::ClusterRing => "cluster-ring".into(),
        }
    }

    /// `[|0_L⟩, |1_L⟩]` as dense vectors.
    pub fn logical_states(&self) -> Result<[Vec<C64>; 2]> {
        let n = self.n;
        let dim = 1usize << n;
        Ok(match self.kind {
            CodeKind::RepetitionBitflip => {
                let mut a = vec![C64::new(0.0, 0.0); dim];
                let mut b = a.clone();
                a[0] = C64::new(1.0, 0.0);
                b[dim - 1] = C64::new(1.0, 0.0);
                [a, b]
            }
            CodeKind::RepetitionPhaseflip => {
                let plus = graph_state_vector(&Graph::empty(n)?)?;
                let all_z = PauliString::from_masks(n, 0, (1 << n) - 1, 0);
                let minus = apply_pauli_to_vector(&plus, &all_z);
                [plus, minus]
            }
            CodeKind::ClusterRing => {
                let g = graph_state_vector(&Graph::ring(5)?)?;
                let all_z = PauliString::from_masks(5, 0, 0b11111, 0);
                let one = apply_pauli_to_vector(&g, &all_z);
                [g, one]
            }
        })
    }

    /// Graph of the read-in resource. Vertices `0..n` are the code legs, vertex `n` is
    /// the logical leg.
    pub fn resource_graph(&self) -> Graph {
        match self.kind {
            CodeKind::ClusterRing => Graph::cluster_ring_resource(),
            _ => Graph::star(self.n + 1, self.n).expect("valid star"),
        }
    }

    /// Local gate taking the graph state to the resource on code leg `q`, if any.
    pub fn leg_gate(&self, q: usize) -> Option<Clifford> {
        match self.kind {
            CodeKind::RepetitionBitflip if q < self.n => Some(Clifford::H(q)),
            _ => None,
        }
    }

    /// Errors the decoder assumes, one per syndrome class.
    pub fn correctable_errors(&self) -> Vec<PauliString> {
        let n = self.n;
        match self.kind {
            CodeKind::ClusterRing => {
                let mut v = vec![PauliString::identity(n)];
                for q in 0..n {
                    for l in [Pauli::X, Pauli::Y, Pauli::Z] {
                        v.push(PauliString::single(n, q, l));
                    }
                }
                v
            }
            _ => {
                let letter = if self.kind == CodeKind::RepetitionBitflip { Pauli::X } else { Pauli::Z };
                (0u64..1 << n)
                    .filter(|m| (m.count_ones() as usize) <= n / 2)
                    .map(|m| {
                        let mut p = PauliString::identity(n);
                        for q in 0..n {
                            if m >> q & 1 == 1 {
                                p.set(q, letter);
                            }
                        }
                        p
                    })
                    .collect()
            }
        }
    }

    /// Single-qubit channel of the restricted error model: the error type the repetition
    /// codes protect against.
    pub fn restricted_channel(&self, p: f64) -> Result<PauliChannel> {
        match self.kind {
            CodeKind::RepetitionBitflip => PauliChannel::bitflip(p),
            CodeKind::RepetitionPhaseflip => PauliChannel::phaseflip(p),
            CodeKind::ClusterRing => Err(SimError::Config("restricted noise is defined for repetition codes".into())),
        }
    }
}

/// Pauli index `x | z << n` used for patterns and frames.
pub fn pauli_index(p: &PauliString) -> usize {
    let n = p.len();
    (p.x_mask() | p.z_mask() << n) as usize
}

/// Hermitian Pauli string with index `x | z << n`.
pub fn pauli_from_index(n: usize, idx: usize) -> PauliString {
    let letters: Vec<Pauli> = (0..n).map(|q| Pauli::from_bits(idx >> q & 1 == 1, idx >> (q + n) & 1 == 1)).collect();
    PauliString::from_letters(&letters)
}

/// Logical action of `P` on the code space, or `None` if `P` leaves it.
fn logical_action(states: &[Vec<C64>; 2], p: &PauliString) -> Option<Pauli> {
    let img = [apply_pauli_to_vector(&states[0], p), apply_pauli_to_vector(&states[1], p)];
    let m = |i: usize, j: usize| inner(&states[i], &img[j]);
    let (m00, m01, m10, m11) = (m(0, 0), m(0, 1), m(1, 0), m(1, 1));
    for j in 0..2 {
        let kept = m(0, j).norm_sqr() + m(1, j).norm_sqr();
        if (kept - 1.0).abs() > 1e-9 {
            return None;
        }
    }
    if m00.norm() > 0.5 {
        Some(if (m11 / m00 - 1.0).norm() < 1e-9 { Pauli::I } else { Pauli::Z })
    } else {
        Some(if (m10 / m01 - 1.0).norm() < 1e-9 { Pauli::X } else { Pauli::Y })
    }
}

/// One row of the decoding-pattern table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PatternRow {
    pub pattern: PauliString,
    /// Error class the pattern is attributed to.
    pub error: PauliString,
    pub correction: Pauli,
}

impl PatternRow {
    /// Output state before correction, written for input `α|0⟩ + β|1⟩`.
    pub fn output_state(&self) -> &'static str {
        match self.correction {
            Pauli::I => "a|0> + b|1>",
            Pauli::Z => "a|0> - b|1>",
            Pauli::X => "a|1> + b|0>",
            Pauli::Y => "a|1> - b|0>",
        }
    }
}

/// Map from Bell-measurement patterns (Pauli applied to the input before the `Φ⁺`
/// projection) to the logical correction.
#[derive(Debug, Clone)]
pub struct CorrectionTable {
    n: usize,
    /// Per pattern index: (error class, correction), `None` if the pattern never occurs.
    entries: Vec<Option<(u16, Pauli)>>,
    errors: Vec<PauliString>,
    normalizer: Vec<(PauliString, Pauli)>,
}

impl CorrectionTable {
    pub fn n(&self) -> usize {
        self.n
    }

    /// Correction for a pattern index; `None` for patterns outside every error class.
    pub fn lookup_index(&self, idx: usize) -> Option<Pauli> {
        self.entries[idx].map(|e| e.1)
    }

    pub fn lookup(&self, pattern: &PauliString) -> Option<Pauli> {
        self.lookup_index(pauli_index(pattern))
    }

    /// Error class of a pattern.
    pub fn class_of(&self, pattern: &PauliString) -> Option<&PauliString> {
        self.entries[pauli_index(pattern)].map(|e| &self.errors[e.0 as usize])
    }

    pub fn errors(&self) -> &[PauliString] {
        &self.errors
    }

    /// Number of patterns with an entry.
    pub fn len(&self) -> usize {
        self.entries.iter().filter(|e| e.is_some()).count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Lowest-weight representative of each logical Pauli, `[I, X, Y, Z]` order.
    pub fn logical_representatives(&self) -> [PauliString; 4] {
        let mut reps: [Option<PauliString>; 4] = [None, None, None, None];
        for (g, l) in &self.normalizer {
            let slot = &mut reps[l.index()];
            if slot.map_or(true, |r| g.weight() < r.weight()) {
                *slot = Some(*g);
            }
        }
        reps.map(|r| r.expect("normalizer covers every logical Pauli"))
    }

    /// Rows for the patterns that signal no error, in table order: grouped by correction
    /// (I, Z, X, Y), then by the number of Z/Y letters, then reverse lexicographic.
    pub fn no_error_patterns(&self) -> Vec<PatternRow> {
        let id = PauliString::identity(self.n);
        let mut rows: Vec<PatternRow> =
            self.normalizer.iter().map(|(g, l)| PatternRow { pattern: *g, error: id, correction: *l }).collect();
        rows.sort_by_key(|r| {
            let group = [0, 2, 3, 1][r.correction.index()];
            let zy = r.pattern.letters().iter().filter(|l| matches!(l, Pauli::Z | Pauli::Y)).count();
            let key: Vec<std::cmp::Reverse<usize>> = r.pattern.letters().iter().map(|l| std::cmp::Reverse(l.index())).collect();
            (group, zy, key)
        });
        rows
    }

    /// Every pattern row, grouped by error class.
    pub fn rows(&self) -> Vec<PatternRow> {
        self.entries
            .iter()
            .enumerate()
            .filter_map(|(idx, e)| {
                e.map(|(c, l)| PatternRow { pattern: pauli_from_index(self.n, idx), error: self.errors[c as usize], correction: l })
            })
            .collect()
    }
}

/// Builds the correction table from the code states: the patterns `g · E` for every
/// logical operator `g` and correctable error `E` get correction `L(g)`. Fails if two
/// error classes share a pattern.
pub fn derive_correction_table(code: &Code) -> Result<CorrectionTable> {
    let n = code.n();
    let states = code.logical_states()?;
    let size = 1usize << (2 * n);
    let normalizer: Vec<(PauliString, Pauli)> = (0..size)
        .filter_map(|idx| {
            let p = pauli_from_index(n, idx);
            logical_action(&states, &p).map(|l| (p, l))
        })
        .collect();
    let errors = code.correctable_errors();
    let mut entries: Vec<Option<(u16, Pauli)>> = vec![None; size];
    for (c, e) in errors.iter().enumerate() {
        let ei = pauli_index(e);
        for (g, l) in &normalizer {
            let idx = pauli_index(g) ^ ei;
            match entries[idx] {
                Some((c0, _)) if c0 as usize != c => {
                    return Err(SimError::AmbiguousPattern(format!(
                        "{} is reached from {} and {}",
                        pauli_from_index(n, idx),
                        errors[c0 as usize],
                        e
                    )));
                }
                _ => entries[idx] = Some((c as u16, *l)),
            }
        }
    }
    Ok(CorrectionTable { n, entries, errors, normalizer })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names() {
        assert_eq!(Code::from_name("repetition3").unwrap(), Code::repetition_bitflip(3).unwrap());
        assert_eq!(Code::from_name("phaseflip5").unwrap(), Code::repetition_phaseflip(5).unwrap());
        assert_eq!(Code::from_name("cluster-ring").unwrap(), Code::cluster_ring());
        assert!(Code::from_name("repetition4").is_err());
        assert!(Code::from_name("steane7").is_err());
    }

    #[test]
    fn table_sizes() {
        let t = derive_correction_table(&Code::repetition_bitflip(3).unwrap()).unwrap();
        assert_eq!((t.len(), t.no_error_patterns().len()), (64, 16));
        let t = derive_correction_table(&Code::cluster_ring()).unwrap();
        assert_eq!((t.len(), t.errors().len()), (1024, 16));
        let t = derive_correction_table(&Code::repetition_phaseflip(5).unwrap()).unwrap();
        assert_eq!(t.len(), 1024);
    }

    #[test]
    fn correctable_errors_decode_to_identity() {
        for code in [Code::repetition_bitflip(3).unwrap(), Code::cluster_ring()] {
            let t = derive_correction_table(&code).unwrap();
            for e in t.errors() {
                assert_eq!(t.lookup(e), Some(Pauli::I), "{e}");
            }
        }
    }
}
