//! Pauli strings in symplectic form and their propagation through Clifford gates.
//!
//! A [`PauliString`] stores `i^phase · X^x · Z^z` where `x` and `z` are bit masks
//! over qubits (bit `j` is qubit `j`). `Y_j` is therefore `i · X_j Z_j`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Result, SimError};

/// Single-qubit Pauli letter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub const ALL: [Pauli; 4] = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];

    /// Index in the `[I, X, Y, Z]` ordering used by channel parameter vectors.
    pub fn index(self) -> usize {
        match self {
            Pauli::I => 0,
            Pauli::X => 1,
            Pauli::Y => 2,
            Pauli::Z => 3,
        }
    }

    pub fn from_index(i: usize) -> Pauli {
        Pauli::ALL[i & 3]
    }

    pub fn from_bits(x: bool, z: bool) -> Pauli {
        match (x, z) {
            (false, false) => Pauli::I,
            (true, false) => Pauli::X,
            (true, true) => Pauli::Y,
            (false, true) => Pauli::Z,
        }
    }

    pub fn bits(self) -> (bool, bool) {
        match self {
            Pauli::I => (false, false),
            Pauli::X => (true, false),
            Pauli::Y => (true, true),
            Pauli::Z => (false, true),
        }
    }

    /// Product ignoring phase.
    pub fn mul_unsigned(self, other: Pauli) -> Pauli {
        let (a, b) = self.bits();
        let (c, d) = other.bits();
        Pauli::from_bits(a ^ c, b ^ d)
    }

    pub fn symbol(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }
}

/// Multi-qubit Pauli operator with a phase `i^phase`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PauliString {
    n: usize,
    x: u64,
    z: u64,
    phase: u8,
}

impl PauliString {
    pub fn identity(n: usize) -> Self {
        PauliString { n, x: 0, z: 0, phase: 0 }
    }

    /// Builds `i^phase X^x Z^z` directly from masks.
    pub fn from_masks(n: usize, x: u64, z: u64, phase: u8) -> Self {
        let m = mask(n);
        PauliString { n, x: x & m, z: z & m, phase: phase & 3 }
    }

    /// Hermitian Pauli with the given letters (so `Y` means the usual Pauli matrix).
    pub fn from_letters(letters: &[Pauli]) -> Self {
        let mut p = PauliString::identity(letters.len());
        for (j, &l) in letters.iter().enumerate() {
            p.set(j, l);
        }
        p
    }

    pub fn single(n: usize, qubit: usize, letter: Pauli) -> Self {
        let mut p = PauliString::identity(n);
        p.set(qubit, letter);
        p
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn x_mask(&self) -> u64 {
        self.x
    }

    pub fn z_mask(&self) -> u64 {
        self.z
    }

    /// Phase exponent `k` of the prefactor `i^k` relative to `X^x Z^z`.
    pub fn phase(&self) -> u8 {
        self.phase
    }

    /// Phase exponent relative to the Hermitian product of letters (Y as the Pauli matrix).
    pub fn letter_phase(&self) -> u8 {
        let ny = (self.x & self.z).count_ones() as u8;
        (self.phase + 4 - (ny % 4)) % 4
    }

    pub fn letter(&self, qubit: usize) -> Pauli {
        Pauli::from_bits(self.x >> qubit & 1 == 1, self.z >> qubit & 1 == 1)
    }

    pub fn letters(&self) -> Vec<Pauli> {
        (0..self.n).map(|j| self.letter(j)).collect()
    }

    /// Replaces the letter on `qubit`, keeping the operator Hermitian-normalized
    /// for that position.
    pub fn set(&mut self, qubit: usize, letter: Pauli) {
        let old_y = self.letter(qubit) == Pauli::Y;
        let bit = 1u64 << qubit;
        self.x &= !bit;
        self.z &= !bit;
        let (x, z) = letter.bits();
        if x {
            self.x |= bit;
        }
        if z {
            self.z |= bit;
        }
        let new_y = letter == Pauli::Y;
        if old_y {
            self.phase = (self.phase + 3) % 4;
        }
        if new_y {
            self.phase = (self.phase + 1) % 4;
        }
    }

    pub fn weight(&self) -> u32 {
        (self.x | self.z).count_ones()
    }

    pub fn is_identity_up_to_phase(&self) -> bool {
        self.x == 0 && self.z == 0
    }

    /// Operator product `self · other`.
    pub fn mul(&self, other: &PauliString) -> PauliString {
        assert_eq!(self.n, other.n, "pauli length mismatch");
        // X^a Z^b X^c Z^d = (-1)^{b·c} X^{a+c} Z^{b+d}
        let sign = ((self.z & other.x).count_ones() & 1) as u8 * 2;
        PauliString {
            n: self.n,
            x: self.x ^ other.x,
            z: self.z ^ other.z,
            phase: (self.phase + other.phase + sign) % 4,
        }
    }

    pub fn commutes_with(&self, other: &PauliString) -> bool {
        ((self.x & other.z).count_ones() + (self.z & other.x).count_ones()) % 2 == 0
    }

    /// Same operator up to a global phase.
    pub fn eq_up_to_phase(&self, other: &PauliString) -> bool {
        self.n == other.n && self.x == other.x && self.z == other.z
    }

    pub fn without_phase(&self) -> PauliString {
        PauliString { phase: 0, ..*self }
    }

    /// Restricts to a sub-register given by `qubits` (new qubit `k` is old `qubits[k]`).
    pub fn restrict(&self, qubits: &[usize]) -> PauliString {
        let letters: Vec<Pauli> = qubits.iter().map(|&q| self.letter(q)).collect();
        PauliString::from_letters(&letters)
    }

    /// Conjugates by a Clifford gate: returns `P'` with `G · P = P' · G`.
    pub fn conjugate(&self, gate: &Clifford) -> Result<PauliString> {
        gate.check(self.n)?;
        let mut out = PauliString { n: self.n, x: 0, z: 0, phase: self.phase };
        for j in 0..self.n {
            if self.x >> j & 1 == 1 {
                out = out.mul(&gate.image_x(self.n, j));
            }
        }
        for j in 0..self.n {
            if self.z >> j & 1 == 1 {
                out = out.mul(&gate.image_z(self.n, j));
            }
        }
        Ok(out)
    }
}

fn mask(n: usize) -> u64 {
    if n >= 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let prefix = match self.letter_phase() {
            0 => "",
            1 => "i",
            2 => "-",
            _ => "-i",
        };
        write!(f, "{prefix}")?;
        for j in 0..self.n {
            write!(f, "{}", self.letter(j).symbol())?;
        }
        Ok(())
    }
}

impl FromStr for PauliString {
    type Err = SimError;

    fn from_str(s: &str) -> Result<Self> {
        let (phase, body) = if let Some(rest) = s.strip_prefix("-i") {
            (3, rest)
        } else if let Some(rest) = s.strip_prefix('-') {
            (2, rest)
        } else if let Some(rest) = s.strip_prefix('i') {
            (1, rest)
        } else if let Some(rest) = s.strip_prefix('+') {
            (0, rest)
        } else {
            (0, s)
        };
        let letters = body
            .chars()
            .map(|c| match c {
                'I' | '1' | '_' => Ok(Pauli::I),
                'X' => Ok(Pauli::X),
                'Y' => Ok(Pauli::Y),
                'Z' => Ok(Pauli::Z),
                other => Err(SimError::Parse(format!("bad pauli letter {other:?}"))),
            })
            .collect::<Result<Vec<_>>>()?;
        if letters.len() > 64 {
            return Err(SimError::Parse("pauli string longer than 64".into()));
        }
        let mut p = PauliString::from_letters(&letters);
        p.phase = (p.phase + phase) % 4;
        Ok(p)
    }
}

/// Clifford gates used by the circuits in this crate.
///
/// `SqrtZ` is `diag(1, i)` and `SqrtX` is `H · SqrtZ · H`; the rotations
/// `√(iσ_z)` and `√(−iσ_x)` equal `SqrtZ†` and `SqrtX` up to global phase.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Clifford {
    H(usize),
    SqrtZ(usize),
    SqrtZDag(usize),
    SqrtX(usize),
    SqrtXDag(usize),
    Cnot { control: usize, target: usize },
    Cz(usize, usize),
}

impl Clifford {
    pub fn qubits(&self) -> Vec<usize> {
        match *self {
            Clifford::H(q)
            | Clifford::SqrtZ(q)
            | Clifford::SqrtZDag(q)
            | Clifford::SqrtX(q)
            | Clifford::SqrtXDag(q) => vec![q],
            Clifford::Cnot { control, target } => vec![control, target],
            Clifford::Cz(a, b) => vec![a, b],
        }
    }

    pub fn check(&self, n: usize) -> Result<()> {
        let qs = self.qubits();
        if qs.iter().any(|&q| q >= n) {
            return Err(SimError::InvalidQubits(format!("{self:?} on {n} qubits")));
        }
        if qs.len() == 2 && qs[0] == qs[1] {
            return Err(SimError::InvalidQubits(format!("{self:?} repeats a qubit")));
        }
        Ok(())
    }

    /// Inverse gate.
    pub fn inverse(&self) -> Clifford {
        match *self {
            Clifford::SqrtZ(q) => Clifford::SqrtZDag(q),
            Clifford::SqrtZDag(q) => Clifford::SqrtZ(q),
            Clifford::SqrtX(q) => Clifford::SqrtXDag(q),
            Clifford::SqrtXDag(q) => Clifford::SqrtX(q),
            g => g,
        }
    }

    fn image_x(&self, n: usize, j: usize) -> PauliString {
        let x = |q: usize| PauliString::single(n, q, Pauli::X);
        let z = |q: usize| PauliString::single(n, q, Pauli::Z);
        match *self {
            Clifford::H(q) if q == j => z(j),
            // S X S† = Y
            Clifford::SqrtZ(q) if q == j => PauliString::single(n, j, Pauli::Y),
            Clifford::SqrtZDag(q) if q == j => PauliString::single(n, j, Pauli::Y).mul(&neg(n)),
            Clifford::Cnot { control, target } if control == j => x(control).mul(&x(target)),
            Clifford::Cz(a, b) if a == j => x(a).mul(&z(b)),
            Clifford::Cz(a, b) if b == j => z(a).mul(&x(b)),
            _ => x(j),
        }
    }

    fn image_z(&self, n: usize, j: usize) -> PauliString {
        let z = |q: usize| PauliString::single(n, q, Pauli::Z);
        match *self {
            Clifford::H(q) if q == j => PauliString::single(n, j, Pauli::X),
            // √X Z √X† = −Y
            Clifford::SqrtX(q) if q == j => PauliString::single(n, j, Pauli::Y).mul(&neg(n)),
            Clifford::SqrtXDag(q) if q == j => PauliString::single(n, j, Pauli::Y),
            Clifford::Cnot { control, target } if target == j => z(control).mul(&z(target)),
            _ => z(j),
        }
    }
}

fn neg(n: usize) -> PauliString {
    PauliString::from_masks(n, 0, 0, 2)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_display() {
        let p: PauliString = "XZZI".parse().unwrap();
        assert_eq!(p.to_string(), "XZZI");
        assert_eq!(p.letter(0), Pauli::X);
        assert_eq!(p.letter(3), Pauli::I);
        let y: PauliString = "-Y".parse().unwrap();
        assert_eq!(y.to_string(), "-Y");
    }

    #[test]
    fn products() {
        let x: PauliString = "X".parse().unwrap();
        let z: PauliString = "Z".parse().unwrap();
        let y: PauliString = "Y".parse().unwrap();
        // ZX = iY, XZ = -iY
        assert_eq!(z.mul(&x).to_string(), "iY");
        assert_eq!(x.mul(&z).to_string(), "-iY");
        assert!(y.mul(&y).is_identity_up_to_phase());
        assert_eq!(y.mul(&y).letter_phase(), 0);
        assert!(!x.commutes_with(&z));
    }

    #[test]
    fn cnot_propagation() {
        let cnot = Clifford::Cnot { control: 0, target: 1 };
        let x0: PauliString = "XI".parse().unwrap();
        let z0: PauliString = "ZI".parse().unwrap();
        let z1: PauliString = "IZ".parse().unwrap();
        assert_eq!(x0.conjugate(&cnot).unwrap().to_string(), "XX");
        assert_eq!(z0.conjugate(&cnot).unwrap().to_string(), "ZI");
        assert_eq!(z1.conjugate(&cnot).unwrap().to_string(), "ZZ");
    }

    #[test]
    fn sqrt_x_maps_z_to_minus_y() {
        let z: PauliString = "Z".parse().unwrap();
        assert_eq!(z.conjugate(&Clifford::SqrtX(0)).unwrap().to_string(), "-Y");
        let x: PauliString = "X".parse().unwrap();
        assert_eq!(x.conjugate(&Clifford::SqrtZ(0)).unwrap().to_string(), "Y");
    }

    #[test]
    fn invalid_gate_rejected() {
        let p = PauliString::identity(2);
        assert!(p.conjugate(&Clifford::Cnot { control: 1, target: 1 }).is_err());
        assert!(p.conjugate(&Clifford::H(3)).is_err());
    }
}
