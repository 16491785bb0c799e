//! Pauli noise channels and noisy-gate models.

use serde::{Deserialize, Serialize};

use crate::error::{check_probability, Result, SimError};
use crate::pauli::{Clifford, Pauli, PauliString};
use crate::tol;

/// Single-qubit Pauli channel `ρ → Σ_i p_i σ_i ρ σ_i`, ordered `[I, X, Y, Z]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 4]", into = "[f64; 4]")]
pub struct PauliChannel {
    p: [f64; 4],
}

impl TryFrom<[f64; 4]> for PauliChannel {
    type Error = SimError;
    fn try_from(p: [f64; 4]) -> Result<Self> {
        PauliChannel::new(p)
    }
}

impl From<PauliChannel> for [f64; 4] {
    fn from(c: PauliChannel) -> Self {
        c.p
    }
}

impl PauliChannel {
    pub fn new(p: [f64; 4]) -> Result<Self> {
        if p.iter().any(|&x| !(x >= 0.0)) {
            return Err(SimError::InvalidChannel(format!("negative weight in {p:?}")));
        }
        let s: f64 = p.iter().sum();
        if (s - 1.0).abs() > tol::NORM {
            return Err(SimError::InvalidChannel(format!("weights sum to {s}")));
        }
        Ok(PauliChannel { p })
    }

    pub fn identity() -> Self {
        PauliChannel { p: [1.0, 0.0, 0.0, 0.0] }
    }

    /// `D_x(p)`: identity with probability `p`, otherwise σ_x.
    pub fn bitflip(p: f64) -> Result<Self> {
        check_probability(p)?;
        Ok(PauliChannel { p: [p, 1.0 - p, 0.0, 0.0] })
    }

    /// `D_z(p)`.
    pub fn phaseflip(p: f64) -> Result<Self> {
        check_probability(p)?;
        Ok(PauliChannel { p: [p, 0.0, 0.0, 1.0 - p] })
    }

    /// `D_w(p)`: white noise with retention `p`.
    pub fn depolarizing(p: f64) -> Result<Self> {
        check_probability(p)?;
        let e = (1.0 - p) / 4.0;
        Ok(PauliChannel { p: [p + e, e, e, e] })
    }

    /// Identity with probability `p`, σ_x and σ_y sharing the rest.
    pub fn xy(p: f64) -> Result<Self> {
        check_probability(p)?;
        let e = (1.0 - p) / 2.0;
        Ok(PauliChannel { p: [p, e, e, 0.0] })
    }

    /// Identity with probability `p`, σ_y and σ_z sharing the rest.
    pub fn yz(p: f64) -> Result<Self> {
        check_probability(p)?;
        let e = (1.0 - p) / 2.0;
        Ok(PauliChannel { p: [p, 0.0, e, e] })
    }

    pub fn probs(&self) -> &[f64; 4] {
        &self.p
    }

    pub fn prob(&self, letter: Pauli) -> f64 {
        self.p[letter.index()]
    }

    pub fn is_identity(&self) -> bool {
        self.p[0] == 1.0
    }

    /// `w = (4 p_0 − 1)/3`; composes multiplicatively for depolarizing channels.
    pub fn white_noise_weight(&self) -> f64 {
        (4.0 * self.p[0] - 1.0) / 3.0
    }

    /// Channel `other ∘ self` (both act on the same qubit).
    pub fn then(&self, other: &PauliChannel) -> PauliChannel {
        let mut p = [0.0; 4];
        for (i, &a) in self.p.iter().enumerate() {
            for (j, &b) in other.p.iter().enumerate() {
                let k = Pauli::from_index(i).mul_unsigned(Pauli::from_index(j)).index();
                p[k] += a * b;
            }
        }
        PauliChannel { p }
    }

    /// Nonzero terms as (weight, letter).
    pub fn terms(&self) -> impl Iterator<Item = (f64, Pauli)> + '_ {
        Pauli::ALL.iter().map(|&l| (self.p[l.index()], l)).filter(|(w, _)| *w > 0.0)
    }
}

/// Named channel used in config files, e.g. `{"kind":"depolarizing","p":0.99}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ChannelSpec {
    Bitflip { p: f64 },
    Phaseflip { p: f64 },
    Depolarizing { p: f64 },
    Pauli { probs: [f64; 4] },
}

impl ChannelSpec {
    pub fn to_channel(&self) -> Result<PauliChannel> {
        match *self {
            ChannelSpec::Bitflip { p } => PauliChannel::bitflip(p),
            ChannelSpec::Phaseflip { p } => PauliChannel::phaseflip(p),
            ChannelSpec::Depolarizing { p } => PauliChannel::depolarizing(p),
            ChannelSpec::Pauli { probs } => PauliChannel::new(probs),
        }
    }
}

/// `make_channel("bitflip" | "phaseflip" | "depolarizing", p)`.
pub fn make_channel(name: &str, p: f64) -> Result<PauliChannel> {
    match name {
        "bitflip" => PauliChannel::bitflip(p),
        "phaseflip" => PauliChannel::phaseflip(p),
        "depolarizing" => PauliChannel::depolarizing(p),
        other => Err(SimError::InvalidChannel(format!("unknown channel kind {other:?}"))),
    }
}

/// Two-qubit Pauli channel; weight of `σ_i ⊗ σ_j` stored at `4 i + j`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoQubitPauliChannel {
    p: [f64; 16],
}

impl TwoQubitPauliChannel {
    pub fn new(p: [f64; 16]) -> Result<Self> {
        if p.iter().any(|&x| !(x >= 0.0)) {
            return Err(SimError::InvalidChannel("negative two-qubit weight".into()));
        }
        let s: f64 = p.iter().sum();
        if (s - 1.0).abs() > tol::NORM {
            return Err(SimError::InvalidChannel(format!("two-qubit weights sum to {s}")));
        }
        Ok(TwoQubitPauliChannel { p })
    }

    /// Identity with weight `p' + (1 − p')/16`, each other pair `(1 − p')/16`.
    pub fn depolarizing(p_prime: f64) -> Result<Self> {
        check_probability(p_prime)?;
        let e = (1.0 - p_prime) / 16.0;
        let mut p = [e; 16];
        p[0] += p_prime;
        Ok(TwoQubitPauliChannel { p })
    }

    pub fn product(a: &PauliChannel, b: &PauliChannel) -> Self {
        let mut p = [0.0; 16];
        for i in 0..4 {
            for j in 0..4 {
                p[4 * i + j] = a.p[i] * b.p[j];
            }
        }
        TwoQubitPauliChannel { p }
    }

    pub fn probs(&self) -> &[f64; 16] {
        &self.p
    }

    pub fn terms(&self) -> impl Iterator<Item = (f64, Pauli, Pauli)> + '_ {
        (0..16)
            .filter(|&k| self.p[k] > 0.0)
            .map(|k| (self.p[k], Pauli::from_index(k / 4), Pauli::from_index(k % 4)))
    }
}

/// Noise attached to every two-qubit gate; errors act just before the perfect gate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum GateNoiseModel {
    Perfect,
    /// The same single-qubit channel on both gate qubits.
    Local { channel: ChannelSpec },
    /// Two-qubit depolarizing noise with parameter `p'`.
    Correlated { p: f64 },
    /// `D_x(p)` on qubits of set A and `D_z(p)` on qubits of set B.
    BinaryLike { p: f64 },
}

impl GateNoiseModel {
    pub fn depolarizing(p: f64) -> Result<Self> {
        check_probability(p)?;
        Ok(GateNoiseModel::Local { channel: ChannelSpec::Depolarizing { p } })
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            GateNoiseModel::Perfect => Ok(()),
            GateNoiseModel::Local { channel } => channel.to_channel().map(|_| ()),
            GateNoiseModel::Correlated { p } | GateNoiseModel::BinaryLike { p } => {
                check_probability(*p).map(|_| ())
            }
        }
    }

    pub fn is_perfect(&self) -> bool {
        match self {
            GateNoiseModel::Perfect => true,
            GateNoiseModel::Local { channel } => {
                channel.to_channel().map(|c| c.is_identity()).unwrap_or(false)
            }
            GateNoiseModel::Correlated { p } | GateNoiseModel::BinaryLike { p } => *p == 1.0,
        }
    }

    /// Per-qubit channel for a gate qubit, or `None` when the noise is correlated.
    /// `in_a` selects the set-A channel of the binary-like model.
    pub fn local_channel(&self, in_a: bool) -> Result<Option<PauliChannel>> {
        Ok(match self {
            GateNoiseModel::Perfect => Some(PauliChannel::identity()),
            GateNoiseModel::Local { channel } => Some(channel.to_channel()?),
            GateNoiseModel::Correlated { .. } => None,
            GateNoiseModel::BinaryLike { p } => Some(if in_a {
                PauliChannel::bitflip(*p)?
            } else {
                PauliChannel::phaseflip(*p)?
            }),
        })
    }

    /// Two-qubit channel acting on (first, second) gate qubits.
    pub fn pair_channel(&self, first_in_a: bool, second_in_a: bool) -> Result<TwoQubitPauliChannel> {
        match self {
            GateNoiseModel::Correlated { p } => TwoQubitPauliChannel::depolarizing(*p),
            _ => {
                let a = self.local_channel(first_in_a)?.unwrap();
                let b = self.local_channel(second_in_a)?.unwrap();
                Ok(TwoQubitPauliChannel::product(&a, &b))
            }
        }
    }
}

/// Pauli-mixture decomposition of a noisy CNOT on an `n`-qubit register: each term is an
/// error applied right before the perfect CNOT. `in_a` gives the binary-like roles of
/// (source, target).
pub fn noisy_cnot_mixture(
    model: &GateNoiseModel,
    n: usize,
    source: usize,
    target: usize,
    in_a: (bool, bool),
) -> Result<Vec<(f64, PauliString, Clifford)>> {
    let gate = Clifford::Cnot { control: source, target };
    gate.check(n)?;
    let ch = model.pair_channel(in_a.0, in_a.1)?;
    Ok(ch
        .terms()
        .map(|(w, a, b)| {
            let mut p = PauliString::single(n, source, a);
            p.set(target, b);
            (w, p, gate)
        })
        .collect())
}

/// `P'` with `G P = P' G`, phases tracked.
pub fn conjugate_pauli_through_clifford(p: &PauliString, gate: &Clifford) -> Result<PauliString> {
    p.conjugate(gate)
}

/// `ρ → p̃ ρ + (1 − p̃) 1/2^N`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GlobalDepolarizing {
    p: f64,
    n: usize,
}

impl GlobalDepolarizing {
    pub fn new(p: f64, n: usize) -> Result<Self> {
        check_probability(p)?;
        Ok(GlobalDepolarizing { p, n })
    }

    pub fn retention(&self) -> f64 {
        self.p
    }

    pub fn n(&self) -> usize {
        self.n
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn named_channels() {
        assert_eq!(make_channel("depolarizing", 1.0).unwrap().probs(), &[1.0, 0.0, 0.0, 0.0]);
        let z = make_channel("phaseflip", 0.9).unwrap();
        assert!((z.probs()[0] - 0.9).abs() < 1e-15 && (z.probs()[3] - 0.1).abs() < 1e-15);
        assert_eq!(make_channel("depolarizing", 0.0).unwrap().probs(), &[0.25; 4]);
        assert_eq!(make_channel("bitflip", 0.7).unwrap().probs(), &[0.7, 0.30000000000000004, 0.0, 0.0]);
        assert!(make_channel("bitflip", 1.2).is_err());
        assert!(make_channel("amplitude", 0.5).is_err());
    }

    #[test]
    fn channel_json() {
        let spec: ChannelSpec = serde_json::from_str(r#"{"kind":"depolarizing","p":0.99}"#).unwrap();
        assert_eq!(spec, ChannelSpec::Depolarizing { p: 0.99 });
        let m: GateNoiseModel = serde_json::from_str(r#"{"kind":"binary-like","p":0.9}"#).unwrap();
        assert_eq!(m, GateNoiseModel::BinaryLike { p: 0.9 });
        assert!(serde_json::from_str::<PauliChannel>("[0.5,0.5,0.5,0.0]").is_err());
    }

    #[test]
    fn cnot_mixtures() {
        let perfect = noisy_cnot_mixture(&GateNoiseModel::Perfect, 2, 0, 1, (true, true)).unwrap();
        assert_eq!(perfect.len(), 1);
        assert!(perfect[0].1.is_identity_up_to_phase());

        let p = 0.93;
        let local = GateNoiseModel::depolarizing(p).unwrap();
        let terms = noisy_cnot_mixture(&local, 2, 0, 1, (true, true)).unwrap();
        let id = terms.iter().find(|t| t.1.is_identity_up_to_phase()).unwrap().0;
        assert!((id - (p + (1.0 - p) / 4.0).powi(2)).abs() < 1e-15);

        let corr = noisy_cnot_mixture(&GateNoiseModel::Correlated { p }, 3, 2, 0, (true, true)).unwrap();
        assert_eq!(corr.len(), 16);
        let id = corr.iter().find(|t| t.1.is_identity_up_to_phase()).unwrap().0;
        assert!((id - (p + (1.0 - p) / 16.0)).abs() < 1e-15);
        assert!(corr.iter().filter(|t| !t.1.is_identity_up_to_phase()).all(|t| (t.0 - (1.0 - p) / 16.0).abs() < 1e-15));

        assert!(noisy_cnot_mixture(&local, 2, 1, 1, (true, true)).is_err());
    }

    #[test]
    fn depolarizing_composition() {
        let a = PauliChannel::depolarizing(0.9).unwrap();
        let b = PauliChannel::depolarizing(0.8).unwrap();
        let c = a.then(&b);
        assert!((c.white_noise_weight() - 0.72).abs() < 1e-14);
    }

    #[test]
    fn propagation_examples() {
        let cnot = Clifford::Cnot { control: 0, target: 1 };
        let x: PauliString = "XI".parse().unwrap();
        assert_eq!(conjugate_pauli_through_clifford(&x, &cnot).unwrap().to_string(), "XX");
        let z: PauliString = "ZI".parse().unwrap();
        assert_eq!(conjugate_pauli_through_clifford(&z, &cnot).unwrap().to_string(), "ZI");
        let z1: PauliString = "Z".parse().unwrap();
        assert_eq!(conjugate_pauli_through_clifford(&z1, &Clifford::SqrtX(0)).unwrap().to_string(), "-Y");
    }
}
