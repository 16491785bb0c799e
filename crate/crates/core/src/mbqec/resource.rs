//! Read-in resource states and their preparation.

use serde::{Deserialize, Serialize};

use crate::diagsim::DiagonalState;
use crate::epp::{fixed_point_with, purify_graph_with, EppSchedule, Subprotocol};
use crate::graphstate::Graph;
use crate::noise::GateNoiseModel;
use crate::{Result, SimError};

use super::code::{Code, CodeKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Role {
    Encode,
    Decode,
    /// Single `2n`-qubit GHZ state for a repetition code (inputs `0..n`, outputs `n..2n`).
    EncodeDecode,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Prep {
    Perfect,
    /// Fixed point of the purification protocol. `end` defaults to P1 (P2 for binary-like
    /// noise, which runs P2 alone) and to the last color for the cluster-ring code.
    Epp {
        model: GateNoiseModel,
        #[serde(default)]
        end: Option<Subprotocol>,
        #[serde(default)]
        aux_end: Vec<Subprotocol>,
    },
    /// `|+⟩^n` followed by one noisy CZ per edge.
    DirectGates { model: GateNoiseModel },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResourceState {
    pub role: Role,
    pub state: DiagonalState,
    pub inputs: Vec<usize>,
    pub outputs: Vec<usize>,
}

impl ResourceState {
    pub fn fidelity(&self) -> f64 {
        self.state.fidelity()
    }
}

/// Graph-diagonal state reached by CZ gates on `|+⟩^n`, noise before each gate.
/// Binary-like roles follow the two-coloring of `g`.
pub fn direct_gate_state(g: &Graph, model: &GateNoiseModel) -> Result<DiagonalState> {
    model.validate()?;
    let col = g.color();
    let set_a = if col.is_two_colorable() { col.set_a() } else { 0 };
    if matches!(model, GateNoiseModel::BinaryLike { .. }) && !col.is_two_colorable() {
        return Err(SimError::NotBipartite);
    }
    let mut cur = Graph::empty(g.n())?;
    let mut s = DiagonalState::pure(&cur);
    for (a, b) in g.edges() {
        let ch = model.pair_channel(set_a >> a & 1 == 1, set_a >> b & 1 == 1)?;
        s = s.apply_two_qubit_channel(a, b, &ch)?;
        // CZ commutes with Z^µ, so |µ⟩ of the old graph becomes |µ⟩ of the new one
        cur.add_edge(a, b)?;
        s = DiagonalState::from_raw(cur.clone(), s.coeffs().to_vec());
    }
    Ok(s)
}

/// Purification fixed point of `g` started from the pure state, with the default end
/// steps of [`Prep::Epp`].
pub fn purified_state(g: &Graph, model: &GateNoiseModel, end: Option<Subprotocol>, aux_end: &[Subprotocol]) -> Result<DiagonalState> {
    let col = g.color();
    let r = if col.is_two_colorable() && matches!(model, GateNoiseModel::BinaryLike { .. }) {
        let step = end.unwrap_or(Subprotocol::P2);
        fixed_point_with(model, &col, &EppSchedule::new(vec![step])?, &DiagonalState::pure(g), &[])?
    } else if col.is_two_colorable() {
        purify_graph_with(g, model, end.unwrap_or(Subprotocol::P1), aux_end)?
    } else {
        purify_graph_with(g, model, end.unwrap_or(Subprotocol::Color(col.k() - 1)), aux_end)?
    };
    if !r.converged {
        return Err(SimError::NotConverged(r.cycles));
    }
    Ok(r.state)
}

pub fn build_resource(code: &Code, role: Role, prep: &Prep) -> Result<ResourceState> {
    let n = code.n();
    let g = match role {
        Role::EncodeDecode => {
            if code.kind() == CodeKind::ClusterRing {
                return Err(SimError::Config("a joint encode-decode resource exists only for repetition codes".into()));
            }
            Graph::star(2 * n, 2 * n - 1)?
        }
        _ => code.resource_graph(),
    };
    let state = match prep {
        Prep::Perfect => DiagonalState::pure(&g),
        Prep::DirectGates { model } => direct_gate_state(&g, model)?,
        Prep::Epp { model, end, aux_end } => {
            if code.kind() == CodeKind::ClusterRing && role != Role::EncodeDecode {
                // purify the three-colorable form, then map to the wheel by local complementation
                let s = purified_state(&Graph::cluster_ring_three_colorable(), model, *end, aux_end)?;
                let w = s.local_complement(0)?;
                debug_assert_eq!(w.graph(), &g);
                w
            } else {
                purified_state(&g, model, *end, aux_end)?
            }
        }
    };
    let legs: Vec<usize> = (0..n).collect();
    let (inputs, outputs) = match role {
        Role::Decode => (legs, vec![n]),
        Role::Encode => (vec![n], legs),
        Role::EncodeDecode => (legs, (n..2 * n).collect()),
    };
    Ok(ResourceState { role, state, inputs, outputs })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perfect_gates_give_pure_resources() {
        for code in [Code::repetition_phaseflip(3).unwrap(), Code::cluster_ring()] {
            let r = build_resource(&code, Role::Decode, &Prep::DirectGates { model: GateNoiseModel::Perfect }).unwrap();
            assert!((r.fidelity() - 1.0).abs() < 1e-15);
            assert_eq!(r.state.graph(), &code.resource_graph());
        }
    }

    #[test]
    fn cluster_ring_epp_lands_on_wheel() {
        let prep = Prep::Epp { model: GateNoiseModel::depolarizing(0.99).unwrap(), end: None, aux_end: vec![] };
        let r = build_resource(&Code::cluster_ring(), Role::Decode, &prep).unwrap();
        assert_eq!(r.state.graph(), &Graph::cluster_ring_resource());
        assert!(r.fidelity() > 0.9 && r.fidelity() < 1.0);
    }
}
