//! Recurrence purification of graph states: the two-colorable subprotocols P1/P2 and
//! the protocol for arbitrary graphs that checks one color class at a time against
//! two-colorable auxiliary states.
//!
//! Every step pairs qubit `v` of the main state with qubit `v` of the auxiliary state
//! through a CNOT (auxiliary qubit as control on the checked class, main qubit as
//! control elsewhere), measures the auxiliary state and keeps the main state when all
//! checked correlation operators read `+1`. On graph-basis indices this is
//! `µ → (µ_C, µ_O ⊕ ν_O)`, `ν → (ν_C ⊕ µ_C, ν_O)`, success iff `µ_C = ν_C`.

use serde::{Deserialize, Serialize};

use crate::diagsim::{DiagonalState, JointDiagonalState};
use crate::error::{Result, SimError};
use crate::graphstate::{bits, Coloring, Graph};
use crate::noise::GateNoiseModel;
use crate::tol;

/// One purification subprotocol.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Subprotocol {
    /// Checks set A of a two-colorable state.
    P1,
    /// Checks set B of a two-colorable state.
    P2,
    /// Checks color class `i` against auxiliary state `g_i`.
    Color(usize),
}

/// Cyclic sequence of subprotocols with a convergence rule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EppSchedule {
    pub cycle: Vec<Subprotocol>,
    pub max_cycles: usize,
    pub tolerance: f64,
}

impl EppSchedule {
    pub const DEFAULT_MAX_CYCLES: usize = 500;
    pub const DEFAULT_TOLERANCE: f64 = 1e-12;

    pub fn new(cycle: Vec<Subprotocol>) -> Result<Self> {
        if cycle.is_empty() {
            return Err(SimError::Config("empty purification schedule".into()));
        }
        Ok(EppSchedule { cycle, max_cycles: Self::DEFAULT_MAX_CYCLES, tolerance: Self::DEFAULT_TOLERANCE })
    }

    /// Alternating P1, P2 with the given final step.
    pub fn alternating(end: Subprotocol) -> Self {
        let cycle = match end {
            Subprotocol::P2 => vec![Subprotocol::P1, Subprotocol::P2],
            _ => vec![Subprotocol::P2, Subprotocol::P1],
        };
        EppSchedule { cycle, max_cycles: Self::DEFAULT_MAX_CYCLES, tolerance: Self::DEFAULT_TOLERANCE }
    }

    /// `P_1 .. P_k` in cyclic order, ending with color `end`.
    pub fn colors(k: usize, end: usize) -> Self {
        let cycle = (1..=k).map(|i| Subprotocol::Color((end + i) % k)).collect();
        EppSchedule { cycle, max_cycles: Self::DEFAULT_MAX_CYCLES, tolerance: Self::DEFAULT_TOLERANCE }
    }

    pub fn validate(&self) -> Result<()> {
        if self.cycle.is_empty() {
            return Err(SimError::Config("empty purification schedule".into()));
        }
        if !(self.tolerance > 0.0) || self.max_cycles == 0 {
            return Err(SimError::Config("schedule needs positive tolerance and cycle limit".into()));
        }
        Ok(())
    }

    pub fn last(&self) -> Subprotocol {
        *self.cycle.last().unwrap()
    }
}

/// Outcome of iterating a schedule.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EppResult {
    pub state: DiagonalState,
    pub cycles: usize,
    pub success_probabilities: Vec<f64>,
    pub converged: bool,
    pub final_step: Subprotocol,
}

/// Purification step of `main` against `aux`. `active` lists the main vertices taking
/// part (auxiliary qubit `k` pairs with main vertex `active[k]`), `checked` is the mask
/// of main vertices whose correlation operators are tested, and `roles` marks set-A
/// vertices for the binary-like gate model.
pub fn purification_step(
    main: &DiagonalState,
    aux: &DiagonalState,
    active: &[usize],
    checked: u64,
    roles: u64,
    model: &GateNoiseModel,
) -> Result<(DiagonalState, f64)> {
    let n = main.n();
    if aux.n() != active.len() {
        return Err(SimError::GraphMismatch(format!(
            "auxiliary state has {} qubits, step pairs {}",
            aux.n(),
            active.len()
        )));
    }
    let act_mask = active.iter().try_fold(0u64, |m, &v| {
        if v >= n {
            Err(SimError::VertexOutOfRange { vertex: v, n })
        } else {
            Ok(m | 1 << v)
        }
    })?;
    if checked & !act_mask != 0 {
        return Err(SimError::GraphMismatch("checked vertex without auxiliary partner".into()));
    }
    let other = act_mask & !checked;
    let embed: Vec<u64> = (0..1u64 << aux.n())
        .map(|nu| bits(nu).fold(0u64, |e, k| e | 1 << active[k]))
        .collect();

    let (out, success) = match model {
        GateNoiseModel::Correlated { .. } => {
            let mut joint = JointDiagonalState::product(main, aux)?;
            for (k, &v) in active.iter().enumerate() {
                let ch = model.pair_channel(roles >> v & 1 == 1, roles >> v & 1 == 1)?;
                let terms: Vec<(f64, u64)> = ch
                    .terms()
                    .map(|(w, la, lb)| (w, joint.pauli_mask(false, v, la) ^ joint.pauli_mask(true, k, lb)))
                    .collect();
                joint = joint.apply_mask_mixture(&terms);
            }
            let mut out = vec![0.0; 1 << n];
            let mut success = 0.0;
            for (idx, &w) in joint.coeffs().iter().enumerate() {
                if w == 0.0 {
                    continue;
                }
                let (mu, nu) = joint.split(idx);
                let e = embed[nu as usize];
                if (mu ^ e) & checked == 0 {
                    out[(mu ^ (e & other)) as usize] += w;
                    success += w;
                }
            }
            (out, success)
        }
        _ => {
            let mut m = main.clone();
            let mut a = aux.clone();
            if !model.is_perfect() {
                for (k, &v) in active.iter().enumerate() {
                    let ch = model.local_channel(roles >> v & 1 == 1)?.expect("local model");
                    m = m.apply_local_channel(v, &ch)?;
                    a = a.apply_local_channel(k, &ch)?;
                }
            }
            let mut out = vec![0.0; 1 << n];
            let mut success = 0.0;
            for (nu, &y) in a.coeffs().iter().enumerate() {
                if y == 0.0 {
                    continue;
                }
                let e = embed[nu];
                let e_c = e & checked;
                let e_o = e & other;
                // only µ with µ_C = ν_C survive
                let free = !checked & ((1u64 << n) - 1);
                let mut sub = free;
                loop {
                    let mu = sub | e_c;
                    let x = m.coeffs()[mu as usize];
                    if x != 0.0 {
                        out[(mu ^ e_o) as usize] += x * y;
                        success += x * y;
                    }
                    if sub == 0 {
                        break;
                    }
                    sub = (sub - 1) & free;
                }
            }
            (out, success)
        }
    };
    if !(success > tol::MIN_SUCCESS) {
        return Err(SimError::ProtocolFailure(success));
    }
    // dividing by the kept weight itself stops rounding drift over long iterations
    let kept: f64 = out.iter().sum();
    let coeffs = out.into_iter().map(|x| x / kept).collect();
    Ok((DiagonalState::new(main.graph().clone(), coeffs)?, success))
}

fn two_colorable_sets(coloring: &Coloring, which: Subprotocol) -> Result<u64> {
    if !coloring.is_two_colorable() {
        return Err(SimError::NotBipartite);
    }
    match which {
        Subprotocol::P1 => Ok(coloring.set_a()),
        Subprotocol::P2 => Ok(coloring.set_b()),
        Subprotocol::Color(_) => Err(SimError::Config("color step needs auxiliary states".into())),
    }
}

/// Index action of the perfect multilateral CNOT of P1 (`P2` swaps the roles of A and B).
pub fn multilateral_cnot(
    joint: &JointDiagonalState,
    coloring: &Coloring,
    which: Subprotocol,
) -> Result<JointDiagonalState> {
    let checked = two_colorable_sets(coloring, which)?;
    if joint.first_graph() != joint.second_graph() {
        return Err(SimError::GraphMismatch("copies on different graphs".into()));
    }
    let other = !checked;
    Ok(joint.map_indices(|mu, nu| (mu ^ (nu & other), nu ^ (mu & checked))))
}

/// One step of P1 or P2 on two copies of `s`.
pub fn p_step(
    s: &DiagonalState,
    coloring: &Coloring,
    model: &GateNoiseModel,
    which: Subprotocol,
) -> Result<(DiagonalState, f64)> {
    if !coloring.is_proper_for(s.graph()) {
        return Err(SimError::GraphMismatch("coloring does not fit graph".into()));
    }
    let checked = two_colorable_sets(coloring, which)?;
    let active: Vec<usize> = (0..s.n()).collect();
    purification_step(s, s, &active, checked, coloring.set_a(), model)
}

/// Auxiliary graph for color `color`: the edges touching the class, restricted to the
/// class and its neighborhood. Returns the graph and the main vertices it covers.
pub fn auxiliary_graph(g: &Graph, coloring: &Coloring, color: usize) -> Result<(Graph, Vec<usize>)> {
    let class = coloring.class_mask(color);
    let mut act = class;
    for v in bits(class) {
        act |= g.neighbor_mask(v);
    }
    let active: Vec<usize> = bits(act).collect();
    let sub = g.edges_incident_to(class).induced(&active)?;
    Ok((sub, active))
}

/// One step of the protocol for arbitrary graphs, checking class `color`.
pub fn allgraph_step(
    s: &DiagonalState,
    coloring: &Coloring,
    aux: &[DiagonalState],
    model: &GateNoiseModel,
    color: usize,
) -> Result<(DiagonalState, f64)> {
    if !coloring.is_proper_for(s.graph()) {
        return Err(SimError::GraphMismatch("coloring does not fit graph".into()));
    }
    if color >= coloring.k() || aux.len() != coloring.k() {
        return Err(SimError::GraphMismatch("one auxiliary state per color required".into()));
    }
    let (g_i, active) = auxiliary_graph(s.graph(), coloring, color)?;
    if aux[color].graph() != &g_i {
        return Err(SimError::GraphMismatch(format!("auxiliary state for color {color} has the wrong graph")));
    }
    let roles = if coloring.is_two_colorable() { coloring.set_a() } else { 0 };
    purification_step(s, &aux[color], &active, coloring.class_mask(color), roles, model)
}

/// Iterates two-colorable purification on `initial`.
pub fn fixed_point(
    model: &GateNoiseModel,
    schedule: &EppSchedule,
    initial: &DiagonalState,
) -> Result<EppResult> {
    fixed_point_with(model, &initial.graph().color(), schedule, initial, &[])
}

/// Iterates a schedule; `aux` is required when the schedule uses color steps.
pub fn fixed_point_with(
    model: &GateNoiseModel,
    coloring: &Coloring,
    schedule: &EppSchedule,
    initial: &DiagonalState,
    aux: &[DiagonalState],
) -> Result<EppResult> {
    schedule.validate()?;
    model.validate()?;
    let mut state = initial.clone();
    let mut probs = Vec::new();
    for cycle in 1..=schedule.max_cycles {
        let before = state.clone();
        for &step in &schedule.cycle {
            let (next, p) = match step {
                Subprotocol::Color(c) => allgraph_step(&state, coloring, aux, model, c)?,
                _ => p_step(&state, coloring, model, step)?,
            };
            state = next;
            probs.push(p);
        }
        if state.max_diff(&before) < schedule.tolerance {
            return Ok(EppResult { state, cycles: cycle, success_probabilities: probs, converged: true, final_step: schedule.last() });
        }
    }
    Ok(EppResult {
        state,
        cycles: schedule.max_cycles,
        success_probabilities: probs,
        converged: false,
        final_step: schedule.last(),
    })
}

/// Fixed points of the two-colorable protocol for every auxiliary graph, each started
/// from the pure state and ended with `end` (P1 or P2).
pub fn auxiliary_fixed_points(
    g: &Graph,
    coloring: &Coloring,
    model: &GateNoiseModel,
    end: &[Subprotocol],
) -> Result<Vec<DiagonalState>> {
    (0..coloring.k())
        .map(|c| {
            let (g_i, _) = auxiliary_graph(g, coloring, c)?;
            let col = g_i.color();
            let end_c = end.get(c).copied().unwrap_or(Subprotocol::P1);
            let r = fixed_point_with(model, &col, &EppSchedule::alternating(end_c), &DiagonalState::pure(&g_i), &[])?;
            if !r.converged {
                return Err(SimError::NotConverged(r.cycles));
            }
            Ok(r.state)
        })
        .collect()
}

/// Fixed point of the default schedule for `g` started from the pure state: alternating
/// P1/P2 for two-colorable graphs, the color cycle with auxiliary fixed points otherwise.
/// `end` is P1/P2 or `Color(i)` accordingly.
pub fn purify_graph(g: &Graph, model: &GateNoiseModel, end: Subprotocol) -> Result<EppResult> {
    purify_graph_with(g, model, end, &[])
}

/// Like [`purify_graph`], with explicit final steps for the auxiliary states of a
/// k-colorable graph (P1 where missing).
pub fn purify_graph_with(g: &Graph, model: &GateNoiseModel, end: Subprotocol, aux_end: &[Subprotocol]) -> Result<EppResult> {
    let coloring = g.color();
    let pure = DiagonalState::pure(g);
    if coloring.is_two_colorable() {
        if let Subprotocol::Color(_) = end {
            return Err(SimError::Config("two-colorable graphs end with P1 or P2".into()));
        }
        return fixed_point_with(model, &coloring, &EppSchedule::alternating(end), &pure, &[]);
    }
    let Subprotocol::Color(last) = end else {
        return Err(SimError::Config(format!("graph needs {} colors; end with a color step", coloring.k())));
    };
    if last >= coloring.k() {
        return Err(SimError::Config(format!("color {last} out of range")));
    }
    let aux = auxiliary_fixed_points(g, &coloring, model, aux_end)?;
    fixed_point_with(model, &coloring, &EppSchedule::colors(coloring.k(), last), &pure, &aux)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::noise::PauliChannel;

    fn ghz4_binary(c0: f64, c1: f64) -> DiagonalState {
        // µ_A = 0, coefficient depends only on the weight of µ_B (1 or 0 flips here)
        let g = Graph::ghz(4).unwrap();
        let mut coeffs = vec![0.0; 16];
        coeffs[0] = c0;
        for b in 1..4 {
            coeffs[1 << b] = c1;
        }
        DiagonalState::new(g, coeffs).unwrap()
    }

    #[test]
    fn multilateral_cnot_rule() {
        let g = Graph::ghz(4).unwrap();
        let col = g.color();
        let mu = DiagonalState::basis(&g, 0b0100);
        let nu = DiagonalState::pure(&g);
        let j = JointDiagonalState::product(&mu, &nu).unwrap();
        let out = multilateral_cnot(&j, &col, Subprotocol::P1).unwrap();
        let (m, n) = out.split(out.coeffs().iter().position(|&w| w == 1.0).unwrap());
        assert_eq!((m, n), (0b0100, 0));
        // A-bits of the first copy move to the second copy
        let j = JointDiagonalState::product(&DiagonalState::basis(&g, 0b0001), &nu).unwrap();
        let out = multilateral_cnot(&j, &col, Subprotocol::P1).unwrap();
        let (m, n) = out.split(out.coeffs().iter().position(|&w| w == 1.0).unwrap());
        assert_eq!((m, n), (0b0001, 0b0001));
    }

    #[test]
    fn multilateral_cnot_is_a_permutation() {
        let g = Graph::line(3).unwrap();
        let col = g.color();
        for which in [Subprotocol::P1, Subprotocol::P2] {
            let mut seen = std::collections::HashSet::new();
            for mu in 0..8u64 {
                for nu in 0..8u64 {
                    let j = JointDiagonalState::product(&DiagonalState::basis(&g, mu), &DiagonalState::basis(&g, nu)).unwrap();
                    let out = multilateral_cnot(&j, &col, which).unwrap();
                    seen.insert(out.coeffs().iter().position(|&w| w == 1.0).unwrap());
                }
            }
            assert_eq!(seen.len(), 64);
        }
    }

    #[test]
    fn perfect_steps_keep_pure_state() {
        let g = Graph::ghz(4).unwrap();
        for which in [Subprotocol::P1, Subprotocol::P2] {
            let (s, p) = p_step(&DiagonalState::pure(&g), &g.color(), &GateNoiseModel::Perfect, which).unwrap();
            assert_eq!(p, 1.0);
            assert_eq!(s.fidelity(), 1.0);
        }
    }

    #[test]
    fn binary_mixture_squares_under_p2_and_convolves_under_p1() {
        let s = ghz4_binary(0.4, 0.2);
        let g = s.graph().clone();
        let (out, p) = p_step(&s, &g.color(), &GateNoiseModel::Perfect, Subprotocol::P2).unwrap();
        let norm = 0.16 + 3.0 * 0.04;
        assert!((p - norm).abs() < 1e-15);
        assert!((out.coeff(0) - 0.16 / norm).abs() < 1e-15);
        assert!((out.coeff(0b0010) - 0.04 / norm).abs() < 1e-15);
        let (out, p) = p_step(&s, &g.color(), &GateNoiseModel::Perfect, Subprotocol::P1).unwrap();
        assert!((p - 1.0).abs() < 1e-15);
        // two single flips on different leaves combine to a weight-two flip
        assert!((out.coeff(0b0110) - 2.0 * 0.04).abs() < 1e-15);
        assert!((out.coeff(0) - (0.16 + 3.0 * 0.04)).abs() < 1e-15);
    }

    #[test]
    fn perfect_fixed_point_is_pure() {
        let g = Graph::ghz(4).unwrap();
        let s = DiagonalState::pure(&g).apply_channel_everywhere(&PauliChannel::depolarizing(0.85).unwrap());
        let r = fixed_point(&GateNoiseModel::Perfect, &EppSchedule::alternating(Subprotocol::P1), &s).unwrap();
        assert!(r.converged);
        assert!(r.state.fidelity() > 1.0 - 1e-10);
    }

    #[test]
    fn noisy_fixed_point_independent_of_start() {
        let g = Graph::ghz(4).unwrap();
        let model = GateNoiseModel::depolarizing(0.97).unwrap();
        let a = DiagonalState::pure(&g);
        let b = a.apply_channel_everywhere(&PauliChannel::depolarizing(0.9).unwrap());
        let sched = EppSchedule::alternating(Subprotocol::P1);
        let ra = fixed_point(&model, &sched, &a).unwrap();
        let rb = fixed_point(&model, &sched, &b).unwrap();
        assert!(ra.converged && rb.converged);
        assert!(ra.state.max_diff(&rb.state) < 1e-8);
        assert!(ra.state.fidelity() < 1.0);
    }

    #[test]
    fn maximally_mixed_auxiliary_state() {
        let g = Graph::ring(5).unwrap();
        let col = g.color();
        assert_eq!(col.k(), 3);
        let main = DiagonalState::pure(&g).apply_channel_everywhere(&PauliChannel::depolarizing(0.9).unwrap());
        for c in 0..3 {
            let aux: Vec<DiagonalState> =
                (0..3).map(|i| DiagonalState::maximally_mixed(&auxiliary_graph(&g, &col, i).unwrap().0)).collect();
            let (out, p) = allgraph_step(&main, &col, &aux, &GateNoiseModel::Perfect, c).unwrap();
            let size = col.class_mask(c).count_ones() as i32;
            assert!((p - 0.5f64.powi(size)).abs() < 1e-14);
            assert!(out.fidelity() <= main.fidelity());
        }
    }

    #[test]
    fn wrong_auxiliary_graph_rejected() {
        let g = Graph::ring(5).unwrap();
        let col = g.color();
        let aux: Vec<DiagonalState> = (0..3).map(|_| DiagonalState::pure(&Graph::ring(5).unwrap())).collect();
        assert!(allgraph_step(&DiagonalState::pure(&g), &col, &aux, &GateNoiseModel::Perfect, 0).is_err());
        assert!(p_step(&DiagonalState::pure(&g), &col, &GateNoiseModel::Perfect, Subprotocol::P1).is_err());
    }

    #[test]
    fn result_json_has_coefficients() {
        let g = Graph::ghz(3).unwrap();
        let r = fixed_point(&GateNoiseModel::depolarizing(0.99).unwrap(), &EppSchedule::alternating(Subprotocol::P2), &DiagonalState::pure(&g)).unwrap();
        let v = serde_json::to_value(&r).unwrap();
        assert_eq!(v["state"]["coeffs"].as_array().unwrap().len(), 8);
        assert_eq!(v["final_step"], "p2");
    }
}
