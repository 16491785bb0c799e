mod common;

use mbqc_core::diagsim::{depolarize_to_diagonal, DenseStep, DiagonalState};
use mbqc_core::epp::{allgraph_step, auxiliary_graph, p_step, purification_step, Subprotocol};
use mbqc_core::graphstate::{bits, Coloring, Graph};
use mbqc_core::noise::{GateNoiseModel, PauliChannel};
use mbqc_core::pauli::{Clifford, PauliString};

/// Dense two-copy simulation of one purification step. Main qubits come first.
fn dense_step(
    main: &DiagonalState,
    aux: &DiagonalState,
    active: &[usize],
    checked: u64,
    roles: u64,
    model: &GateNoiseModel,
    reverse_order: bool,
) -> (DiagonalState, f64) {
    let n = main.n();
    let m = aux.n();
    let total = n + m;
    // |µ⟩⊗|ν⟩ in the graph basis of the disjoint union
    let mut edges = main.graph().edges();
    edges.extend(aux.graph().edges().into_iter().map(|(a, b)| (a + n, b + n)));
    let union = Graph::new(total, &edges).unwrap();
    let mut coeffs = vec![0.0; 1 << total];
    for (mu, &x) in main.coeffs().iter().enumerate() {
        for (nu, &y) in aux.coeffs().iter().enumerate() {
            coeffs[mu | nu << n] = x * y;
        }
    }
    let mut d = DiagonalState::new(union, coeffs).unwrap().to_dense().unwrap();
    let mut steps = Vec::new();
    let mut pairs: Vec<(usize, usize)> = active.iter().copied().enumerate().collect();
    if reverse_order {
        pairs.reverse();
    }
    for (k, v) in pairs {
        let in_a = roles >> v & 1 == 1;
        let gate = if checked >> v & 1 == 1 {
            Clifford::Cnot { control: n + k, target: v }
        } else {
            Clifford::Cnot { control: v, target: n + k }
        };
        match model {
            GateNoiseModel::Correlated { .. } => {
                steps.push(DenseStep::TwoQubitChannel { a: v, b: n + k, channel: model.pair_channel(in_a, in_a).unwrap() });
            }
            _ => {
                let ch = model.local_channel(in_a).unwrap().unwrap();
                steps.push(DenseStep::Channel { qubit: v, channel: ch });
                steps.push(DenseStep::Channel { qubit: n + k, channel: ch });
            }
        }
        steps.push(DenseStep::Gate(gate));
    }
    let pos: Vec<usize> = active.to_vec();
    for c in bits(checked) {
        let k = pos.iter().position(|&v| v == c).unwrap();
        let kc = aux.graph().correlation_operator(k).unwrap();
        let obs = PauliString::from_masks(total, kc.x_mask() << n, kc.z_mask() << n, 0);
        steps.push(DenseStep::Postselect { observable: obs, plus: true });
    }
    let p = d.evolve(&steps).unwrap();
    let keep: Vec<usize> = (0..n).collect();
    let r = d.partial_trace(&keep).unwrap();
    (depolarize_to_diagonal(&r, main.graph()).unwrap(), p)
}

fn models(rng: &mut rand_chacha::ChaCha8Rng) -> Vec<GateNoiseModel> {
    let ch = common::random_channel(rng);
    let p = ch.probs();
    vec![
        GateNoiseModel::Perfect,
        GateNoiseModel::depolarizing(0.9).unwrap(),
        GateNoiseModel::Local { channel: mbqc_core::noise::ChannelSpec::Pauli { probs: *p } },
        GateNoiseModel::BinaryLike { p: 0.88 },
        GateNoiseModel::Correlated { p: 0.85 },
    ]
}

#[test]
fn two_colorable_steps_match_dense() {
    let mut rng = common::rng(11);
    for g in [Graph::ghz(4).unwrap(), Graph::line(4).unwrap(), Graph::ghz(3).unwrap()] {
        let col = g.color();
        let active: Vec<usize> = (0..g.n()).collect();
        for model in models(&mut rng) {
            for which in [Subprotocol::P1, Subprotocol::P2] {
                let s = common::random_state(&g, 0.7, &mut rng);
                let (fast, p) = p_step(&s, &col, &model, which).unwrap();
                let checked = if which == Subprotocol::P1 { col.set_a() } else { col.set_b() };
                let (slow, q) = dense_step(&s, &s, &active, checked, col.set_a(), &model, false);
                assert!(fast.max_diff(&slow) < 1e-12, "{model:?} {which:?}: {}", fast.max_diff(&slow));
                assert!((p - q).abs() < 1e-10);
            }
        }
    }
}

#[test]
fn cnot_order_is_irrelevant() {
    let mut rng = common::rng(12);
    let g = Graph::ghz(4).unwrap();
    let col = g.color();
    let active: Vec<usize> = (0..4).collect();
    let s = common::random_state(&g, 0.8, &mut rng);
    for model in models(&mut rng) {
        let (a, p) = dense_step(&s, &s, &active, col.set_a(), col.set_a(), &model, false);
        let (b, q) = dense_step(&s, &s, &active, col.set_a(), col.set_a(), &model, true);
        assert!(a.max_diff(&b) < 1e-12 && (p - q).abs() < 1e-12);
    }
}

#[test]
fn color_steps_match_dense_on_five_ring() {
    let mut rng = common::rng(13);
    let g = Graph::ring(5).unwrap();
    let col = g.color();
    assert_eq!(col.k(), 3);
    for model in [GateNoiseModel::Perfect, GateNoiseModel::depolarizing(0.93).unwrap(), GateNoiseModel::Correlated { p: 0.9 }] {
        let main = common::random_state(&g, 0.75, &mut rng);
        let aux: Vec<DiagonalState> = (0..3)
            .map(|c| common::random_state(&auxiliary_graph(&g, &col, c).unwrap().0, 0.8, &mut rng))
            .collect();
        for c in 0..3 {
            let (fast, p) = allgraph_step(&main, &col, &aux, &model, c).unwrap();
            let (_, active) = auxiliary_graph(&g, &col, c).unwrap();
            let (slow, q) = dense_step(&main, &aux[c], &active, col.class_mask(c), 0, &model, false);
            assert!(fast.max_diff(&slow) < 1e-12, "color {c} {model:?}");
            assert!((p - q).abs() < 1e-10);
        }
    }
}

#[test]
fn perfect_multilateral_cnot_preserves_graph_states() {
    // main graph with one checked class and its auxiliary graph stay pure
    let g = Graph::cluster_ring_three_colorable();
    let col = g.color();
    for c in 0..col.k() {
        let (g_i, active) = auxiliary_graph(&g, &col, c).unwrap();
        let aux = DiagonalState::pure(&g_i);
        let (out, p) =
            purification_step(&DiagonalState::pure(&g), &aux, &active, col.class_mask(c), 0, &GateNoiseModel::Perfect).unwrap();
        assert_eq!(p, 1.0);
        assert_eq!(out.fidelity(), 1.0);
        assert!(g_i.is_bipartite());
    }
    // and densely for a small case
    let g = Graph::ring(5).unwrap();
    let col = g.color();
    let (g_i, active) = auxiliary_graph(&g, &col, 0).unwrap();
    let (out, p) = dense_step(&DiagonalState::pure(&g), &DiagonalState::pure(&g_i), &active, col.class_mask(0), 0, &GateNoiseModel::Perfect, false);
    assert!((p - 1.0).abs() < 1e-12 && (out.fidelity() - 1.0).abs() < 1e-12);
}

#[test]
fn noisy_steps_at_fidelity_085() {
    let g = Graph::ghz(4).unwrap();
    let col = g.color();
    let model = GateNoiseModel::depolarizing(0.98).unwrap();
    // White noise: P1 alone checks only the centre and loses fidelity, P2 gains it.
    let mut c = vec![0.15 / 15.0; 16];
    c[0] = 0.85;
    let white = DiagonalState::new(g.clone(), c).unwrap();
    // Noise on the centre's index bit is what P1 detects.
    let mut c = vec![0.0; 16];
    c[0] = 0.85;
    for mu in (1..16).filter(|m| m & 1 == 1) {
        c[mu] = 0.15 / 8.0;
    }
    let centre = DiagonalState::new(g.clone(), c).unwrap();
    for s in [&white, &centre] {
        for which in [Subprotocol::P1, Subprotocol::P2] {
            let (fast, _) = p_step(s, &col, &model, which).unwrap();
            let checked = if which == Subprotocol::P1 { col.set_a() } else { col.set_b() };
            let (slow, _) = dense_step(s, s, &[0, 1, 2, 3], checked, col.set_a(), &model, false);
            assert!(fast.max_diff(&slow) < 1e-12);
        }
    }
    let p1 = |s: &DiagonalState| p_step(s, &col, &model, Subprotocol::P1).unwrap().0.fidelity();
    let p2 = |s: &DiagonalState| p_step(s, &col, &model, Subprotocol::P2).unwrap().0.fidelity();
    assert!(p1(&centre) > 0.85);
    assert!(p2(&white) > 0.85);
    assert!(p1(&white) < 0.85);
    let (after_p2, _) = p_step(&white, &col, &model, Subprotocol::P2).unwrap();
    assert!(p1(&after_p2) > 0.85);
}

#[test]
fn invalid_coloring_rejected() {
    let g = Graph::ghz(3).unwrap();
    let bad = Coloring::from_colors(&Graph::empty(3).unwrap(), vec![0, 0, 0]).unwrap();
    let r = p_step(&DiagonalState::pure(&g), &bad, &GateNoiseModel::Perfect, Subprotocol::P1);
    assert!(r.is_err());
    let _ = PauliChannel::identity();
}
