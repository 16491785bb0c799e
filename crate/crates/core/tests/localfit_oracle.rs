mod common;

use mbqc_core::diagsim::dense::DenseOperator;
use mbqc_core::diagsim::{fidelity_diagonal, DiagonalState};
use mbqc_core::epp::{purify_graph, Subprotocol};
use mbqc_core::graphstate::Graph;
use mbqc_core::localfit::*;
use mbqc_core::noise::{GateNoiseModel, PauliChannel};
use mbqc_core::symscale::noisy_purify_fixed_point;

fn binary_like_fixed_point(n: usize, p: f64) -> DiagonalState {
    noisy_purify_fixed_point(n, p).unwrap().state.to_diagonal().unwrap()
}

#[test]
fn model_state_matches_dense() {
    let g = Graph::ghz(4).unwrap();
    let ch = PauliChannel::depolarizing(0.95).unwrap();
    let s = local_model_state(&LocalNoiseModel::uniform(4, ch), &g).unwrap();
    let mut rho = DenseOperator::from_pure(&g.graph_state_dense().unwrap()).unwrap();
    for q in 0..4 {
        rho.apply_channel(q, &ch);
    }
    let d = rho.graph_diagonal(&g).unwrap();
    for (a, b) in s.coeffs().iter().zip(&d) {
        assert!((a - b).abs() < 1e-12);
    }
}

#[test]
fn realizable_targets_are_recovered() {
    let mut rng = common::rng(21);
    for g in [Graph::ghz(4).unwrap(), Graph::line(4).unwrap()] {
        let classes = symmetry_classes(&g);
        let k = classes.iter().max().unwrap() + 1;
        let per: Vec<PauliChannel> = (0..k).map(|_| common::random_channel(&mut rng)).collect();
        let target = local_model_state(&LocalNoiseModel::from_classes(&classes, &per).unwrap(), &g).unwrap();
        let r = fit_closest_local(&target, None, &FitOptions::default()).unwrap();
        assert!(r.one_minus_f < 1e-9, "{}", r.one_minus_f);
        let back = local_model_state(&r.model, &g).unwrap();
        assert!(back.max_diff(&target) < 1e-8, "{}", back.max_diff(&target));
    }
}

#[test]
fn binary_like_ghz3_is_local_and_ghz4_is_not() {
    let r3 = fit_closest_local(&binary_like_fixed_point(3, 0.9), None, &FitOptions::default()).unwrap();
    assert!(r3.one_minus_f <= 1e-9, "{}", r3.one_minus_f);
    let r4 = fit_closest_local(&binary_like_fixed_point(4, 0.9), None, &FitOptions::default()).unwrap();
    assert!(r4.one_minus_f > 1e-9 && r4.one_minus_f < 1e-2, "{}", r4.one_minus_f);
    // no free model beats the reported optimum
    let mut rng = common::rng(22);
    let g = Graph::ghz(4).unwrap();
    let target = binary_like_fixed_point(4, 0.9);
    for _ in 0..200 {
        let ch: Vec<PauliChannel> = (0..4).map(|_| common::random_channel(&mut rng)).collect();
        let s = local_model_state(&LocalNoiseModel::new(ch, None).unwrap(), &g).unwrap();
        assert!(fidelity_diagonal(&s, &target).unwrap() <= r4.fidelity + 1e-9);
    }
}

#[test]
fn grid_certificate_small_instances() {
    // one tied class, step 0.01
    let target = purify_graph(&Graph::ghz(3).unwrap(), &GateNoiseModel::depolarizing(0.93).unwrap(), Subprotocol::P1).unwrap().state;
    let tied = [0, 0, 0];
    let fit = fit_closest_local(&target, Some(&tied), &FitOptions::default()).unwrap();
    let grid = grid_best_fidelity(&target, &tied, 0.01).unwrap();
    assert!(grid <= fit.fidelity + 1e-9);
    assert!(fit.fidelity - grid < 1e-3, "{} vs {grid}", fit.fidelity);
    // two classes on a 2-qubit graph, coarser grid to stay enumerable
    let g2 = Graph::line(2).unwrap();
    let t2 = purify_graph(&g2, &GateNoiseModel::depolarizing(0.9).unwrap(), Subprotocol::P2).unwrap().state;
    let fit2 = fit_closest_local(&t2, Some(&[0, 1]), &FitOptions::default()).unwrap();
    let grid2 = grid_best_fidelity(&t2, &[0, 1], 0.05).unwrap();
    assert!(grid2 <= fit2.fidelity + 1e-9);
    assert!(fit2.fidelity - grid2 < 1e-2);
}

#[test]
fn relabeling_within_class_keeps_deviation() {
    let target = purify_graph(&Graph::ghz(4).unwrap(), &GateNoiseModel::depolarizing(0.95).unwrap(), Subprotocol::P1).unwrap().state;
    let perm = [0, 3, 1, 2];
    let moved = target.permuted(&perm).unwrap();
    assert_eq!(moved.graph(), target.graph());
    let a = fit_closest_local(&target, None, &FitOptions::default()).unwrap();
    let b = fit_closest_local(&moved, None, &FitOptions::default()).unwrap();
    assert!((a.one_minus_f - b.one_minus_f).abs() < 1e-10);
}

#[test]
fn ghz4_white_noise_curve() {
    let g = Graph::ghz(4).unwrap();
    let grid = [0.95, 0.97, 0.98, 0.99, 0.995, 1.0];
    let pts = deviation_curve(
        &grid,
        |p| Ok(purify_graph(&g, &GateNoiseModel::depolarizing(p)?, Subprotocol::P1)?.state),
        None,
        &FitOptions::default(),
    );
    let last = pts.last().unwrap();
    assert!(last.one_minus_f.unwrap() < 1e-12 && last.rel_dev.is_none());
    let rel: Vec<f64> = pts[..5].iter().map(|p| p.rel_dev.unwrap()).collect();
    assert!(rel.iter().all(|&r| r < 0.1), "{rel:?}");
    assert!(rel[2] >= rel[3] && rel[3] >= rel[4], "{rel:?}");
    let csv = deviation_csv(&pts);
    assert!(csv.starts_with("gate_param,one_minus_F,rel_dev,f,restarts_converged,error\n"));
    assert_eq!(csv.lines().count(), 7);
}
