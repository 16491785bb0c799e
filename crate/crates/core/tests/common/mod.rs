#![allow(dead_code)]

use mbqc_core::diagsim::DiagonalState;
use mbqc_core::graphstate::Graph;
use mbqc_core::noise::PauliChannel;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random distribution with a dominant identity coefficient.
pub fn random_state(g: &Graph, fidelity: f64, rng: &mut ChaCha8Rng) -> DiagonalState {
    let d = 1usize << g.n();
    let mut c: Vec<f64> = (0..d).map(|_| rng.gen::<f64>()).collect();
    c[0] = 0.0;
    let s: f64 = c.iter().sum();
    c.iter_mut().for_each(|x| *x *= (1.0 - fidelity) / s);
    c[0] = fidelity;
    DiagonalState::new(g.clone(), c).unwrap()
}

pub fn random_channel(rng: &mut ChaCha8Rng) -> PauliChannel {
    let mut p = [0.0; 4];
    p.iter_mut().for_each(|x| *x = rng.gen::<f64>());
    p[0] += 2.0;
    let s: f64 = p.iter().sum();
    p.iter_mut().for_each(|x| *x /= s);
    let fix = 1.0 - p[1] - p[2] - p[3];
    p[0] = fix;
    PauliChannel::new(p).unwrap()
}

pub fn random_graph(n: usize, density: f64, rng: &mut ChaCha8Rng) -> Graph {
    let mut g = Graph::empty(n).unwrap();
    for a in 0..n {
        for b in a + 1..n {
            if rng.gen::<f64>() < density {
                g.add_edge(a, b).unwrap();
            }
        }
    }
    g
}
