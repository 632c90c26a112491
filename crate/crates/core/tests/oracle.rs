use hdqn::env::chain::{LEFT, RIGHT};
use hdqn::env::{ChainEnv, Environment};
use hdqn::harness::{sampled_q_learning, solve_chain};
use hdqn::rng::RngStream;

/// Probability that a fair walk started at `p` reaches 6 before 1.
fn ruin(p: usize) -> f64 {
    (p as f64 - 1.0) / 5.0
}

#[test]
fn unvisited_values_match_the_closed_form() {
    let sol = solve_chain(1.0);
    for p in 2..=5 {
        let hit = ruin(p);
        let expect = hit + (1.0 - hit) * 0.01;
        assert!((sol.values[p - 1] - expect).abs() < 1e-9, "position {p}");
    }
    assert!((sol.start_value() - 0.208).abs() < 1e-9);
}

#[test]
fn start_value_agrees_with_simulation() {
    let mut env = ChainEnv::new();
    let mut rng = RngStream::new(4, 0);
    let n = 200_000;
    let mut rewards = Vec::with_capacity(n);
    for _ in 0..n {
        env.reset(&mut rng);
        let mut total = 0.0;
        while !env.is_terminal() {
            let a = if env.chain_state().visited_end { LEFT } else { RIGHT };
            total += env.step(a, &mut rng).unwrap().extrinsic_reward;
        }
        rewards.push(total);
    }
    let mean = rewards.iter().sum::<f64>() / n as f64;
    let var = rewards.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / (n as f64 - 1.0);
    let se = (var / n as f64).sqrt();
    assert!((mean - 0.208).abs() < 4.0 * se, "mean {mean}, se {se}");
}

#[test]
fn bellman_residual_is_tiny() {
    let sol = solve_chain(0.95);
    let env = ChainEnv::augmented();
    for s in (0..12).filter(|s| s % 6 != 0) {
        for (a, action) in [LEFT, RIGHT].into_iter().enumerate() {
            let state = hdqn::harness::oracle::augmented_state(s);
            let backup: f64 = ChainEnv::transitions(state, action)
                .into_iter()
                .map(|(p, next, r, t)| p * (r + if t { 0.0 } else { 0.95 * sol.values[env.encode(next).0] }))
                .sum();
            assert!((backup - sol.q[s][a]).abs() < 1e-8, "state {s} action {a}: {backup} vs {}", sol.q[s][a]);
        }
        assert!((sol.values[s] - sol.q[s][0].max(sol.q[s][1])).abs() < 1e-9, "state {s}: {} vs {:?}", sol.values[s], sol.q[s]);
    }
}

#[test]
fn sampled_q_learning_converges_to_the_oracle() {
    let sol = solve_chain(1.0);
    let table = sampled_q_learning(1.0, 4_000_000, 10.0, 7).unwrap();
    let worst = (0..12)
        .flat_map(|s| (0..2).map(move |a| (s, a)))
        .map(|(s, a)| (table.values()[s * 2 + a] - sol.q[s][a]).abs())
        .fold(0.0, f64::max);
    assert!(worst < 1e-3, "max error {worst}");
}
