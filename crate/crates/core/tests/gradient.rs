mod common;

use hdqn::approx::{MlpQ, QFunction, Sample, ValueFunction};
use hdqn::critic::GoalId;
use hdqn::env::StateId;
use hdqn::rng::RngStream;

#[test]
fn analytic_gradient_matches_central_differences() {
    let g = common::gradient_check(100, 1e-5, 1e-4, 11);
    assert_eq!(g.instances, 100);
    assert_eq!(g.forward_mismatches, 0);
    assert_eq!(g.failures, 0, "worst relative error {}", g.worst_relative_error);
}

#[test]
fn gradient_check_is_seed_robust() {
    for seed in [1, 2, 3] {
        let g = common::gradient_check(30, 1e-5, 1e-4, seed);
        assert_eq!(g.failures, 0, "seed {seed}: {}", g.worst_relative_error);
    }
}

#[test]
fn training_on_a_fixed_buffer_lowers_the_loss() {
    let mut q = QFunction::Mlp(MlpQ::new(6, 6, &[32], 2, 0.01, &mut RngStream::new(3, 5)));
    let batch: Vec<Sample> = (0..6)
        .flat_map(|s| {
            (0..2).map(move |c| Sample {
                state: StateId(s),
                goal: Some(GoalId((s + c) % 6)),
                choice: c,
                reward: if c == 1 { 1.0 } else { 0.0 },
                next_state: StateId((s + 1) % 6),
                terminal: true,
            })
        })
        .collect();
    let first = q.train(&batch, 0.99).unwrap();
    let mut last = first;
    for _ in 0..1000 {
        last = q.train(&batch, 0.99).unwrap();
    }
    assert!(last < 0.1 * first, "loss {first} -> {last}");
}
