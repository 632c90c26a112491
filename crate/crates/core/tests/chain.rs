use proptest::prelude::*;

use hdqn::env::chain::{LEFT, RIGHT};
use hdqn::env::{ActionId, ChainEnv, Environment, StateId};
use hdqn::rng::RngStream;
use hdqn::Error;

fn at(position: usize, rng: &mut RngStream) -> ChainEnv {
    let mut env = ChainEnv::new();
    env.reset(rng);
    // Drive the walk until it lands on `position`.
    while env.chain_state().position != position {
        if env.is_terminal() {
            env.reset(rng);
        }
        let a = if env.chain_state().position < position { RIGHT } else { LEFT };
        env.step(a, rng).unwrap();
    }
    env
}

#[test]
fn reset_starts_at_position_two() {
    let mut env = ChainEnv::new();
    let mut rng = RngStream::new(0, 0);
    assert_eq!(env.reset(&mut rng), StateId(1));
    assert_eq!(env.state_count(), 6);
    assert_eq!(env.action_count(), 2);
    assert!(!env.is_terminal());
}

#[test]
fn right_succeeds_about_half_the_time() {
    let mut rng = RngStream::new(8, 0);
    let trials = 10_000;
    let mut moved = 0;
    for _ in 0..trials {
        let mut env = at(3, &mut rng);
        env.step(RIGHT, &mut rng).unwrap();
        moved += usize::from(env.chain_state().position == 4);
    }
    let rate = moved as f64 / trials as f64;
    assert!((0.48..=0.52).contains(&rate), "rate {rate}");
}

#[test]
fn left_is_deterministic_and_position_one_ends_with_small_reward() {
    let mut rng = RngStream::new(1, 0);
    let mut env = ChainEnv::new();
    env.reset(&mut rng);
    let out = env.step(LEFT, &mut rng).unwrap();
    assert_eq!(out.next_state, StateId(0));
    assert!(out.terminal);
    assert_eq!(out.extrinsic_reward, 0.01);
    assert!(matches!(env.step(LEFT, &mut rng), Err(Error::TerminalStep)));
}

#[test]
fn visiting_the_far_end_pays_one() {
    let mut rng = RngStream::new(2, 0);
    let mut env = at(6, &mut rng);
    assert!(env.chain_state().visited_end);
    let mut total = 0.0;
    while !env.is_terminal() {
        total += env.step(LEFT, &mut rng).unwrap().extrinsic_reward;
    }
    assert_eq!(total, 1.0);
}

#[test]
fn far_end_right_is_a_self_loop_or_step_back() {
    let mut rng = RngStream::new(3, 0);
    for _ in 0..200 {
        let mut env = at(6, &mut rng);
        env.step(RIGHT, &mut rng).unwrap();
        assert!(matches!(env.chain_state().position, 5 | 6));
    }
}

#[test]
fn invalid_action_is_rejected() {
    let mut rng = RngStream::new(0, 0);
    let mut env = ChainEnv::new();
    env.reset(&mut rng);
    assert!(env.step(ActionId(2), &mut rng).is_err());
}

proptest! {
    #[test]
    fn episode_reward_is_small_or_one(actions in prop::collection::vec(0usize..2, 1..400), seed in 0u64..1000) {
        let mut env = ChainEnv::new();
        let mut rng = RngStream::new(seed, 0);
        env.reset(&mut rng);
        let mut total = 0.0;
        let mut seen_end = false;
        for a in actions {
            let out = env.step(ActionId(a), &mut rng).unwrap();
            let p = env.chain_state().position;
            prop_assert!((1..=6).contains(&p));
            seen_end |= p == 6;
            total += out.extrinsic_reward;
            if out.terminal {
                prop_assert_eq!(p, 1);
                prop_assert_eq!(total, if seen_end { 1.0 } else { 0.01 });
                return Ok(());
            }
            prop_assert_eq!(out.extrinsic_reward, 0.0);
        }
    }

    #[test]
    fn transitions_are_distributions(position in 2usize..=6, visited: bool, a in 0usize..2) {
        let s = hdqn::env::ChainState { position, visited_end: visited || position == 6 };
        let t = ChainEnv::transitions(s, ActionId(a));
        let mass: f64 = t.iter().map(|o| o.0).sum();
        prop_assert!((mass - 1.0).abs() < 1e-12);
    }
}
