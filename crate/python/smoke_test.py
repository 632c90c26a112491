"""Smoke test for the hdqn_py extension module.

Build and install the module next to this script first:

    cargo build --release -p hdqn-py --features extension-module
    cp target/release/libhdqn_py.so python/hdqn_py.so
    python3 python/smoke_test.py
"""

import os
import sys
import tempfile

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

import hdqn_py  # noqa: E402

ROUTE = "DRRDDDDLLLLDLLRRUUURRRRUUURRR"
MOVES = {"U": 0, "D": 1, "L": 2, "R": 3}


def check_chain():
    env = hdqn_py.ChainEnv(seed=3)
    assert env.reset() == 1 and env.position == 2
    total, done = 0.0, False
    while not done:
        _, r, done = env.step(0)
        total += r
    assert total == 0.01, total
    try:
        env.step(0)
    except RuntimeError:
        pass
    else:
        raise AssertionError("stepping a finished episode should fail")


def check_keydoor():
    env = hdqn_py.KeyDoorEnv()
    env.reset()
    assert env.state_count == 2592
    kinds = [k for k, _, alive in env.entities() if alive]
    assert len(kinds) == 6, kinds
    total = 0.0
    for c in ROUTE:
        _, r, done = env.step(MOVES[c])
        total += r
    assert done and total == 400.0, total
    try:
        hdqn_py.KeyDoorEnv(layout="###")
    except ValueError:
        pass
    else:
        raise AssertionError("bad layout should raise ValueError")


def check_oracle():
    sol = hdqn_py.solve_chain(1.0)
    assert abs(sol.start_value - 0.208) < 1e-6, sol.start_value
    assert sol.policy[1:6] == [1] * 5


def check_training():
    cfg = hdqn_py.Config("episodes = 3000\nseeds = 0, 1\nfinal_window = 500\n")
    assert cfg.env == "chain" and cfg.seeds == [0, 1]
    try:
        hdqn_py.Config("episodes = 10\nepisodes = 20\n")
    except ValueError as e:
        assert "line 2" in str(e), e
    else:
        raise AssertionError("duplicate key should raise ValueError")

    run = hdqn_py.run_seed(cfg, 0)
    assert len(run.rewards) == 3000
    assert 0.0 <= run.final_mean() <= 1.0
    report = run.evaluate(episodes=100, epsilon=0.1)
    assert report["episodes"] == 100 and len(report["rewards"]) == 100

    with tempfile.TemporaryDirectory() as out:
        runs, files = hdqn_py.run_experiment(cfg, out)
        assert [r.seed for r in runs] == [0, 1]
        names = sorted(os.path.basename(f) for f in files)
        assert "aggregate.csv" in names and "seed_1.csv" in names, names
        assert runs[0].rewards == run.rewards


def main():
    check_chain()
    check_keydoor()
    check_oracle()
    check_training()
    print("hdqn_py smoke test passed:", ", ".join(hdqn_py.environments()))


if __name__ == "__main__":
    main()
