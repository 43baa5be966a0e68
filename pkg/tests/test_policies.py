import json
import math
from functools import partial
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from mocmab import _kernels as K_
from mocmab.core import HyperParams, InvalidInputError, PartitionSpec, log_confidence
from mocmab.environments import GaussianSurface
from mocmab.policies import (
    ALGORITHMS,
    MocMab,
    OraclePolicy,
    ParetoUCB1,
    ScalarizedUCB1,
    UCB1,
    contextual_wrap,
    make_policy,
    pareto_ucb1_select,
    scalarize,
    ucb1_select,
    uncertainty,
)

FIXTURE = Path(__file__).parent / "fixtures" / "golden_mocmab.json"


def small_params(**kw):
    base = dict(L=1.0, alpha=1.0, m=2, beta=1.0, T=1000, num_arms=3, scale=1.0)
    base.update(kw)
    return HyperParams(**base)


# -- uncertainty ---------------------------------------------------------------------

def test_uncertainty_examples():
    assert uncertainty(0, 50.0) == math.inf
    assert uncertainty(100, 50.0) == 1.0
    A = log_confidence(4, 10, 2, 100_000)
    # Frozen from a 40-digit evaluation of sqrt(2A/100).
    assert uncertainty(100, A) == pytest.approx(1.0029386243571082, rel=1e-14)
    assert uncertainty(100, A, 0.05) == pytest.approx(0.05 * 1.0029386243571082, rel=1e-14)


# -- decision rule -------------------------------------------------------------------

def decide(mu1, mu2, unc, beta_v, v, u0=0.3, u1=0.7):
    a, e = K_.moc_decide(np.array(mu1, float), np.array(mu2, float), np.array(unc, float),
                         beta_v, v, u0, u1)
    return int(a), bool(e)


def test_decide_candidate_admits_close_arm():
    assert decide([0.9, 0.8], [0.1, 0.9], [0.05, 0.04], 0.1, 0.1) == (1, False)


def test_decide_candidate_excludes_far_arm():
    assert decide([0.9, 0.55], [0.1, 0.9], [0.05, 0.04], 0.1, 0.1) == (0, False)


def test_decide_explores_uncertain_leader():
    assert decide([0.9, 0.8], [0.1, 0.9], [0.5, 0.04], 0.1, 0.1) == (0, True)


def test_fresh_state_uniform():
    params = small_params(num_arms=4)
    pol = MocMab(params, d=2, seed=1)
    counts = np.zeros(4)
    for _ in range(10_000):
        counts[pol.select((0.2, 0.2))] += 1
        assert pol.last_explored
    assert np.all(np.abs(counts / 10_000 - 0.25) < 0.02)


def test_invariants_and_update_isolation():
    params = small_params()
    pol = MocMab(params, d=2, seed=0)
    assert pol.v == pytest.approx(math.sqrt(2) / 2)
    assert pol.A_mT == log_confidence(3, 2, 2, 1000)
    pol.update((0.1, 0.1), 1, (1.0, 0.5))
    pol.update((0.9, 0.9), 2, (0.0, 1.0))
    assert pol.stats(0, 1).count == 1 and pol.stats(0, 1).mean_nondominant == 0.5
    assert pol.stats(3, 2).count == 1 and pol.stats(3, 1).count == 0
    assert pol.stats(0, 2).count == 0
    assert int(pol.counts.sum()) == 2
    with pytest.raises(InvalidInputError):
        pol.update((0.1, 0.1), 3, (0, 0))
    with pytest.raises(InvalidInputError):
        pol.update((0.1, 0.1), 0, (float("nan"), 0))


def test_golden_trace_replay():
    fx = json.loads(FIXTURE.read_text())
    params = HyperParams(**fx["params"])
    fresh = MocMab(params, d=fx["d"], seed=0)
    for step in fx["trace"]:
        fresh.update(step["x"], step["arm"], step["r"])
    table = {str(c): v.tolist() for c, v in fresh.stats_table().items()}
    assert table == fx["table"]
    # the same seed reproduces every decision
    pol = MocMab(params, d=fx["d"], seed=fx["seed"])
    for t, step in enumerate(fx["trace"], start=1):
        assert pol.select(step["x"], t) == step["arm"]
        pol.update(step["x"], step["arm"], step["r"])


@given(st.integers(0, 2**32 - 1), st.floats(0.3, 1.0))
def test_every_arm_tried_before_threshold(seed, beta):
    params = HyperParams(L=1.0, alpha=1.0, m=2, beta=beta, T=200, num_arms=3, scale=1.0)
    pol = MocMab(params, d=1, seed=seed)
    cap = math.ceil(2 * pol.A_mT / pol.beta_v**2) + 2
    rng = np.random.default_rng(seed)
    p = rng.random((3, 2))
    for t in range(1, 1500):
        x = rng.random(1)
        a = pol.select(x, t)  # debug checks on the exploit branch run here
        pol.update(x, a, (rng.random(2) < p[a]).astype(float))
        row = pol.counts[pol.spec.locate(x)]
        if row.max() >= cap:
            assert row.min() >= 1


def test_exploit_branch_reached_and_checked():
    params = HyperParams(L=1.0, alpha=1.0, m=1, beta=1.0, T=100, num_arms=2, scale=0.05)
    pol = MocMab(params, d=1, seed=3)
    rng = np.random.default_rng(0)
    exploits = 0
    for t in range(1, 3000):
        a = pol.select((0.5,), t)
        exploits += not pol.last_explored
        pol.update((0.5,), a, (rng.random() < 0.5, rng.random() < 0.5 + 0.3 * a))
    assert exploits > 1000


# -- baselines -----------------------------------------------------------------------

def test_ucb1_examples():
    rng = np.random.default_rng(0)
    assert ucb1_select([3, 0, 5], [0.1, 0.0, 0.9], 9, 1.0, rng) == 1
    assert ucb1_select([10, 10], [0.9, 0.1], 100, 1.0, rng) == 0
    assert ucb1_select([100, 1], [0.5, 0.4], 100, 1.0, rng) == 1
    with pytest.raises(InvalidInputError):
        ucb1_select([1, 1], [0, 0], 0, 1.0, rng)


def test_pareto_ucb1_examples():
    rng = np.random.default_rng(0)
    assert pareto_ucb1_select([0, 0, 0], [0, 0, 0], [0, 0, 0], 1, 1.0, rng) == 0
    assert pareto_ucb1_select([5, 0, 0], [0, 0, 0], [0, 0, 0], 1, 1.0, rng) == 1
    for _ in range(200):
        assert pareto_ucb1_select([50, 50], [0.9, 0.1], [0.9, 0.1], 100, 1.0, rng) == 0
    hits = sum(pareto_ucb1_select([50, 50], [0.9, 0.1], [0.1, 0.9], 100, 1.0, rng) for _ in range(10_000))
    assert abs(hits / 10_000 - 0.5) <= 0.02


def test_scalarize_examples():
    assert scalarize((1, 0), (0.2, 0.9)) == 0.2
    assert scalarize((0.5, 0.5), (0.2, 0.9)) == pytest.approx(0.55)


@pytest.mark.parametrize("schedule,width", [("random", 300), ("round_robin", 0)])
def test_scalarized_weight_frequencies(schedule, width):
    pol = ScalarizedUCB1(2, seed=5, schedule=schedule)
    seen = np.zeros(3)
    for t in range(1, 30_001):
        a = pol.select(None, t)
        seen[pol.last_weight] += 1
        pol.update(None, a, (0.5, 0.5))
    assert np.all(np.abs(seen - 10_000) <= width)


def test_scalarized_update_before_select():
    with pytest.raises(InvalidInputError):
        ScalarizedUCB1(2, seed=0).update(None, 0, (0, 0))


def test_contextual_single_cell_equals_inner():
    spec = PartitionSpec(2, 4)
    rng = np.random.default_rng(1)
    X = np.full((500, 2), 0.1) + rng.random((500, 2)) * 0.1  # all in cell 0
    R = (rng.random((500, 3, 2)) < 0.5).astype(float)
    for factory in (partial(UCB1, 3, 1.0, 9), partial(ParetoUCB1, 3, 1.0, 9), partial(ScalarizedUCB1, 3, 1.0, 9)):
        wrapped = contextual_wrap(factory, spec).play(X, R)
        plain = factory().play(X, R)
        assert wrapped.tolist() == plain.tolist()


def test_contextual_routing_local_time():
    spec = PartitionSpec(1, 2)
    pol = contextual_wrap(partial(UCB1, 2, 1.0, 0), spec)
    for t in range(1, 11):
        x = (0.25,) if t % 2 else (0.75,)
        pol.update(x, pol.select(x, t), (1.0, 0.0))
        assert pol.tloc[pol.spec.locate(x)] == (t + 1) // 2
    assert pol.tloc.tolist() == [5, 5]


def test_contextual_m1_is_identity():
    pol = contextual_wrap(partial(UCB1, 3, 1.0, 0), PartitionSpec(2, 1))
    assert pol.counts.shape == (1, 3)


# -- cross-cutting ---------------------------------------------------------------------

def all_policies(seed, env, d=2):
    params = HyperParams(m=3, T=2000, num_arms=env.num_arms(), scale=0.2)
    pols = {n: make_policy(n, params, d, seed=seed, env=env) for n in ALGORITHMS}
    pols["oracle"] = make_policy("oracle", params, d, seed=seed, env=env)
    return pols


@pytest.mark.parametrize("name", ALGORITHMS + ("oracle",))
def test_select_path_equals_block_path(name):
    env = GaussianSurface(seed=0)
    rng = np.random.default_rng(4)
    X = rng.random((1200, 2))
    R = env.rewards_from_uniforms(X, rng.random((1200, 2)), np.arange(1, 1201))
    block = all_policies(11, env)[name]
    arms_block = np.concatenate([block.play(X[:700], R[:700], 1), block.play(X[700:], R[700:], 701)])
    step = all_policies(11, env)[name]
    arms_step = []
    for t, (x, r) in enumerate(zip(X, R), start=1):
        a = step.select(x, t)
        assert 0 <= a < env.num_arms()
        step.update(x, a, r[a])
        arms_step.append(a)
    assert arms_step == arms_block.tolist()


@pytest.mark.parametrize("name", ALGORITHMS)
def test_determinism_and_reset(name):
    env = GaussianSurface(seed=0)
    rng = np.random.default_rng(8)
    X = rng.random((800, 2))
    R = env.rewards_from_uniforms(X, rng.random((800, 2)), np.arange(1, 801))
    a = all_policies(3, env)[name]
    first = a.play(X, R)
    assert all_policies(3, env)[name].play(X, R).tolist() == first.tolist()
    a.reset()
    assert a.play(X, R).tolist() == first.tolist()
    assert all_policies(4, env)[name].play(X, R).tolist() != first.tolist()


def test_counts_equal_updates():
    env = GaussianSurface(seed=0)
    pol = all_policies(0, env)["mocmab"]
    rng = np.random.default_rng(0)
    X = rng.random((3000, 2))
    pol.play(X, env.rewards_from_uniforms(X, rng.random((3000, 2)), np.arange(1, 3001)))
    assert int(pol.counts.sum()) == 3000


def test_oracle_policy_needs_env():
    with pytest.raises(InvalidInputError):
        make_policy("oracle", HyperParams(num_arms=2), 1)
    with pytest.raises(InvalidInputError):
        make_policy("nope", HyperParams(num_arms=2), 1)
    assert isinstance(make_policy("oracle", HyperParams(num_arms=4), 2, env=GaussianSurface()), OraclePolicy)
