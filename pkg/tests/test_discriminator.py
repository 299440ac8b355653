"""Discriminator objectives: closed forms, gradient oracles, gate semantics."""
import numpy as np
import pytest

from imitation_lab import discriminator as dm
from imitation_lab import nn
from imitation_lab.discriminator import (EPS, REWARD_CAP, DiscBatch,
                                         Discriminator, accuracy,
                                         augment_batch, gail_gradients,
                                         gail_term, make_discriminator,
                                         oracle_reward, reward, scores,
                                         trail_gradients, trail_loss)
from imitation_lab.env import EnvConfig, PointLiftEnv


def constant_half_disc(obs_dim):
    """Discriminator with the last layer zeroed: D(s) = sigmoid(0) = 1/2."""
    disc = make_discriminator(obs_dim, hidden=(8,), seed=0)
    net = disc.net
    weights = net.weights[:-1] + (np.zeros_like(net.weights[-1]),)
    biases = net.biases[:-1] + (np.zeros_like(net.biases[-1]),)
    return Discriminator(nn.Network(net.layer_sizes, net.head, weights, biases))


def saturated_disc(obs_dim, high):
    """Discriminator with a huge constant bias: D ~ 1 (high) or D ~ 0."""
    disc = make_discriminator(obs_dim, hidden=(8,), seed=0)
    net = disc.net
    weights = net.weights[:-1] + (np.zeros_like(net.weights[-1]),)
    bias = np.full_like(net.biases[-1], 60.0 if high else -60.0)
    biases = net.biases[:-1] + (bias,)
    return Discriminator(nn.Network(net.layer_sizes, net.head, weights, biases))


def test_uninformative_discriminator_closed_forms():
    """D == 1/2 everywhere: objective is exactly -2 N ln 2 and the balanced
    accuracy is exactly 1/2 (the 1/2-as-expert tie rule makes the expert side
    perfect and the agent side zero)."""
    rng = np.random.default_rng(0)
    disc = constant_half_disc(6)
    for n in (1, 4, 33):
        e = rng.normal(size=(n, 6))
        a = rng.normal(size=(n, 6))
        assert gail_term(disc, e, a) == pytest.approx(-2.0 * n * np.log(2.0), rel=1e-12)
        assert accuracy(disc, e, a) == 0.5


def test_gail_term_hand_computed():
    # single affine unit: D = sigmoid(w x + b)
    net = nn.Network((1, 1), "sigmoid", (np.array([[2.0]]),), (np.array([-1.0]),))
    disc = Discriminator(net)
    e = np.array([[1.0]])   # logit 1
    a = np.array([[0.0]])   # logit -1
    de = 1.0 / (1.0 + np.exp(-1.0))
    da = 1.0 / (1.0 + np.exp(1.0))
    expected = np.log(de) + np.log(1.0 - da)
    assert gail_term(disc, e, a) == pytest.approx(expected, rel=1e-14)


def test_gail_term_is_a_sum_not_a_mean():
    rng = np.random.default_rng(1)
    disc = make_discriminator(4, hidden=(8,), seed=3)
    e = rng.normal(size=(6, 4))
    a = rng.normal(size=(6, 4))
    whole = gail_term(disc, e, a)
    parts = sum(gail_term(disc, e[i:i + 1], a[i:i + 1]) for i in range(6))
    assert whole == pytest.approx(parts, rel=1e-12)


def test_pair_validation():
    disc = make_discriminator(3, seed=0)
    with pytest.raises(ValueError):
        gail_term(disc, np.zeros((2, 3)), np.zeros((3, 3)))
    with pytest.raises(ValueError):
        gail_term(disc, np.zeros((0, 3)), np.zeros((0, 3)))


def fd_objective_grads(disc, fn, h=1e-6):
    """Central finite differences of a scalar objective over all parameters."""
    net = disc.net
    dws, dbs = [], []
    for li in range(net.n_layers):
        dw = np.zeros_like(net.weights[li])
        for idx in np.ndindex(dw.shape):
            wp = [a.copy() for a in net.weights]
            wm = [a.copy() for a in net.weights]
            wp[li][idx] += h
            wm[li][idx] -= h
            dp = Discriminator(nn.Network(net.layer_sizes, net.head, tuple(wp), net.biases))
            dmn = Discriminator(nn.Network(net.layer_sizes, net.head, tuple(wm), net.biases))
            dw[idx] = (fn(dp) - fn(dmn)) / (2 * h)
        dws.append(dw)
        db = np.zeros_like(net.biases[li])
        for idx in np.ndindex(db.shape):
            bp = [a.copy() for a in net.biases]
            bm = [a.copy() for a in net.biases]
            bp[li][idx] += h
            bm[li][idx] -= h
            dp = Discriminator(nn.Network(net.layer_sizes, net.head, net.weights, tuple(bp)))
            dmn = Discriminator(nn.Network(net.layer_sizes, net.head, net.weights, tuple(bm)))
            db[idx] = (fn(dp) - fn(dmn)) / (2 * h)
        dbs.append(db)
    return dws, dbs


def test_gail_gradients_match_finite_differences():
    rng = np.random.default_rng(5)
    disc = make_discriminator(3, hidden=(6,), seed=2)
    e = rng.normal(size=(4, 3))
    a = rng.normal(size=(4, 3))
    value, grads = gail_gradients(disc, e, a)
    assert value == pytest.approx(gail_term(disc, e, a), rel=1e-12)
    fdw, fdb = fd_objective_grads(disc, lambda d: gail_term(d, e, a))
    for got, want in zip(grads.weights, fdw):
        assert np.max(np.abs(got - want)) < 1e-4
    for got, want in zip(grads.biases, fdb):
        assert np.max(np.abs(got - want)) < 1e-4


def test_trail_gradients_match_finite_differences_when_gated():
    """With the gate pinned on, the constrained objective is main minus
    constraint, and its gradients must match finite differences of that
    difference (the gate itself is a constant, not differentiated)."""
    rng = np.random.default_rng(6)
    disc = make_discriminator(3, hidden=(6,), seed=4)
    e = rng.normal(size=(4, 3))
    a = rng.normal(size=(4, 3))
    # choosing the pools as the batches themselves guarantees acc >= 1/2
    # cannot be assumed; assert on the actual gate below instead
    ce = rng.normal(size=(5, 3)) + 2.0
    ca = rng.normal(size=(5, 3)) - 2.0
    value, grads, info = trail_gradients(disc, DiscBatch(e, a, ce, ca))
    if not info["gate"]:
        ce, ca = ca, ce  # flip sides so the discriminator is right at chance+
        value, grads, info = trail_gradients(disc, DiscBatch(e, a, ce, ca))
    assert info["gate"]
    fdw, fdb = fd_objective_grads(
        disc, lambda d: gail_term(d, e, a) - gail_term(d, ce, ca))
    for got, want in zip(grads.weights, fdw):
        assert np.max(np.abs(got - want)) < 1e-4
    for got, want in zip(grads.biases, fdb):
        assert np.max(np.abs(got - want)) < 1e-4
    assert value == pytest.approx(gail_term(disc, e, a) - gail_term(disc, ce, ca),
                                  rel=1e-12)


def test_gate_off_is_bit_identical_to_plain_objective():
    """When the constraining accuracy is below 1/2 the constrained update IS
    the plain update: same value, bit-identical gradient arrays."""
    rng = np.random.default_rng(7)
    disc = make_discriminator(3, hidden=(6,), seed=9)
    e = rng.normal(size=(5, 3))
    a = rng.normal(size=(5, 3))
    ce = rng.normal(size=(8, 3))
    ca = rng.normal(size=(8, 3))
    acc = accuracy(disc, ce, ca)
    if acc >= 0.5:
        ce, ca = ca, ce
        acc = accuracy(disc, ce, ca)
    assert acc < 0.5
    batch = DiscBatch(e, a, ce, ca)
    value, grads, info = trail_gradients(disc, batch)
    assert not info["gate"]
    p_value, p_grads = gail_gradients(disc, e, a)
    assert value == p_value
    for got, want in zip(grads.weights, p_grads.weights):
        assert np.array_equal(got, want)
    for got, want in zip(grads.biases, p_grads.biases):
        assert np.array_equal(got, want)
    assert trail_loss(disc, batch) == gail_term(disc, e, a)


def test_exact_half_accuracy_counts_as_expert_and_gates_on():
    disc = constant_half_disc(4)
    rng = np.random.default_rng(0)
    ce = rng.normal(size=(6, 4))
    ca = rng.normal(size=(6, 4))
    assert accuracy(disc, ce, ca) == 0.5
    batch = DiscBatch(rng.normal(size=(3, 4)), rng.normal(size=(3, 4)), ce, ca)
    _value, _grads, info = trail_gradients(disc, batch)
    assert info["gate"]  # 1/2 >= 1/2: ties trip the constraint
    assert trail_loss(disc, batch) == pytest.approx(
        gail_term(disc, batch.expert_obs, batch.agent_obs)
        - gail_term(disc, ce, ca), rel=1e-12)


def test_reward_values_and_cap():
    half = constant_half_disc(4)
    x = np.zeros(4)
    assert reward(half, x) == pytest.approx(np.log(2.0), rel=1e-12)
    high = saturated_disc(4, high=True)
    assert reward(high, x) == pytest.approx(REWARD_CAP, rel=1e-9)
    assert REWARD_CAP == pytest.approx(-np.log(EPS))
    low = saturated_disc(4, high=False)
    # floor is -log(1 - EPS), the clipped score's reward, not exactly zero
    assert reward(low, x) == pytest.approx(-np.log(1.0 - EPS), abs=1e-12)
    batch = reward(half, np.zeros((5, 4)))
    assert batch.shape == (5,)
    assert np.allclose(batch, np.log(2.0))


def test_saturated_scores_have_zero_gradient():
    """Clipped scores are treated as constants: a saturated discriminator gets
    exactly zero gradient from the saturated side."""
    disc = saturated_disc(3, high=True)
    e = np.random.default_rng(0).normal(size=(4, 3))
    a = np.random.default_rng(1).normal(size=(4, 3))
    value, grads = gail_gradients(disc, e, a)
    # expert side log D ~ log(1-EPS) ~ 0; agent side clipped at 1-EPS
    assert value == pytest.approx(4 * np.log(1 - EPS) + 4 * np.log(EPS), rel=1e-6)
    assert grads.max_abs() == 0.0


def test_oracle_reward():
    assert oracle_reward("expert") == 1.0
    assert oracle_reward("agent") == 0.0
    with pytest.raises(ValueError):
        oracle_reward("bystander")


def test_scores_shapes():
    disc = make_discriminator(5, seed=0)
    single = scores(disc, np.zeros(5))
    batch = scores(disc, np.zeros((7, 5)))
    assert np.ndim(single) == 0
    assert batch.shape == (7,)
    assert np.allclose(batch, single)


def test_augment_identity_when_disabled():
    spec = PointLiftEnv(EnvConfig(n_distractors=2)).obs_spec
    rng = np.random.default_rng(0)
    x = rng.normal(size=(6, spec.size))
    out = augment_batch(x, spec, rng, noise_sigma=0.0, group_drop_prob=0.0)
    assert np.array_equal(out, x)
    assert out is not x  # never aliases the input


def test_augment_drops_whole_groups_but_never_all():
    spec = PointLiftEnv(EnvConfig(n_distractors=2)).obs_spec
    rng = np.random.default_rng(3)
    x = np.ones((400, spec.size))
    out = augment_batch(x, spec, rng, noise_sigma=0.0, group_drop_prob=0.45)
    names = spec.nonempty_groups()
    saw_drop = {name: False for name in names}
    for row in out:
        dropped = []
        for name in names:
            sl = spec.group_slice(name)
            if np.all(row[sl] == 0.0):
                dropped.append(name)
                saw_drop[name] = True
            else:
                assert np.all(row[sl] == 1.0)  # zero noise: survivors untouched
        assert len(dropped) < len(names)  # at least one group survives
    assert all(saw_drop.values())  # every group gets dropped somewhere


def test_augment_noise_and_determinism():
    spec = PointLiftEnv(EnvConfig()).obs_spec
    x = np.zeros((10, spec.size))
    a = augment_batch(x, spec, np.random.default_rng(5), 0.01, 0.1)
    b = augment_batch(x, spec, np.random.default_rng(5), 0.01, 0.1)
    c = augment_batch(x, spec, np.random.default_rng(6), 0.01, 0.1)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)
    assert dm.augment(x, spec, np.random.default_rng(5), 0.01, 0.1).shape == x.shape


def test_augment_single_row():
    spec = PointLiftEnv(EnvConfig()).obs_spec
    out = augment_batch(np.zeros(spec.size), spec, np.random.default_rng(0))
    assert out.shape == (spec.size,)
