"""Early-stopping rule: fixed/adaptive traces, tie handling, and invariance
of the adaptive rule under monotone transforms of the score."""
import numpy as np
import pytest

from imitation_lab.errors import ConfigError
from imitation_lab.stopping import EpisodeStopper, _lower_median, parse_aes


def run_trace(stopper, scores):
    """Feed scores in order; return the 1-based step at which the stopper
    fired, or None."""
    stopper.reset()
    for step, s in enumerate(scores, start=1):
        if stopper.should_stop(s, step):
            return step
    return None


def test_off_never_stops():
    st = EpisodeStopper(variant="off")
    assert run_trace(st, [1e9] * 500) is None


def test_fixed_stops_exactly_at_t():
    st = EpisodeStopper(variant="fixed", fixed_t=50)
    assert run_trace(st, [0.0] * 200) == 50
    # and again after reset
    assert run_trace(st, [0.0] * 200) == 50


def test_fixed_validation():
    with pytest.raises(ConfigError):
        EpisodeStopper(variant="fixed", fixed_t=0)
    with pytest.raises(ConfigError):
        EpisodeStopper(variant="nope")
    with pytest.raises(ConfigError):
        EpisodeStopper(variant="adaptive", t_patience=0)


def test_lower_median():
    assert _lower_median([3.0]) == 3.0
    assert _lower_median([1.0, 2.0]) == 1.0
    assert _lower_median([5.0, 1.0, 3.0]) == 3.0
    assert _lower_median([4.0, 1.0, 3.0, 2.0]) == 2.0


def test_adaptive_hand_trace():
    """20 low scores then a run of high ones: the streak starts at the first
    high score and fires on the 10th consecutive one."""
    st = EpisodeStopper(variant="adaptive", t_patience=10)
    scores = [0.1] * 20 + [0.9] * 50
    assert run_trace(st, scores) == 30  # steps 21..30 exceed the median


def test_adaptive_earliest_possible_stop():
    """Score 1 enters history without comparison, so a strictly increasing
    trace fires at step t_patience + 1 and never earlier."""
    st = EpisodeStopper(variant="adaptive", t_patience=10)
    assert run_trace(st, [float(i) for i in range(100)]) == 11
    st = EpisodeStopper(variant="adaptive", t_patience=3)
    assert run_trace(st, [float(i) for i in range(100)]) == 4


def test_adaptive_constant_scores_never_stop():
    st = EpisodeStopper(variant="adaptive", t_patience=5)
    assert run_trace(st, [0.5] * 400) is None


def test_adaptive_tie_resets_streak():
    """At step 3 the lower median of [0.0, 1.0] is 0.0 and the score is
    exactly 0.0: a tie, which must reset. If ties extended the streak this
    trace would fire at step 3; with the reset it fires at step 5."""
    st = EpisodeStopper(variant="adaptive", t_patience=2)
    assert run_trace(st, [0.0, 1.0, 0.0, 1.0, 1.0]) == 5


def test_adaptive_dip_resets_streak():
    st = EpisodeStopper(variant="adaptive", t_patience=4)
    scores = [0.2] * 10 + [0.8, 0.8, 0.8, 0.1, 0.8, 0.8, 0.8, 0.8, 0.8]
    # the dip at step 14 kills the first streak; next window fires at step 18
    assert run_trace(st, scores) == 18


def test_adaptive_invariant_under_monotone_score_maps():
    """The rule only compares scores, so any strictly increasing map of the
    score sequence stops at the same step. 100 random maps over random
    traces."""
    rng = np.random.default_rng(0)
    for trial in range(100):
        n = int(rng.integers(30, 120))
        base = rng.normal(size=n)
        # random strictly increasing map: positive-weight mixture of odd
        # powers, exp, and a random piecewise-linear CDF-ish warp
        a, b, c = rng.uniform(0.1, 2.0, size=3)
        knots = np.sort(rng.normal(size=8))

        def warp(x, a=a, b=b, c=c, knots=knots):
            return (a * x + b * np.tanh(x) + c * np.searchsorted(knots, x)
                    + 0.01 * x ** 3)

        t_pat = int(rng.integers(2, 8))
        st1 = EpisodeStopper(variant="adaptive", t_patience=t_pat)
        st2 = EpisodeStopper(variant="adaptive", t_patience=t_pat)
        stop1 = run_trace(st1, [float(s) for s in base])
        stop2 = run_trace(st2, [float(warp(s)) for s in base])
        assert stop1 == stop2, f"trial {trial}: {stop1} vs {stop2}"


def test_oracle_shares_adaptive_rule():
    st_a = EpisodeStopper(variant="adaptive", t_patience=6)
    st_o = EpisodeStopper(variant="oracle", t_patience=6)
    rng = np.random.default_rng(3)
    trace = list(rng.normal(size=80))
    assert run_trace(st_a, trace) == run_trace(st_o, trace)
    assert st_o.uses_env_reward and not st_a.uses_env_reward


def test_reset_clears_history():
    st = EpisodeStopper(variant="adaptive", t_patience=2)
    assert run_trace(st, [0.0, 1.0, 2.0, 3.0]) == 3
    # without reset the old history would change the answer; run_trace resets
    assert run_trace(st, [10.0, 11.0, 12.0, 13.0]) == 3


def test_parse_aes():
    assert parse_aes("off") == {"variant": "off"}
    assert parse_aes("adaptive") == {"variant": "adaptive"}
    assert parse_aes("oracle") == {"variant": "oracle"}
    assert parse_aes("fixed:50") == {"variant": "fixed", "fixed_t": 50}
    with pytest.raises(ConfigError):
        parse_aes("fixed:soon")
    with pytest.raises(ConfigError):
        parse_aes("sometimes")
