"""Point-lift environment: dynamics, expert, serialization, spurious channels."""
import numpy as np
import pytest

from imitation_lab import env as env_mod
from imitation_lab.env import (DEFAULT_TARGET_SPAWNS, EnvConfig, Layout,
                               PointLiftEnv, collect_demos, config_hash,
                               env_config_from_dict, env_config_to_dict,
                               inject_appearance_shift, load_demos,
                               rollout_random, run_episode, save_demos,
                               scripted_expert)
from imitation_lab.errors import ConfigError, DataFormatError


def fresh_env(**kw):
    return PointLiftEnv(EnvConfig(**kw))


def test_observation_spec_layout():
    spec = PointLiftEnv(EnvConfig(n_distractors=2)).obs_spec
    assert spec.size == 5 + 3 + 4 + 2
    assert spec.group_names() == ["proprio", "task", "distractor", "appearance"]
    assert spec.group_slice("proprio") == slice(0, 5)
    assert spec.group_slice("distractor") == slice(8, 12)
    bare = PointLiftEnv(EnvConfig(n_distractors=0)).obs_spec
    assert bare.size == 10
    assert "distractor" not in bare.nonempty_groups()


def test_reset_state_and_observation():
    env = fresh_env(n_distractors=1)
    state, layout = env.reset(np.random.default_rng(0))
    obs = env.observe(state)
    assert obs.shape == (12,)
    assert np.array_equal(state.gripper, [0.0, -0.7])
    assert state.height == 0.0 and not state.grasped
    assert tuple(layout.target) in DEFAULT_TARGET_SPAWNS
    # the task cue is hidden during the presentation delay
    assert np.array_equal(obs[5:8], [0.0, 0.0, 0.0])
    # without a delay the cue is the target-relative vector from frame one
    live = fresh_env(n_distractors=1, freeze_steps=0)
    state, layout = live.reset(np.random.default_rng(0))
    obs = live.observe(state)
    assert np.allclose(obs[5:7], np.asarray(layout.target) - state.gripper)


def test_step_moves_clips_and_reports_velocity():
    env = fresh_env(freeze_steps=0)
    state, _ = env.reset(np.random.default_rng(0))
    new, obs, _r, _d = env.step(state, np.array([2.0, -0.5, -1.0]))
    # action clipped to [-1, 1], scaled by max_speed
    assert np.allclose(new.gripper, [0.1, -0.75])
    assert np.allclose(new.gripper_vel, new.gripper - state.gripper)
    assert np.allclose(obs[2:4], new.gripper_vel)
    # walls clip position, not just action
    state.gripper = np.array([0.95, 0.0])
    new, _, _, _ = env.step(state, np.array([1.0, 0.0, -1.0]))
    assert new.gripper[0] == pytest.approx(1.0)


def test_step_rejects_bad_action_shape():
    env = fresh_env()
    state, _ = env.reset(np.random.default_rng(0))
    with pytest.raises(ValueError):
        env.step(state, np.zeros(2))


def grasp_ready_state(env, rng):
    """A state with the gripper sitting on the target."""
    state, layout = env.reset(rng)
    state.gripper = np.asarray(layout.target, dtype=np.float64).copy()
    return state


def test_grasp_lift_reward_and_drop():
    env = fresh_env(freeze_steps=0)
    cfg = env.config
    state = grasp_ready_state(env, np.random.default_rng(1))
    hold = np.array([0.0, 0.0, 1.0])
    rewards, heights = [], []
    for _ in range(6):
        state, _obs, r, _d = env.step(state, hold)
        rewards.append(r)
        heights.append(state.height)
    # height climbs lift_rate per held step; reward starts at the threshold
    assert heights == pytest.approx([0.1, 0.2, 0.3, 0.4, 0.5, 0.6])
    assert rewards == [0.0, 0.0, 0.0, 0.0, 1.0, 1.0]
    assert state.grasped
    # carried object follows the gripper
    state, _obs, _r, _d = env.step(state, np.array([1.0, 0.0, 1.0]))
    assert np.allclose(state.target, state.gripper)
    # releasing drops it: height resets, reward stops
    state, _obs, r, _d = env.step(state, np.array([0.0, 0.0, -1.0]))
    assert not state.grasped and state.height == 0.0 and r == 0.0


def test_grasp_requires_proximity():
    env = fresh_env(freeze_steps=0)
    state, layout = env.reset(np.random.default_rng(2))
    # far from target: toggling does nothing
    new, _obs, _r, _d = env.step(state, np.array([0.0, 0.0, 1.0]))
    assert not new.grasped


def test_height_caps_at_lift_max():
    env = fresh_env(freeze_steps=0)
    state = grasp_ready_state(env, np.random.default_rng(3))
    hold = np.array([0.0, 0.0, 1.0])
    for _ in range(15):
        state, _obs, _r, _d = env.step(state, hold)
    assert state.height == pytest.approx(env.config.lift_max)


def test_episode_ends_only_at_t_max():
    env = fresh_env(t_max=20)
    state, _ = env.reset(np.random.default_rng(0))
    state.gripper = state.target.copy()
    hold = np.array([0.0, 0.0, 1.0])
    dones = []
    for _ in range(20):
        state, _obs, _r, done = env.step(state, hold)
        dones.append(done)
    assert dones == [False] * 19 + [True]


def test_episode_ids_increment():
    env = fresh_env()
    rng = np.random.default_rng(0)
    ids = [env.reset(rng)[0].episode_id for _ in range(3)]
    assert ids == [0, 1, 2]


def test_distractor_clearance_and_bounds():
    cfg = EnvConfig(n_distractors=3)
    env = PointLiftEnv(cfg)
    rng = np.random.default_rng(5)
    for _ in range(50):
        _state, layout = env.reset(rng)
        for d in layout.distractors:
            d = np.asarray(d)
            assert np.all(np.abs(d) <= cfg.arena_half_width)
            assert np.linalg.norm(d - np.asarray(cfg.gripper_start)) >= 0.25
            assert np.linalg.norm(d - np.asarray(layout.target)) >= 0.25


def test_spurious_groups_do_not_touch_dynamics():
    """Distractor and appearance channels are observation-only: changing them
    leaves every proprio/task feature of the next step bit-identical."""
    env = PointLiftEnv(EnvConfig(n_distractors=2, freeze_steps=0))
    rng = np.random.default_rng(7)
    state, _ = env.reset(rng)
    import copy
    twin = copy.deepcopy(state)
    twin.distractors = twin.distractors + 0.3
    twin.appearance = twin.appearance + 5.0
    action = np.array([0.4, 0.6, 1.0])
    a_state, a_obs, a_r, a_d = env.step(state, action)
    b_state, b_obs, b_r, b_d = env.step(twin, action)
    spec = env.obs_spec
    for group in ("proprio", "task"):
        sl = spec.group_slice(group)
        assert np.array_equal(a_obs[sl], b_obs[sl])
    assert a_r == b_r and a_d == b_d


def test_recorded_episode_replays_bit_exactly():
    cfg = EnvConfig(n_distractors=2)
    rng = np.random.default_rng(11)
    eps = collect_demos(cfg, n=2, noise_scale=0.05, rng=rng)
    for ep in eps:
        env = PointLiftEnv(cfg, episode_id_start=ep.episode_id)
        state = env.reset(_FixedLayoutRng(ep.layout, cfg))[0]
        obs = env.observe(state)
        for t in ep.transitions:
            assert np.array_equal(obs, t.obs)
            state, obs, reward, done = env.step(state, t.action)
            assert np.array_equal(obs, t.next_obs)
            assert reward == t.env_reward_raw
            assert done == t.done


class _FixedLayoutRng:
    """Drives _sample_layout to reproduce a known layout: supplies the target
    index, then each recorded distractor position."""

    def __init__(self, layout, cfg):
        self._target_idx = cfg.target_spawns.index(tuple(layout.target))
        self._points = [np.asarray(p) for p in layout.distractors]
        self._i = 0

    def integers(self, *a, **k):
        return self._target_idx

    def uniform(self, *a, **k):
        p = self._points[self._i]
        self._i += 1
        return p.copy()


def test_scripted_expert_is_deterministic_without_noise():
    cfg = EnvConfig()
    env = PointLiftEnv(cfg, episode_id_start=4)
    state, _ = env.reset(np.random.default_rng(0))
    a1 = scripted_expert(cfg, state, np.random.default_rng(0), noise_scale=0.0)
    a2 = scripted_expert(cfg, state, np.random.default_rng(99), noise_scale=0.0)
    assert np.array_equal(a1, a2)


def test_presentation_delay_freezes_everything():
    """During the first freeze_steps steps actions are no-ops: the gripper
    stays put, nothing can be grasped, no reward is possible, and all frozen
    frames of an episode are identical with the task cue zeroed."""
    env = fresh_env(freeze_steps=4)
    state, layout = env.reset(np.random.default_rng(9))
    state.gripper = np.asarray(layout.target, dtype=np.float64).copy()  # grasp-ready
    first = env.observe(state)
    assert np.array_equal(first[5:8], [0.0, 0.0, 0.0])
    frames = [first]
    for i in range(4):
        state, obs, r, _d = env.step(state, np.array([1.0, 1.0, 1.0]))
        assert r == 0.0
        if i < 3:
            frames.append(obs)
    for f in frames:
        assert np.array_equal(f, first)
    assert not state.grasped and np.array_equal(state.gripper, layout.target)
    # the first post-delay frame reveals the cue ((0,0) here: gripper on target)
    live = env.observe(state)
    assert state.step == 4
    assert np.array_equal(live[5:8], [0.0, 0.0, 0.0]) is True  # on-target cue
    state, obs, r, _d = env.step(state, np.array([0.0, 0.0, 1.0]))
    assert state.grasped  # delay over: the same action now works


def test_presentation_delay_reveals_cue():
    env = fresh_env(freeze_steps=2)
    state, layout = env.reset(np.random.default_rng(10))
    for _ in range(2):
        state, obs, _r, _d = env.step(state, np.zeros(3))
    assert np.allclose(obs[5:7], np.asarray(layout.target) - state.gripper)
    assert obs[5:7] @ obs[5:7] > 0


def test_expert_idles_through_delay():
    cfg = EnvConfig(freeze_steps=3)
    env = PointLiftEnv(cfg)
    state, _ = env.reset(np.random.default_rng(11))
    a = scripted_expert(cfg, state, np.random.default_rng(0), noise_scale=0.0)
    assert np.array_equal(a, np.zeros(3))


def test_expert_solves_task():
    cfg = EnvConfig()
    rng = np.random.default_rng(101)
    import warnings
    with warnings.catch_warnings():
        warnings.simplefilter("error")  # solve-rate warning would fail the test
        eps = collect_demos(cfg, n=100, noise_scale=0.05, rng=rng)
    returns = np.array([ep.env_return for ep in eps])
    assert np.mean(returns >= 150.0) >= 0.95
    assert 150 < returns.mean() < 200
    assert all(len(ep.transitions) == cfg.t_max for ep in eps)


def test_expert_warns_when_crippled():
    cfg = EnvConfig()
    with pytest.warns(UserWarning, match="solve-rate"):
        collect_demos(cfg, n=5, noise_scale=5.0, rng=np.random.default_rng(0))


def test_seeded_mode_copies_demo_layouts():
    cfg = EnvConfig(n_distractors=2)
    demos = collect_demos(cfg, n=5, noise_scale=0.05, rng=np.random.default_rng(101))
    layouts = tuple(ep.layout for ep in demos)
    seeded = PointLiftEnv(EnvConfig(n_distractors=2, init_mode="seeded",
                                    demo_layouts=layouts))
    rng = np.random.default_rng(3)
    known = {(l.target, l.distractors) for l in layouts}
    for _ in range(20):
        _state, layout = seeded.reset(rng)
        assert (layout.target, layout.distractors) in known


def test_seeded_mode_without_layouts_is_an_error():
    with pytest.raises(ConfigError):
        PointLiftEnv(EnvConfig(init_mode="seeded"))


def test_env_config_validation():
    with pytest.raises(ConfigError):
        EnvConfig(init_mode="mystery")
    with pytest.raises(ConfigError):
        EnvConfig(t_max=0)
    with pytest.raises(ConfigError):
        EnvConfig(max_speed=0.0)
    with pytest.raises(ConfigError):
        EnvConfig(freeze_steps=-1)
    with pytest.raises(ConfigError):
        EnvConfig(t_max=10, freeze_steps=10)
    with pytest.raises(ConfigError):
        EnvConfig(appearance_offset=(1.0,))


def test_appearance_shift_offsets_only_appearance():
    base = EnvConfig()
    shifted = inject_appearance_shift(base, (0.5, 0.5))
    e1, e2 = PointLiftEnv(base), PointLiftEnv(shifted)
    s1, _ = e1.reset(np.random.default_rng(0))
    s2, _ = e2.reset(np.random.default_rng(0))
    o1, o2 = e1.observe(s1), e2.observe(s2)
    sl = e1.obs_spec.group_slice("appearance")
    assert np.allclose(o2[sl] - o1[sl], 0.5)
    rest = slice(0, sl.start)
    assert np.array_equal(o1[rest], o2[rest])
    with pytest.raises(ConfigError):
        inject_appearance_shift(base, (1.0, 2.0, 3.0))


def test_rollout_random_lengths_and_source():
    cfg = EnvConfig(n_distractors=1)
    eps = rollout_random(cfg, 3, np.random.default_rng(0), steps=40)
    assert len(eps) == 3
    for ep in eps:
        assert len(ep) == 40
        assert all(t.source == "agent" for t in ep)


def test_env_reward_read_counter():
    from imitation_lab.env import Transition
    t = Transition(obs=np.zeros(1), action=np.zeros(3), reward=0.0,
                   next_obs=np.zeros(1), done=False, step=0, episode_id=0,
                   source="agent", env_reward_raw=0.5)
    before = Transition.env_reward_reads
    assert t.env_reward() == 0.5
    assert Transition.env_reward_reads == before + 1


def test_demo_file_round_trip(tmp_path):
    cfg = EnvConfig(n_distractors=2)
    eps = collect_demos(cfg, n=3, noise_scale=0.05, rng=np.random.default_rng(101))
    path = tmp_path / "demos.jsonl"
    save_demos(path, cfg, eps, noise_scale=0.05, seed=101)
    cfg2, eps2 = load_demos(path)
    assert config_hash(cfg2) == config_hash(cfg)
    assert len(eps2) == len(eps)
    for a, b in zip(eps, eps2):
        assert a.episode_id == b.episode_id
        assert a.layout == Layout(tuple(b.layout.target),
                                  tuple(tuple(p) for p in b.layout.distractors))
        for ta, tb in zip(a.transitions, b.transitions):
            assert np.array_equal(ta.obs, tb.obs)
            assert np.array_equal(ta.action, tb.action)
            assert ta.env_reward_raw == tb.env_reward_raw
            assert tb.source == "expert"


def test_load_demos_rejects_garbage_line(tmp_path):
    cfg = EnvConfig()
    eps = collect_demos(cfg, n=1, rng=np.random.default_rng(101))
    path = tmp_path / "demos.jsonl"
    save_demos(path, cfg, eps)
    lines = path.read_text().splitlines()
    lines.insert(1, "{not json")
    path.write_text("\n".join(lines) + "\n")
    with pytest.raises(DataFormatError, match=":2"):
        load_demos(path)


def test_load_demos_rejects_wrong_header(tmp_path):
    path = tmp_path / "demos.jsonl"
    path.write_text('{"kind": "episode"}\n')
    with pytest.raises(DataFormatError, match="demo_header"):
        load_demos(path)


def test_load_demos_rejects_hash_mismatch(tmp_path):
    import json
    cfg = EnvConfig()
    eps = collect_demos(cfg, n=1, rng=np.random.default_rng(101))
    path = tmp_path / "demos.jsonl"
    save_demos(path, cfg, eps)
    lines = path.read_text().splitlines()
    header = json.loads(lines[0])
    header["env_config"]["t_max"] = 99
    lines[0] = json.dumps(header)
    path.write_text("\n".join(lines) + "\n")
    with pytest.raises(DataFormatError, match="config_hash"):
        load_demos(path)


def test_load_demos_rejects_future_format(tmp_path):
    import json
    cfg = EnvConfig()
    eps = collect_demos(cfg, n=1, rng=np.random.default_rng(101))
    path = tmp_path / "demos.jsonl"
    save_demos(path, cfg, eps)
    lines = path.read_text().splitlines()
    header = json.loads(lines[0])
    header["format_version"] = 999
    lines[0] = json.dumps(header)
    path.write_text("\n".join(lines) + "\n")
    with pytest.raises(DataFormatError, match="format_version"):
        load_demos(path)


def test_env_config_dict_round_trip():
    cfg = EnvConfig(n_distractors=2, appearance_offset=(0.5, 0.5))
    back = env_config_from_dict(env_config_to_dict(cfg))
    assert back == cfg
    assert config_hash(back) == config_hash(cfg)
