import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from recnum.agent import (
    PARAM_NAMES, RunAbort, RunSpec, RunState, TrainConfig, init_params, point_mass, power_law,
    predict_mu, reward, round_half_away, surrogate_grad, surrogate_loss, train_lockstep,
    train_run, train_step, uniform,
)
from recnum.numerals import NUMBERS, builtin_system, tokenize


def test_reward_values():
    assert reward(23, 23) == 1.0
    assert reward(25, 23) == pytest.approx(math.exp(-1), abs=1e-12)
    assert reward(150, 50) == 0.0
    assert reward(0.4, 1) == 0.0
    assert reward(99.4, 99) > 0 and reward(99.5, 99) == 0.0


def test_round_half_away():
    assert list(round_half_away([0.5, 1.5, 2.5, -0.5, 2.49])) == [1, 2, 3, -1, 2]


def test_power_law_masses():
    p = power_law()
    assert p.pmf.sum() == pytest.approx(1.0)
    assert p.mass([1, 2]) == pytest.approx(0.7645, abs=1e-4)
    assert p.mass(range(1, 7)) == pytest.approx(0.9122, abs=1e-4)
    draws = p.sample(np.random.default_rng(0), 200_000)
    assert draws.min() >= 1 and draws.max() <= 99
    assert np.mean(draws <= 2) == pytest.approx(0.7645, abs=0.01)


def test_uniform_and_point_mass():
    d = uniform().sample(np.random.default_rng(1), 99_000)
    assert abs(np.bincount(d, minlength=100)[1:].mean() - 1000) < 1e-9
    assert set(point_mass(7).sample(np.random.default_rng(0), 50)) == {7}


def test_fresh_head_gives_half():
    params = init_params(np.random.default_rng(0))
    params.w_out[:] = 0.0
    mu = predict_mu(params, [builtin_system("mandarin")[n] for n in NUMBERS])
    assert np.all(mu == 0.5)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(0.01, 5.0))
def test_mu_in_open_interval(seed, scale):
    params = init_params(np.random.default_rng(seed), scale)
    mu = predict_mu(params, [builtin_system("mandarin")[n] for n in NUMBERS])
    assert np.all(np.isfinite(mu)) and np.all((mu > 0) & (mu < 1))


def _fd_check(params, numerals, actions, adv, sigma, eps=1e-6):
    """Largest per-block relative error |fd - g| / max(|fd|, |g|) in the 2-norm."""
    grads = surrogate_grad(params, numerals, actions, adv, sigma)
    errors = {}
    for name in PARAM_NAMES:
        arr = getattr(params, name)
        fd = np.zeros_like(arr)
        it = np.nditer(arr, flags=["multi_index"])
        for _ in it:
            i = it.multi_index
            old = arr[i]
            arr[i] = old + eps
            up = surrogate_loss(params, numerals, actions, adv, sigma)
            arr[i] = old - eps
            down = surrogate_loss(params, numerals, actions, adv, sigma)
            arr[i] = old
            fd[i] = (up - down) / (2 * eps)
        g = getattr(grads, name)
        errors[name] = np.linalg.norm(fd - g) / max(np.linalg.norm(fd), np.linalg.norm(g))
    return errors


def test_gradient_matches_finite_differences():
    rng = np.random.default_rng(4)
    params = init_params(rng, scale=0.5)
    params.b[:] = rng.uniform(-0.5, 0.5, params.b.shape)
    params.b_out[:] = 0.3
    numerals = [tokenize("2*10+3"), tokenize("7")]
    actions = np.array([0.31, 0.05])
    adv = np.array([0.7, -0.4])
    errors = _fd_check(params, numerals, actions, adv, sigma=0.2)
    assert set(errors) == set(PARAM_NAMES)
    assert max(errors.values()) <= 1e-4, errors


def test_zero_advantage_no_update():
    params = init_params(np.random.default_rng(0))
    grads = surrogate_grad(params, [tokenize("3")], [0.03], [0.0], 0.01)
    assert all(np.all(a == 0) for a in grads.arrays().values())


def test_train_step_learns_point_target():
    params = init_params(np.random.default_rng(0))
    state = RunState.fresh(params)
    cfg = TrainConfig(epochs=10, step_size=0.01)
    rng = np.random.default_rng(1)
    num = tokenize("30")
    before = abs(100 * predict_mu(state.params.run(0), [num])[0] - 30)
    for _ in range(300):
        train_step(state, [(num, 30)] * 8, 0.1, cfg, rng)
    after = abs(100 * predict_mu(state.params.run(0), [num])[0] - 30)
    assert after < before and after < 5


def test_point_mass_learned_early():
    cfg = TrainConfig(epochs=2000, seed=3)
    system = builtin_system("mandarin")
    hook = lambda e, p: int(round_half_away(100 * predict_mu(p, [system[1]])[0])) == 1
    _, trace = train_run(system, point_mass(1), cfg, hook, eval_interval=100)
    assert any(ok for _, ok in trace[:-1])


def test_sigma_schedule():
    cfg = TrainConfig(epochs=100)
    sig = [cfg.sigma(t) for t in range(101)]
    assert sig[0] == pytest.approx(0.25) and sig[-1] == pytest.approx(0.01)
    assert all(a >= b for a, b in zip(sig, sig[1:]))


def test_config_validation():
    with pytest.raises(ValueError):
        TrainConfig(sigma_start=0.01, sigma_end=0.1)
    with pytest.raises(ValueError):
        TrainConfig(step_size=0)


def test_nonfinite_gradient_aborts():
    params = init_params(np.random.default_rng(0))
    params.w_out[:] = np.nan
    state = RunState.fresh(params)
    with pytest.raises(RunAbort):
        train_step(state, [(tokenize("3"), 3)], 0.1, TrainConfig(), np.random.default_rng(0))


def test_runs_do_not_depend_on_grouping():
    cfg = TrainConfig(epochs=40)
    systems = [builtin_system(n) for n in ("mandarin", "french_like", "base20")]
    seeds = [np.random.SeedSequence([5, r]) for r in range(3)]
    specs = [RunSpec(s, power_law(), q) for s, q in zip(systems, seeds)]
    group_params, group_traces = train_lockstep(specs, cfg, 10, None)
    for r, spec in enumerate(specs):
        alone, _ = train_lockstep([RunSpec(spec.system, power_law(), np.random.SeedSequence([5, r]))], cfg)
        for name in PARAM_NAMES:
            assert np.array_equal(getattr(alone, name)[0], getattr(group_params, name)[r])


def test_training_is_deterministic():
    cfg = TrainConfig(epochs=30, seed=9)
    a, _ = train_run(builtin_system("mandarin"), power_law(), cfg)
    b, _ = train_run(builtin_system("mandarin"), power_law(), cfg)
    assert all(np.array_equal(x, y) for x, y in zip(a.arrays().values(), b.arrays().values()))
