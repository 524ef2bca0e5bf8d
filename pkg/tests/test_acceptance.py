"""Acceptance criteria, one test per criterion.

The learnability criteria (8 to 11) train the desk-profile populations and
take several minutes each. Results are cached per session so criterion 9
reuses the criterion 8 training, and criterion 11 re-runs everything.
"""

import filecmp
import math
import random
import time
from pathlib import Path

import numpy as np
import pytest

from recnum.agent import (
    PARAM_NAMES, init_params, power_law, reward, surrogate_grad, surrogate_loss,
)
from recnum.dfa import build_trie, description_length, irregularity, language, minimize, right_language
from recnum.experiments import ExperimentConfig, run_exp3, run_sweeps
from recnum.generators import LexiconSpec, enumerate_alternatives, random_population
from recnum.numerals import NUMBERS, builtin_system, render, tokenize

SEED = 0
SWEEPS = {"exp1": "power", "exp2": "uniform"}


@pytest.fixture(scope="session")
def outputs(tmp_path_factory):
    """Desk-profile experiment outputs keyed by parallelism width."""
    cache = {}

    def get(parallel: int):
        if parallel not in cache:
            out = tmp_path_factory.mktemp(f"par{parallel}")
            cfg = ExperimentConfig(profile="desk", out=str(out), master_seed=SEED, parallel=parallel)
            t0 = time.time()
            sweeps = run_sweeps(cfg, SWEEPS)
            t1 = time.time()
            exp3 = run_exp3(cfg)
            t2 = time.time()
            cache[parallel] = dict(out=out, sweeps=sweeps, exp3=exp3, t_sweeps=t1 - t0, t_exp3=t2 - t1)
        return cache[parallel]

    return get


def test_c01_mdl_anchors(criterion):
    m = builtin_system("mandarin")
    got = {hi: irregularity(m, range(1, hi + 1)).bits for hi in (10, 20, 30)}
    want = {10: 56.219, 20: 201.192, 30: 241.039}
    ok = all(abs(got[k] - want[k]) <= 0.01 for k in want)
    criterion(1, ok, ", ".join(f"1..{k}: {got[k]:.4f} (want {want[k]})" for k in want))


def test_c02_unit_identity(criterion):
    a = description_length(10, 2, 10)
    b = description_length(1, 1, 1)
    criterion(2, abs(a - 56.219) <= 1e-3 and b == 1, f"(10,2,10) -> {a:.5f}, (1,1,1) -> {b}")


def _random_numeral_sets(count: int, seed: int):
    rng = random.Random(seed)
    systems = random_population(4, seed) + [builtin_system(n) for n in ("mandarin", "french_like", "basque_like")]
    for _ in range(count):
        system = rng.choice(systems)
        numbers = rng.sample(list(NUMBERS), rng.randint(1, 99))
        yield {tuple(system[n].symbols) for n in numbers}


def test_c03_dfa_properties(criterion):
    failures = 0
    for words in _random_numeral_sets(100, 3):
        d = minimize(build_trie(words))
        rights = [right_language(d, q) for q in d.states]
        again = minimize(d)
        if (language(d) != words or len(set(rights)) != len(rights)
                or (again.state_count, again.transition_count) != (d.state_count, d.transition_count)):
            failures += 1
    criterion(3, failures == 0, f"{failures}/100 sets violated language, minimality or idempotence")


def test_c04_reward(criterion):
    vals = [reward(23, 23), reward(25, 23), reward(150, 50), reward(0.4, 1)]
    ok = vals[0] == 1 and abs(vals[1] - math.exp(-1)) <= 1e-12 and vals[2] == 0 and vals[3] == 0
    criterion(4, ok, f"R values {vals}")


def power_masses(seed: int = SEED):
    draws = power_law().sample(np.random.default_rng(seed), 10**6)
    return float(np.mean(draws <= 2)), float(np.mean(draws <= 6))


def test_c05_power_law_sampler(criterion):
    m2, m6 = power_masses()
    ok = abs(m2 - 0.7645) <= 0.01 and abs(m6 - 0.9122) <= 0.01
    criterion(5, ok, f"mass{{1,2}} = {m2:.4f}, mass{{1..6}} = {m6:.4f}")


def gradient_errors():
    rng = np.random.default_rng(4)
    params = init_params(rng, scale=0.5)
    params.b[:] = rng.uniform(-0.5, 0.5, params.b.shape)
    numerals = [tokenize("2*10+3"), tokenize("7")]
    actions, adv, sigma, eps = np.array([0.31, 0.05]), np.array([0.7, -0.4]), 0.2, 1e-6
    grads = surrogate_grad(params, numerals, actions, adv, sigma)
    errors = {}
    for name in PARAM_NAMES:
        arr = getattr(params, name)
        fd = np.zeros_like(arr)
        for i in np.ndindex(arr.shape):
            old = arr[i]
            arr[i] = old + eps
            up = surrogate_loss(params, numerals, actions, adv, sigma)
            arr[i] = old - eps
            down = surrogate_loss(params, numerals, actions, adv, sigma)
            arr[i] = old
            fd[i] = (up - down) / (2 * eps)
        g = getattr(grads, name)
        errors[name] = float(np.linalg.norm(fd - g) / max(np.linalg.norm(fd), np.linalg.norm(g)))
    return errors


def test_c06_gradient(criterion):
    errors = gradient_errors()
    worst = max(errors.values())
    criterion(6, worst <= 1e-4, f"max relative error {worst:.2e} over {len(errors)} blocks")


def test_c07_alternatives(criterion):
    basque = LexiconSpec(frozenset(range(1, 11)), frozenset({10, 20}))
    got = {render(x) for x in enumerate_alternatives(91, 7, basque)}
    want = {"4*20+10+1", "10+4*20+1", "8*10+10+1", "10+8*10+1", "7*10+20+1", "20+7*10+1"}
    criterion(7, got == want, f"{len(got)} alternatives: {sorted(got)}")


def test_c08_exp2_ordering(criterion, outputs):
    run = outputs(1)
    exp2 = run["sweeps"]["exp2"]
    fits = exp2.fits
    reg, rnd = fits["mean_learnability_regular"], fits["mean_learnability_random"]
    slope = fits["global"]["slope"]
    ok = reg > rnd and slope < 0 and run["t_sweeps"] <= 20 * 60
    criterion(8, ok, f"regular {reg:.4f} vs random {rnd:.4f}, global slope {slope:.3e}, "
                     f"{run['t_sweeps']:.0f}s")


def test_c09_exp1_flatter(criterion, outputs):
    sweeps = outputs(1)["sweeps"]
    s1 = sweeps["exp1"].fits["global"]["slope"]
    s2 = sweeps["exp2"].fits["global"]["slope"]
    criterion(9, abs(s1) < abs(s2), f"|slope exp1| {abs(s1):.3e} vs |slope exp2| {abs(s2):.3e}")


def test_c10_exp3(criterion, outputs):
    run = outputs(1)
    summary = run["exp3"]
    fitted = summary.fitted
    wins = sum(h.most_beats_least for h in fitted)
    mean = summary.as_dict()["mean_slope"]
    ok = len(fitted) >= 3 and wins > len(fitted) / 2 and mean < 0 and run["t_exp3"] <= 30 * 60
    criterion(10, ok, f"{len(fitted)} neighbourhoods, most>=least in {wins}, mean slope {mean:.3e}, "
                      f"{run['t_exp3']:.0f}s")


def _csv_files(root: Path):
    return sorted(p.relative_to(root) for p in root.rglob("*") if p.suffix in (".csv", ".json"))


def test_c11_determinism(criterion, outputs):
    # cheap criteria 5 to 7 re-run in-process
    same_cheap = power_masses() == power_masses() and gradient_errors() == gradient_errors()
    a, b = outputs(1), outputs(8)
    files_a, files_b = _csv_files(a["out"]), _csv_files(b["out"])
    identical = files_a == files_b and all(
        filecmp.cmp(a["out"] / f, b["out"] / f, shallow=False) for f in files_a)
    aggregates = all(
        a["sweeps"][k].fits == b["sweeps"][k].fits for k in SWEEPS
    ) and a["exp3"].as_dict() == b["exp3"].as_dict()
    criterion(11, same_cheap and identical and aggregates,
              f"{len(files_a)} output files identical at widths 1 and 8: {identical}; "
              f"aggregates equal: {aggregates}")
