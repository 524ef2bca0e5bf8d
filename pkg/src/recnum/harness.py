"""Learnability: normalised area under the test-accuracy curve.

Runs are addressed by ``(system, repetition)``. Every system's repetition
``r`` uses the same seeds, so systems are compared under common random
numbers. Test sets come from their own stream keyed by the test
distribution, which lets one training sweep be scored under several test
distributions at once.
"""

from __future__ import annotations

import logging
import math
import zlib
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from multiprocessing import get_context
from typing import Mapping, Sequence

import numpy as np

from .agent import (
    AgentParams, NeedDistribution, RunAbort, RunSpec, TrainConfig, predict_mu,
    round_half_away, train_lockstep,
)
from .numerals import NUMBERS, NumeralSystem

log = logging.getLogger(__name__)

TEST_SIZE = 99


@dataclass(frozen=True)
class EvalProtocol:
    q: NeedDistribution
    eval_interval: int = 300
    full_enumeration: bool = False  # test on 1..99 once each instead of sampling

    def test_set(self, master_seed: int, rep: int) -> np.ndarray:
        if self.full_enumeration:
            return np.arange(1, len(NUMBERS) + 1)
        key = zlib.crc32(self.q.kind.encode())
        rng = np.random.default_rng([master_seed, rep, 1, key])
        return self.q.sample(rng, TEST_SIZE)


def run_seed(master_seed: int, rep: int) -> np.random.SeedSequence:
    return np.random.SeedSequence([master_seed, rep])


def evaluate(params: AgentParams, test_set: Sequence[int], system: NumeralSystem) -> float:
    """Fraction of test numbers n with round(100 * mu(numeral n)) == n."""
    targets = np.asarray(test_set, dtype=np.int64)
    if targets.size == 0:
        raise ValueError("empty test set")
    if targets.min() < NUMBERS.start or targets.max() >= NUMBERS.stop:
        raise ValueError("test targets must lie in 1..99")
    mu = predict_mu(params, [system[int(n)] for n in targets])
    return float(np.mean(round_half_away(100.0 * mu) == targets))


def auc(trace: Sequence[tuple[int, float]]) -> float:
    """Trapezoidal area under (epoch, accuracy), divided by the epoch span."""
    if len(trace) < 2:
        raise ValueError("need at least two evaluation points")
    epochs = np.array([e for e, _ in trace], dtype=float)
    acc = np.array([a for _, a in trace], dtype=float)
    if epochs[0] != 0 or np.any(np.diff(epochs) <= 0):
        raise ValueError("epochs must start at 0 and increase strictly")
    return float(np.trapezoid(acc, epochs) / epochs[-1])


@dataclass
class RunResult:
    rep: int
    seed: int
    trace: list[tuple[int, float]]
    auc: float | None
    error: str | None = None


@dataclass
class LearnabilityResult:
    system: str
    per_run: list[RunResult] = field(default_factory=list)

    @property
    def completed(self) -> list[RunResult]:
        return [r for r in self.per_run if r.auc is not None]

    @property
    def learnability(self) -> float:
        done = self.completed
        return math.fsum(r.auc for r in done) / len(done) if done else math.nan

    @property
    def auc_stddev(self) -> float:
        vals = [r.auc for r in self.completed]
        return float(np.std(vals, ddof=1)) if len(vals) > 1 else 0.0

    @property
    def aborted(self) -> list[RunResult]:
        return [r for r in self.per_run if r.auc is None]


# ---------------------------------------------------------------------------
# Sweeps


@dataclass(frozen=True)
class _Job:
    index: int  # position of the system in the population
    rep: int


def _run_unit(systems: Sequence[NumeralSystem], jobs: Sequence[_Job], p: NeedDistribution,
              protocols: Mapping[str, EvalProtocol], cfg: TrainConfig, master_seed: int):
    """Train one group of jobs in lockstep and score every protocol."""
    names = list(protocols)
    interval = _common_interval(protocols)
    test_sets = {
        name: np.stack([protocols[name].test_set(master_seed, j.rep) for j in jobs]) for name in names
    }
    specs = [RunSpec(systems[j.index], p, run_seed(master_seed, j.rep)) for j in jobs]
    traces = {name: [[] for _ in jobs] for name in names}

    from .agent import SystemTables, predictions_batch
    tables = SystemTables.build([s.system for s in specs])

    def on_eval(epoch, params):
        pred = predictions_batch(params, tables)
        for name in names:
            t = test_sets[name]
            acc = (np.take_along_axis(pred, t - 1, axis=1) == t).mean(axis=1)
            for r in range(len(jobs)):
                traces[name][r].append((epoch, float(acc[r])))

    train_lockstep(specs, cfg, interval, on_eval)
    return traces


def _common_interval(protocols: Mapping[str, EvalProtocol]) -> int:
    intervals = {p.eval_interval for p in protocols.values()}
    if len(intervals) != 1:
        raise ValueError("protocols scored in one sweep must share the evaluation interval")
    return intervals.pop()


def _run_unit_safe(args):
    systems, jobs, p, protocols, cfg, master_seed = args
    try:
        return _run_unit(systems, jobs, p, protocols, cfg, master_seed), {}
    except RunAbort as exc:
        if len(jobs) == 1:
            return None, {jobs[0]: str(exc)}
    # isolate the failing run(s)
    out = {name: [] for name in protocols}
    errors = {}
    for job in jobs:
        try:
            t = _run_unit(systems, [job], p, protocols, cfg, master_seed)
            for name in protocols:
                out[name].append(t[name][0])
        except RunAbort as exc:
            errors[job] = str(exc)
            for name in protocols:
                out[name].append(None)
    return out, errors


def measure_population(systems: Sequence[NumeralSystem], p: NeedDistribution,
                       protocols: Mapping[str, EvalProtocol], config: TrainConfig,
                       repetitions: int = 20, master_seed: int = 0, parallel: int = 1,
                       group_size: int = 16) -> dict[str, list[LearnabilityResult]]:
    """Learnability of every system under every named test protocol.

    Jobs are cut into fixed groups of ``group_size`` in (system, repetition)
    order; ``parallel`` only decides how many worker processes take groups,
    so results do not depend on it.
    """
    if repetitions < 1:
        raise ValueError("repetitions must be >= 1")
    jobs = [_Job(i, r) for i in range(len(systems)) for r in range(repetitions)]
    units = [jobs[k:k + group_size] for k in range(0, len(jobs), group_size)]
    args = [(systems, unit, p, protocols, config, master_seed) for unit in units]
    if parallel > 1 and len(units) > 1:
        with ProcessPoolExecutor(max_workers=parallel, mp_context=get_context("fork")) as pool:
            outputs = list(pool.map(_run_unit_safe, args))
    else:
        outputs = [_run_unit_safe(a) for a in args]

    results = {name: [LearnabilityResult(s.name) for s in systems] for name in protocols}
    for unit, (traces, errors) in zip(units, outputs):
        for pos, job in enumerate(unit):
            seed = _seed_value(master_seed, job.rep)
            for name in protocols:
                trace = None if traces is None else traces[name][pos]
                if trace is None:
                    msg = errors.get(job, "aborted")
                    log.warning("run %s rep %d aborted: %s", systems[job.index].name, job.rep, msg)
                    results[name][job.index].per_run.append(RunResult(job.rep, seed, [], None, msg))
                else:
                    results[name][job.index].per_run.append(RunResult(job.rep, seed, trace, auc(trace)))
    return results


def _seed_value(master_seed: int, rep: int) -> int:
    return int(run_seed(master_seed, rep).generate_state(1)[0])


def measure_learnability(system: NumeralSystem, p: NeedDistribution, q: NeedDistribution,
                         config: TrainConfig, repetitions: int = 20, master_seed: int = 0,
                         eval_interval: int = 300, full_enumeration: bool = False,
                         parallel: int = 1) -> LearnabilityResult:
    protocol = EvalProtocol(q, eval_interval, full_enumeration)
    return measure_population([system], p, {"q": protocol}, config, repetitions,
                              master_seed, parallel)["q"][0]
