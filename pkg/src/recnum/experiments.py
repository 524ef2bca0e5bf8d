"""Experiment drivers: populations, learnability sweeps and regressions."""

from __future__ import annotations

import csv
import json
import logging
import math
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .agent import TrainConfig, need_distribution
from .dfa import irregularity, local_irregularity
from .generators import build_neighbourhood, random_population
from .harness import EvalProtocol, LearnabilityResult, measure_population
from .numerals import (
    NumeralSystem, SystemFileError, builtin_system, read_system, stats, validate_system,
)

log = logging.getLogger(__name__)

REGULAR_EXEMPLARS = ("mandarin", "base20", "french_like")
NEIGHBOURHOOD_BASES = ("french_like", "basque_like", "nahuatl_like")

RESULT_COLUMNS = (
    "system_id", "irregularity_bits", "local_irregularity_bits", "lexicon_size_atoms",
    "avg_complexity", "learnability", "auc_stddev", "repetitions", "seed",
)


# ---------------------------------------------------------------------------
# Regression


class InsufficientPointsError(ValueError):
    pass


@dataclass(frozen=True)
class RegressionFit:
    slope: float
    intercept: float
    stderr_slope: float
    n_points: int

    def as_dict(self) -> dict:
        return asdict(self)


def ols(x: Sequence[float], y: Sequence[float]) -> RegressionFit:
    """Least-squares line y = intercept + slope * x on raw values."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError("x and y must be 1-d and of equal length")
    n = x.size
    if n < 3:
        raise InsufficientPointsError(f"insufficient points for a regression: {n} < 3")
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
        raise ValueError("regression inputs must be finite")
    xm, ym = x.mean(), y.mean()
    sxx = float(np.sum((x - xm) ** 2))
    if sxx == 0.0:
        raise InsufficientPointsError("regressor has no variance")
    slope = float(np.sum((x - xm) * (y - ym)) / sxx)
    intercept = float(ym - slope * xm)
    resid = y - (intercept + slope * x)
    stderr = math.sqrt(float(np.sum(resid ** 2)) / (n - 2) / sxx)
    return RegressionFit(slope, intercept, stderr, n)


# ---------------------------------------------------------------------------
# Configuration


PROFILES: dict[str, dict] = {
    "paper": dict(epochs=30000, repetitions=20, eval_interval=300, n_random=300,
                  neighbourhood_variants=10),
    "desk": dict(epochs=3000, repetitions=5, eval_interval=100, n_random=10,
                 neighbourhood_variants=2),
}

# Optimiser settings used with each profile on top of the TrainConfig defaults.
PROFILE_TRAINING: dict[str, dict] = {
    "paper": {},
    "desk": {},
}


@dataclass
class ExperimentConfig:
    profile: str = "desk"
    out: str = "results"
    systems_dir: str | None = None
    builtins: tuple[str, ...] = REGULAR_EXEMPLARS
    n_random: int | None = None
    random_seed: int = 0
    train_dist: str = "power"
    test_dist: str | None = None
    epochs: int | None = None
    repetitions: int | None = None
    eval_interval: int | None = None
    master_seed: int = 0
    parallel: int = 1
    full_enumeration: bool = False
    neighbourhood_bases: tuple[str, ...] = NEIGHBOURHOOD_BASES
    neighbourhood_variants: int | None = None
    exclude_small_neighbourhoods: int = 10
    training: dict = field(default_factory=dict)  # TrainConfig overrides

    def __post_init__(self):
        if self.profile not in PROFILES:
            raise ValueError(f"unknown profile {self.profile!r}; choose from {sorted(PROFILES)}")
        defaults = PROFILES[self.profile]
        for key, value in defaults.items():
            if getattr(self, key) is None:
                setattr(self, key, value)
        self.builtins = tuple(self.builtins)
        self.neighbourhood_bases = tuple(self.neighbourhood_bases)
        for key in ("epochs", "repetitions", "eval_interval", "parallel"):
            if getattr(self, key) < 1:
                raise ValueError(f"{key} must be >= 1")
        if self.n_random < 0 or self.neighbourhood_variants < 0:
            raise ValueError("counts must be non-negative")
        for kind in (self.train_dist, self.test_dist):
            if kind is not None:
                need_distribution(kind)
        if self.systems_dir is not None and not Path(self.systems_dir).is_dir():
            raise ValueError(f"systems directory not found: {self.systems_dir}")

    @classmethod
    def from_json(cls, path: str | Path, **overrides) -> "ExperimentConfig":
        data = json.loads(Path(path).read_text())
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        data.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**data)

    def with_overrides(self, **kw) -> "ExperimentConfig":
        return replace(self, **{k: v for k, v in kw.items() if v is not None})

    def train_config(self) -> TrainConfig:
        base = dict(PROFILE_TRAINING[self.profile])
        base.update(self.training)
        base["epochs"] = self.epochs
        base.setdefault("seed", self.master_seed)
        return TrainConfig(**base)

    def protocol(self, q_kind: str) -> EvalProtocol:
        return EvalProtocol(need_distribution(q_kind), self.eval_interval, self.full_enumeration)


# ---------------------------------------------------------------------------
# Populations


@dataclass
class Member:
    system: NumeralSystem
    group: str  # "regular", "random" or "ingested"


def load_directory(path: str | Path) -> list[NumeralSystem]:
    """Read every ``*.txt`` system file; invalid files are skipped and logged."""
    systems = []
    for file in sorted(Path(path).glob("*.txt")):
        try:
            system = read_system(file)
        except SystemFileError as exc:
            log.warning("skipping %s: %s", file, exc)
            continue
        report = validate_system(system)
        if not report.accepted:
            log.warning("skipping %s: %s", file, report)
            continue
        systems.append(system)
    return systems


def population(cfg: ExperimentConfig) -> list[Member]:
    members = [Member(builtin_system(name), "regular") for name in cfg.builtins]
    members += [Member(s, "random") for s in random_population(cfg.n_random, cfg.random_seed)]
    if cfg.systems_dir is not None:
        members += [Member(s, "ingested") for s in load_directory(cfg.systems_dir)]
    names = [m.system.name for m in members]
    if len(set(names)) != len(names):
        raise ValueError("system names in a population must be unique")
    return members


# ---------------------------------------------------------------------------
# Result tables


@dataclass
class SystemRow:
    system_id: str
    irregularity_bits: float
    local_irregularity_bits: float
    lexicon_size_atoms: int
    avg_complexity: float
    learnability: float
    auc_stddev: float
    repetitions: int
    seed: int

    def values(self) -> list:
        return [getattr(self, c) for c in RESULT_COLUMNS]


def describe_system(system: NumeralSystem) -> tuple[float, float, int, float]:
    st = stats(system)
    return (irregularity(system).bits, local_irregularity(system),
            st.lexicon_size_atoms, float(st.avg_complexity))


def build_rows(systems: Sequence[NumeralSystem], results: Sequence[LearnabilityResult],
               master_seed: int) -> list[SystemRow]:
    rows = []
    for system, res in zip(systems, results):
        bits, local, atoms, complexity = describe_system(system)
        rows.append(SystemRow(system.name, bits, local, atoms, complexity, res.learnability,
                              res.auc_stddev, len(res.completed), master_seed))
    return rows


def _fmt(value) -> str:
    return repr(float(value)) if isinstance(value, float) else str(value)


def write_rows(rows: Iterable[SystemRow], path: Path) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(RESULT_COLUMNS)
        for row in rows:
            w.writerow([_fmt(v) for v in row.values()])


def read_rows(path: str | Path) -> list[dict]:
    with Path(path).open(newline="") as fh:
        return list(csv.DictReader(fh))


def write_traces(results: Sequence[LearnabilityResult], directory: Path) -> None:
    directory.mkdir(parents=True, exist_ok=True)
    for res in results:
        for run in res.per_run:
            with (directory / f"{res.system}_rep{run.rep:02d}.csv").open("w", newline="") as fh:
                w = csv.writer(fh, lineterminator="\n")
                w.writerow(("epoch", "accuracy"))
                for epoch, acc in run.trace:
                    w.writerow((epoch, repr(acc)))


def write_json(data, path: Path) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(data, indent=2, sort_keys=True) + "\n")


def _fit_or_none(x, y) -> dict | None:
    try:
        return ols(x, y).as_dict()
    except InsufficientPointsError as exc:
        log.info("regression skipped: %s", exc)
        return None


# ---------------------------------------------------------------------------
# Experiments 1 and 2


@dataclass
class SweepOutcome:
    name: str
    rows: list[SystemRow]
    groups: list[str]
    fits: dict
    aborted: int


def _sweep_fits(rows: Sequence[SystemRow], groups: Sequence[str]) -> dict:
    def pick(group=None, col="irregularity_bits"):
        sel = [r for r, g in zip(rows, groups) if group is None or g == group]
        sel = [r for r in sel if not math.isnan(r.learnability)]
        return [getattr(r, col) for r in sel], [r.learnability for r in sel]

    fits = {"global": _fit_or_none(*pick())}
    for group in sorted(set(groups)):
        fits[group] = _fit_or_none(*pick(group))
    fits["random_complexity"] = _fit_or_none(*pick("random", "avg_complexity"))
    for group in sorted(set(groups)):
        values = [r.learnability for r, g in zip(rows, groups) if g == group]
        fits[f"mean_learnability_{group}"] = math.fsum(values) / len(values)
    return fits


def run_sweeps(cfg: ExperimentConfig, test_dists: Mapping[str, str],
               write: bool = True) -> dict[str, SweepOutcome]:
    """Train the population once and score it under each named test distribution."""
    members = population(cfg)
    systems = [m.system for m in members]
    groups = [m.group for m in members]
    protocols = {name: cfg.protocol(q) for name, q in test_dists.items()}
    results = measure_population(
        systems, need_distribution(cfg.train_dist), protocols, cfg.train_config(),
        cfg.repetitions, cfg.master_seed, cfg.parallel)
    out = {}
    for name, res in results.items():
        rows = build_rows(systems, res, cfg.master_seed)
        aborted = sum(len(r.aborted) for r in res)
        outcome = SweepOutcome(name, rows, groups, _sweep_fits(rows, groups), aborted)
        out[name] = outcome
        if write:
            base = Path(cfg.out) / name
            write_rows(rows, base / "results.csv")
            write_traces(res, base / "traces")
            write_json({"fits": outcome.fits, "groups": dict(zip([r.system_id for r in rows], groups)),
                        "test_dist": test_dists[name], "train_dist": cfg.train_dist,
                        "aborted_runs": aborted}, base / "fits.json")
    return out


def run_exp1(cfg: ExperimentConfig, write: bool = True) -> SweepOutcome:
    """Training and test needs both follow the power law."""
    return run_sweeps(cfg.with_overrides(train_dist="power"), {"exp1": cfg.test_dist or "power"}, write)["exp1"]


def run_exp2(cfg: ExperimentConfig, write: bool = True) -> SweepOutcome:
    """Power-law training, uniform test needs."""
    return run_sweeps(cfg.with_overrides(train_dist="power"), {"exp2": cfg.test_dist or "uniform"}, write)["exp2"]


# ---------------------------------------------------------------------------
# Experiment 3


@dataclass
class NeighbourhoodOutcome:
    base: str
    size: int
    status: str  # "fitted", "no_variation", "small" or "insufficient"
    rows: list[SystemRow] = field(default_factory=list)
    fit: RegressionFit | None = None

    def learnability_of(self, suffix: str) -> float:
        for row in self.rows:
            if row.system_id.endswith(suffix):
                return row.learnability
        raise KeyError(suffix)

    @property
    def most_beats_least(self) -> bool:
        return self.learnability_of("~most_regular") >= self.learnability_of("~least_regular")


@dataclass
class Exp3Summary:
    neighbourhoods: list[NeighbourhoodOutcome]

    @property
    def fitted(self) -> list[NeighbourhoodOutcome]:
        return [h for h in self.neighbourhoods if h.status == "fitted"]

    def as_dict(self) -> dict:
        slopes = [h.fit.slope for h in self.fitted]
        k = len(slopes)
        mean = math.fsum(slopes) / k if k else math.nan
        se = float(np.std(slopes, ddof=1) / math.sqrt(k)) if k > 1 else math.nan
        return {
            "fitted": k,
            "mean_slope": mean,
            "stderr_mean_slope": se,
            "negative_slopes": sum(s < 0 for s in slopes),
            "most_regular_at_least_least_regular": sum(h.most_beats_least for h in self.fitted),
            "excluded": {h.base: h.status for h in self.neighbourhoods if h.status != "fitted"},
        }


def run_exp3(cfg: ExperimentConfig, write: bool = True) -> Exp3Summary:
    """Learnability against irregularity inside same-length neighbourhoods."""
    bases = [builtin_system(name) for name in cfg.neighbourhood_bases]
    if cfg.systems_dir is not None:
        bases += load_directory(cfg.systems_dir)
    hoods, outcomes, systems, owner = [], [], [], []
    for base in bases:
        hood = build_neighbourhood(base, cfg.random_seed, cfg.neighbourhood_variants)
        if not hood.has_variation:
            outcomes.append(NeighbourhoodOutcome(base.name, hood.size, "no_variation"))
            log.info("neighbourhood of %s has no variation", base.name)
            continue
        if hood.size <= cfg.exclude_small_neighbourhoods:
            outcomes.append(NeighbourhoodOutcome(base.name, hood.size, "small"))
            continue
        outcome = NeighbourhoodOutcome(base.name, hood.size, "fitted")
        outcomes.append(outcome)
        hoods.append(hood)
        for variant in hood.variants:
            systems.append(variant)
            owner.append(outcome)

    if systems:
        protocols = {"exp3": cfg.protocol(cfg.test_dist or "uniform")}
        results = measure_population(
            systems, need_distribution(cfg.train_dist), protocols, cfg.train_config(),
            cfg.repetitions, cfg.master_seed, cfg.parallel)["exp3"]
        rows = build_rows(systems, results, cfg.master_seed)
        for row, outcome in zip(rows, owner):
            outcome.rows.append(row)
        for outcome in outcomes:
            if outcome.status != "fitted":
                continue
            try:
                outcome.fit = ols([r.irregularity_bits for r in outcome.rows],
                                  [r.learnability for r in outcome.rows])
            except InsufficientPointsError:
                outcome.status = "insufficient"
        if write:
            write_traces(results, Path(cfg.out) / "exp3" / "traces")

    summary = Exp3Summary(outcomes)
    if write:
        base = Path(cfg.out) / "exp3"
        for outcome in outcomes:
            if outcome.rows:
                write_rows(outcome.rows, base / f"{outcome.base}.csv")
        write_json({
            "summary": summary.as_dict(),
            "neighbourhoods": [
                {"base": h.base, "size": h.size, "status": h.status,
                 "fit": h.fit.as_dict() if h.fit else None}
                for h in outcomes
            ],
        }, base / "summary.json")
    return summary
