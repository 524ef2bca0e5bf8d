"""Recurrent contextual-bandit agent trained with REINFORCE.

The agent reads a numeral morpheme by morpheme (5-d embeddings, one LSTM
layer of width 10), squashes an affine readout of the last hidden state to a
mean ``mu`` in (0, 1), samples ``a ~ N(mu, sigma)`` and predicts ``100 * a``.

Everything is plain numpy with hand-written backpropagation. Arrays carry a
leading *run* axis so that many independent runs (different systems, seeds)
can be stepped in lockstep; each run owns its own parameters, optimiser
state, baseline and random streams, so its trajectory does not depend on
which other runs share the batch.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

import numpy as np
from scipy.special import expit

from .numerals import ATOM, COMBINATORS, NUMBERS, Numeral, NumeralSystem, Symbol, require_valid

EMBED = 5
HIDDEN = 10
GATES = 4 * HIDDEN

# Fixed vocabulary: atoms 1..MAX_ATOM, then the combinators.
MAX_ATOM = 128
VOCAB = MAX_ATOM + len(COMBINATORS)
PAD = 0


def symbol_index(sym: Symbol) -> int:
    if sym.kind == ATOM:
        if sym.value > MAX_ATOM:
            raise KeyError(f"no embedding for atom {sym.value} (max {MAX_ATOM})")
        return sym.value - 1
    return MAX_ATOM + COMBINATORS.index(sym.kind)


class RunAbort(RuntimeError):
    """A training run hit a non-finite gradient."""


# ---------------------------------------------------------------------------
# Need distributions and reward


@dataclass(frozen=True)
class NeedDistribution:
    kind: str
    pmf: np.ndarray  # pmf[i] = P(n = i + 1)

    @property
    def cdf(self) -> np.ndarray:
        return np.cumsum(self.pmf)

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        """Numbers in 1..99 by inverse-CDF lookup of uniform draws."""
        idx = np.searchsorted(self.cdf, rng.random(size), side="right")
        return np.minimum(idx, len(self.pmf) - 1) + 1

    def mass(self, numbers) -> float:
        return float(sum(self.pmf[n - 1] for n in numbers))


def power_law(exponent: float = 2.0) -> NeedDistribution:
    w = np.array([n ** -exponent for n in NUMBERS], dtype=float)
    return NeedDistribution("power", w / w.sum())


def uniform() -> NeedDistribution:
    return NeedDistribution("uniform", np.full(len(NUMBERS), 1.0 / len(NUMBERS)))


def point_mass(n: int) -> NeedDistribution:
    pmf = np.zeros(len(NUMBERS))
    pmf[n - 1] = 1.0
    return NeedDistribution(f"point{n}", pmf)


def need_distribution(kind: str) -> NeedDistribution:
    if kind in ("power", "power_law"):
        return power_law()
    if kind == "uniform":
        return uniform()
    raise ValueError(f"unknown distribution {kind!r}")


def round_half_away(x):
    """Nearest integer, ties away from zero."""
    x = np.asarray(x, dtype=float)
    return np.sign(x) * np.floor(np.abs(x) + 0.5)


def reward(prediction, target, alpha: float = 0.5):
    """exp(-alpha |prediction - target|) if the rounded prediction is in 1..99, else 0."""
    prediction = np.asarray(prediction, dtype=float)
    r = round_half_away(prediction)
    inside = (r > 0) & (r < 100)
    out = np.where(inside, np.exp(-alpha * np.abs(prediction - target)), 0.0)
    return float(out) if out.ndim == 0 else out


# ---------------------------------------------------------------------------
# Parameters


PARAM_NAMES = ("embed", "w_x", "w_h", "b", "w_out", "b_out")
PARAM_SHAPES = {
    "embed": (VOCAB, EMBED),
    "w_x": (EMBED, GATES),
    "w_h": (HIDDEN, GATES),
    "b": (GATES,),
    "w_out": (HIDDEN,),
    "b_out": (1,),
}


@dataclass
class AgentParams:
    """Parameters of one agent (or of a stack of agents along axis 0).

    Gate blocks in ``w_x``/``w_h``/``b`` are ordered input, forget, cell, output.
    """

    embed: np.ndarray
    w_x: np.ndarray
    w_h: np.ndarray
    b: np.ndarray
    w_out: np.ndarray
    b_out: np.ndarray

    def arrays(self) -> dict[str, np.ndarray]:
        return {k: getattr(self, k) for k in PARAM_NAMES}

    def copy(self) -> "AgentParams":
        return AgentParams(**{k: v.copy() for k, v in self.arrays().items()})

    def embedding(self, sym: Symbol) -> np.ndarray:
        return self.embed[..., symbol_index(sym), :]

    @property
    def stacked(self) -> bool:
        return self.b.ndim == 2

    def run(self, r: int) -> "AgentParams":
        return AgentParams(**{k: v[r] for k, v in self.arrays().items()})

    @staticmethod
    def stack(items: Sequence["AgentParams"]) -> "AgentParams":
        return AgentParams(**{k: np.stack([getattr(p, k) for p in items]) for k in PARAM_NAMES})


def init_params(rng: np.random.Generator, scale: float = 0.5) -> AgentParams:
    """Small uniform weights; readout bias zero so mu starts at 0.5."""
    p = {k: rng.uniform(-scale, scale, size=PARAM_SHAPES[k]) for k in PARAM_NAMES}
    p["b"] = np.zeros(GATES)
    p["b_out"] = np.zeros(1)
    return AgentParams(**p)


def parameter_count(alphabet_size: int) -> int:
    """Trainable weights for an alphabet of the given size."""
    return alphabet_size * EMBED + sum(
        math.prod(PARAM_SHAPES[k]) for k in PARAM_NAMES if k != "embed"
    )


# ---------------------------------------------------------------------------
# Batched forward / backward


def encode(numerals: Sequence[Numeral], width: int | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Index matrix (items x width) and mask for a list of numerals."""
    width = width or max(len(x) for x in numerals)
    idx = np.full((len(numerals), width), PAD, dtype=np.int64)
    mask = np.zeros((len(numerals), width), dtype=bool)
    for i, num in enumerate(numerals):
        idx[i, : len(num)] = [symbol_index(s) for s in num.symbols]
        mask[i, : len(num)] = True
    return idx, mask


@dataclass
class _Cache:
    run_idx: np.ndarray
    idx: np.ndarray
    mask: np.ndarray
    active: list  # rows [0, k) may be live at step t
    xs: list
    hs: list
    cs: list
    gates: list  # activated (i, f, g, o) on the live rows
    tanh_c: list
    mu: np.ndarray


def _live_rows(mask: np.ndarray) -> np.ndarray:
    """For each step, one past the last row that is live in any run."""
    any_live = mask.any(axis=0)  # (B, T)
    B = mask.shape[1]
    last = B - np.argmax(any_live[::-1], axis=0)
    return np.where(any_live.any(axis=0), last, 0)


def forward_batch(P: AgentParams, idx: np.ndarray, mask: np.ndarray, keep: bool = False):
    """mu for stacked params ``P`` (R runs) on ``idx``/``mask`` of shape (R, B, T).

    Matrix products always span all B rows so that each run's arithmetic is
    the same whatever else shares the batch; the gate nonlinearities only
    touch the leading rows that are still live at each step.
    """
    R, B, T = idx.shape
    run_idx = np.arange(R)[:, None]
    h = np.zeros((R, B, HIDDEN))
    c = np.zeros((R, B, HIDDEN))
    active = _live_rows(mask)
    cache = _Cache(run_idx, idx, mask, active, [], [h.copy()], [c.copy()], [], [], None) if keep else None
    for t in range(T):
        k = int(active[t])
        x = P.embed[run_idx, idx[:, :, t]]
        if keep:
            cache.xs.append(x)
        if k == 0:
            if keep:
                cache.gates.append(None)
                cache.tanh_c.append(None)
                cache.hs.append(h.copy())
                cache.cs.append(c.copy())
            continue
        z = np.matmul(x, P.w_x)
        z += np.matmul(h, P.w_h)
        z = z[:, :k]
        z += P.b[:, None, :]
        i = expit(z[..., :HIDDEN])
        f = expit(z[..., HIDDEN:2 * HIDDEN])
        g = np.tanh(z[..., 2 * HIDDEN:3 * HIDDEN])
        o = expit(z[..., 3 * HIDDEN:])
        c_new = f * c[:, :k]
        c_new += i * g
        tc = np.tanh(c_new)
        m = mask[:, :k, t, None]
        np.copyto(c[:, :k], c_new, where=m)
        np.copyto(h[:, :k], o * tc, where=m)
        if keep:
            cache.gates.append((i, f, g, o))
            cache.tanh_c.append(tc)
            cache.hs.append(h.copy())
            cache.cs.append(c.copy())
    logit = np.einsum("rbh,rh->rb", h, P.w_out) + P.b_out
    mu = expit(logit)
    if keep:
        cache.mu = mu
    return mu, cache


def backward_batch(P: AgentParams, cache: _Cache, dmu: np.ndarray) -> AgentParams:
    """Gradients of sum(dmu * mu) with respect to every parameter block."""
    R, B, T = cache.idx.shape
    mu = cache.mu
    dlogit = dmu * mu * (1.0 - mu)
    h_last = cache.hs[-1]
    g_w_out = np.einsum("rbh,rb->rh", h_last, dlogit)
    g_b_out = dlogit.sum(axis=1, keepdims=True)
    dh = dlogit[..., None] * P.w_out[:, None, :]
    dc = np.zeros_like(dh)
    g_w_x = np.zeros_like(P.w_x)
    g_w_h = np.zeros_like(P.w_h)
    g_b = np.zeros_like(P.b)
    g_embed = np.zeros_like(P.embed)
    w_x_t = np.swapaxes(P.w_x, 1, 2)
    w_h_t = np.swapaxes(P.w_h, 1, 2)
    dz = np.zeros((R, B, GATES))
    for t in range(T - 1, -1, -1):
        k = int(cache.active[t])
        if k == 0:
            continue
        m = cache.mask[:, :k, t, None]
        i, f, g, o = cache.gates[t]
        tc = cache.tanh_c[t]
        c_prev = cache.cs[t][:, :k]
        dh_t = np.where(m, dh[:, :k], 0.0)
        dc_t = np.where(m, dc[:, :k], 0.0) + dh_t * o * (1.0 - tc * tc)
        dz.fill(0.0)
        dz[:, :k, :HIDDEN] = dc_t * g * i * (1.0 - i)
        dz[:, :k, HIDDEN:2 * HIDDEN] = dc_t * c_prev * f * (1.0 - f)
        dz[:, :k, 2 * HIDDEN:3 * HIDDEN] = dc_t * i * (1.0 - g * g)
        dz[:, :k, 3 * HIDDEN:] = dh_t * tc * o * (1.0 - o)
        g_w_x += np.matmul(np.swapaxes(cache.xs[t], 1, 2), dz)
        g_w_h += np.matmul(np.swapaxes(cache.hs[t], 1, 2), dz)
        g_b += dz.sum(axis=1)
        np.add.at(g_embed, (cache.run_idx, cache.idx[:, :, t]), np.matmul(dz, w_x_t))
        dh_new = np.matmul(dz, w_h_t)
        dh_new[:, :k] += np.where(m, 0.0, dh[:, :k])
        dh_new[:, k:] = dh[:, k:]  # idle rows pass through
        dh = dh_new
        dc[:, :k] = dc_t * f + np.where(m, 0.0, dc[:, :k])
    return AgentParams(g_embed, g_w_x, g_w_h, g_b, g_w_out, g_b_out)


def _as_stack(params: AgentParams) -> AgentParams:
    return params if params.stacked else AgentParams(**{k: v[None] for k, v in params.arrays().items()})


def forward(params: AgentParams, numeral: Numeral) -> float:
    """mu in (0, 1) for one numeral under a single agent."""
    idx, mask = encode([numeral])
    mu, _ = forward_batch(_as_stack(params), idx[None], mask[None])
    return float(mu[0, 0])


def predict_mu(params: AgentParams, numerals: Sequence[Numeral]) -> np.ndarray:
    idx, mask = encode(numerals)
    mu, _ = forward_batch(_as_stack(params), idx[None], mask[None])
    return mu[0]


# ---------------------------------------------------------------------------
# REINFORCE surrogate


def gaussian_log_prob(action, mu, sigma):
    return -0.5 * ((action - mu) / sigma) ** 2 - np.log(sigma) - 0.5 * math.log(2 * math.pi)


def surrogate_loss(params: AgentParams, numerals: Sequence[Numeral], actions, advantages,
                   sigma: float) -> float:
    """-mean(advantage * log N(action; mu, sigma)) with actions and advantages held fixed."""
    mu = predict_mu(params, numerals)
    lp = gaussian_log_prob(np.asarray(actions), mu, sigma)
    return float(-np.mean(np.asarray(advantages) * lp))


def surrogate_grad(params: AgentParams, numerals: Sequence[Numeral], actions, advantages,
                   sigma: float) -> AgentParams:
    idx, mask = encode(numerals)
    P = _as_stack(params)
    mu, cache = forward_batch(P, idx[None], mask[None], keep=True)
    dmu = -np.asarray(advantages)[None] * (np.asarray(actions)[None] - mu) / sigma**2 / len(numerals)
    grads = backward_batch(P, cache, dmu)
    return grads if params.stacked else grads.run(0)


# ---------------------------------------------------------------------------
# Training


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 30000
    batches_per_epoch: int = 5
    batch_size: int = 32
    alpha: float = 0.5
    sigma_start: float = 0.25
    sigma_end: float = 0.01
    step_size: float = 0.005
    beta1: float = 0.9
    beta2: float = 0.999
    adam_eps: float = 1e-8
    baseline: bool = True
    baseline_decay: float = 0.9
    grad_clip_norm: float = 5.0
    init_scale: float = 0.5
    seed: int = 0

    def __post_init__(self):
        for name in ("epochs", "batches_per_epoch", "batch_size", "alpha", "sigma_start",
                     "sigma_end", "step_size", "grad_clip_norm"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.sigma_end > self.sigma_start:
            raise ValueError("sigma_end must not exceed sigma_start")
        if not 0 <= self.baseline_decay < 1:
            raise ValueError("baseline_decay must be in [0, 1)")

    def sigma(self, epoch: int) -> float:
        """Exponential decay from sigma_start (epoch 0) towards sigma_end (final epoch)."""
        return self.sigma_start * (self.sigma_end / self.sigma_start) ** (epoch / self.epochs)

    def with_overrides(self, **kw) -> "TrainConfig":
        return replace(self, **{k: v for k, v in kw.items() if v is not None})


@dataclass
class RunState:
    """Mutable per-run training state, stacked over R runs."""

    params: AgentParams
    m: AgentParams
    v: AgentParams
    baseline: np.ndarray  # (R,)
    steps: int = 0

    @staticmethod
    def fresh(params: AgentParams) -> "RunState":
        P = _as_stack(params)
        zeros = AgentParams(**{k: np.zeros_like(a) for k, a in P.arrays().items()})
        return RunState(P, zeros, zeros.copy(), np.zeros(P.b.shape[0]))


def _clip_and_check(grads: AgentParams, clip: float) -> np.ndarray:
    sq = sum(np.square(a).reshape(a.shape[0], -1).sum(axis=1) for a in grads.arrays().values())
    norm = np.sqrt(sq)
    bad = ~np.isfinite(norm)
    if bad.any():
        raise RunAbort(f"non-finite gradient in run(s) {np.flatnonzero(bad).tolist()}")
    scale = np.where(norm > clip, clip / np.maximum(norm, 1e-300), 1.0)
    for a in grads.arrays().values():
        a *= scale.reshape((-1,) + (1,) * (a.ndim - 1))
    return norm


def _adam(state: RunState, grads: AgentParams, cfg: TrainConfig) -> None:
    state.steps += 1
    t = state.steps
    c1 = 1.0 - cfg.beta1**t
    c2 = 1.0 - cfg.beta2**t
    for k in PARAM_NAMES:
        g = getattr(grads, k)
        m = getattr(state.m, k)
        v = getattr(state.v, k)
        m *= cfg.beta1
        m += (1.0 - cfg.beta1) * g
        v *= cfg.beta2
        v += (1.0 - cfg.beta2) * g * g
        getattr(state.params, k)[...] -= cfg.step_size * (m / c1) / (np.sqrt(v / c2) + cfg.adam_eps)


def reinforce_step(state: RunState, idx: np.ndarray, mask: np.ndarray, item_row: np.ndarray,
                   targets: np.ndarray, noise: np.ndarray, sigma: float, cfg: TrainConfig) -> np.ndarray:
    """One REINFORCE update for R runs.

    ``idx``/``mask`` (R, U, T) hold the distinct numerals of each run's batch,
    ``item_row`` (R, B) maps every batch item to its row, ``targets`` and
    ``noise`` (standard normal) are per item. Returns the mean reward per run.
    """
    R, B = targets.shape
    U = idx.shape[1]
    mu_rows, cache = forward_batch(state.params, idx, mask, keep=True)
    mu = np.take_along_axis(mu_rows, item_row, axis=1)
    actions = mu + sigma * noise
    rewards = reward(100.0 * actions, targets, cfg.alpha)
    base = state.baseline if cfg.baseline else np.zeros(R)
    adv = rewards - base[:, None]
    # d/dmu of -mean(adv * log N(a; mu, sigma)), pooled over repeated numerals
    dmu_items = -adv * (actions - mu) / (sigma * sigma) / B
    flat = (np.arange(R)[:, None] * U + item_row).ravel()
    dmu = np.bincount(flat, weights=dmu_items.ravel(), minlength=R * U).reshape(R, U)
    grads = backward_batch(state.params, cache, dmu)
    _clip_and_check(grads, cfg.grad_clip_norm)
    _adam(state, grads, cfg)
    mean_reward = rewards.mean(axis=1)
    if cfg.baseline:
        state.baseline = cfg.baseline_decay * state.baseline + (1.0 - cfg.baseline_decay) * mean_reward
    return mean_reward


def train_step(state: RunState, batch: Sequence[tuple[Numeral, int]], sigma: float,
               cfg: TrainConfig, rng: np.random.Generator) -> float:
    """Single-run REINFORCE update on a list of (numeral, target) pairs."""
    if not batch:
        raise ValueError("empty batch")
    idx, mask = encode([num for num, _ in batch])
    targets = np.array([n for _, n in batch], dtype=float)
    noise = rng.standard_normal(len(batch))
    item_row = np.arange(len(batch))[None]
    return float(reinforce_step(state, idx[None], mask[None], item_row, targets[None],
                                noise[None], sigma, cfg)[0])


# ---------------------------------------------------------------------------
# Lockstep runs


@dataclass
class RunSpec:
    """One training run: a system, a need distribution and its random streams."""

    system: NumeralSystem
    train_dist: NeedDistribution
    seed: np.random.SeedSequence
    eval_targets: np.ndarray | None = None  # numbers to test on

    def streams(self):
        init, train, evaluation = self.seed.spawn(3)
        return (np.random.default_rng(init), np.random.default_rng(train),
                np.random.default_rng(evaluation))


@dataclass
class SystemTables:
    """Encoded numerals 1..99 for R systems; row n-1 holds numeral n."""

    idx: np.ndarray  # (R, 99, W)
    mask: np.ndarray  # (R, 99, W)
    lengths: np.ndarray  # (R, 99)
    order: np.ndarray  # (R, 99): rows sorted longest first

    @staticmethod
    def build(systems: Sequence[NumeralSystem]) -> "SystemTables":
        width = max(s[n].length for s in systems for n in NUMBERS)
        pairs = [encode([s[n] for n in NUMBERS], width) for s in systems]
        idx = np.stack([a for a, _ in pairs])
        mask = np.stack([b for _, b in pairs])
        lengths = mask.sum(axis=2)
        order = np.argsort(-lengths, axis=1, kind="stable")
        return SystemTables(idx, mask, lengths, order)

    def batch_rows(self, targets: np.ndarray):
        """Distinct numerals of each run's batch, longest first.

        Returns (idx, mask, item_row) for :func:`reinforce_step`.
        """
        R, B = targets.shape
        N = self.idx.shape[1]
        run = np.arange(R)[:, None]
        counts = np.bincount((run * N + targets - 1).ravel(), minlength=R * N).reshape(R, N)
        present = np.take_along_axis(counts, self.order, axis=1) > 0
        pos = np.argsort(~present, axis=1, kind="stable")[:, :B]
        rows = np.take_along_axis(self.order, pos, axis=1)
        valid = np.take_along_axis(present, pos, axis=1)
        slot = np.zeros((R, N), dtype=np.int64)
        rr, jj = np.nonzero(valid)
        slot[rr, rows[rr, jj]] = jj
        item_row = np.take_along_axis(slot, targets - 1, axis=1)
        width = int(self.lengths[run, rows][valid].max())
        idx = self.idx[run, rows, :width]
        mask = self.mask[run, rows, :width] & valid[..., None]
        return idx, mask, item_row


def evaluation_points(epochs: int, interval: int) -> list[int]:
    return list(range(0, epochs, interval)) + [epochs]


def predictions_batch(P: AgentParams, tables: SystemTables) -> np.ndarray:
    """round(100 mu) for every number 1..99 of every run, shape (R, 99)."""
    mu, _ = forward_batch(P, tables.idx, tables.mask)
    return round_half_away(100.0 * mu)


def accuracy_batch(P: AgentParams, tables: SystemTables, targets: np.ndarray) -> np.ndarray:
    """Exact-match accuracy per run on test targets (R, K)."""
    pred = predictions_batch(P, tables)
    hits = np.take_along_axis(pred, targets - 1, axis=1) == targets
    return hits.mean(axis=1)


def train_lockstep(specs: Sequence[RunSpec], cfg: TrainConfig, eval_interval: int | None = None,
                   on_eval: Callable[[int, AgentParams], None] | None = None,
                   ) -> tuple[AgentParams, list[list[tuple[int, float]]]]:
    """Train all runs in ``specs`` together; return final (stacked) params and
    accuracy traces on each spec's ``eval_targets``.

    A run's result depends only on its own spec and ``cfg``. ``on_eval`` is
    called with the stacked parameters at every evaluation point.
    """
    for spec in specs:
        require_valid(spec.system)
    R = len(specs)
    tables = SystemTables.build([s.system for s in specs])
    init_rngs, train_rngs = [], []
    for spec in specs:
        init_rng, train_rng, _ = spec.streams()
        init_rngs.append(init_rng)
        train_rngs.append(train_rng)
    state = RunState.fresh(AgentParams.stack([init_params(g, cfg.init_scale) for g in init_rngs]))

    traces: list[list[tuple[int, float]]] = [[] for _ in specs]
    track = all(s.eval_targets is not None for s in specs)
    if track:
        eval_targets = np.stack([np.asarray(s.eval_targets, dtype=np.int64) for s in specs])
    points = set(evaluation_points(cfg.epochs, eval_interval)) if eval_interval else set()

    def record(epoch):
        if track:
            acc = accuracy_batch(state.params, tables, eval_targets)
            for r in range(R):
                traces[r].append((epoch, float(acc[r])))
        if on_eval:
            on_eval(epoch, state.params)

    per_epoch = cfg.batches_per_epoch * cfg.batch_size
    shape = (R, cfg.batches_per_epoch, cfg.batch_size)
    for epoch in range(cfg.epochs):
        if epoch in points:
            record(epoch)
        sigma = cfg.sigma(epoch)
        targets = np.empty(shape, dtype=np.int64)
        noise = np.empty(shape)
        for r in range(R):
            targets[r] = specs[r].train_dist.sample(train_rngs[r], per_epoch).reshape(shape[1:])
            noise[r] = train_rngs[r].standard_normal(per_epoch).reshape(shape[1:])
        for k in range(cfg.batches_per_epoch):
            idx, mask, item_row = tables.batch_rows(targets[:, k])
            reinforce_step(state, idx, mask, item_row, targets[:, k].astype(float),
                           noise[:, k], sigma, cfg)
    if points:
        record(cfg.epochs)
    return state.params, traces


def train_run(system: NumeralSystem, p: NeedDistribution, config: TrainConfig,
              eval_hook: Callable[[int, AgentParams], object] | None = None,
              eval_interval: int = 300) -> tuple[AgentParams, list[tuple[int, object]]]:
    """Train one agent from ``config.seed``.

    ``eval_hook(epoch, params)`` runs at epoch 0, every ``eval_interval``
    epochs and after the last epoch; its return values form the trace.
    """
    spec = RunSpec(system, p, np.random.SeedSequence(config.seed))
    trace: list[tuple[int, object]] = []

    def hook(epoch, stacked):
        trace.append((epoch, eval_hook(epoch, stacked.run(0))))

    params, _ = train_lockstep([spec], config, eval_interval if eval_hook else None,
                               hook if eval_hook else None)
    return params.run(0), trace
