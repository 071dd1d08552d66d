"""Gillespie direct-method simulation of compiled rule sets.

Single runs are fully deterministic given (model, horizon, interval, seed);
ensembles derive per-run seeds from (base seed, run index) and aggregate in
run-index order, so results are bit-identical regardless of how many worker
processes execute the runs.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .matching import (
    MatchCache,
    MatchClass,
    RewriteRule,
    SitePath,
    apply_rewrite,
    iter_compartments,
    match_classes,
)
from .monitors import Monitor, evaluate_monitors
from .terms import Compartment


class SimulationError(RuntimeError):
    """Engine-level failure (indicates a bug, not a user modelling error)."""


@dataclass
class ReactionChannel:
    rule_index: int
    rule: RewriteRule
    site: SitePath
    count: int
    propensity: float
    classes: Tuple[MatchClass, ...]


@dataclass
class Event:
    tau: float
    channel: ReactionChannel
    match_index: int


@dataclass
class Trajectory:
    monitor_names: List[str]
    times: np.ndarray
    values: np.ndarray  # shape (samples, monitors)


@dataclass
class EnsembleSeries:
    monitor_names: List[str]
    times: np.ndarray
    mean: np.ndarray
    std: np.ndarray  # sample standard deviation (ddof=1), zero for a single run


def build_channels(
    root: Compartment,
    rules: Sequence[RewriteRule],
    cache: Optional[MatchCache] = None,
) -> List[ReactionChannel]:
    """Enabled reaction channels in canonical order (rule index, then site)."""
    comps = list(iter_compartments(root))
    by_label: dict = {}
    for order, (comp, path) in enumerate(comps):
        by_label.setdefault(comp.label, []).append((order, comp, path))
    channels: List[ReactionChannel] = []
    for ri, rule in enumerate(rules):
        for _order, comp, path in by_label.get(rule.label, ()):
            classes = match_classes(rule.pattern, comp.content, cache)
            if not classes:
                continue
            count = sum(mc.weight for mc in classes)
            channels.append(
                ReactionChannel(ri, rule, path, count, rule.rate * count, classes)
            )
    return channels


def step(channels: Sequence[ReactionChannel], rng) -> Optional[Event]:
    """One direct-method draw: waiting time, channel and match index.

    Returns None when the total propensity is zero (quiescent state).
    The rng is consumed in a fixed order: u1 (waiting time), u2 (channel),
    then one integer draw for the match index.
    """
    a0 = sum(ch.propensity for ch in channels)
    if a0 <= 0.0:
        return None
    u1 = 1.0 - rng.random()  # uniform on (0, 1], keeps tau finite
    tau = math.log(1.0 / u1) / a0
    u2 = rng.random()
    threshold = u2 * a0
    cum = 0.0
    chosen = None
    for ch in channels:
        cum += ch.propensity
        if cum > threshold:
            chosen = ch
            break
    if chosen is None:  # guard against floating-point shortfall at the top end
        chosen = channels[-1]
    match_index = int(rng.integers(chosen.count))
    return Event(tau, chosen, match_index)


def class_for_index(channel: ReactionChannel, match_index: int) -> MatchClass:
    cum = 0
    for mc in channel.classes:
        cum += mc.weight
        if match_index < cum:
            return mc
    raise SimulationError(
        f"match index {match_index} out of range for channel count {channel.count}"
    )


def rng_for_run(base_seed: int, run_index: int = 0):
    """Deterministic, decorrelated per-run generator (seed-sequence spawning)."""
    if base_seed < 0:
        raise ValueError("seed must be a nonnegative 64-bit integer")
    return np.random.default_rng(
        np.random.SeedSequence(entropy=base_seed, spawn_key=(run_index,))
    )


def sample_times(horizon: float, sample_interval: float) -> np.ndarray:
    n = int(math.floor(horizon / sample_interval + 1e-9)) + 1
    return np.arange(n) * float(sample_interval)


def simulate_run(
    model,
    horizon: float,
    sample_interval: float,
    seed: int,
    run_index: int = 0,
) -> Trajectory:
    """One stochastic trajectory, sampled at fixed intervals from t=0.

    `model` needs `.initial` (root compartment), `.rules` and `.monitors`.
    """
    if horizon <= 0 or sample_interval <= 0:
        raise ValueError("horizon and sample interval must be positive")
    rng = rng_for_run(seed, run_index)
    root = model.initial
    monitors: Sequence[Monitor] = model.monitors
    cache: MatchCache = {}

    times = sample_times(horizon, sample_interval)
    values = np.empty((len(times), len(monitors)), dtype=float)
    next_i = 0
    t = 0.0

    def record_until(limit: float, root_now: Compartment) -> int:
        nonlocal next_i
        if next_i >= len(times) or times[next_i] >= limit:
            return next_i
        row = evaluate_monitors(monitors, root_now, cache)
        while next_i < len(times) and times[next_i] < limit:
            values[next_i] = row
            next_i += 1
        return next_i

    while next_i < len(times):
        channels = build_channels(root, model.rules, cache)
        ev = step(channels, rng)
        if ev is None:
            record_until(math.inf, root)
            break
        t_next = t + ev.tau
        if t_next > horizon:
            record_until(math.inf, root)
            break
        record_until(t_next, root)
        try:
            mc = class_for_index(ev.channel, ev.match_index)
            root = apply_rewrite(root, ev.channel.rule, ev.channel.site, mc)
        except Exception as exc:  # engine bug, not user error
            raise SimulationError(f"rule application failed at t={t_next}: {exc}") from exc
        t = t_next

    names = [m.name for m in monitors]
    return Trajectory(names, times, values)


def _worker(args):
    model, horizon, sample_interval, base_seed, run_index = args
    return simulate_run(model, horizon, sample_interval, base_seed, run_index)


def resolve_workers(workers: Optional[int] = None) -> int:
    """Worker count: explicit argument, else CWC_THREADS (0 or unset = auto)."""
    if workers is None:
        env = os.environ.get("CWC_THREADS", "0")
        try:
            workers = int(env)
        except ValueError:
            raise ValueError(f"CWC_THREADS must be an integer, got {env!r}")
    if workers < 0:
        raise ValueError("worker count must be >= 0")
    if workers == 0:
        workers = os.cpu_count() or 1
    return workers


def run_ensemble(
    model,
    n_runs: int,
    horizon: float,
    sample_interval: float,
    base_seed: int,
    workers: Optional[int] = None,
) -> Tuple[EnsembleSeries, List[Trajectory]]:
    """n_runs independent trajectories plus per-sample mean/std statistics."""
    if n_runs < 1:
        raise ValueError("n_runs must be >= 1")
    nworkers = min(resolve_workers(workers), n_runs)
    jobs = [(model, horizon, sample_interval, base_seed, i) for i in range(n_runs)]
    if nworkers <= 1:
        trajectories = [_worker(job) for job in jobs]
    else:
        with ProcessPoolExecutor(max_workers=nworkers) as pool:
            trajectories = list(pool.map(_worker, jobs))

    stack = np.stack([tr.values for tr in trajectories])  # (runs, samples, monitors)
    mean = stack.mean(axis=0)
    if n_runs == 1:
        std = np.zeros_like(mean)
    else:
        std = stack.std(axis=0, ddof=1)
    series = EnsembleSeries(
        trajectories[0].monitor_names, trajectories[0].times, mean, std
    )
    return series, trajectories
