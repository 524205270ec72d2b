"""Monte-Carlo system-identification experiment runner.

For each of ``n_runs`` independent runs the harness derives one input
sub-stream and one noise sub-stream from the base seed, generates a single
(x, d) pair, and streams it through every configured filter (each freshly
reset), so all algorithms in a run see identical data.  Squared errors are
averaged across runs first, converted to dB, then smoothed with a trailing
moving average:

    curve(n) = 10 log10( mean_runs e(n)^2 )

Runs are embarrassingly parallel; partial sums are merged in run order so the
result is byte-identical whether computed serially or with a process pool.
A diverged run aborts the whole experiment (silently dropping it would bias
the ensemble average) with the offending algorithm, run and iteration named.
"""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Dict, Optional

import numpy as np

from .errors import ConfigurationError, DivergenceError
from .filters import make_filter
from .systems import InputSource, SystemSpec, build_system, generate_pair

__all__ = [
    "ExperimentConfig",
    "MseCurve",
    "run_experiment",
    "filter_factory",
    "moving_average",
    "steady_state_mse",
]


@dataclass
class ExperimentConfig:
    """Everything needed to reproduce one experiment."""

    name: str = "experiment"
    system: SystemSpec = field(default_factory=SystemSpec)
    input_variance: float = 0.25
    m_taps: int = 8
    algorithms: Dict[str, dict] = field(default_factory=dict)
    n_iterations: int = 20000
    n_runs: int = 500
    smoothing_taps: int = 20
    base_seed: int = 0
    steady_state_window: Optional[int] = None  # default: final 10% of iterations

    def validate(self):
        if self.m_taps < 1:
            raise ConfigurationError(f"m_taps must be >= 1, got {self.m_taps}")
        if self.n_iterations < 1:
            raise ConfigurationError(f"n_iterations must be >= 1, got {self.n_iterations}")
        if self.n_runs < 1:
            raise ConfigurationError(f"n_runs must be >= 1, got {self.n_runs}")
        if self.smoothing_taps < 1:
            raise ConfigurationError(f"smoothing_taps must be >= 1, got {self.smoothing_taps}")
        if self.input_variance <= 0:
            raise ConfigurationError("input_variance must be positive")
        if not self.algorithms:
            raise ConfigurationError("no algorithms configured")
        window = self.resolved_window()
        if window < 1 or window > self.n_iterations:
            raise ConfigurationError(f"steady_state_window {window} outside [1, {self.n_iterations}]")
        for name, params in self.algorithms.items():
            make_filter(name, self.m_taps, params)  # construct once to surface bad parameters
        return self

    def resolved_window(self) -> int:
        if self.steady_state_window is not None:
            return self.steady_state_window
        return max(1, self.n_iterations // 10)

    def scaled(self, factor: float) -> "ExperimentConfig":
        """Proportionally shrunk copy for quick desk runs.

        Scales the filter order, iteration count, run count and the plant FIR
        dimensions; hyperparameters are left untouched.
        """
        if factor <= 0:
            raise ConfigurationError(f"scale factor must be positive, got {factor}")
        if factor == 1.0:
            return self

        def s(v):
            return max(1, round(v * factor))

        system = replace(
            self.system,
            fir_length=s(self.system.fir_length),
            fir_decay_samples=s(self.system.fir_decay_samples),
        )
        window = None
        if self.steady_state_window is not None:
            window = min(s(self.steady_state_window), s(self.n_iterations))
        return replace(
            self,
            system=system,
            m_taps=s(self.m_taps),
            n_iterations=s(self.n_iterations),
            n_runs=s(self.n_runs),
            steady_state_window=window,
        )


@dataclass
class MseCurve:
    """Ensemble MSE learning curve in dB, raw and smoothed."""

    raw_db: np.ndarray
    smoothed_db: np.ndarray

    def __len__(self):
        return len(self.raw_db)


def filter_factory(config: ExperimentConfig, algorithm: str):
    """Initialised filter for one configured algorithm."""
    if algorithm not in config.algorithms:
        raise ConfigurationError(f"algorithm {algorithm!r} not present in config {config.name!r}")
    return make_filter(algorithm, config.m_taps, config.algorithms[algorithm])


def moving_average(raw, taps: int):
    """Trailing moving average with a shrinking window at the start.

    Entry k is the mean of the last min(k+1, taps) values, so the early part
    of the curve is averaged over what exists instead of zero-padded.
    """
    if taps < 1:
        raise ConfigurationError(f"taps must be >= 1, got {taps}")
    raw = np.asarray(raw, dtype=float)
    n = raw.size
    if taps == 1 or n <= 1:
        return raw.copy()
    out = np.empty(n)
    head = min(taps, n)
    out[:head] = np.cumsum(raw[:head]) / np.arange(1, head + 1)
    if n > taps:
        windows = np.lib.stride_tricks.sliding_window_view(raw, taps)
        out[taps:] = windows[1:].mean(axis=1)
    return out


def steady_state_mse(curve: MseCurve, window: int) -> float:
    """Mean of the last ``window`` smoothed values, in dB."""
    if window < 1 or window > len(curve):
        raise ConfigurationError(f"window {window} outside [1, {len(curve)}]")
    return float(np.mean(curve.smoothed_db[-window:]))


def _run_single(config: ExperimentConfig, run_index: int) -> Dict[str, np.ndarray]:
    """One Monte-Carlo run: shared (x, d), fresh filters, per-sample e^2."""
    ss = np.random.SeedSequence((config.base_seed, run_index))
    input_ss, noise_ss = ss.spawn(2)
    system = build_system(config.system)
    source = InputSource(variance=config.input_variance, seed=input_ss)
    x, d = generate_pair(system, source, config.n_iterations, noise_seed=noise_ss)
    out = {}
    for name, params in config.algorithms.items():
        filt = make_filter(name, config.m_taps, params)
        try:
            _, e = filt.run(x, d)
        except DivergenceError as err:
            err.run = run_index
            raise
        out[name] = e * e
    return out


def run_experiment(config: ExperimentConfig, n_workers: int = 1) -> Dict[str, MseCurve]:
    """Run the full ensemble; returns one curve per configured algorithm.

    The result is a pure function of the config (including ``base_seed``);
    ``n_workers`` only changes wall-clock time.
    """
    config.validate()
    sums = {name: np.zeros(config.n_iterations) for name in config.algorithms}

    if n_workers > 1 and config.n_runs > 1:
        with ProcessPoolExecutor(max_workers=n_workers) as pool:
            # map() yields in submission order: deterministic merge
            for partial in pool.map(
                _run_single,
                [config] * config.n_runs,
                range(config.n_runs),
                chunksize=max(1, config.n_runs // (8 * n_workers)),
            ):
                for name, e2 in partial.items():
                    sums[name] += e2
    else:
        for run_index in range(config.n_runs):
            for name, e2 in _run_single(config, run_index).items():
                sums[name] += e2

    curves = {}
    for name, total in sums.items():
        mean_e2 = total / config.n_runs
        with np.errstate(divide="ignore"):
            raw_db = 10.0 * np.log10(mean_e2)
        curves[name] = MseCurve(raw_db=raw_db, smoothed_db=moving_average(raw_db, config.smoothing_taps))
    return curves
