"""Synthetic unknown systems for identification experiments.

Two plant families generate the desired signal d(n) from an input x(n):

* Hammerstein cascades: a memoryless nonlinearity followed by an FIR channel,
  d(n) = sum_l h_l f(x(n-l)) + v(n).
* A fixed nonlinear-with-memory benchmark plant whose output depends
  nonlinearly on x(n), x(n-2) and x(n-4) with no cross terms:

      d(n) = 0.6 sin(pi x(n))^3 + 0.2 cos(2 pi x(n-2))^2
             - 0.1 cos(4 pi x(n-4)) + 1.125 + v(n)

v(n) is white Gaussian observation noise.  All randomness flows through
numpy's seedable PCG64 generator; an experiment run derives one sub-stream
for the input and one for the noise (see :func:`generate_pair`), so sequences
are bit-reproducible for a given seed.

The bundled nonlinearities labelled "stand-in" approximate the qualitative
character (saturation, asymmetry) of distortion models whose exact closed
forms are not published; absolute error levels obtained with them are not
comparable against results produced with the original models.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence, Union

import numpy as np

from .errors import ConfigurationError

__all__ = [
    "soft_clip",
    "loudspeaker_standin",
    "identity",
    "TableNonlinearity",
    "make_nonlinearity",
    "fir_seeded_decay",
    "load_fir_csv",
    "HammersteinSystem",
    "MemorySystem",
    "eval_memory_system",
    "InputSource",
    "SystemSpec",
    "build_system",
    "generate_pair",
]

Seed = Union[int, np.random.SeedSequence]


# ---------------------------------------------------------------------------
# memoryless nonlinearities
# ---------------------------------------------------------------------------

def identity(x):
    """Pass-through nonlinearity."""
    return np.asarray(x, dtype=float)


def soft_clip(x, zeta: float = 0.35):
    """Odd, monotone soft-clipping saturation.

    Exact form used here: identity for |x| <= zeta, and for |x| > zeta

        sign(x) * (zeta + (1 - zeta) * tanh((|x| - zeta) / (1 - zeta)))

    i.e. a linear core of half-width zeta with a smooth saturating tail that
    approaches +-1.  C1 at the seam (the tail starts with unit slope).
    Stand-in: the clipping model it replaces is defined only in unpublished
    form, so only ordering-level conclusions should be drawn from it.
    """
    if zeta <= 0:
        raise ConfigurationError(f"soft_clip zeta must be positive, got {zeta}")
    x = np.asarray(x, dtype=float)
    ax = np.abs(x)
    tail = zeta + (1.0 - zeta) * np.tanh((ax - zeta) / (1.0 - zeta))
    return np.where(ax <= zeta, x, np.sign(x) * tail)


def loudspeaker_standin(x, pos_level: float = 1.0, neg_level: float = 0.5):
    """Asymmetric saturating distortion with different positive/negative limits.

    f(x) = pos_level * tanh(x / pos_level) for x >= 0 and
    neg_level * tanh(x / neg_level) for x < 0; unit slope at the origin from
    both sides.  Stand-in for an asymmetric driver-distortion model whose
    closed form is not published.
    """
    if pos_level <= 0 or neg_level <= 0:
        raise ConfigurationError("saturation levels must be positive")
    x = np.asarray(x, dtype=float)
    return np.where(x >= 0, pos_level * np.tanh(x / pos_level), neg_level * np.tanh(x / neg_level))


class TableNonlinearity:
    """Piecewise-linear map through user-supplied (x, y) breakpoints."""

    def __init__(self, xs: Sequence[float], ys: Sequence[float]):
        xs = np.asarray(xs, dtype=float)
        ys = np.asarray(ys, dtype=float)
        if xs.ndim != 1 or xs.shape != ys.shape or xs.size < 2:
            raise ConfigurationError("table nonlinearity needs matching 1-D xs, ys with >= 2 points")
        if not np.all(np.diff(xs) > 0):
            raise ConfigurationError("table abscissas must be strictly increasing")
        self.xs = xs
        self.ys = ys

    def __call__(self, x):
        return np.interp(np.asarray(x, dtype=float), self.xs, self.ys)


def make_nonlinearity(kind: str, **params) -> Callable:
    """Factory for the named pointwise nonlinearities."""
    if kind == "identity":
        return identity
    if kind == "soft_clip":
        zeta = float(params.get("zeta", 0.35))
        return lambda x: soft_clip(x, zeta)
    if kind == "loudspeaker_standin":
        pos = float(params.get("pos_level", 1.0))
        neg = float(params.get("neg_level", 0.5))
        return lambda x: loudspeaker_standin(x, pos, neg)
    if kind == "table":
        return TableNonlinearity(params["xs"], params["ys"])
    raise ConfigurationError(f"unknown nonlinearity kind {kind!r}")


# ---------------------------------------------------------------------------
# linear channels
# ---------------------------------------------------------------------------

def fir_seeded_decay(length: int, decay_samples: int = 480, seed: Seed = 0) -> np.ndarray:
    """Reproducible exponentially decaying Gaussian FIR, normalised to unit energy.

    The amplitude envelope loses 60 dB over ``decay_samples`` taps, emulating
    the energy decay of a short room response truncated to ``length`` taps.
    """
    if length < 1:
        raise ConfigurationError(f"FIR length must be >= 1, got {length}")
    if decay_samples < 1:
        raise ConfigurationError(f"decay_samples must be >= 1, got {decay_samples}")
    rng = np.random.default_rng(seed)
    taps = rng.standard_normal(length)
    envelope = np.exp(-(3.0 * np.log(10.0) / decay_samples) * np.arange(length))
    taps *= envelope
    return taps / np.sqrt(np.sum(taps * taps))


def load_fir_csv(path) -> np.ndarray:
    """Load explicit FIR taps from a single-column CSV/text file."""
    taps = np.loadtxt(path, dtype=float, ndmin=1)
    if taps.ndim != 1 or taps.size < 1:
        raise ConfigurationError(f"FIR file {path} must hold a single column of taps")
    return taps


# ---------------------------------------------------------------------------
# plants
# ---------------------------------------------------------------------------

@dataclass
class HammersteinSystem:
    """Memoryless nonlinearity followed by an FIR channel."""

    nonlinearity: Callable
    fir: np.ndarray
    noise_variance: float = 0.0

    def __post_init__(self):
        self.fir = np.asarray(self.fir, dtype=float)
        if self.fir.ndim != 1 or self.fir.size < 1:
            raise ConfigurationError("fir must be a non-empty 1-D tap vector")
        if self.noise_variance < 0:
            raise ConfigurationError("noise_variance must be >= 0")

    def response(self, x: np.ndarray) -> np.ndarray:
        """Noise-free plant output for the full input sequence (causal, zero past)."""
        z = self.nonlinearity(np.asarray(x, dtype=float))
        return np.convolve(z, self.fir)[: len(x)]


@dataclass
class MemorySystem:
    """The fixed per-lag nonlinear benchmark plant (lags 0, 2 and 4)."""

    noise_variance: float = 0.0

    def __post_init__(self):
        if self.noise_variance < 0:
            raise ConfigurationError("noise_variance must be >= 0")

    def response(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        x2 = np.concatenate([np.zeros(2), x[:-2]]) if len(x) > 2 else np.zeros_like(x)
        x4 = np.concatenate([np.zeros(4), x[:-4]]) if len(x) > 4 else np.zeros_like(x)
        return (
            0.6 * np.sin(np.pi * x) ** 3
            + 0.2 * np.cos(2.0 * np.pi * x2) ** 2
            - 0.1 * np.cos(4.0 * np.pi * x4)
            + 1.125
        )


def eval_memory_system(x_history) -> float:
    """Scalar form of the memory plant from a newest-first history.

    The history supplies x(n), x(n-2), x(n-4); missing lags read as zero
    (warm-up convention).
    """
    hist = np.asarray(x_history, dtype=float)
    x0 = hist[0] if hist.size > 0 else 0.0
    x2 = hist[2] if hist.size > 2 else 0.0
    x4 = hist[4] if hist.size > 4 else 0.0
    return float(
        0.6 * np.sin(np.pi * x0) ** 3
        + 0.2 * np.cos(2.0 * np.pi * x2) ** 2
        - 0.1 * np.cos(4.0 * np.pi * x4)
        + 1.125
    )


# ---------------------------------------------------------------------------
# input source and experiment-facing construction
# ---------------------------------------------------------------------------

@dataclass
class InputSource:
    """White Gaussian input stream: mean 0, given variance, seedable."""

    variance: float = 0.25
    seed: Seed = 0

    def __post_init__(self):
        if self.variance <= 0:
            raise ConfigurationError("input variance must be positive")

    def draw(self, n_samples: int) -> np.ndarray:
        rng = np.random.default_rng(self.seed)
        return rng.normal(0.0, np.sqrt(self.variance), n_samples)


def generate_pair(system, source: InputSource, n_samples: int, noise_seed: Optional[Seed] = None):
    """Draw (x, d) for one run: d = plant(x) + white Gaussian observation noise.

    Sub-stream rule: the input stream comes from ``source.seed``; the noise
    stream comes from ``noise_seed`` when given, else from the derived
    sequence SeedSequence((source.seed, 1)) so that input and noise never
    share a stream.  Bit-reproducible for fixed seeds.
    """
    if n_samples < 1:
        raise ConfigurationError("n_samples must be >= 1")
    x = source.draw(n_samples)
    d = system.response(x)
    if system.noise_variance > 0:
        if noise_seed is None:
            if not isinstance(source.seed, (int, np.integer)):
                raise ConfigurationError("give an explicit noise_seed when source.seed is not an int")
            noise_seed = np.random.SeedSequence((int(source.seed), 1))
        rng = np.random.default_rng(noise_seed)
        d = d + rng.normal(0.0, np.sqrt(system.noise_variance), n_samples)
    return x, d


@dataclass
class SystemSpec:
    """Declarative plant description, as parsed from a config file."""

    kind: str = "hammerstein"  # hammerstein | memory
    nonlinearity: str = "identity"
    zeta: float = 0.35
    pos_level: float = 1.0
    neg_level: float = 0.5
    fir: str = "unit"  # unit | seeded_decay | explicit
    fir_length: int = 1
    fir_decay_samples: int = 480
    fir_seed: int = 0
    fir_path: Optional[str] = None
    explicit_taps: Optional[Sequence[float]] = None
    noise_variance: float = 0.01
    table_xs: Optional[Sequence[float]] = field(default=None, repr=False)
    table_ys: Optional[Sequence[float]] = field(default=None, repr=False)


def build_system(spec: SystemSpec):
    """Construct the plant described by a :class:`SystemSpec`."""
    if spec.kind == "memory":
        return MemorySystem(noise_variance=spec.noise_variance)
    if spec.kind != "hammerstein":
        raise ConfigurationError(f"unknown system kind {spec.kind!r}")

    if spec.nonlinearity == "table":
        if spec.table_xs is None or spec.table_ys is None:
            raise ConfigurationError("table nonlinearity needs table_xs and table_ys")
        nl = make_nonlinearity("table", xs=spec.table_xs, ys=spec.table_ys)
    else:
        nl = make_nonlinearity(
            spec.nonlinearity, zeta=spec.zeta, pos_level=spec.pos_level, neg_level=spec.neg_level
        )

    if spec.fir == "unit":
        fir = np.ones(1)
    elif spec.fir == "seeded_decay":
        fir = fir_seeded_decay(spec.fir_length, spec.fir_decay_samples, spec.fir_seed)
    elif spec.fir == "explicit":
        if spec.explicit_taps is not None:
            fir = np.asarray(spec.explicit_taps, dtype=float)
        elif spec.fir_path is not None:
            fir = load_fir_csv(spec.fir_path)
        else:
            raise ConfigurationError("explicit FIR needs explicit_taps or fir_path")
    else:
        raise ConfigurationError(f"unknown fir kind {spec.fir!r}")

    return HammersteinSystem(nonlinearity=nl, fir=fir, noise_variance=spec.noise_variance)
