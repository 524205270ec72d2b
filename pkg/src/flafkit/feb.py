"""Trigonometric functional expansion block (FEB).

Maps one input sample x to its vector of functional links

    [x, sin(pi x), cos(pi x), sin(2 pi x), cos(2 pi x), ..., sin(P pi x), cos(P pi x)]

where P is the expansion order and Q = 2P + 1 is the number of links.  The
module also provides the two buffered forms used by tapped-delay-line filters:

* ``expand_tapped_delay`` expands every sample of an M-deep raw history
  (the expand-then-concatenate path of the classic structure), and
* ``ExpansionBuffer`` delays already-expanded vectors (the rearranged
  structure that expands each sample only once).

Both produce the same flattened MQ regressor, bit for bit: expansion is a
pure, deterministic function of the sample value, so expanding a delayed
sample equals delaying the expanded sample.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, DomainError

__all__ = ["ExpansionOrder", "ExpansionBuffer", "expand", "expand_tapped_delay"]


@dataclass(frozen=True)
class ExpansionOrder:
    """Expansion order P with its link count Q = 2P + 1.

    Parameters
    ----------
    p_order : int
        Number of sine/cosine harmonic pairs, >= 1.
    """

    p_order: int

    def __post_init__(self):
        if not isinstance(self.p_order, int) or self.p_order < 1:
            raise ConfigurationError(f"expansion order must be an integer >= 1, got {self.p_order!r}")

    @property
    def q_links(self) -> int:
        return 2 * self.p_order + 1

    @classmethod
    def from_q_links(cls, q_links: int) -> "ExpansionOrder":
        """Build from the link count Q; Q must be odd and >= 3."""
        if not isinstance(q_links, int) or q_links < 3 or q_links % 2 == 0:
            raise ConfigurationError(f"link count must be an odd integer >= 3, got {q_links!r}")
        return cls((q_links - 1) // 2)

    @property
    def pi_multiples(self) -> np.ndarray:
        """[pi, 2 pi, ..., P pi], the per-harmonic argument scales."""
        return np.pi * np.arange(1, self.p_order + 1)


def expand(x: float, order: ExpansionOrder, counter=None) -> np.ndarray:
    """Expand one sample into its Q functional links.

    Layout: index 0 holds x, index 2p-1 holds sin(p pi x), index 2p holds
    cos(p pi x).  Raises :class:`DomainError` for non-finite x (corrupted
    input stream).  Cost per call: P multiplications, Q - 1 trigonometric
    evaluations.
    """
    if not math.isfinite(x):
        raise DomainError(f"cannot expand non-finite sample {x!r}")
    args = order.pi_multiples * x
    out = np.empty(order.q_links)
    out[0] = x
    out[1::2] = np.sin(args)
    out[2::2] = np.cos(args)
    if counter is not None:
        counter.tally(mul=order.p_order, trig=2 * order.p_order)
    return out


def expand_tapped_delay(x_history, order: ExpansionOrder, counter=None) -> np.ndarray:
    """Expand an M-deep raw-sample history (newest first) into the flat MQ regressor.

    Returns [expand(x(n)); expand(x(n-1)); ...; expand(x(n-M+1))] as one
    contiguous vector.  Every history sample is expanded independently, so the
    cost is M times that of :func:`expand`.
    """
    hist = np.asarray(x_history, dtype=float)
    if hist.ndim != 1 or hist.size < 1:
        raise ConfigurationError("x_history must be a non-empty 1-D sequence")
    if not np.isfinite(hist).all():
        raise DomainError("cannot expand non-finite samples")
    m = hist.size
    q = order.q_links
    # Batched evaluation; identical bits to per-sample expand() because the
    # trig ufuncs are value-deterministic (guarded by a regression test).
    args = np.multiply.outer(hist, order.pi_multiples)
    out = np.empty((m, q))
    out[:, 0] = hist
    out[:, 1::2] = np.sin(args)
    out[:, 2::2] = np.cos(args)
    if counter is not None:
        counter.tally(mul=m * order.p_order, trig=m * 2 * order.p_order)
    return out.reshape(m * q)


class ExpansionBuffer:
    """Delay line of the last M expansion vectors, newest first.

    Stores the vectors contiguously so that :meth:`flattened` is a zero-copy
    view ordered [g(n); g(n-1); ...; g(n-M+1)] and :meth:`as_matrix` is the
    same storage viewed as an M x Q matrix whose k-th row is g(n-k).  Slots
    not yet written read as zero vectors.
    """

    def __init__(self, m_taps: int, order: ExpansionOrder):
        if not isinstance(m_taps, int) or m_taps < 1:
            raise ConfigurationError(f"m_taps must be an integer >= 1, got {m_taps!r}")
        self.m_taps = m_taps
        self.order = order
        self._flat = np.zeros(m_taps * order.q_links)
        self._count = 0

    def __len__(self) -> int:
        """Number of vectors pushed so far, capped at M."""
        return self._count

    def push(self, g) -> "ExpansionBuffer":
        """Insert g at position 0, shifting older vectors one tap down."""
        g = np.asarray(g, dtype=float)
        q = self.order.q_links
        if g.shape != (q,):
            raise ConfigurationError(f"expected expansion vector of length {q}, got shape {g.shape}")
        self._flat[q:] = self._flat[:-q]
        self._flat[:q] = g
        if self._count < self.m_taps:
            self._count += 1
        return self

    def fill(self, g) -> "ExpansionBuffer":
        """Set every tap to g, as if g had been pushed M times."""
        g = np.asarray(g, dtype=float)
        q = self.order.q_links
        if g.shape != (q,):
            raise ConfigurationError(f"expected expansion vector of length {q}, got shape {g.shape}")
        self._flat.reshape(self.m_taps, q)[:] = g
        self._count = self.m_taps
        return self

    def flattened(self) -> np.ndarray:
        """The MQ-vector view [g(n); g(n-1); ...]. Do not mutate."""
        return self._flat

    def as_matrix(self) -> np.ndarray:
        """M x Q view of the same storage; row k is g(n-k). Do not mutate."""
        return self._flat.reshape(self.m_taps, self.order.q_links)
