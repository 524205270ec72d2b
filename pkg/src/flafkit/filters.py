"""Adaptive filters behind one per-sample contract.

Every filter consumes one (x, d) pair per step, emits (y, e) with
e = d - y exactly, and updates its weights by a stochastic-gradient rule.
The family:

* :class:`LMS` - linear tapped-delay filter, the baseline.
* :class:`TFLAF` - trigonometric functional-link filter over the flattened
  M x Q expansion regressor, plus an adaptive bias.  Two structurally
  different but functionally identical modes: ``original`` re-expands every
  delayed raw sample each step; ``single_phi`` expands the newest sample once
  and delays the expanded vectors.  Both build the same regressor bit for
  bit, so their output trajectories coincide exactly.
* :class:`HBOTFLAF` - Hammerstein two-stage structure: a Q-tap adaptive
  combination of the expansion (weights ``a``) produces s(n), which feeds an
  M-tap linear stage with adaptive bias (weights ``w``).  With ``a`` at its
  delta initialisation the first stage is the identity and the filter
  behaves exactly like a linear filter with bias.
* :class:`HSAF` - Hammerstein spline filter: the first stage is an adaptive
  uniform Catmull-Rom curve over control points ``q``; the second stage is an
  M-tap linear combiner (no bias).

Update ordering is uniform across the two-stage filters: the output error and
linear weights at time n drive both stage updates, and the first-stage
gradient uses the pre-update linear weights.  Passing ``counter`` (an
:class:`~flafkit.complexity.OpCounter`) tallies every signal-path multiply,
add and trig call.

All delay lines start filled with zeros, and anything derived from them at
reset is the image of that zero history (expanded zeros, spline-of-zero span
records), so warm-up behaviour is identical across structurally equivalent
filters.
"""
from __future__ import annotations

import math
from typing import Mapping, NamedTuple, Optional

import numpy as np

from . import spline
from .complexity import OpCounter
from .errors import ConfigurationError, DivergenceError, DomainError
from .feb import ExpansionBuffer, ExpansionOrder, expand, expand_tapped_delay

__all__ = ["StepOutput", "AdaptiveFilter", "LMS", "TFLAF", "HBOTFLAF", "HSAF", "make_filter"]

_SWEEP_MASK = 511  # full weight finiteness sweep every 512 steps


class StepOutput(NamedTuple):
    y: float
    e: float


def _dot(a: np.ndarray, b: np.ndarray, counter) -> float:
    if counter is not None:
        counter.tally(mul=len(a), add=len(a) - 1)
    return float(np.dot(a, b))


def _scaled_add(target: np.ndarray, scale: float, vec: np.ndarray, counter):
    """target += scale * vec, counting len multiplies and len adds."""
    if counter is not None:
        counter.tally(mul=len(vec), add=len(vec))
    target += scale * vec


class AdaptiveFilter:
    """Common state and the step/reset/snapshot contract."""

    algorithm = "base"

    def __init__(self, m_taps: int, counter: Optional[OpCounter] = None):
        if not isinstance(m_taps, int) or m_taps < 1:
            raise ConfigurationError(f"m_taps must be an integer >= 1, got {m_taps!r}")
        self.m_taps = m_taps
        self.counter = counter
        self._iteration = 0

    # -- contract -----------------------------------------------------------
    def step(self, x: float, d: float) -> StepOutput:
        raise NotImplementedError

    def reset(self):
        raise NotImplementedError

    def weight_snapshot(self) -> dict:
        """Named copies of the adaptive weight vectors."""
        raise NotImplementedError

    def run(self, x_seq, d_seq):
        """Stream full sequences; returns (y, e) arrays."""
        x_seq = np.asarray(x_seq, dtype=float)
        d_seq = np.asarray(d_seq, dtype=float)
        if x_seq.shape != d_seq.shape or x_seq.ndim != 1:
            raise ConfigurationError("x and d must be 1-D sequences of equal length")
        n = x_seq.size
        y = np.empty(n)
        e = np.empty(n)
        step = self.step
        for i in range(n):
            y[i], e[i] = step(x_seq[i], d_seq[i])
        self._sweep_weights()
        return y, e

    # -- guards -------------------------------------------------------------
    def _check_inputs(self, x: float, d: float):
        if not (math.isfinite(x) and math.isfinite(d)):
            raise DomainError(f"non-finite sample in input stream at iteration {self._iteration}")

    def _weight_arrays(self):
        raise NotImplementedError

    def _sweep_weights(self):
        for arr in self._weight_arrays():
            if not np.isfinite(arr).all():
                raise DivergenceError(
                    "adaptive weights became non-finite (step size too large?)",
                    algorithm=self.algorithm,
                    iteration=self._iteration,
                )

    def _post_step(self, y: float):
        self._iteration += 1
        if not math.isfinite(y):
            raise DivergenceError(
                "filter output became non-finite (step size too large?)",
                algorithm=self.algorithm,
                iteration=self._iteration,
            )
        if not (self._iteration & _SWEEP_MASK):
            self._sweep_weights()


def _check_mu(value, key: str, allow_zero: bool = False) -> float:
    try:
        value = float(value)
    except (TypeError, ValueError):
        raise ConfigurationError(f"{key} must be a number, got {value!r}") from None
    if not math.isfinite(value) or value < 0 or (value == 0 and not allow_zero):
        bound = ">= 0" if allow_zero else "> 0"
        raise ConfigurationError(f"{key} must be {bound}, got {value}")
    return value


class LMS(AdaptiveFilter):
    """Linear tapped-delay-line filter with a stochastic-gradient update.

    Parameters
    ----------
    m_taps : int
        Filter length M.
    mu : float
        Step size, > 0.
    bias : bool, optional
        Prepend a constant-1 regressor with its own adaptive weight.  Off by
        default (the plain M-tap filter); the biased form exists to mirror
        the two-stage filters' linear stage exactly.
    """

    algorithm = "lms"

    def __init__(self, m_taps: int, mu: float, bias: bool = False, counter=None):
        super().__init__(m_taps, counter)
        self.mu = _check_mu(mu, "mu")
        self.bias = bool(bias)
        self.reset()

    def reset(self):
        self.w = np.zeros(self.m_taps)
        self.w_bias = 0.0
        self.x_buf = np.zeros(self.m_taps)
        self._iteration = 0
        if self.counter is not None:
            self.counter.reset()

    def step(self, x: float, d: float) -> StepOutput:
        self._check_inputs(x, d)
        c = self.counter
        buf = self.x_buf
        buf[1:] = buf[:-1]
        buf[0] = x
        y = _dot(self.w, buf, c)
        if self.bias:
            y = self.w_bias + y
            if c is not None:
                c.tally(add=1)
        e = d - y
        if c is not None:
            c.tally(add=1)
        ue = self.mu * e
        if c is not None:
            c.tally(mul=1)
        _scaled_add(self.w, ue, buf, c)
        if self.bias:
            self.w_bias += ue
            if c is not None:
                c.tally(add=1)
        self._post_step(y)
        return StepOutput(y, e)

    def weight_snapshot(self) -> dict:
        w = np.concatenate([[self.w_bias], self.w]) if self.bias else self.w.copy()
        return {"w": w}

    def _weight_arrays(self):
        return (self.w,)


class TFLAF(AdaptiveFilter):
    """Trigonometric functional-link filter with adaptive bias.

    The regressor is the flattened expansion of the last M raw samples
    (MQ entries) plus a constant-1 bias term; the weight vector therefore has
    MQ + 1 entries, bias last.

    Parameters
    ----------
    m_taps : int
        Delay-line depth M.
    q_links : int
        Links per sample, Q = 2P + 1 (odd, >= 3).
    mu : float
        Step size, > 0.
    mode : str
        ``"original"`` re-expands all M delayed raw samples every step
        (M(Q-1) trig calls); ``"single_phi"`` expands the newest sample once
        and delays the expanded vectors (Q-1 trig calls).  The two modes
        produce bit-identical trajectories.
    """

    algorithm = "tflaf"

    def __init__(self, m_taps: int, q_links: int, mu: float, mode: str = "original", counter=None):
        super().__init__(m_taps, counter)
        if mode not in ("original", "single_phi"):
            raise ConfigurationError(f"mode must be 'original' or 'single_phi', got {mode!r}")
        self.order = ExpansionOrder.from_q_links(q_links)
        self.mu = _check_mu(mu, "mu")
        self.mode = mode
        if mode == "single_phi":
            self.algorithm = "single_phi_tflaf"
        self.reset()

    def reset(self):
        mq = self.m_taps * self.order.q_links
        self.w = np.zeros(mq)
        self.w_bias = 0.0
        if self.mode == "original":
            self.x_buf = np.zeros(self.m_taps)
            self.g_buf = None
        else:
            # Image of the zero-filled raw delay line under expansion, so the
            # two modes agree during warm-up as well.
            self.x_buf = None
            self.g_buf = ExpansionBuffer(self.m_taps, self.order)
            self.g_buf.fill(expand(0.0, self.order))
        self._iteration = 0
        if self.counter is not None:
            self.counter.reset()

    def _regressor(self, x: float) -> np.ndarray:
        if self.mode == "original":
            buf = self.x_buf
            buf[1:] = buf[:-1]
            buf[0] = x
            return expand_tapped_delay(buf, self.order, self.counter)
        self.g_buf.push(expand(x, self.order, self.counter))
        return self.g_buf.flattened()

    def step(self, x: float, d: float) -> StepOutput:
        self._check_inputs(x, d)
        c = self.counter
        g = self._regressor(x)
        y = self.w_bias + _dot(self.w, g, c)
        e = d - y
        if c is not None:
            c.tally(add=2)  # bias into output, error subtraction
        ue = self.mu * e
        if c is not None:
            c.tally(mul=1)
        _scaled_add(self.w, ue, g, c)
        self.w_bias += ue
        if c is not None:
            c.tally(add=1)
        self._post_step(y)
        return StepOutput(y, e)

    def weight_snapshot(self) -> dict:
        return {"w": np.concatenate([self.w, [self.w_bias]])}

    def _weight_arrays(self):
        return (self.w,)


class HBOTFLAF(AdaptiveFilter):
    """Hammerstein two-stage functional-link filter.

    Stage 1 combines the Q expansion links of the newest sample with adaptive
    weights ``a`` into s(n); stage 2 is an (M+1)-weight linear combiner
    [bias; taps] over [1; s(n); ...; s(n-M+1)].  Both stages adapt from the
    same output error; the stage-1 gradient treats the stored s values as if
    produced by the current ``a`` (slow-adaptation assumption), which makes it
    w_taps @ G with G the matrix of the last M expansion vectors, evaluated
    with the pre-update linear weights.

    At reset ``a`` is the delta vector [1, 0, ..., 0] (stage 1 = identity) and
    the linear weights are zero, so the filter starts as a linear filter.
    With ``mu_a = 0`` it remains one exactly.
    """

    algorithm = "hbo_tflaf"

    def __init__(self, m_taps: int, q_links: int, mu_w: float, mu_a: float, counter=None):
        super().__init__(m_taps, counter)
        self.order = ExpansionOrder.from_q_links(q_links)
        self.mu_w = _check_mu(mu_w, "mu_w")
        self.mu_a = _check_mu(mu_a, "mu_a", allow_zero=True)
        self.reset()

    def reset(self):
        q = self.order.q_links
        self.a = np.zeros(q)
        self.a[0] = 1.0
        self.w = np.zeros(self.m_taps)
        self.w_bias = 0.0
        self.s_buf = np.zeros(self.m_taps)
        self.g_buf = ExpansionBuffer(self.m_taps, self.order)
        self.g_buf.fill(expand(0.0, self.order))
        self._iteration = 0
        if self.counter is not None:
            self.counter.reset()

    def step(self, x: float, d: float) -> StepOutput:
        self._check_inputs(x, d)
        c = self.counter
        g = expand(x, self.order, c)
        self.g_buf.push(g)
        s = _dot(self.a, g, c)
        buf = self.s_buf
        buf[1:] = buf[:-1]
        buf[0] = s
        y = self.w_bias + _dot(self.w, buf, c)
        e = d - y
        if c is not None:
            c.tally(add=2)
        # stage-1 gradient with pre-update linear weights
        grad_a = self.w @ self.g_buf.as_matrix()
        if c is not None:
            c.tally(mul=self.m_taps * self.order.q_links, add=(self.m_taps - 1) * self.order.q_links)
        ue_w = self.mu_w * e
        if c is not None:
            c.tally(mul=1)
        _scaled_add(self.w, ue_w, buf, c)
        self.w_bias += ue_w
        if c is not None:
            c.tally(add=1)
        ue_a = self.mu_a * e
        if c is not None:
            c.tally(mul=1)
        _scaled_add(self.a, ue_a, grad_a, c)
        self._post_step(y)
        return StepOutput(y, e)

    def weight_snapshot(self) -> dict:
        return {"w": np.concatenate([[self.w_bias], self.w]), "a": self.a.copy()}

    def _weight_arrays(self):
        return (self.w, self.a)

    def expansion_matrix(self) -> np.ndarray:
        """Copy of G: row k is the expansion of x(n-k)."""
        return self.g_buf.as_matrix().copy()


class HSAF(AdaptiveFilter):
    """Hammerstein filter with an adaptive uniform Catmull-Rom first stage.

    Stage 1 maps x(n) through the spline curve over control points ``q``
    (initialised on the identity line); stage 2 is a plain M-tap linear
    combiner, no bias.  The control-point update scatters
    mu_q * e * w_k * (C^T u_v(n-k)) into the 4-point window recorded for each
    tap, using the pre-update linear weights; inputs beyond the spline
    support are evaluated on the clamped edge span rather than rejected.
    """

    algorithm = "hsaf"

    def __init__(
        self,
        m_taps: int,
        mu_w: float,
        mu_q: float,
        knot_spacing: float = 0.25,
        n_control_points: int = 25,
        counter=None,
    ):
        super().__init__(m_taps, counter)
        if knot_spacing <= 0 or not math.isfinite(knot_spacing):
            raise ConfigurationError(f"knot_spacing must be positive, got {knot_spacing}")
        if not isinstance(n_control_points, int) or n_control_points < 4:
            raise ConfigurationError(f"n_control_points must be an integer >= 4, got {n_control_points!r}")
        self.mu_w = _check_mu(mu_w, "mu_w")
        self.mu_q = _check_mu(mu_q, "mu_q", allow_zero=True)
        self.knot_spacing = float(knot_spacing)
        self.n_control_points = n_control_points
        self.reset()

    def reset(self):
        self.q = spline.linear_ramp(self.n_control_points, self.knot_spacing)
        self.w = np.zeros(self.m_taps)
        self.s_buf = np.zeros(self.m_taps)
        # span records of the zero-filled past: every stored sample is x = 0
        i0, u0 = spline.locate_span(0.0, self.knot_spacing, self.n_control_points)
        r0 = spline.control_weights(u0)
        self.win_buf = np.full(self.m_taps, i0 - 1, dtype=np.intp)
        self.r_buf = np.tile(r0, (self.m_taps, 1))
        self._iteration = 0
        if self.counter is not None:
            self.counter.reset()

    def step(self, x: float, d: float) -> StepOutput:
        self._check_inputs(x, d)
        c = self.counter
        i, u = spline.locate_span(x, self.knot_spacing, self.n_control_points, c)
        r = spline.control_weights(u, c)
        s = _dot(r, self.q[i - 1 : i + 3], c)
        buf = self.s_buf
        buf[1:] = buf[:-1]
        buf[0] = s
        self.win_buf[1:] = self.win_buf[:-1]
        self.win_buf[0] = i - 1
        self.r_buf[1:] = self.r_buf[:-1]
        self.r_buf[0] = r
        y = _dot(self.w, buf, c)
        e = d - y
        if c is not None:
            c.tally(add=1)
        # control-point gradient coefficients from the pre-update weights
        ue_q = self.mu_q * e
        coefs = ue_q * self.w
        if c is not None:
            c.tally(mul=1 + self.m_taps)
        ue_w = self.mu_w * e
        if c is not None:
            c.tally(mul=1)
        _scaled_add(self.w, ue_w, buf, c)
        updates = coefs[:, None] * self.r_buf
        idx = self.win_buf[:, None] + np.arange(4)
        np.add.at(self.q, idx, updates)
        if c is not None:
            c.tally(mul=4 * self.m_taps, add=4 * self.m_taps)
        self._post_step(y)
        return StepOutput(y, e)

    def weight_snapshot(self) -> dict:
        return {"w": self.w.copy(), "q": self.q.copy()}

    def _weight_arrays(self):
        return (self.w, self.q)

    def curve_value(self, x: float) -> float:
        """Evaluate the current first-stage curve at x (no state change)."""
        return spline.spline_value(x, self.q, self.knot_spacing)


_REQUIRED = object()


def _param(params: Mapping, key: str, default=_REQUIRED):
    if key in params:
        return params[key]
    if default is _REQUIRED:
        raise ConfigurationError(f"missing required parameter {key!r}")
    return default


def make_filter(algorithm: str, m_taps: int, params: Mapping, counter=None) -> AdaptiveFilter:
    """Build an initialised filter from its experiment hyperparameters.

    ``params`` keys by algorithm:

    * lms: mu
    * tflaf / single_phi_tflaf: mu, q_links
    * hbo_tflaf: mu_w, mu_a, q_links
    * hsaf: mu_w, mu_q, knot_spacing (default 0.25), n_control_points
      (default 25)
    """
    if algorithm == "lms":
        return LMS(m_taps, mu=_param(params, "mu"), counter=counter)
    if algorithm in ("tflaf", "single_phi_tflaf"):
        mode = "single_phi" if algorithm == "single_phi_tflaf" else "original"
        return TFLAF(
            m_taps,
            q_links=int(_param(params, "q_links")),
            mu=_param(params, "mu"),
            mode=mode,
            counter=counter,
        )
    if algorithm == "hbo_tflaf":
        return HBOTFLAF(
            m_taps,
            q_links=int(_param(params, "q_links")),
            mu_w=_param(params, "mu_w"),
            mu_a=_param(params, "mu_a"),
            counter=counter,
        )
    if algorithm == "hsaf":
        return HSAF(
            m_taps,
            mu_w=_param(params, "mu_w"),
            mu_q=_param(params, "mu_q"),
            knot_spacing=float(_param(params, "knot_spacing", 0.25)),
            n_control_points=int(_param(params, "n_control_points", 25)),
            counter=counter,
        )
    raise ConfigurationError(
        f"unknown algorithm {algorithm!r}; expected lms, tflaf, single_phi_tflaf, hbo_tflaf or hsaf"
    )
