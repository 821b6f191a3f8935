"""Continuous sample paths: Brownian motion, stopped Ornstein-Uhlenbeck,
the level-complement radial process of 3-d Brownian motion, and path
post-processing (last-passage extraction, time reversal, quadrature).

All simulators are pure functions of an :class:`~rarepath.rng.RngStream`
and their parameters: identical inputs give bitwise-identical paths.

Barrier handling
----------------
Two detection modes are supported.  ``"grid"`` stops at the first grid
point at or past a barrier and refines the crossing time by linear
interpolation; sub-grid excursions across a barrier are missed, which
biases hitting probabilities by O(sqrt(step)).  ``"bridge"`` additionally
flips, per step, a coin with the Brownian-bridge probability
``exp(-2*d_before*d_after/step)`` that the barrier was touched inside the
step, which reduces the detection bias to O(step).  Bridge-detected stops
snap the final path value to the barrier and place the refined crossing
time at the middle of the offending step.
"""

import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .errors import InvalidArgument, LevelNeverReached
from .rng import RngStream

__all__ = [
    "Hit",
    "ContinuousPath",
    "StoppedSegment",
    "ReversedExcursion",
    "simulate_brownian",
    "simulate_ou_stopped",
    "simulate_bessel3_complement",
    "reversed_last_excursion",
    "path_integral_square",
    "ou_scale_ratio",
    "ou_scale_ratio_log",
    "HORIZON_CAP",
]

#: Hard ceiling (time units) for horizon auto-extension of stopped simulations.
HORIZON_CAP = 1.0e6

_BLOCK = 4096  # draws per block in scalar path loops


class Hit(enum.Enum):
    LOWER = "lower"
    UPPER = "upper"
    EXPIRED = "expired"


@dataclass(frozen=True)
class ContinuousPath:
    """Uniformly gridded path; the value at index k sits at time ``k*step``.

    ``values`` has shape ``(n,)`` when ``dim == 1`` and ``(n, dim)``
    otherwise.
    """

    step: float
    values: np.ndarray
    dim: int = 1

    def __post_init__(self):
        if self.step <= 0.0:
            raise InvalidArgument("step must be positive")
        v = np.asarray(self.values)
        if v.size == 0:
            raise InvalidArgument("path must hold at least one value")
        if self.dim == 1:
            if v.ndim != 1:
                raise InvalidArgument("dim=1 path must have 1-d values")
        elif v.ndim != 2 or v.shape[1] != self.dim:
            raise InvalidArgument("values shape does not match dim")

    def __len__(self):
        return len(self.values)

    @property
    def duration(self) -> float:
        return (len(self.values) - 1) * self.step

    @property
    def times(self) -> np.ndarray:
        return np.arange(len(self.values)) * self.step


@dataclass(frozen=True)
class StoppedSegment:
    """A path together with where and why it stopped.

    ``stop_time_refined`` is the linearly interpolated (grid mode) or
    mid-step (bridge mode) crossing time; it always lies within the grid
    cell ending at ``stop_index``.
    """

    path: ContinuousPath
    stop_index: int
    hit: Hit
    stop_time_refined: float

    def __post_init__(self):
        if not 0 <= self.stop_index < len(self.path.values):
            raise InvalidArgument("stop_index outside the path")


@dataclass(frozen=True)
class ReversedExcursion:
    """Time reversal of the path segment between time zero and the last
    visit of a level.

    ``segment.values[0]`` is the level (up to one grid cell of
    interpolation error) and the final value is the original starting
    point of the path; ``origin_time`` is the refined last-visit time in
    the original clock.
    """

    segment: ContinuousPath
    origin_time: float
    level: float


# ---------------------------------------------------------------------------
# simulators


def simulate_brownian(stream: RngStream, dim: int, step: float,
                      horizon: float) -> ContinuousPath:
    """Standard Brownian path from the origin on a uniform grid.

    Increments are N(0, step) per coordinate.
    """
    if dim < 1:
        raise InvalidArgument("dim must be >= 1")
    if step <= 0.0 or horizon < step:
        raise InvalidArgument("need step > 0 and horizon >= step")
    n_steps = int(math.floor(horizon / step + 1e-9))
    gen = stream.generator()
    if dim == 1:
        inc = gen.standard_normal(n_steps) * math.sqrt(step)
        vals = np.concatenate([[0.0], np.cumsum(inc)])
    else:
        inc = gen.standard_normal((n_steps, dim)) * math.sqrt(step)
        vals = np.vstack([np.zeros(dim), np.cumsum(inc, axis=0)])
    return ContinuousPath(step=step, values=vals, dim=dim)


def _bridge_coin(u, d_before, d_after, step):
    """True where a uniform draw detects a sub-step barrier touch."""
    p = np.exp(-2.0 * np.maximum(d_before, 0.0) * np.maximum(d_after, 0.0) / step)
    return u < p


def _ou_block(x, a, sq, z):
    """Exact Euler block update x_{k+1} = a*x_k + sq*z_k, vectorized.

    Valid while len(z)*(1-a) stays small enough that a**-len(z) does not
    lose precision; callers cap the block length accordingly.
    """
    m = len(z)
    powers = a ** np.arange(1, m + 1)
    s = np.cumsum(sq * z / powers)
    return powers * x + powers * s


def simulate_ou_stopped(stream: RngStream, x0: float, step: float,
                        lower: float, upper: float,
                        horizon: float = math.inf,
                        detection: str = "grid",
                        extend: bool = True) -> StoppedSegment:
    """Euler path of ``dX = -X dt + dB`` stopped at the first barrier.

    The path is killed at the first grid index with value <= ``lower`` or
    >= ``upper`` (plus bridge coins when ``detection="bridge"``).  With
    ``extend`` the simulation keeps growing past ``horizon`` up to
    :data:`HORIZON_CAP` before flagging :attr:`Hit.EXPIRED`; otherwise it
    expires at ``horizon``.
    """
    if step <= 0.0:
        raise InvalidArgument("step must be positive")
    if not lower < upper:
        raise InvalidArgument("need lower < upper")
    if not lower <= x0 <= upper:
        raise InvalidArgument("x0 outside [lower, upper]")
    if detection not in ("grid", "bridge"):
        raise InvalidArgument("detection must be 'grid' or 'bridge'")

    if x0 >= upper:
        path = ContinuousPath(step=step, values=np.array([x0]))
        return StoppedSegment(path, 0, Hit.UPPER, 0.0)
    if x0 <= lower:
        path = ContinuousPath(step=step, values=np.array([x0]))
        return StoppedSegment(path, 0, Hit.LOWER, 0.0)

    gen = stream.generator()
    a = 1.0 - step
    sq = math.sqrt(step)
    limit = HORIZON_CAP if extend else min(horizon, HORIZON_CAP)
    max_steps = max(int(math.floor(limit / step)), 1)
    block_len = min(_BLOCK, max(64, int(8.0 / step)))

    chunks = [np.array([x0])]
    x = x0
    k = 0
    while k < max_steps:
        m = min(block_len, max_steps - k)
        z = gen.standard_normal(m)
        xs = _ou_block(x, a, sq, z)
        xprev = np.concatenate([[x], xs[:-1]])
        up = xs >= upper
        dn = xs <= lower
        if detection == "bridge":
            u = gen.random(m)
            ok = ~(up | dn)
            with np.errstate(over="ignore"):
                p_lo = np.where(ok, np.exp(-2.0 * (xprev - lower) * (xs - lower) / step), 0.0)
                p_up = np.where(ok, np.exp(-2.0 * (upper - xprev) * (upper - xs) / step), 0.0)
            dn_b = ok & (u < p_lo)
            up_b = ok & ~dn_b & (u < p_lo + p_up)
        else:
            dn_b = up_b = np.zeros(m, dtype=bool)
        done = up | dn | dn_b | up_b
        if np.any(done):
            j = int(np.argmax(done))
            hit = Hit.UPPER if (up[j] or up_b[j]) else Hit.LOWER
            if up[j]:
                frac = (upper - xprev[j]) / (xs[j] - xprev[j])
            elif dn[j]:
                frac = (xprev[j] - lower) / (xprev[j] - xs[j])
            else:
                frac = 0.5
                xs[j] = upper if up_b[j] else lower
            chunks.append(xs[: j + 1])
            vals = np.concatenate(chunks)
            idx = len(vals) - 1
            return StoppedSegment(ContinuousPath(step=step, values=vals),
                                  idx, hit, (idx - 1) * step + frac * step)
        chunks.append(xs)
        x = xs[-1]
        k += m
    vals = np.concatenate(chunks)
    return StoppedSegment(ContinuousPath(step=step, values=vals),
                          len(vals) - 1, Hit.EXPIRED, (len(vals) - 1) * step)


def simulate_bessel3_complement(stream: RngStream, level: float, step: float,
                                horizon: float = math.inf,
                                detection: str = "grid",
                                extend: bool = True) -> StoppedSegment:
    """Path of ``t -> level - |B(t)|`` for 3-d Brownian ``B``, stopped at 0.

    The radial norm of three-dimensional Brownian motion from the origin
    is transient, so the stopped time is a.s. finite; the process starts
    at ``level`` exactly.  With ``extend`` the horizon doubles up to
    :data:`HORIZON_CAP` (the recommended "infinite horizon" semantics);
    otherwise expiry is flagged and the caller decides.
    """
    if level <= 0.0:
        raise InvalidArgument("level must be positive")
    if step <= 0.0:
        raise InvalidArgument("step must be positive")
    if detection not in ("grid", "bridge"):
        raise InvalidArgument("detection must be 'grid' or 'bridge'")

    gen = stream.generator()
    sq = math.sqrt(step)
    limit = HORIZON_CAP if extend else min(horizon, HORIZON_CAP)
    max_steps = max(int(math.floor(limit / step)), 1)

    b = np.zeros(3)
    x = level
    chunks = [np.array([level])]
    k = 0
    while k < max_steps:
        m = min(_BLOCK, max_steps - k)
        z = gen.standard_normal((m, 3))
        bs = b + sq * np.cumsum(z, axis=0)
        xs = level - np.sqrt(np.einsum("ij,ij->i", bs, bs))
        xprev = np.concatenate([[x], xs[:-1]])
        hit = xs <= 0.0
        if detection == "bridge":
            u = gen.random(m)
            with np.errstate(over="ignore"):
                p0 = np.where(hit, 0.0, np.exp(-2.0 * np.maximum(xprev, 0.0) * np.maximum(xs, 0.0) / step))
            hit_b = ~hit & (u < p0)
        else:
            hit_b = np.zeros(m, dtype=bool)
        done = hit | hit_b
        if np.any(done):
            j = int(np.argmax(done))
            if hit[j]:
                frac = xprev[j] / (xprev[j] - xs[j])
            else:
                frac = 0.5
                xs[j] = 0.0
            chunks.append(xs[: j + 1])
            vals = np.concatenate(chunks)
            idx = len(vals) - 1
            return StoppedSegment(ContinuousPath(step=step, values=vals),
                                  idx, Hit.LOWER, (idx - 1) * step + frac * step)
        chunks.append(xs)
        b = bs[-1]
        x = xs[-1]
        k += m
    vals = np.concatenate(chunks)
    return StoppedSegment(ContinuousPath(step=step, values=vals),
                          len(vals) - 1, Hit.EXPIRED, (len(vals) - 1) * step)


# ---------------------------------------------------------------------------
# post-processing


def reversed_last_excursion(seg: StoppedSegment, level: float) -> ReversedExcursion:
    """Time-reverse the path from its start to its last visit of ``level``.

    The last visit is the final grid crossing (sign change of
    ``value - level``, ties at exact equality broken toward the later
    index) before the stop index; its time is refined by linear
    interpolation.  The returned segment reads the original path
    backwards from that crossing, so it starts at ``level`` (up to one
    grid cell) and ends at the path's starting value.  Reversing the
    returned values again recovers the original prefix.
    """
    if seg.hit is not Hit.LOWER:
        raise InvalidArgument("excursion extraction expects a lower-barrier stop")
    v = np.asarray(seg.path.values[: seg.stop_index + 1], dtype=float)
    if v.ndim != 1:
        raise InvalidArgument("scalar path required")
    d = v - level
    exact = d == 0.0
    change = np.zeros(len(v), dtype=bool)
    change[1:] = d[:-1] * d[1:] < 0.0
    hits = np.flatnonzero(exact | change)
    if hits.size == 0:
        raise LevelNeverReached(f"path never reaches level {level}")
    kc = int(hits[-1])
    h = seg.path.step
    if exact[kc]:
        t_ref = kc * h
    else:
        frac = (level - v[kc - 1]) / (v[kc] - v[kc - 1])
        t_ref = (kc - 1) * h + frac * h
    segment = ContinuousPath(step=h, values=v[kc::-1].copy())
    return ReversedExcursion(segment=segment, origin_time=t_ref, level=level)


def path_integral_square(path: ContinuousPath, stop_time: float) -> float:
    """Trapezoidal integral of the squared scalar path on ``[0, stop_time]``.

    The final partial cell runs to the (linearly interpolated) value at
    ``stop_time``.
    """
    v = np.asarray(path.values, dtype=float)
    if v.ndim != 1:
        raise InvalidArgument("scalar path required")
    h = path.step
    dur = path.duration
    if stop_time < 0.0 or stop_time > dur + 1e-12 * max(1.0, dur):
        raise InvalidArgument("stop_time outside the path")
    stop_time = min(stop_time, dur)
    kf = int(math.floor(stop_time / h + 1e-12))
    kf = min(kf, len(v) - 1)
    sq = v * v
    total = float(np.sum((sq[: kf] + sq[1: kf + 1])) * 0.5 * h) if kf > 0 else 0.0
    rem = stop_time - kf * h
    if rem > 1e-15 and kf + 1 < len(v):
        frac = rem / h
        v_stop = v[kf] + frac * (v[kf + 1] - v[kf])
        total += 0.5 * (sq[kf] + v_stop * v_stop) * rem
    return total


def _scale_log(y: float) -> float:
    """log of integral_0^y exp(u^2) du, computed overflow-free."""
    if y == 0.0:
        return -math.inf
    # substitute v = y - u:  integral = exp(y^2) * int_0^y exp(-v(2y - v)) dv
    g, _ = integrate.quad(lambda v: math.exp(-v * (2.0 * y - v)), 0.0, y,
                          epsabs=1e-14, epsrel=1e-12, limit=200)
    return y * y + math.log(g)


def ou_scale_ratio(x: float, big_level: float) -> float:
    """Probability that the unit OU process from ``x`` reaches
    ``big_level`` before 0, via its scale function.

    The scale function of ``dX = -X dt + dB`` has density ``exp(u^2)``;
    the ratio is evaluated in log-space so that large levels do not
    overflow.  Absolute error is below 1e-10.  For levels beyond ~26 the
    true ratio underflows float64 and 0.0 is returned; use
    :func:`ou_scale_ratio_log` in that regime.
    """
    if x < 0.0 or x > big_level:
        raise InvalidArgument("need 0 <= x <= big_level")
    if x == big_level:
        return 1.0
    if x == 0.0:
        return 0.0
    diff = _scale_log(x) - _scale_log(big_level)
    return math.exp(diff) if diff > -745.0 else 0.0


def ou_scale_ratio_log(x: float, big_level: float) -> float:
    """log of :func:`ou_scale_ratio`, finite for any level."""
    if x <= 0.0 or x > big_level:
        raise InvalidArgument("need 0 < x <= big_level")
    if x == big_level:
        return 0.0
    return _scale_log(x) - _scale_log(big_level)
