"""Convergence measurement and certification utilities.

Holds the simulation trace container, exponential-envelope fitting, bound
certification against arbitrary envelopes, and the closed-form solutions of
the scalar comparison ODEs used as oracles:

  x_dot = -sigma x sqrt(1 - x)          (separable; sliding-manifold error)
  v_dot = -lam v + C exp(-p t)          (linear decay with vanishing input)
  v_dot = (-lam + C exp(-p t)) v        (decay with vanishing rate perturbation)
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

Array = np.ndarray

#: values are clipped here before taking logs in fits
LOG_FLOOR = 1e-15


@dataclass(frozen=True)
class SimTrace:
    """Time-indexed record of one simulation run.

    All arrays share the leading dimension N (number of samples); `time`
    is strictly increasing.  Norm channels carry the quantities appearing
    in the convergence certificates.
    """

    time: Array           # (N,) s
    position: Array       # (N, 3) m
    position_ref: Array   # (N, 3) m
    velocity: Array       # (N, 3) m/s
    attitude: Array       # (N, 4) quaternion [q0, qx, qy, qz]
    attitude_ref: Array   # (N, 4)
    omega: Array          # (N, 3) rad/s
    thrust: Array         # (N,) N
    torque: Array         # (N, 3) N m
    norm_qe_vec: Array    # (N,) attitude error vector norm
    norm_s_att: Array     # (N,) attitude sliding variable norm
    norm_r_e: Array       # (N,) position error norm
    norm_s_pos: Array     # (N,) position sliding variable norm
    delta1: Array         # (N,) 2*sqrt(2)*norm_qe_vec
    delta2: Array         # (N,) delta1 * ||r_ddot_d - alpha r_e_dot + g||

    def __post_init__(self):
        t = np.asarray(self.time, dtype=np.float64)
        if t.ndim != 1 or t.size < 2:
            raise ValueError("time must be a 1-D array with at least 2 samples")
        if not np.all(np.diff(t) > 0.0):
            raise ValueError("time must be strictly increasing")
        n = t.size
        for name in self.__dataclass_fields__:
            arr = np.asarray(getattr(self, name), dtype=np.float64)
            if arr.shape[0] != n:
                raise ValueError(f"{name} length {arr.shape[0]} != time length {n}")
            object.__setattr__(self, name, arr)

    def __len__(self) -> int:
        return self.time.size

    CSV_COLUMNS = (
        "t,rx,ry,rz,rdx,rdy,rdz,vx,vy,vz,qw,qx,qy,qz,qdw,qdx,qdy,qdz,"
        "wx,wy,wz,T,taux,tauy,tauz,"
        "norm_qe_vec,norm_s_att,norm_r_e,norm_s_pos,Delta1,Delta2"
    )

    def rows(self) -> Array:
        """Samples as a (N, 31) matrix in CSV column order."""
        return np.column_stack([
            self.time,
            self.position,
            self.position_ref,
            self.velocity,
            self.attitude,
            self.attitude_ref,
            self.omega,
            self.thrust,
            self.torque,
            self.norm_qe_vec,
            self.norm_s_att,
            self.norm_r_e,
            self.norm_s_pos,
            self.delta1,
            self.delta2,
        ])

    def write_csv(self, path):
        """Write the trace; float formatting is shortest round-trip, so the
        output is bit-identical across runs of the same configuration."""
        with open(path, "w") as f:
            f.write(self.CSV_COLUMNS + "\n")
            for row in self.rows():
                f.write(",".join(repr(float(x)) for x in row) + "\n")


@dataclass(frozen=True)
class DecayFit:
    """Least-squares exponential fit v(t) ~ amplitude * exp(-rate (t - t0)).

    overshoot is the factor by which the fitted curve must be inflated to
    dominate every sample in the window (1.0 for an exact exponential);
    residual is the RMS error of the fit in log space.
    """

    rate: float
    overshoot: float
    fit_window: tuple[float, float]
    residual: float
    amplitude: float


def fit_exponential(t, v, window: tuple[float, float] | None = None) -> DecayFit:
    """Fit log v against t on the window (defaults to the full series).

    Values are clipped at 1e-15 before the log.  Raises ValueError when the
    window holds fewer than 8 samples.
    """
    t = np.asarray(t, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if window is None:
        mask = np.ones(t.size, dtype=bool)
    else:
        mask = (t >= window[0]) & (t <= window[1])
    if int(mask.sum()) < 8:
        raise ValueError("fewer than 8 samples in fit window")
    tw = t[mask]
    logv = np.log(np.clip(v[mask], LOG_FLOOR, None))
    t0 = tw[0]
    coeffs = np.polyfit(tw - t0, logv, 1)
    rate = -float(coeffs[0])
    log_fit = coeffs[1] + coeffs[0] * (tw - t0)
    residual = float(np.sqrt(np.mean((logv - log_fit) ** 2)))
    overshoot = float(np.exp(np.max(logv - log_fit)))
    return DecayFit(
        rate=rate,
        overshoot=overshoot,
        fit_window=(float(tw[0]), float(tw[-1])),
        residual=residual,
        amplitude=float(np.exp(coeffs[1])),
    )


def separable_ode_solution(x0: float, sigma: float, t) -> Array | float:
    """Closed-form solution of x_dot = -sigma x sqrt(1 - x), x(0) = x0 in [0, 1).

    x(t) = 4 c e^(-sigma t) / (1 + c e^(-sigma t))^2,
    c = (1 - sqrt(1 - x0)) / (1 + sqrt(1 - x0)).
    """
    if not 0.0 <= x0 < 1.0:
        raise ValueError("x0 must lie in [0, 1)")
    if not sigma > 0.0:
        raise ValueError("sigma must be positive")
    y0 = math.sqrt(1.0 - x0)
    c = (1.0 - y0) / (1.0 + y0)
    e = c * np.exp(-sigma * np.asarray(t, dtype=np.float64))
    return 4.0 * e / (1.0 + e) ** 2


def separable_ode_loose_bound(x0: float, sigma: float, t) -> Array | float:
    """Loose envelope 4 c e^(-sigma t) dominating separable_ode_solution."""
    if not 0.0 <= x0 < 1.0:
        raise ValueError("x0 must lie in [0, 1)")
    y0 = math.sqrt(1.0 - x0)
    c = (1.0 - y0) / (1.0 + y0)
    return 4.0 * c * np.exp(-sigma * np.asarray(t, dtype=np.float64))


def driven_decay_solution(v0: float, lam: float, c: float, p: float, t) -> Array | float:
    """Solution of v_dot = -lam v + c e^(-p t), v(0) = v0 (lam != p):

    v(t) = v0 e^(-lam t) + c/(lam - p) (e^(-p t) - e^(-lam t)).

    The tail decays at rate min(lam, p).
    """
    if lam <= 0.0 or p <= 0.0:
        raise ValueError("lam and p must be positive")
    if lam == p:
        raise ValueError("lam == p resonant case is not covered by this form")
    t = np.asarray(t, dtype=np.float64)
    return v0 * np.exp(-lam * t) + c / (lam - p) * (np.exp(-p * t) - np.exp(-lam * t))


@dataclass(frozen=True)
class OvershootEnvelope:
    """Envelopes for v_dot <= (-lam + C e^(-p t)) v.

    tight(t) = v0 exp(-lam t + C (1 - e^(-p t))/p) is exact for the equality
    ODE; loose(t) = R v0 e^(-lam t) with overshoot R = e^(C/p) dominates it.
    """

    v0: float
    lam: float
    c: float
    p: float

    @property
    def overshoot(self) -> float:
        return math.exp(self.c / self.p)

    def tight(self, t) -> Array | float:
        t = np.asarray(t, dtype=np.float64)
        return self.v0 * np.exp(-self.lam * t + self.c * (1.0 - np.exp(-self.p * t)) / self.p)

    def loose(self, t) -> Array | float:
        t = np.asarray(t, dtype=np.float64)
        return self.overshoot * self.v0 * np.exp(-self.lam * t)


def overshoot_envelope(v0: float, lam: float, c: float, p: float) -> OvershootEnvelope:
    """Tight and loose exponential envelopes for a rate-perturbed decay.

    c = 0 degenerates to the unperturbed envelope with overshoot 1.
    """
    if lam <= 0.0 or c < 0.0 or p <= 0.0:
        raise ValueError("lam and p must be positive, c nonnegative")
    return OvershootEnvelope(v0=v0, lam=lam, c=c, p=p)


@dataclass(frozen=True)
class BoundCertificate:
    """Outcome of checking v(t) <= bound(t) * (1 + slack) samplewise."""

    passed: bool
    worst_ratio: float          # max over samples of v / bound
    worst_time: float           # where the worst ratio occurs
    first_violation_time: float | None
    slack: float

    def __str__(self):
        status = "PASS" if self.passed else "FAIL"
        msg = (
            f"{status}: worst v/bound = {self.worst_ratio:.6e} "
            f"at t = {self.worst_time:.4f} s (slack {self.slack:g})"
        )
        if self.first_violation_time is not None:
            msg += f"; first violation at t = {self.first_violation_time:.4f} s"
        return msg


def certify_bound(t, v, envelope: Callable, slack: float) -> BoundCertificate:
    """Check v(t) <= envelope(t) * (1 + slack) at every sample.

    Monotone in slack by construction: a pass at slack eps is a pass at any
    larger slack.  Ratios use a 1e-15 floor on the envelope so that an
    identically-zero envelope only admits identically-zero traces.
    """
    t = np.asarray(t, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    bound = np.asarray(envelope(t), dtype=np.float64)
    if bound.shape != t.shape:
        bound = np.broadcast_to(bound, t.shape)
    ratio = v / np.maximum(bound, LOG_FLOOR)
    worst = int(np.argmax(ratio))
    violations = ratio > 1.0 + slack
    first = float(t[np.argmax(violations)]) if bool(violations.any()) else None
    return BoundCertificate(
        passed=not bool(violations.any()),
        worst_ratio=float(ratio[worst]),
        worst_time=float(t[worst]),
        first_violation_time=first,
        slack=float(slack),
    )


def forward_dini(t, v) -> tuple[Array, Array]:
    """Forward-difference estimate of the upper right derivative of v.

    Returns (t[:-1], (v[k+1] - v[k]) / (t[k+1] - t[k])); one-sided to match
    the D+ definition.
    """
    t = np.asarray(t, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    return t[:-1], np.diff(v) / np.diff(t)


def integrate_scalar_ode(f: Callable[[float, float], float], x0: float, t) -> Array:
    """Fixed-step RK4 on a scalar ODE sampled at the (uniform) grid t.

    Brute-force numeric reference for the closed forms above.
    """
    t = np.asarray(t, dtype=np.float64)
    out = np.empty_like(t)
    out[0] = x0
    x = x0
    for k in range(t.size - 1):
        h = t[k + 1] - t[k]
        tk = t[k]
        k1 = f(tk, x)
        k2 = f(tk + 0.5 * h, x + 0.5 * h * k1)
        k3 = f(tk + 0.5 * h, x + 0.5 * h * k2)
        k4 = f(tk + h, x + h * k3)
        x = x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        out[k + 1] = x
    return out
