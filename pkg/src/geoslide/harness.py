"""Experiment runner: configuration, closed-loop simulation, certification.

A run is deterministic given (config, seed).  The closed loop is treated as
a continuous-time vector field: the controller is re-evaluated inside every
RK4 stage, so certified decay rates are measured on a 4th-order-accurate
trajectory rather than a zero-order-hold approximation.  The numeric_diff
feedback buffer is the one deliberately sampled quantity; it advances once
per control step.

Three simulation modes, selected by the configuration:
  - cascade: position loop feeding the attitude loop (position trajectories)
  - attitude: torque loop only (attitude trajectories; thrust is zero)
  - ideal inner loop: attitude forced to its reference, translation only
"""

from __future__ import annotations

import concurrent.futures
import math
import os
from dataclasses import dataclass, replace

import numpy as np
import yaml

from . import analysis, so3, traj
from .attctl import AttitudeGains, AttitudeReference, attitude_error, attitude_torque
from .dynamics import (
    ControlInput,
    Disturbance,
    RigidBodyState,
    VehicleParams,
    _state_derivative_raw,
    pack_state,
    unpack_state,
)
from .errors import ConfigError, DegenerateDirectionError, IntegrationBlowupError
from .posctl import (
    FeedbackMode,
    OuterLoop,
    PositionGains,
    desired_force,
    desired_force_robust,
    extract_thrust_attitude,
    position_error,
)
from .so3 import UnitQuaternion

Array = np.ndarray

TWO_SQRT2 = 2.0 * math.sqrt(2.0)


# ---------------------------------------------------------------------------
# initial-state specifications


@dataclass(frozen=True)
class RandomOffsetInit:
    """Start at the reference plus a uniform box perturbation of position and
    velocity; attitude at identity, zero body rate."""

    position_scale: float = 0.5
    velocity_scale: float = 0.2


@dataclass(frozen=True)
class RandomAttitudeInit:
    """Start at a random attitude error from the reference.

    The error vector norm is drawn uniformly in (0, max_vec_norm].  With
    on_manifold=True the body rate is chosen so the attitude sliding
    variable starts at exactly zero; otherwise a random sliding offset with
    the given scale is added.
    """

    max_vec_norm: float = 0.99
    on_manifold: bool = True
    sliding_scale: float = 0.0


InitialStateSpec = RigidBodyState | RandomOffsetInit | RandomAttitudeInit


# ---------------------------------------------------------------------------
# configuration


@dataclass(frozen=True)
class CheckSpec:
    kind: str
    params: dict

    @property
    def name(self) -> str:
        return self.params.get("name", self.kind)


_CHECK_KEYS = {
    "max_norm": {"field", "bound"},
    "exp_envelope": {"field", "rate", "scale", "slack"},
    "decay_rate": {"field", "min_rate", "window"},
    "relative_drop": {"field", "factor"},
    "sliding_inequality": {"slack"},
    "tail_bound": {"field", "bound", "tail_fraction"},
}

_TRACE_FIELDS = {
    "norm_qe_vec", "norm_s_att", "norm_r_e", "norm_s_pos", "delta1", "delta2",
    "thrust",
}


@dataclass(frozen=True)
class ExperimentConfig:
    vehicle: VehicleParams
    attitude_gains: AttitudeGains
    position_gains: PositionGains
    trajectory: traj.TrajectorySpec
    disturbance: Disturbance
    feedback_mode: FeedbackMode
    dt: float
    horizon: float
    initial_state: InitialStateSpec
    checks: tuple[CheckSpec, ...] = ()
    seed: int = 0
    ideal_inner_loop: bool = False
    controller_drag_gain: float | None = None
    name: str = "experiment"

    def __post_init__(self):
        if not self.dt > 0.0:
            raise ConfigError("dt must be positive")
        if self.horizon < 10.0 * self.dt:
            raise ConfigError("horizon must be at least 10 * dt")
        for spec in self.checks:
            if spec.kind not in _CHECK_KEYS:
                raise ConfigError(f"unknown check kind '{spec.kind}'")
            extra = set(spec.params) - _CHECK_KEYS[spec.kind] - {"name"}
            if extra:
                raise ConfigError(f"unknown keys {sorted(extra)} in check '{spec.kind}'")
            f = spec.params.get("field")
            if f is not None and f not in _TRACE_FIELDS:
                raise ConfigError(f"unknown trace field '{f}' in check '{spec.kind}'")


def _require_keys(d: dict, allowed: set, required: set, where: str):
    extra = set(d) - allowed
    if extra:
        raise ConfigError(f"unknown keys {sorted(extra)} in {where}")
    missing = required - set(d)
    if missing:
        raise ConfigError(f"missing keys {sorted(missing)} in {where}")


def _parse_trajectory(d: dict) -> traj.TrajectorySpec:
    if "kind" not in d:
        raise ConfigError("trajectory needs a 'kind'")
    kind = d["kind"]
    body = {k: v for k, v in d.items() if k != "kind"}
    if kind == "setpoint":
        _require_keys(body, {"position", "duration"}, {"position"}, "trajectory")
        return traj.Setpoint(**body)
    if kind == "circle":
        _require_keys(
            body, {"radius", "omega", "center", "phase", "duration"},
            {"radius", "omega"}, "trajectory",
        )
        return traj.Circle(**body)
    if kind == "lissajous":
        _require_keys(
            body, {"amplitude", "omega", "phase", "center", "duration"},
            {"amplitude", "omega"}, "trajectory",
        )
        return traj.Lissajous(**body)
    if kind == "polynomial":
        _require_keys(
            body,
            {"start", "end", "duration", "start_derivatives", "end_derivatives"},
            {"start", "end", "duration"}, "trajectory",
        )
        for key in ("start_derivatives", "end_derivatives"):
            if key in body:
                body[key] = tuple(tuple(v) for v in body[key])
        return traj.PolynomialSegment(**body)
    if kind == "attitude_spin":
        _require_keys(
            body,
            {"axis", "rate", "angle0", "wobble_amp", "wobble_freq", "base", "duration"},
            {"axis"}, "trajectory",
        )
        if "base" in body:
            body["base"] = UnitQuaternion.from_array(body["base"])
        return traj.AttitudeSpin(**body)
    raise ConfigError(f"unknown trajectory kind '{kind}'")


def _parse_disturbance(d: dict) -> Disturbance:
    if d is None:
        return Disturbance.none()
    if "kind" not in d:
        raise ConfigError("disturbance needs a 'kind'")
    kind = d["kind"]
    if kind == "none":
        _require_keys(d, {"kind"}, set(), "disturbance")
        return Disturbance.none()
    if kind == "constant_force":
        _require_keys(d, {"kind", "force"}, {"force"}, "disturbance")
        return Disturbance.constant_force(d["force"])
    if kind == "translational_drag":
        _require_keys(d, {"kind", "c_d"}, {"c_d"}, "disturbance")
        return Disturbance.translational_drag(d["c_d"])
    if kind == "constant_torque":
        _require_keys(d, {"kind", "torque"}, {"torque"}, "disturbance")
        return Disturbance.constant_torque(d["torque"])
    raise ConfigError(f"unknown disturbance kind '{kind}'")


def _parse_initial_state(d: dict) -> InitialStateSpec:
    if "random_offset" in d:
        _require_keys(d, {"random_offset"}, set(), "initial_state")
        body = d["random_offset"] or {}
        _require_keys(
            body, {"position_scale", "velocity_scale"}, set(), "initial_state.random_offset"
        )
        return RandomOffsetInit(**body)
    if "random_attitude" in d:
        _require_keys(d, {"random_attitude"}, set(), "initial_state")
        body = d["random_attitude"] or {}
        _require_keys(
            body, {"max_vec_norm", "on_manifold", "sliding_scale"}, set(),
            "initial_state.random_attitude",
        )
        return RandomAttitudeInit(**body)
    _require_keys(
        d, {"position", "velocity", "attitude", "angular_velocity"},
        {"position", "velocity", "attitude", "angular_velocity"}, "initial_state",
    )
    return RigidBodyState(
        position=np.asarray(d["position"], dtype=np.float64),
        velocity=np.asarray(d["velocity"], dtype=np.float64),
        attitude=UnitQuaternion.from_array(d["attitude"]),
        angular_velocity=np.asarray(d["angular_velocity"], dtype=np.float64),
    )


_TOP_KEYS = {
    "vehicle", "gains", "trajectory", "disturbance", "feedback_mode", "dt",
    "horizon", "initial_state", "checks", "seed", "ideal_inner_loop",
    "controller_drag_gain", "name",
}


def config_from_dict(d: dict) -> ExperimentConfig:
    """Build a validated configuration; unknown keys anywhere are errors."""
    _require_keys(
        d, _TOP_KEYS,
        {"vehicle", "gains", "trajectory", "dt", "horizon", "initial_state"},
        "config",
    )
    veh = dict(d["vehicle"])
    _require_keys(
        veh, {"mass", "inertia", "gravity", "drag_coeff"}, {"mass", "inertia"}, "vehicle"
    )
    inertia = np.asarray(veh.pop("inertia"), dtype=np.float64)
    if inertia.ndim == 1:
        inertia = np.diag(inertia)
    try:
        vehicle = VehicleParams(inertia=inertia, **veh)
        gains = dict(d["gains"])
        _require_keys(gains, {"attitude", "position"}, {"attitude", "position"}, "gains")
        att = dict(gains["attitude"])
        _require_keys(att, {"lam", "k"}, {"lam", "k"}, "gains.attitude")
        pos = dict(gains["position"])
        _require_keys(pos, {"alpha", "k"}, {"alpha", "k"}, "gains.position")
        attitude_gains = AttitudeGains(lam=att["lam"], k=np.asarray(att["k"]))
        position_gains = PositionGains(alpha=pos["alpha"], k=np.asarray(pos["k"]))
    except ValueError as e:
        raise ConfigError(str(e)) from e
    checks = []
    for c in d.get("checks", []) or []:
        c = dict(c)
        if "kind" not in c:
            raise ConfigError("each check needs a 'kind'")
        kind = c.pop("kind")
        checks.append(CheckSpec(kind=kind, params=c))
    mode_name = d.get("feedback_mode", "oracle")
    try:
        mode = FeedbackMode(mode_name)
    except ValueError:
        raise ConfigError(f"unknown feedback_mode '{mode_name}'")
    return ExperimentConfig(
        vehicle=vehicle,
        attitude_gains=attitude_gains,
        position_gains=position_gains,
        trajectory=_parse_trajectory(dict(d["trajectory"])),
        disturbance=_parse_disturbance(d.get("disturbance")),
        feedback_mode=mode,
        dt=float(d["dt"]),
        horizon=float(d["horizon"]),
        initial_state=_parse_initial_state(dict(d["initial_state"])),
        checks=tuple(checks),
        seed=int(d.get("seed", 0)),
        ideal_inner_loop=bool(d.get("ideal_inner_loop", False)),
        controller_drag_gain=d.get("controller_drag_gain"),
        name=str(d.get("name", "experiment")),
    )


def config_from_yaml(path) -> ExperimentConfig:
    with open(path) as f:
        data = yaml.safe_load(f)
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: expected a mapping at top level")
    cfg = config_from_dict(data)
    if cfg.name == "experiment":
        cfg = replace(cfg, name=os.path.splitext(os.path.basename(str(path)))[0])
    return cfg


# ---------------------------------------------------------------------------
# initial-state resolution


def resolve_initial_state(config: ExperimentConfig, rng: np.random.Generator) -> RigidBodyState:
    spec = config.initial_state
    if isinstance(spec, RigidBodyState):
        return spec
    if isinstance(spec, RandomOffsetInit):
        ref0 = traj.sample_flat(config.trajectory, 0.0)
        dp = spec.position_scale * rng.uniform(-1.0, 1.0, 3)
        dv = spec.velocity_scale * rng.uniform(-1.0, 1.0, 3)
        return RigidBodyState(
            position=ref0.r_d + dp,
            velocity=ref0.r_d_dot + dv,
            attitude=UnitQuaternion.identity(),
            angular_velocity=np.zeros(3),
        )
    if isinstance(spec, RandomAttitudeInit):
        ref0 = traj.sample_attitude(config.trajectory, 0.0)
        direction = rng.normal(size=3)
        direction /= np.linalg.norm(direction)
        mag = spec.max_vec_norm * rng.uniform(0.0, 1.0)
        sign = 1.0 if rng.random() < 0.5 else -1.0
        q_e = UnitQuaternion(sign * math.sqrt(max(0.0, 1.0 - mag * mag)), mag * direction)
        q0 = so3.quat_mul(ref0.q_d, q_e)
        rot_e = so3.to_rotation(q_e)
        omega = rot_e.T @ ref0.omega_d - (
            2.0 * config.attitude_gains.lam * so3.sgn(q_e.scalar)
        ) * q_e.vector
        if not spec.on_manifold and spec.sliding_scale > 0.0:
            omega = omega + spec.sliding_scale * rng.normal(size=3)
        return RigidBodyState(
            position=np.zeros(3),
            velocity=np.zeros(3),
            attitude=q0,
            angular_velocity=omega,
        )
    raise ConfigError(f"unsupported initial state spec {type(spec).__name__}")


# ---------------------------------------------------------------------------
# simulation


def _renormalize_flat(y: Array):
    q = y[6:10]
    q /= np.linalg.norm(q)


def _finite_or_raise(y: Array, t: float):
    if not np.all(np.isfinite(y)):
        raise IntegrationBlowupError(t)


class _Recorder:
    def __init__(self, n: int):
        self.time = np.empty(n)
        self.position = np.empty((n, 3))
        self.position_ref = np.empty((n, 3))
        self.velocity = np.empty((n, 3))
        self.attitude = np.empty((n, 4))
        self.attitude_ref = np.empty((n, 4))
        self.omega = np.empty((n, 3))
        self.thrust = np.empty(n)
        self.torque = np.empty((n, 3))
        self.norm_qe_vec = np.empty(n)
        self.norm_s_att = np.empty(n)
        self.norm_r_e = np.empty(n)
        self.norm_s_pos = np.empty(n)
        self.delta1 = np.empty(n)
        self.delta2 = np.empty(n)

    def trace(self) -> analysis.SimTrace:
        return analysis.SimTrace(**{k: v for k, v in vars(self).items()})


def _record_sample(
    rec: _Recorder,
    k: int,
    t: float,
    state: RigidBodyState,
    flat_ref,
    att_ref,
    thrust: float,
    tau: Array,
    config: ExperimentConfig,
):
    gains = config.position_gains
    err_att = attitude_error(state, att_ref, config.attitude_gains)
    perr = position_error(state, flat_ref, gains)
    rec.time[k] = t
    rec.position[k] = state.position
    rec.position_ref[k] = flat_ref.r_d
    rec.velocity[k] = state.velocity
    rec.attitude[k, 0] = state.attitude.scalar
    rec.attitude[k, 1:] = state.attitude.vector
    rec.attitude_ref[k, 0] = att_ref.q_d.scalar
    rec.attitude_ref[k, 1:] = att_ref.q_d.vector
    rec.omega[k] = state.angular_velocity
    rec.thrust[k] = thrust
    rec.torque[k] = tau
    nqe = float(np.linalg.norm(err_att.q_e.vector))
    rec.norm_qe_vec[k] = nqe
    rec.norm_s_att[k] = float(np.linalg.norm(err_att.s))
    rec.norm_r_e[k] = float(np.linalg.norm(perr.r_e))
    rec.norm_s_pos[k] = float(np.linalg.norm(perr.s_pos))
    d1 = TWO_SQRT2 * nqe
    rec.delta1[k] = d1
    rec.delta2[k] = d1 * float(
        np.linalg.norm(
            flat_ref.r_d_ddot - gains.alpha * perr.r_e_dot + config.vehicle.gravity
        )
    )


def _rk4_closed_loop(f, t, y, dt, k1):
    k2 = f(t + 0.5 * dt, y + 0.5 * dt * k1)
    k3 = f(t + 0.5 * dt, y + 0.5 * dt * k2)
    k4 = f(t + dt, y + dt * k3)
    return y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def _simulate_cascade(config: ExperimentConfig, state0: RigidBodyState) -> analysis.SimTrace:
    dt = config.dt
    n_steps = int(round(config.horizon / dt))
    rec = _Recorder(n_steps + 1)
    outer = OuterLoop(
        config.position_gains,
        config.vehicle,
        config.feedback_mode,
        config.disturbance,
        config.controller_drag_gain,
    )
    numeric = config.feedback_mode is FeedbackMode.NUMERIC_DIFF

    def f(t: float, y: Array) -> Array:
        state = unpack_state(y)
        flat_ref = traj.sample_flat(config.trajectory, t)
        out = outer.compute(state, flat_ref)
        tau = attitude_torque(state, out.attitude_ref, config.attitude_gains, config.vehicle)
        return _state_derivative_raw(
            state, out.thrust, tau, config.vehicle, config.disturbance
        )

    y = pack_state(state0)
    for k in range(n_steps + 1):
        t = k * dt
        state = unpack_state(y)
        flat_ref = traj.sample_flat(config.trajectory, t)
        if numeric:
            outer.push_sample(state, flat_ref, dt)
        try:
            out = outer.compute(state, flat_ref)
            tau = attitude_torque(
                state, out.attitude_ref, config.attitude_gains, config.vehicle
            )
        except DegenerateDirectionError as e:
            raise type(e)(f"at t={t:.6f} s: {e}") from e
        _record_sample(rec, k, t, state, flat_ref, out.attitude_ref, out.thrust, tau, config)
        if k == n_steps:
            break
        k1 = _state_derivative_raw(
            state, out.thrust, tau, config.vehicle, config.disturbance
        )
        y = _rk4_closed_loop(f, t, y, dt, k1)
        _renormalize_flat(y)
        _finite_or_raise(y, t + dt)
    return rec.trace()


_ZERO_FLAT = None


def _zero_flat_reference():
    global _ZERO_FLAT
    if _ZERO_FLAT is None:
        z = np.zeros(3)
        _ZERO_FLAT = traj.FlatReference(z, z, z, z, z)
    return _ZERO_FLAT


def _simulate_attitude(config: ExperimentConfig, state0: RigidBodyState) -> analysis.SimTrace:
    dt = config.dt
    n_steps = int(round(config.horizon / dt))
    rec = _Recorder(n_steps + 1)
    flat0 = _zero_flat_reference()

    def f(t: float, y: Array) -> Array:
        state = unpack_state(y)
        att_ref = traj.sample_attitude(config.trajectory, t)
        tau = attitude_torque(state, att_ref, config.attitude_gains, config.vehicle)
        return _state_derivative_raw(
            state, 0.0, tau, config.vehicle, config.disturbance
        )

    y = pack_state(state0)
    for k in range(n_steps + 1):
        t = k * dt
        state = unpack_state(y)
        att_ref = traj.sample_attitude(config.trajectory, t)
        tau = attitude_torque(state, att_ref, config.attitude_gains, config.vehicle)
        _record_sample(rec, k, t, state, flat0, att_ref, 0.0, tau, config)
        if k == n_steps:
            break
        k1 = _state_derivative_raw(
            state, 0.0, tau, config.vehicle, config.disturbance
        )
        y = _rk4_closed_loop(f, t, y, dt, k1)
        _renormalize_flat(y)
        _finite_or_raise(y, t + dt)
    return rec.trace()


def _simulate_ideal_attitude(config: ExperimentConfig, state0: RigidBodyState) -> analysis.SimTrace:
    """Translational dynamics with the attitude forced to its reference:
    the commanded specific force is realized exactly."""
    dt = config.dt
    n_steps = int(round(config.horizon / dt))
    rec = _Recorder(n_steps + 1)
    gains = config.position_gains
    vehicle = config.vehicle
    dist = config.disturbance
    drag_gain = config.controller_drag_gain

    def force(t: float, r: Array, v: Array) -> Array:
        flat_ref = traj.sample_flat(config.trajectory, t)
        state = RigidBodyState(r, v, UnitQuaternion.identity(), np.zeros(3))
        err = position_error(state, flat_ref, gains)
        if drag_gain is not None:
            return desired_force_robust(err, flat_ref, gains, state, drag_gain, vehicle.gravity)
        return desired_force(err, flat_ref, gains, vehicle.gravity)

    def f(t: float, y: Array) -> Array:
        r, v = y[0:3], y[3:6]
        u = force(t, r, v)
        acc = u - vehicle.gravity + dist.force(v) / vehicle.mass
        return np.concatenate([v, acc])

    y = np.concatenate([state0.position, state0.velocity])
    zero3 = np.zeros(3)
    for k in range(n_steps + 1):
        t = k * dt
        r, v = y[0:3], y[3:6]
        flat_ref = traj.sample_flat(config.trajectory, t)
        u = force(t, r, v)
        try:
            thrust, rot_d = extract_thrust_attitude(u, vehicle)
        except DegenerateDirectionError as e:
            raise type(e)(f"at t={t:.6f} s: {e}") from e
        q_d = so3.from_rotation(rot_d)
        state = RigidBodyState(r, v, q_d, zero3)
        att_ref = AttitudeReference.hold(q_d)
        _record_sample(rec, k, t, state, flat_ref, att_ref, thrust, zero3, config)
        if k == n_steps:
            break
        y = _rk4_closed_loop(f, t, y, dt, f(t, y))
        _finite_or_raise(y, t + dt)
    return rec.trace()


# ---------------------------------------------------------------------------
# checks


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str

    def __str__(self):
        return f"[{'PASS' if self.passed else 'FAIL'}] {self.name}: {self.detail}"


def _trace_field(trace: analysis.SimTrace, name: str) -> Array:
    return getattr(trace, name)


def evaluate_check(spec: CheckSpec, trace: analysis.SimTrace, config: ExperimentConfig) -> CheckResult:
    p = spec.params
    t = trace.time
    if spec.kind == "max_norm":
        v = _trace_field(trace, p["field"])
        worst = float(np.max(v))
        return CheckResult(
            spec.name, worst <= p["bound"],
            f"max {p['field']} = {worst:.3e} (bound {p['bound']:.3e})",
        )
    if spec.kind == "exp_envelope":
        v = _trace_field(trace, p["field"])
        scale = float(v[0]) if p["scale"] == "initial" else float(p["scale"])
        rate = float(p["rate"])
        cert = analysis.certify_bound(
            t, v, lambda tt: scale * np.exp(-rate * tt), float(p["slack"])
        )
        return CheckResult(spec.name, cert.passed, str(cert))
    if spec.kind == "decay_rate":
        v = _trace_field(trace, p["field"])
        window = p.get("window")
        if window is None:
            window = (0.5 * float(t[-1]), float(t[-1]))
        fit = analysis.fit_exponential(t, v, tuple(window))
        ok = fit.rate >= float(p["min_rate"])
        return CheckResult(
            spec.name, ok,
            f"fitted rate {fit.rate:.4f} 1/s (needs >= {p['min_rate']:.4f}), "
            f"residual {fit.residual:.2e}",
        )
    if spec.kind == "relative_drop":
        v = _trace_field(trace, p["field"])
        target = float(p["factor"]) * float(v[0])
        reached = float(np.min(v))
        return CheckResult(
            spec.name, reached <= target,
            f"min {p['field']} = {reached:.3e} (needs <= {target:.3e})",
        )
    if spec.kind == "sliding_inequality":
        slack = float(p["slack"])
        rho = config.position_gains.rho
        td, dv = analysis.forward_dini(t, trace.norm_s_pos)
        rhs = (
            -rho * (1.0 - trace.delta1[:-1]) * trace.norm_s_pos[:-1]
            + trace.delta2[:-1]
            + slack
        )
        margin = rhs - dv
        worst = int(np.argmin(margin))
        ok = bool(np.all(margin >= 0.0))
        return CheckResult(
            spec.name, ok,
            f"worst margin {margin[worst]:.3e} at t = {td[worst]:.4f} s (slack {slack:g})",
        )
    if spec.kind == "tail_bound":
        v = _trace_field(trace, p["field"])
        frac = float(p.get("tail_fraction", 0.2))
        mask = t >= (1.0 - frac) * float(t[-1])
        worst = float(np.max(v[mask]))
        return CheckResult(
            spec.name, worst <= float(p["bound"]),
            f"tail sup {p['field']} = {worst:.3e} (bound {p['bound']:.3e})",
        )
    raise ConfigError(f"unknown check kind '{spec.kind}'")


# ---------------------------------------------------------------------------
# experiment/suite drivers


@dataclass(frozen=True)
class ExperimentResult:
    config: ExperimentConfig
    trace: analysis.SimTrace
    checks: tuple[CheckResult, ...]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def report_text(self) -> str:
        lines = [f"experiment: {self.config.name}"]
        lines += [str(c) for c in self.checks]
        status = "PASS" if self.passed else "FAIL"
        lines.append(
            f"result: {status} ({sum(c.passed for c in self.checks)}/{len(self.checks)} checks)"
        )
        return "\n".join(lines)


def run_experiment(config: ExperimentConfig) -> ExperimentResult:
    """Simulate one experiment and evaluate its certification checks."""
    rng = np.random.default_rng(config.seed)
    state0 = resolve_initial_state(config, rng)
    if config.ideal_inner_loop:
        trace = _simulate_ideal_attitude(config, state0)
    elif traj.is_attitude_spec(config.trajectory):
        trace = _simulate_attitude(config, state0)
    else:
        trace = _simulate_cascade(config, state0)
    checks = tuple(evaluate_check(spec, trace, config) for spec in config.checks)
    return ExperimentResult(config=config, trace=trace, checks=checks)


@dataclass(frozen=True)
class SuiteEntry:
    name: str
    passed: bool
    lines: tuple[str, ...]
    error: str | None = None


@dataclass(frozen=True)
class SuiteReport:
    entries: tuple[SuiteEntry, ...]

    @property
    def passed(self) -> bool:
        return all(e.passed for e in self.entries)

    def format(self) -> str:
        out = []
        for e in self.entries:
            if e.error is not None:
                out.append(f"[FAIL] {e.name}: error: {e.error}")
            else:
                out.append(f"[{'PASS' if e.passed else 'FAIL'}] {e.name}")
                out.extend(f"    {line}" for line in e.lines)
        n_pass = sum(e.passed for e in self.entries)
        out.append(f"suite: {n_pass}/{len(self.entries)} experiments passed")
        return "\n".join(out)


def _run_suite_entry(config: ExperimentConfig, out_dir, write_csv: bool) -> SuiteEntry:
    try:
        result = run_experiment(config)
    except Exception as e:  # keep the suite going; record the failure
        return SuiteEntry(name=config.name, passed=False, lines=(), error=str(e))
    if out_dir is not None:
        os.makedirs(out_dir, exist_ok=True)
        if write_csv:
            result.trace.write_csv(os.path.join(out_dir, f"{config.name}.csv"))
        with open(os.path.join(out_dir, f"{config.name}.report.txt"), "w") as f:
            f.write(result.report_text() + "\n")
    return SuiteEntry(
        name=config.name,
        passed=result.passed,
        lines=tuple(str(c) for c in result.checks),
    )


def run_suite(
    configs,
    jobs: int = 1,
    out_dir=None,
    write_csv: bool = False,
) -> SuiteReport:
    """Run independent experiments, optionally in parallel processes.

    Individual failures are recorded and do not stop the suite.
    """
    configs = list(configs)
    if jobs <= 1 or len(configs) <= 1:
        entries = [_run_suite_entry(c, out_dir, write_csv) for c in configs]
    else:
        with concurrent.futures.ProcessPoolExecutor(max_workers=jobs) as pool:
            futures = [
                pool.submit(_run_suite_entry, c, out_dir, write_csv) for c in configs
            ]
            entries = [f.result() for f in futures]
    return SuiteReport(entries=tuple(entries))
