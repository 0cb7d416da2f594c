"""Fixed-step RK4 integration of the continuous-time optimizer models.

Everything integrates on a uniform grid: uniform grids keep the
finite-difference charge derivatives and channel alignment trivial, and
none of the systems is stiff at the parameters we test.
"""

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import DomainError, IntegrationError
from .geometry import BregmanSchedule, Metric

_RADIUS_FLOOR = 1e-8


@dataclass
class Trajectory:
    """Uniformly sampled (t, q, qdot) series with named observable channels."""

    times: np.ndarray
    q: np.ndarray
    q_dot: np.ndarray
    channels: dict = field(default_factory=dict)

    @property
    def dt(self) -> float:
        return float(self.times[1] - self.times[0])

    def channel(self, name: str) -> np.ndarray:
        return self.channels[name]


@dataclass
class SecondOrderSystem:
    """Deterministic second-order dynamics qddot = rhs(t, q, qdot).

    post_step, when set, renormalizes the state after every integrator step
    (used to hold unit-norm constraints).
    """

    name: str
    rhs: Callable[[float, np.ndarray, np.ndarray], np.ndarray]
    parameters: dict = field(default_factory=dict)
    post_step: Optional[Callable] = None


def _grid(t0: float, t1: float, dt: float) -> np.ndarray:
    if dt <= 0:
        raise ValueError("dt must be positive")
    if not t0 < t1:
        raise ValueError("need t0 < t1")
    steps = int(round((t1 - t0) / dt))
    if steps < 1 or abs(t0 + steps * dt - t1) > 1e-9 * max(1.0, abs(t1)):
        raise ValueError(f"step {dt:g} does not tile the interval [{t0:g}, {t1:g}]")
    return t0 + dt * np.arange(steps + 1)


def rk4_solve(f, y0, t0: float, t1: float, dt: float, post_step=None):
    """Classical 4th-order Runge-Kutta on a flat state vector.

    Returns (times, states) with states[i] the solution at times[i].
    Domain violations raised by f abort with the offending time attached.
    """
    times = _grid(t0, t1, dt)
    y = np.asarray(y0, dtype=float).copy()
    out = np.empty((times.size, y.size))
    out[0] = y
    for i in range(times.size - 1):
        t = times[i]
        try:
            k1 = f(t, y)
            k2 = f(t + 0.5 * dt, y + 0.5 * dt * k1)
            k3 = f(t + 0.5 * dt, y + 0.5 * dt * k2)
            k4 = f(t + dt, y + dt * k3)
        except DomainError as exc:
            raise IntegrationError(f"rhs left its domain: {exc}", time=t) from exc
        y = y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if post_step is not None:
            y = post_step(y)
        out[i + 1] = y
    return times, out


def integrate_rk4(system: SecondOrderSystem, q0, qdot0, t0: float, t1: float,
                  dt: float) -> Trajectory:
    """Integrate a second-order system on the first-order reduction (q, qdot)."""
    q0 = np.asarray(q0, dtype=float)
    qdot0 = np.asarray(qdot0, dtype=float)
    if q0.shape != qdot0.shape:
        raise ValueError("q0 and qdot0 must share a shape")
    d = q0.size

    def f(t, y):
        qdd = system.rhs(t, y[:d], y[d:])
        return np.concatenate((y[d:], qdd))

    post = None
    if system.post_step is not None:
        def post(y):
            q, qd = system.post_step(y[:d], y[d:])
            return np.concatenate((q, qd))

    times, ys = rk4_solve(f, np.concatenate((q0, qdot0)), t0, t1, dt, post_step=post)
    return Trajectory(times=times, q=ys[:, :d], q_dot=ys[:, d:])


def eom_modified(eta: float, beta: float, k: float, loss) -> SecondOrderSystem:
    """Second-order model of heavy-ball descent at finite learning rate:

        (eta (1+beta) / 2) qddot + (1-beta) qdot + grad f(q) + k q = 0.

    The learning rate plays the role of a small mass; the model collapses
    to rescaled gradient flow (1-beta) qdot = -grad f as eta -> 0.
    """
    if eta <= 0:
        raise ValueError("learning rate must be positive")
    if not 0.0 <= beta < 1.0:
        raise ValueError("momentum must lie in [0, 1)")
    if k < 0:
        raise ValueError("weight decay must be non-negative")
    mass = eta * (1.0 + beta) / 2.0
    friction = 1.0 - beta

    def rhs(t, q, q_dot):
        return -(friction * q_dot + loss.grad(q) + k * q) / mass

    return SecondOrderSystem(
        name="modified-heavy-ball",
        rhs=rhs,
        parameters={"eta": eta, "beta": beta, "k": k, "m": mass, "mu": friction},
    )


def eom_bregman_euclidean(schedule: BregmanSchedule, loss) -> SecondOrderSystem:
    """Euclidean Euler-Lagrange system of the schedule:

        qddot + (gamma_dot - alpha_dot) qdot + e^(2 alpha + beta) grad f(q) = 0.
    """

    def rhs(t, q, q_dot):
        damping = schedule.gamma_dot(t) - schedule.alpha_dot(t)
        force = math.exp(2.0 * schedule.alpha(t) + schedule.beta(t))
        return -damping * q_dot - force * loss.grad(q)

    return SecondOrderSystem(name=f"bregman-euclidean[{schedule.name}]", rhs=rhs,
                             parameters={"schedule": schedule.name})


def eom_bregman(metric: Metric, schedule: BregmanSchedule, loss) -> SecondOrderSystem:
    """Euler-Lagrange system of the full Lagrangian for any metric.

    With u = q + e^-alpha qdot and H the metric Hessian:

        qddot = e^alpha H(u)^-1 [ (e^alpha - gamma_dot) Delta_h
                                  - e^(alpha+beta) grad f(q) ]
                - (e^alpha - alpha_dot) qdot

    which reduces to the Euclidean form above when H = I.
    """

    def rhs(t, q, q_dot):
        a = schedule.alpha(t)
        ea = math.exp(a)
        u = q + math.exp(-a) * q_dot
        delta = metric.grad(u) - metric.grad(q)
        drive = (ea - schedule.gamma_dot(t)) * delta \
            - math.exp(a + schedule.beta(t)) * loss.grad(q)
        return ea * metric.hessian_solve(u, drive) - (ea - schedule.alpha_dot(t)) * q_dot

    return SecondOrderSystem(name=f"bregman[{metric.name},{schedule.name}]", rhs=rhs,
                             parameters={"metric": metric.name, "schedule": schedule.name})


def eom_radial_angular(m: float, mu: float, k: float, loss) -> SecondOrderSystem:
    """Coupled radius/direction dynamics of a scale-invariant objective:

        m rddot + mu rdot = (m |uhatdot|^2 - k) r
        m uhatddot + mu uhatdot = -ghat / r^2

    where ghat is the loss gradient at the unit vector.  The state stacks
    (r, uhat); the unit norm is enforced by projection after each step,
    the numerical realization of the constraint multiplier.
    """
    if not getattr(loss, "scale_invariant", False):
        raise ValueError("radial/angular coordinates require a scale-invariant loss")

    def rhs(t, state, state_dot):
        r = state[0]
        if r < _RADIUS_FLOOR:
            raise IntegrationError(f"radius collapsed to {r:.3e}", time=t)
        uhat = state[1:]
        rdot = state_dot[0]
        uhat_dot = state_dot[1:]
        ghat = loss.grad(uhat)
        rddot = ((m * float(uhat_dot @ uhat_dot) - k) * r - mu * rdot) / m
        uhat_ddot = (-ghat / r ** 2 - mu * uhat_dot) / m
        return np.concatenate(([rddot], uhat_ddot))

    def post_step(state, state_dot):
        uhat = state[1:]
        uhat_dot = state_dot[1:]
        uhat = uhat / np.linalg.norm(uhat)
        uhat_dot = uhat_dot - float(uhat_dot @ uhat) * uhat
        return (np.concatenate((state[:1], uhat)),
                np.concatenate((state_dot[:1], uhat_dot)))

    return SecondOrderSystem(name="radial-angular", rhs=rhs, post_step=post_step,
                             parameters={"m": m, "mu": mu, "k": k})


def radial_angular_state(r: float, r_dot: float, uhat, uhat_dot):
    """Stack (r, uhat) into an integration state, validating the constraint."""
    uhat = np.asarray(uhat, dtype=float)
    uhat_dot = np.asarray(uhat_dot, dtype=float)
    if abs(np.linalg.norm(uhat) - 1.0) > 1e-10:
        raise ValueError("uhat must be a unit vector")
    if abs(float(uhat @ uhat_dot)) > 1e-10:
        raise ValueError("uhat_dot must be tangent to the sphere")
    if r <= 0:
        raise ValueError("radius must be positive")
    return np.concatenate(([r], uhat)), np.concatenate(([r_dot], uhat_dot))


def to_cartesian(trajectory: Trajectory) -> Trajectory:
    """Map a radial/angular trajectory back to q = r uhat coordinates."""
    r = trajectory.q[:, :1]
    uhat = trajectory.q[:, 1:]
    rdot = trajectory.q_dot[:, :1]
    uhat_dot = trajectory.q_dot[:, 1:]
    return Trajectory(times=trajectory.times.copy(), q=r * uhat,
                      q_dot=rdot * uhat + r * uhat_dot,
                      channels=dict(trajectory.channels))


def eom_noether_radial(m: float, mu: float, k: float, history) -> SecondOrderSystem:
    """Scalar dynamics of the squared norm u = r^2 driven by a recorded
    gradient-norm channel:

        m u'' + mu u' = -2 k u + (2 m / (mu^2 u)) gsq(t)

    gsq(t) interpolates the recorded |ghat|^2 samples piecewise-linearly,
    matching the trapezoid convention of the closed forms.
    """
    times = np.asarray(history.times, dtype=float)
    gsq = np.asarray(history.gsq, dtype=float)

    def rhs(t, u, u_dot):
        if u[0] <= 0.0:
            raise IntegrationError(f"squared norm hit {u[0]:.3e}", time=t)
        drive = float(np.interp(t, times, gsq))
        return (-mu * u_dot - 2.0 * k * u + (2.0 * m / (mu ** 2 * u)) * drive) / m

    return SecondOrderSystem(name="noether-radial", rhs=rhs,
                             parameters={"m": m, "mu": mu, "k": k})


@dataclass
class RmspropModel:
    """Continuous model of the adaptive rule: a second-order parameter
    equation coupled to a first-order gradient-norm memory,

        (eta/2) qddot + qdot = -g / sqrt(G)
        eta dG/dt = -(1 - rho) G + (1 - rho) |g|^2.
    """

    eta: float
    rho: float
    loss: object

    def __post_init__(self):
        if self.eta <= 0:
            raise ValueError("learning rate must be positive")
        if not 0.0 < self.rho < 1.0:
            raise ValueError("rho must lie in (0, 1)")


def eom_rmsprop(eta: float, rho: float, loss) -> RmspropModel:
    return RmspropModel(eta=eta, rho=rho, loss=loss)


def integrate_rmsprop(model: RmspropModel, q0, qdot0, g0: float, t0: float,
                      t1: float, dt: float) -> Trajectory:
    """Integrate the coupled (q, G) model; the memory G rides along as a
    trajectory channel."""
    if g0 <= 0:
        raise ValueError("initial accumulator must be positive")
    q0 = np.asarray(q0, dtype=float)
    qdot0 = np.asarray(qdot0, dtype=float)
    d = q0.size
    eta, rho, loss = model.eta, model.rho, model.loss

    def f(t, y):
        q, q_dot, G = y[:d], y[d:2 * d], y[-1]
        if G <= 0.0:
            raise IntegrationError(f"accumulator hit {G:.3e}", time=t)
        g = loss.grad(q)
        qdd = (-g / math.sqrt(G) - q_dot) * (2.0 / eta)
        gdot = (1.0 - rho) * (float(g @ g) - G) / eta
        return np.concatenate((q_dot, qdd, [gdot]))

    y0 = np.concatenate((q0, qdot0, [g0]))
    times, ys = rk4_solve(f, y0, t0, t1, dt)
    return Trajectory(times=times, q=ys[:, :d], q_dot=ys[:, d:2 * d],
                      channels={"G": ys[:, -1]})
