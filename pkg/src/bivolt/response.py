"""Time-domain engines: closed-form impulse response, exact nascent-delta
two-phase solution, Volterra cascade simulation, and direct integration.

Simulation uses classical fixed-step RK4 on a uniform grid with inputs
interpolated linearly at half-steps. Steps whose three input samples all
vanish apply the precomputed degree-4 Taylor map of the free dynamics, which
is exactly the RK4 update for the autonomous linear system.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .linalg import expm, phi1_apply
from .system import BilinearSystem, effective_matrices, require_explicit

__all__ = [
    "GridResolutionError",
    "TimeGrid",
    "SampledSignal",
    "OutputSeries",
    "ResponseSeries",
    "delta_eps_signal",
    "step_signal",
    "sine_signal",
    "zero_signal",
    "signal_from_samples",
    "impulse_response",
    "impulse_response_subsystem",
    "nascent_response",
    "volterra_cascade",
    "ode_direct",
]


class GridResolutionError(ValueError):
    """A time grid is too coarse or misaligned for the requested signal."""


@dataclass(frozen=True)
class TimeGrid:
    """Uniform grid on [t0, t1] with step dt; node count floor((t1-t0)/dt)+1."""

    t0: float
    t1: float
    dt: float

    def __post_init__(self):
        if not (np.isfinite(self.t0) and np.isfinite(self.t1) and np.isfinite(self.dt)):
            raise ValueError("grid parameters must be finite")
        if self.dt <= 0:
            raise ValueError("grid step dt must be > 0")
        if self.t1 <= self.t0:
            raise ValueError("grid needs t1 > t0")

    @property
    def nodes(self) -> int:
        return int(math.floor((self.t1 - self.t0) / self.dt + 1e-9)) + 1

    def times(self) -> np.ndarray:
        return self.t0 + self.dt * np.arange(self.nodes)


@dataclass(frozen=True)
class SampledSignal:
    """Input samples on a grid, linearly interpolated, zero outside the grid."""

    grid: TimeGrid
    values: np.ndarray  # (nodes, m)

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.ndim == 1:
            vals = vals[:, None]
        if vals.shape[0] != self.grid.nodes:
            raise ValueError(
                f"signal has {vals.shape[0]} sample rows for a grid of "
                f"{self.grid.nodes} nodes")
        if vals.size and not np.all(np.isfinite(vals)):
            raise ValueError("signal has non-finite samples")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @property
    def m(self) -> int:
        return self.values.shape[1]

    def at_many(self, ts) -> np.ndarray:
        """Interpolated samples at arbitrary times, shape (len(ts), m)."""
        ts = np.asarray(ts, dtype=float)
        grid_times = self.grid.times()
        out = np.empty((ts.size, self.m))
        for j in range(self.m):
            out[:, j] = np.interp(ts, grid_times, self.values[:, j],
                                  left=0.0, right=0.0)
        return out

    def at(self, t: float) -> np.ndarray:
        return self.at_many([t])[0]

    def support(self) -> tuple[float, float]:
        """Span on which the interpolant can be nonzero (empty -> (0, 0))."""
        nonzero = np.flatnonzero(np.any(self.values != 0.0, axis=1))
        if nonzero.size == 0:
            return (0.0, 0.0)
        times = self.grid.times()
        lo = times[max(nonzero[0] - 1, 0)]
        hi = times[min(nonzero[-1] + 1, self.grid.nodes - 1)]
        return (float(lo), float(hi))


def _node_index(grid: TimeGrid, t: float, what: str) -> int:
    q = round((t - grid.t0) / grid.dt)
    if abs(grid.t0 + q * grid.dt - t) > 1e-6 * grid.dt or not 0 <= q < grid.nodes:
        raise GridResolutionError(
            f"{what} = {t} does not land on a grid node (t0={grid.t0}, dt={grid.dt})")
    return int(q)


def delta_eps_signal(grid: TimeGrid, eps: float, mu=1.0,
                     start: float = 0.0) -> SampledSignal:
    """Rectangle pulse of height 1/eps on [start, start+eps], weighted by mu.

    Jump nodes interior to the grid carry the midpoint value 1/(2 eps) so the
    piecewise-linear interpolant integrates to exactly one; the grid must
    resolve the pulse (dt <= eps/10) and hit both pulse edges on nodes.
    """
    if eps <= 0:
        raise ValueError("eps must be > 0")
    if grid.dt > eps / 10 + 1e-12 * eps:
        raise GridResolutionError(
            f"grid too coarse for delta pulse: need dt <= eps/10, "
            f"got dt = {grid.dt}, eps = {eps}")
    q_lo = _node_index(grid, start, "pulse start")
    q_hi = _node_index(grid, start + eps, "pulse end")
    weights = np.atleast_1d(np.asarray(mu, dtype=float))
    profile = np.zeros(grid.nodes)
    profile[q_lo:q_hi + 1] = 1.0 / eps
    profile[q_hi] = 0.5 / eps
    if q_lo > 0:
        profile[q_lo] = 0.5 / eps
    return SampledSignal(grid, np.outer(profile, weights))


def step_signal(grid: TimeGrid, mu=1.0, amplitude: float = 1.0) -> SampledSignal:
    """Unit step at t = 0 scaled by amplitude and channel weights mu."""
    weights = np.atleast_1d(np.asarray(mu, dtype=float))
    times = grid.times()
    profile = np.where(times >= 0.0, amplitude, 0.0)
    inside = np.flatnonzero(np.isclose(times, 0.0, atol=1e-12 * max(1.0, grid.dt)))
    for i in inside:
        if i > 0:
            profile[i] = 0.5 * amplitude
    return SampledSignal(grid, np.outer(profile, weights))


def sine_signal(grid: TimeGrid, mu=1.0, amplitude: float = 1.0,
                omega: float = 1.0) -> SampledSignal:
    """amplitude * sin(omega t) for t >= 0, scaled by channel weights mu."""
    weights = np.atleast_1d(np.asarray(mu, dtype=float))
    times = grid.times()
    profile = amplitude * np.sin(omega * times) * (times >= 0.0)
    return SampledSignal(grid, np.outer(profile, weights))


def zero_signal(grid: TimeGrid, m: int = 1) -> SampledSignal:
    return SampledSignal(grid, np.zeros((grid.nodes, m)))


def signal_from_samples(grid: TimeGrid, t, u) -> SampledSignal:
    """Resample explicit (t, u) pairs onto the grid (zero outside their span)."""
    t = np.asarray(t, dtype=float)
    u = np.asarray(u, dtype=float)
    if u.ndim == 1:
        u = u[:, None]
    if t.ndim != 1 or u.shape[0] != t.size:
        raise ValueError("samples need matching t (len L) and u (L, m) arrays")
    if np.any(np.diff(t) <= 0):
        raise ValueError("sample times must be strictly increasing")
    times = grid.times()
    vals = np.empty((times.size, u.shape[1]))
    for j in range(u.shape[1]):
        vals[:, j] = np.interp(times, t, u[:, j], left=0.0, right=0.0)
    return SampledSignal(grid, vals)


@dataclass(frozen=True)
class OutputSeries:
    """Output trajectory y(t) on a grid, shape (nodes, p)."""

    grid: TimeGrid
    values: np.ndarray


@dataclass(frozen=True)
class ResponseSeries:
    """Per-subsystem cascade outputs y_k(t), k = 1..K, shape (K, nodes, p)."""

    grid: TimeGrid
    per_order: np.ndarray

    @property
    def total(self) -> np.ndarray:
        return self.per_order.sum(axis=0)

    @property
    def partial_sums(self) -> np.ndarray:
        return np.cumsum(self.per_order, axis=0)

    @property
    def order_sup_norms(self) -> np.ndarray:
        """sup_t max_i |y_k,i(t)| per order, for judging truncation."""
        return np.abs(self.per_order).max(axis=(1, 2))


def impulse_response(sys: BilinearSystem, mu, t: float) -> np.ndarray:
    """Impulse response C e^{At} (phi1(Nhat) bhat + e^{Nhat} x0) for t > 0."""
    require_explicit(sys)
    if t <= 0:
        raise ValueError("impulse response defined for t > 0 only")
    eff = effective_matrices(sys, mu)
    core = phi1_apply(eff.Nhat, eff.bhat) + expm(eff.Nhat) @ sys.x0
    return sys.C @ (expm(sys.A, t) @ core)


def impulse_response_subsystem(sys: BilinearSystem, mu, k: int,
                               t: float) -> np.ndarray:
    """Order-k impulse response C e^{At} Nhat^{k-1} (bhat/k! + x0/(k-1)!)."""
    require_explicit(sys)
    if k < 1:
        raise ValueError("subsystem order k must be >= 1")
    if t <= 0:
        raise ValueError("impulse response defined for t > 0 only")
    eff = effective_matrices(sys, mu)
    core = eff.bhat / math.factorial(k) + sys.x0 / math.factorial(k - 1)
    for _ in range(k - 1):
        core = eff.Nhat @ core
    return sys.C @ (expm(sys.A, t) @ core)


def nascent_response(sys: BilinearSystem, mu, eps: float, t: float) -> np.ndarray:
    """Exact output under the rectangle pulse mu/eps on [0, eps].

    Two closed-form phases: stiffened dynamics Ahat = A + Nhat/eps while the
    pulse acts, then free flow from the transition state x(eps). The phi1 form
    keeps the pulse phase valid for singular Ahat.
    """
    require_explicit(sys)
    if eps <= 0:
        raise ValueError("eps must be > 0")
    if t < 0:
        raise ValueError("nascent response defined for t >= 0")
    eff = effective_matrices(sys, mu)
    Ahat = sys.A + eff.Nhat / eps
    if t <= eps:
        x = (t / eps) * phi1_apply(Ahat * t, eff.bhat) + expm(Ahat, t) @ sys.x0
    else:
        x_eps = phi1_apply(Ahat * eps, eff.bhat) + expm(Ahat, eps) @ sys.x0
        x = expm(sys.A, t - eps) @ x_eps
    return sys.C @ x


def _taylor4_map(A: np.ndarray, h: float) -> np.ndarray:
    # RK4 applied to x' = Ax collapses to this degree-4 Taylor polynomial.
    n = A.shape[0]
    P = np.eye(n)
    term = np.eye(n)
    for j in range(1, 5):
        term = term @ (A * (h / j))
        P = P + term
    return P


def _stage_samples(u: SampledSignal, grid: TimeGrid):
    if grid.nodes < 2:
        raise ValueError("grid has no integration steps (needs at least 2 nodes)")
    times = grid.times()
    U = u.at_many(times)
    Um = u.at_many(times[:-1] + 0.5 * grid.dt)
    node_zero = ~np.any(U != 0.0, axis=1)
    mid_zero = ~np.any(Um != 0.0, axis=1)
    zero_step = node_zero[:-1] & mid_zero & node_zero[1:]
    return U, Um, zero_step


def _check_signal(sys: BilinearSystem, u: SampledSignal) -> None:
    if u.m != sys.m:
        raise ValueError(f"signal has {u.m} channels; system expects {sys.m}")


def ode_direct(sys: BilinearSystem, u: SampledSignal, grid: TimeGrid) -> OutputSeries:
    """RK4 integration of x' = (A + sum_j N_j u_j(t)) x + B u(t); y = C x."""
    require_explicit(sys)
    _check_signal(sys, u)
    U, Um, zero_step = _stage_samples(u, grid)
    A, N, B = sys.A, sys.N, sys.B
    h = grid.dt
    free_map = _taylor4_map(A, h)
    X = np.empty((grid.nodes, sys.n))
    x = sys.x0.copy()
    X[0] = x

    def rhs(uv, xv):
        return A @ xv + np.tensordot(uv, N, axes=1) @ xv + B @ uv

    for i in range(grid.nodes - 1):
        if zero_step[i]:
            x = free_map @ x
        else:
            ua, um, ub = U[i], Um[i], U[i + 1]
            k1 = rhs(ua, x)
            k2 = rhs(um, x + 0.5 * h * k1)
            k3 = rhs(um, x + 0.5 * h * k2)
            k4 = rhs(ub, x + h * k3)
            x = x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        X[i + 1] = x
    return OutputSeries(grid, X @ sys.C.T)


def volterra_cascade(sys: BilinearSystem, u: SampledSignal, K: int,
                     grid: TimeGrid) -> ResponseSeries:
    """Integrate the first K coupled subsystems of the Volterra cascade.

    x_1' = A x_1 + B u with x_1(0) = x0, and for k >= 2
    x_k' = A x_k + (sum_j N_j u_j) x_{k-1} with x_k(0) = 0.
    """
    require_explicit(sys)
    if int(K) < 1:
        raise ValueError("truncation order K must be >= 1")
    K = int(K)
    _check_signal(sys, u)
    U, Um, zero_step = _stage_samples(u, grid)
    A, N, B = sys.A, sys.N, sys.B
    h = grid.dt
    free_map_T = _taylor4_map(A, h).T
    X = np.zeros((K, sys.n))
    X[0] = sys.x0
    Y = np.empty((grid.nodes, K, sys.p))
    Y[0] = X @ sys.C.T

    def rhs(uv, Xv):
        Nu = np.tensordot(uv, N, axes=1)
        dX = Xv @ A.T
        dX[0] += B @ uv
        dX[1:] += Xv[:-1] @ Nu.T
        return dX

    for i in range(grid.nodes - 1):
        if zero_step[i]:
            X = X @ free_map_T
        else:
            ua, um, ub = U[i], Um[i], U[i + 1]
            k1 = rhs(ua, X)
            k2 = rhs(um, X + 0.5 * h * k1)
            k3 = rhs(um, X + 0.5 * h * k2)
            k4 = rhs(ub, X + h * k3)
            X = X + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        Y[i + 1] = X @ sys.C.T
    return ResponseSeries(grid, np.ascontiguousarray(Y.transpose(1, 0, 2)))
