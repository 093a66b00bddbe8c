"""Delay dynamics: method-of-steps integration, chain approximation, monitors.

The integrator is classical fixed-step RK4.  Delayed arguments are read
from a piecewise-cubic Hermite dense output (exact initial history for
arguments at or before zero); the step cap h <= min positive tau / 4
keeps every delayed stage argument at least three completed steps behind
the current one, so the dense history is always available.

Quadrature over trajectory windows is piecewise Simpson with panel edges
aligned to the solution knots, to t = 0 (where the history meets the
solution with a derivative kink) and to sampled-history knots; every
panel then covers a smooth piece, which is what makes the conservation
and entropy monitors reach 1e-9 tolerances.

Monitors sampled along the trajectory: the entropy-like functional

    V = sum_j [x_j (ln x_j - ln xbar_j - 1) + xbar_j]
      + sum_i k_i integral_{-tau_i}^0 { x(t+s)^{y_i} [ln x(t+s)^{y_i}
        - ln xbar^{y_i} - 1] + xbar^{y_i} } ds,

non-increasing along complex-balanced trajectories, and the delayed
conserved values

    C_a(t) = a^T [ x(t) + sum_i k_i (integral_{t-tau_i}^t x(s)^{y_i} ds) y_i ],

constant along every trajectory.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, replace
from typing import Callable

import numpy as np

from .errors import IntegrationError, NumericError, PreconditionError
from .geometry import conserved_basis
from .history import SampledHistory
from .model import ReactionNetwork
from .quadrature import simpson_adaptive

__all__ = [
    "SolverConfig",
    "DenseSolution",
    "TrajectoryWindow",
    "Trajectory",
    "DescentReport",
    "integrate_dde",
    "chain_approximation",
    "compute_monitors",
    "lyapunov_value",
    "check_descent",
    "conservation_drift",
    "min_profile",
]

LOGGER = logging.getLogger(__name__)

NEGATIVE_TOLERANCE = 1e-12
CHAIN_STABILITY_LIMIT = 2.0  # cap on h * N / tau, with margin inside the RK4 real-axis bound


@dataclass(frozen=True)
class SolverConfig:
    """Fixed-step solver settings; cubic dense output is the only mode."""

    step: float
    t_end: float
    monitor_stride: int = 20
    history_interp: str = "cubic"

    def __post_init__(self):
        if not (np.isfinite(self.step) and self.step > 0):
            raise PreconditionError("step must be positive and finite")
        if not (np.isfinite(self.t_end) and self.t_end > 0):
            raise PreconditionError("t_end must be positive and finite")
        if self.monitor_stride < 1:
            raise PreconditionError("monitor_stride must be at least 1")
        if self.history_interp != "cubic":
            raise PreconditionError("only cubic dense output is supported")

    @property
    def n_steps(self) -> int:
        return int(math.ceil(self.t_end / self.step - 1e-9))


class DenseSolution:
    """Piecewise-cubic dense output over [-tau_max, n_steps * h].

    Negative times delegate to the initial history; each step carries a
    cubic Hermite piece matching grid states and derivatives exactly at
    the knots.  The state and derivative arrays are shared with the
    integrator, so the object is usable while the solve is still filling
    them, for times up to the last completed step.
    """

    __slots__ = ("history", "h", "states", "derivs", "n_steps", "tau_max",
                 "n_vars", "history_knots")

    def __init__(self, history, h: float, states: np.ndarray, derivs: np.ndarray,
                 tau_max: float, n_steps: int):
        self.history = history
        self.h = h
        self.states = states
        self.derivs = derivs
        self.tau_max = tau_max
        self.n_steps = n_steps
        self.n_vars = states.shape[1]
        if isinstance(history, SampledHistory):
            self.history_knots: tuple[float, ...] = tuple(history.grid.tolist())
        else:
            self.history_knots = ()

    def at(self, t: float) -> np.ndarray:
        if t <= 0.0:
            return np.asarray(self.history(t), dtype=float)
        i = int(t / self.h)
        if i >= self.n_steps:
            i = self.n_steps - 1
        theta = t / self.h - i
        h00 = (1.0 + 2.0 * theta) * (1.0 - theta) ** 2
        h10 = theta * (1.0 - theta) ** 2
        h01 = theta * theta * (3.0 - 2.0 * theta)
        h11 = theta * theta * (theta - 1.0)
        return (
            h00 * self.states[i]
            + (h10 * self.h) * self.derivs[i]
            + h01 * self.states[i + 1]
            + (h11 * self.h) * self.derivs[i + 1]
        )

    def __call__(self, t):
        t_arr = np.asarray(t, dtype=float)
        if t_arr.ndim == 0:
            return self.at(float(t_arr))
        flat = t_arr.ravel()
        out = np.empty((flat.size, self.n_vars))
        neg = flat <= 0.0
        if neg.any():
            out[neg] = np.asarray(self.history(flat[neg]), dtype=float)
        pos = ~neg
        if pos.any():
            tp = flat[pos]
            idx = np.minimum((tp / self.h).astype(int), self.n_steps - 1)
            theta = (tp / self.h - idx)[:, None]
            h00 = (1.0 + 2.0 * theta) * (1.0 - theta) ** 2
            h10 = theta * (1.0 - theta) ** 2
            h01 = theta * theta * (3.0 - 2.0 * theta)
            h11 = theta * theta * (theta - 1.0)
            out[pos] = (
                h00 * self.states[idx]
                + (h10 * self.h) * self.derivs[idx]
                + h01 * self.states[idx + 1]
                + (h11 * self.h) * self.derivs[idx + 1]
            )
        return out

    def window(self, t: float) -> "TrajectoryWindow":
        return TrajectoryWindow(self, t)


def _aligned_edges(a: float, b: float, h: float, extra) -> np.ndarray:
    """Panel edges over [a, b]: every multiple of h plus the given break points."""
    j0 = math.floor(a / h) + 1
    j1 = math.ceil(b / h) - 1
    interior = [j * h for j in range(j0, j1 + 1)]
    interior += [p for p in extra if a < p < b]
    return np.unique(np.concatenate([np.array([a, b]), np.array(interior)]))


_SIMPSON_PATTERNS: dict[int, np.ndarray] = {}


def _simpson_pattern(cells: int) -> np.ndarray:
    pattern = _SIMPSON_PATTERNS.get(cells)
    if pattern is None:
        pattern = np.ones(2 * cells + 1)
        pattern[1:-1:2] = 4.0
        pattern[2:-1:2] = 2.0
        pattern.setflags(write=False)
        _SIMPSON_PATTERNS[cells] = pattern
    return pattern


def _piecewise_simpson(f, edges: np.ndarray, cells: int):
    """Composite Simpson with ``cells`` rule applications per piece.

    ``f`` maps a node array to shape (m,) or (m, k); returns a float or a
    (k,) array accordingly.
    """
    widths = np.diff(edges)
    rel = np.linspace(0.0, 1.0, 2 * cells + 1)
    nodes = (edges[:-1, None] + widths[:, None] * rel[None, :]).ravel()
    weights = ((widths[:, None] / (6.0 * cells)) * _simpson_pattern(cells)[None, :]).ravel()
    values = np.asarray(f(nodes), dtype=float)
    return np.tensordot(weights, values, axes=(0, 0))


def _aligned_integral(f, edges: np.ndarray, tol: float, max_doublings: int = 6):
    if edges.size < 2 or edges[-1] <= edges[0]:
        probe = np.asarray(f(np.array([edges[0]])), dtype=float)
        return np.zeros(probe.shape[1:])
    previous = _piecewise_simpson(f, edges, 1)
    cells = 2
    for _ in range(max_doublings):
        current = _piecewise_simpson(f, edges, cells)
        if np.max(np.abs(current - previous)) <= tol:
            return current
        previous = current
        cells *= 2
    raise NumericError(
        f"aligned quadrature over [{edges[0]:.6g}, {edges[-1]:.6g}] did not reach "
        f"tolerance {tol:g}"
    )


class TrajectoryWindow:
    """History segment s in [-tau_max, 0] |-> x(t + s) read off a trajectory."""

    __slots__ = ("dense", "t")

    def __init__(self, dense: DenseSolution, t: float):
        self.dense = dense
        self.t = t

    def __call__(self, s):
        return self.dense(self.t + np.asarray(s, dtype=float))

    @property
    def tau_max(self) -> float:
        return self.dense.tau_max

    @property
    def n_species(self) -> int:
        return self.dense.n_vars

    def aligned_integral(self, f, a: float, b: float, tol: float = 1e-9):
        """Integrate f(s) over window coordinates [a, b] <= 0 with panel
        edges on every smoothness break of the underlying trajectory."""
        extra = (0.0,) + self.dense.history_knots
        edges = _aligned_edges(self.t + a, self.t + b, self.dense.h, extra)
        return _aligned_integral(lambda nodes: f(nodes - self.t), edges, tol)


def window_integral(window, f, a: float, b: float, tol: float) -> np.ndarray:
    """Window-aware quadrature: aligned panels for trajectory windows,
    plain adaptive Simpson for smooth history functions."""
    if b <= a:
        probe = np.asarray(f(np.array([b])), dtype=float)
        return np.zeros(probe.shape[1:])
    aligned = getattr(window, "aligned_integral", None)
    if aligned is not None:
        return aligned(f, a, b, tol)
    values = None

    def scalarize(column):
        def g(nodes):
            return np.asarray(f(nodes), dtype=float)[:, column]

        return g

    probe = np.asarray(f(np.array([b])), dtype=float)
    if probe.ndim == 1:
        return simpson_adaptive(f, a, b, tol=tol)
    values = np.array([simpson_adaptive(scalarize(c), a, b, tol=tol)
                       for c in range(probe.shape[1])])
    return values


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Grid solution plus dense output and monitor samples."""

    config: SolverConfig
    times: np.ndarray
    states: np.ndarray
    derivs: np.ndarray
    dense: DenseSolution
    monitor_times: np.ndarray
    monitor_states: np.ndarray
    lyapunov: np.ndarray | None
    conserved: np.ndarray | None
    equilibrium: np.ndarray | None
    warnings: tuple[str, ...] = ()

    @property
    def final_state(self) -> np.ndarray:
        return self.states[-1]


@dataclass(frozen=True)
class DescentReport:
    initial_value: float
    max_jump: float
    threshold: float
    passed: bool


def _require_history_fits(network: ReactionNetwork, history) -> None:
    tau_max = getattr(history, "tau_max", None)
    if tau_max is not None and tau_max < network.tau_max - 1e-9:
        raise PreconditionError(
            f"history covers [-{tau_max}, 0] but the network needs "
            f"[-{network.tau_max}, 0]"
        )
    n = getattr(history, "n_species", None)
    if n is not None and n != network.n_species:
        raise PreconditionError(
            f"history has {n} species but the network has {network.n_species}"
        )


def _rk4_fill(rhs: Callable[[float, np.ndarray], np.ndarray], states: np.ndarray,
              derivs: np.ndarray, h: float, n_steps: int) -> int:
    """Advance states/derivs in place with classical RK4; returns clamp count."""
    u = states[0].copy()
    derivs[0] = rhs(0.0, u)
    clamped = 0
    for step in range(n_steps):
        t = step * h
        k1 = derivs[step]
        k2 = rhs(t + 0.5 * h, u + (0.5 * h) * k1)
        k3 = rhs(t + 0.5 * h, u + (0.5 * h) * k2)
        k4 = rhs(t + h, u + h * k3)
        u = u + (h / 6.0) * (k1 + 2.0 * (k2 + k3) + k4)
        if not np.all(np.isfinite(u)):
            raise IntegrationError(f"non-finite state at t={t + h:.6g}")
        low = float(u.min())
        if low < -NEGATIVE_TOLERANCE:
            raise IntegrationError(
                f"state undershot the positive orthant at t={t + h:.6g} "
                f"(min {low:.3e}); reduce the step"
            )
        if low < 0.0:
            np.clip(u, 0.0, None, out=u)
            clamped += 1
        states[step + 1] = u
        derivs[step + 1] = rhs(t + h, u)
    return clamped


def integrate_dde(network: ReactionNetwork, history, config: SolverConfig,
                  equilibrium: np.ndarray | None = None,
                  monitor_tol: float = 1e-9) -> Trajectory:
    """Method-of-steps RK4 solve of the delayed mass-action dynamics.

    Delayed stage arguments are read from the cubic dense output; with the
    enforced cap h <= min positive tau / 4 they always fall in already
    completed steps.  Monitors are sampled every ``monitor_stride`` steps;
    the entropy monitor needs ``equilibrium`` and is skipped without it.
    """
    _require_history_fits(network, history)
    h = config.step
    delays = network.delays
    positive = delays[delays > 0]
    if positive.size:
        cap = float(positive.min()) / 4.0
        if h > cap * (1.0 + 1e-12):
            raise PreconditionError(
                f"step {h:g} exceeds the delay cap min(tau)/4 = {cap:g}"
            )
    n_steps = config.n_steps
    n = network.n_species
    states = np.empty((n_steps + 1, n))
    derivs = np.empty_like(states)
    states[0] = np.asarray(history(0.0), dtype=float)
    dense = DenseSolution(history, h, states, derivs, network.tau_max, n_steps)

    src = network.source_matrix
    tgt_t = network.target_matrix.T
    src_t = src.T
    k = network.rate_constants
    zero_mask = delays == 0.0
    groups: list[tuple[float, np.ndarray]] = []
    for tau in sorted(set(delays[~zero_mask].tolist())):
        groups.append((tau, np.flatnonzero(delays == tau)))

    def rhs(t: float, x: np.ndarray) -> np.ndarray:
        delayed = np.empty_like(src)
        if zero_mask.any():
            delayed[zero_mask] = x
        for tau, idx in groups:
            delayed[idx] = dense.at(t - tau)
        rates_delayed = k * np.prod(delayed ** src, axis=1)
        rates_now = k * np.prod(x[None, :] ** src, axis=1)
        return tgt_t @ rates_delayed - src_t @ rates_now

    clamped = _rk4_fill(rhs, states, derivs, h, n_steps)
    warnings: tuple[str, ...] = ()
    if clamped:
        message = f"clamped {clamped} tiny negative undershoot(s) to zero"
        LOGGER.warning(message)
        warnings = (message,)
    times = np.arange(n_steps + 1) * h
    trajectory = Trajectory(
        config=config,
        times=times,
        states=states,
        derivs=derivs,
        dense=dense,
        monitor_times=np.empty(0),
        monitor_states=np.empty((0, n)),
        lyapunov=None,
        conserved=None,
        equilibrium=None if equilibrium is None else np.asarray(equilibrium, dtype=float),
        warnings=warnings,
    )
    return compute_monitors(trajectory, network, equilibrium=equilibrium, tol=monitor_tol)


def chain_approximation(network: ReactionNetwork, history, n_stages: int,
                        config: SolverConfig) -> Trajectory:
    """Approximate the delayed dynamics by a first-order stage chain.

    Each delayed reaction i gets a chain v_{i,1..N} of stages with rate
    N / tau_i:

        z'      = undelayed terms + sum_i [ (N/tau_i) v_{iN} y'_i - k_i z^{y_i} y_i ]
        v_{i1}' = k_i z^{y_i} - (N/tau_i) v_{i1}
        v_{ij}' = (N/tau_i) (v_{i,j-1} - v_{ij})

    with v_{ij}(0) the history load k_i * integral of psi^{y_i} over the
    j-th chain subinterval.  Without delays the chain is empty and the
    solve coincides with the plain mass-action ODE integration.  Returns
    the species component z as a trajectory (no entropy or conservation
    monitors: they belong to the delayed system).
    """
    _require_history_fits(network, history)
    if n_stages < 1:
        raise PreconditionError("the chain needs at least one stage")
    h = config.step
    delays = network.delays
    delayed_idx = np.flatnonzero(delays > 0)
    r_delayed = delayed_idx.size
    if r_delayed:
        max_rate = float(n_stages / delays[delayed_idx].min())
        if h * max_rate > CHAIN_STABILITY_LIMIT:
            raise PreconditionError(
                f"step {h:g} is unstable for chain rate N/tau = {max_rate:g}; "
                f"need h <= {CHAIN_STABILITY_LIMIT / max_rate:g}"
            )
    n = network.n_species
    n_steps = config.n_steps
    src = network.source_matrix
    tgt_t = network.target_matrix.T
    src_t = src.T
    k = network.rate_constants

    chain_rates = np.array([n_stages / delays[i] for i in delayed_idx])
    v0 = np.empty((r_delayed, n_stages))
    for row, i in enumerate(delayed_idx):
        tau = float(delays[i])
        exponents = src[i]

        def integrand(s):
            vals = np.asarray(history(s), dtype=float)
            return np.prod(vals ** exponents, axis=1)

        for j in range(1, n_stages + 1):
            a, b = -j * tau / n_stages, -(j - 1) * tau / n_stages
            v0[row, j - 1] = k[i] * simpson_adaptive(
                integrand, a, b, tol=1e-11, start_panels=32
            )

    dim = n + r_delayed * n_stages
    states = np.empty((n_steps + 1, dim))
    derivs = np.empty_like(states)
    states[0, :n] = np.asarray(history(0.0), dtype=float)
    states[0, n:] = v0.ravel()

    def rhs(t: float, u: np.ndarray) -> np.ndarray:
        z = u[:n]
        rates_now = k * np.prod(z[None, :] ** src, axis=1)
        inflow = rates_now.copy()
        out = np.empty_like(u)
        if r_delayed:
            v = u[n:].reshape(r_delayed, n_stages)
            inflow[delayed_idx] = chain_rates * v[:, -1]
            dv = out[n:].reshape(r_delayed, n_stages)
            dv[:, 0] = rates_now[delayed_idx] - chain_rates * v[:, 0]
            if n_stages > 1:
                dv[:, 1:] = chain_rates[:, None] * (v[:, :-1] - v[:, 1:])
        out[:n] = tgt_t @ inflow - src_t @ rates_now
        return out

    clamped = _rk4_fill(rhs, states, derivs, h, n_steps)
    warnings: tuple[str, ...] = ()
    if clamped:
        message = f"clamped {clamped} tiny negative undershoot(s) to zero"
        LOGGER.warning(message)
        warnings = (message,)
    times = np.arange(n_steps + 1) * h
    z_states = np.ascontiguousarray(states[:, :n])
    z_derivs = np.ascontiguousarray(derivs[:, :n])
    dense = DenseSolution(history, h, z_states, z_derivs, network.tau_max, n_steps)
    sample = _monitor_indices(n_steps, config.monitor_stride)
    return Trajectory(
        config=config,
        times=times,
        states=z_states,
        derivs=z_derivs,
        dense=dense,
        monitor_times=times[sample],
        monitor_states=z_states[sample],
        lyapunov=None,
        conserved=None,
        equilibrium=None,
        warnings=warnings,
    )


def _monitor_indices(n_steps: int, stride: int) -> list[int]:
    idx = list(range(0, n_steps + 1, stride))
    if idx[-1] != n_steps:
        idx.append(n_steps)
    return idx


def _entropy_value(network: ReactionNetwork, window, reference: np.ndarray,
                   tol: float, conserved_rows: np.ndarray | None = None):
    """Entropy functional of a window; optionally also the conserved values.

    Shares the window evaluations between the conservation integrand
    (x^{y_i}) and the entropy integrand, column-stacked per reaction.
    Returns (V, C_a array or None).
    """
    x0 = np.asarray(window(0.0), dtype=float)
    log_ref = np.log(reference) if reference is not None else None
    if reference is not None:
        safe = np.where(x0 > 0.0, x0, 1.0)
        value = float(np.sum(np.where(x0 > 0.0, x0 * (np.log(safe) - log_ref - 1.0), 0.0)
                             + reference))
        ref_monomials = np.prod(reference[None, :] ** network.source_matrix, axis=1)
        log_monomials = np.log(ref_monomials)
    else:
        value = math.nan
    point = x0.copy() if conserved_rows is not None else None
    src = network.source_matrix
    for i, rxn in enumerate(network.reactions):
        tau = rxn.delay
        if tau == 0.0:
            continue
        exponents = src[i]
        want_entropy = reference is not None

        def integrand(s):
            vals = np.asarray(window(s), dtype=float)
            monomial = np.prod(vals ** exponents, axis=1)
            if not want_entropy:
                return monomial[:, None]
            safe_mono = np.where(monomial > 0.0, monomial, 1.0)
            entropy = np.where(
                monomial > 0.0,
                monomial * (np.log(safe_mono) - log_monomials[i] - 1.0),
                0.0,
            ) + ref_monomials[i]
            return np.stack([monomial, entropy], axis=1)

        parts = window_integral(window, integrand, -tau, 0.0, tol)
        if want_entropy:
            value += rxn.rate_constant * float(parts[1])
        if point is not None:
            point += rxn.rate_constant * float(parts[0]) * exponents
    conserved = None if conserved_rows is None else conserved_rows @ point
    return value, conserved


def lyapunov_value(network: ReactionNetwork, window, equilibrium, tol: float = 1e-9) -> float:
    """Entropy-like functional of a strictly positive history segment.

    ``window`` maps s in [-tau_max, 0] to states (a history function or a
    trajectory window).  Zero exactly at the constant segment at the
    equilibrium, positive elsewhere.
    """
    reference = np.asarray(equilibrium, dtype=float)
    if (reference <= 0).any():
        raise PreconditionError("the reference equilibrium must be strictly positive")
    probe = np.asarray(window(np.linspace(-network.tau_max, 0.0, 257)), dtype=float)
    if probe.min() <= 0.0:
        raise PreconditionError("the window must be strictly positive on [-tau_max, 0]")
    value, _ = _entropy_value(network, window, reference, tol)
    return value


def compute_monitors(trajectory: Trajectory, network: ReactionNetwork,
                     equilibrium: np.ndarray | None = None,
                     tol: float = 1e-9) -> Trajectory:
    """Fill monitor samples: conserved values always, entropy if a reference is given."""
    n_steps = len(trajectory.times) - 1
    sample = _monitor_indices(n_steps, trajectory.config.monitor_stride)
    times = trajectory.times[sample]
    states = trajectory.states[sample]
    basis = conserved_basis(network)
    a_mat = basis.as_array() if len(basis) else None
    conserved = np.empty((len(sample), len(basis)))
    reference = None if equilibrium is None else np.asarray(equilibrium, dtype=float)
    entropy = None if reference is None else np.empty(len(sample))
    if reference is not None or len(basis):
        for row, t in enumerate(times):
            window = trajectory.dense.window(float(t))
            value, cons = _entropy_value(network, window, reference, tol,
                                         conserved_rows=a_mat)
            if entropy is not None:
                entropy[row] = value
            if cons is not None:
                conserved[row] = cons
    return replace(
        trajectory,
        monitor_times=times,
        monitor_states=states,
        lyapunov=entropy,
        conserved=conserved,
        equilibrium=reference if reference is not None else trajectory.equilibrium,
    )


def check_descent(trajectory: Trajectory, network: ReactionNetwork | None = None,
                  equilibrium: np.ndarray | None = None) -> DescentReport:
    """Largest positive jump of the entropy monitor between samples.

    Passes when the jump stays within 1e-6 * (1 + V(0)); quadrature and
    integrator noise sit well below that, so a genuine ascent fails.
    """
    if trajectory.lyapunov is None:
        if network is None or equilibrium is None:
            raise PreconditionError(
                "trajectory has no entropy monitor; pass network and equilibrium"
            )
        trajectory = compute_monitors(trajectory, network, equilibrium=equilibrium)
    values = trajectory.lyapunov
    jumps = np.diff(values)
    max_jump = max(float(jumps.max(initial=0.0)), 0.0)
    threshold = 1e-6 * (1.0 + float(values[0]))
    return DescentReport(
        initial_value=float(values[0]),
        max_jump=max_jump,
        threshold=threshold,
        passed=max_jump <= threshold,
    )


def conservation_drift(trajectory: Trajectory, network: ReactionNetwork | None = None,
                       tol: float = 1e-9) -> np.ndarray:
    """max_t |C_a(t) - C_a(0)| per conserved vector (empty array if none)."""
    if trajectory.conserved is None:
        if network is None:
            raise PreconditionError("trajectory has no conservation monitor; pass network")
        trajectory = compute_monitors(trajectory, network, tol=tol)
    values = trajectory.conserved
    if values.shape[1] == 0:
        return np.zeros(0)
    return np.abs(values - values[0]).max(axis=0)


def min_profile(trajectory: Trajectory, t_skip: float) -> np.ndarray:
    """Per-species minimum over monitor samples from t_skip onward."""
    if t_skip >= trajectory.times[-1]:
        raise PreconditionError("t_skip must lie before the end of the trajectory")
    mask = trajectory.monitor_times >= t_skip - 1e-12
    return trajectory.monitor_states[mask].min(axis=0)
