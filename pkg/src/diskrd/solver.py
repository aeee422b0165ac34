"""Time integration for the delayed disk models.

The spectral scheme propagates the diagonal linear part exactly,
``c <- exp(-lam dt) c``, and treats the analysed source with a two-step
Adams-Bashforth weight under the phi1 integrating factor:

    c_new = exp(-lam dt) c + phi1(lam, dt) (3/2 N_t - 1/2 N_{t-dt}),
    phi1 = (1 - exp(-lam dt)) / lam   (dt in the lam -> 0 limit).

The delay is handled by a ring of past states spaced exactly dt apart;
dt is rounded down so the delay is an integer number of steps and the
lagged state is a lookup, never an interpolation.

A deliberately simple finite-difference integrator on a cell-centered
polar mesh (forward Euler, conservative five-point Laplacian) is provided
as an independent cross-check.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass
from enum import Enum
from functools import cached_property
from typing import Callable, Optional

import numpy as np

from .bessel import BoundaryKind
from .kernel import maturation_term
from .model import ModelSpec, ModeSeed, Variant, forcing_profile, linear_rates, rhs
from .transform import (
    DiskField,
    DiskGrid,
    DiskTransform,
    SpectralField,
    build_bases,
    default_grid,
)

__all__ = [
    "Scheme",
    "SolverConfig",
    "HistoryBuffer",
    "SimulationResult",
    "BlowUpError",
    "SpectralIntegrator",
    "resolve_time_step",
    "initialize_history",
    "step",
    "integrate",
    "FDGrid",
    "fd_stability_limit",
    "fd_laplacian",
    "reference_fd_step",
    "integrate_fd",
]

CONVERGED_STREAK = 100


class Scheme(Enum):
    ETD_AB2 = "etd_ab2"
    REFERENCE_FD = "reference_fd"


@dataclass(frozen=True)
class SolverConfig:
    """Time-stepping knobs; fd_n_r / fd_n_theta only feed the FD scheme."""

    dt: float = 0.01
    t_end: float = 400.0
    scheme: Scheme = Scheme.ETD_AB2
    snapshot_every: int = 2000
    convergence_tol: float = 1e-6
    blowup_threshold: float = 1e12
    fd_n_r: int = 32
    fd_n_theta: int = 24

    def __post_init__(self) -> None:
        if self.dt <= 0.0:
            raise ValueError("dt must be positive")
        if self.t_end < 0.0:
            raise ValueError("t_end must be nonnegative")
        if self.snapshot_every < 1:
            raise ValueError("snapshot_every must be at least 1")
        if self.fd_n_r < 2 or self.fd_n_theta < 2:
            raise ValueError("FD mesh needs at least 2 cells per direction")


def resolve_time_step(dt: float, delay: float) -> tuple[float, int]:
    """Largest dt' <= dt with delay an exact multiple of dt'.

    Returns (dt', lag_steps); a zero delay keeps dt and needs no lag.
    """
    if delay == 0.0:
        return dt, 0
    lag = max(1, math.ceil(delay / dt - 1e-12))
    return delay / lag, lag


@dataclass
class HistoryBuffer:
    """Ring of the last lag_steps + 1 states, newest last, spaced dt apart."""

    dt: float
    lag_steps: int
    ring: deque
    t_head: float
    prev_source: Optional[tuple[np.ndarray, np.ndarray]] = None

    def head(self) -> SpectralField:
        return self.ring[-1]

    def lagged(self) -> SpectralField:
        """State at t_head - delay; exact by construction of the ring."""
        return self.ring[0]

    def push(self, state: SpectralField) -> None:
        self.ring.append(state)
        while len(self.ring) > self.lag_steps + 1:
            self.ring.popleft()
        self.t_head += self.dt


class BlowUpError(RuntimeError):
    """A coefficient magnitude crossed the blow-up threshold."""

    def __init__(self, t: float, step_index: int, magnitude: float):
        super().__init__(
            f"solution blew up at t={t:g} (step {step_index}): |c| reached {magnitude:.3e}"
        )
        self.t = t
        self.step_index = step_index
        self.magnitude = magnitude


@dataclass
class SimulationResult:
    """Diagnostics series, snapshots, and the terminal state of one run."""

    times: np.ndarray
    max_density: np.ndarray
    min_density: np.ndarray
    total_population: np.ndarray
    dwdt_norm: np.ndarray
    snapshots: list
    converged: bool
    converged_at: Optional[float]
    final_state: SpectralField
    final_field: DiskField
    grid: DiskGrid
    spec: ModelSpec
    config: SolverConfig
    dt: float


class SpectralIntegrator:
    """Exact-linear/explicit-source marching of one configured model."""

    def __init__(self, spec: ModelSpec, config: SolverConfig, grid: DiskGrid | None = None):
        self.spec = spec
        self.config = config
        self.bases = build_bases(spec.n_max, spec.j_max, spec.radius, spec.bc)
        self.grid = grid if grid is not None else default_grid(self.bases)
        self.transform = DiskTransform(self.grid, self.bases)
        self.rates = linear_rates(spec, self.bases)
        self.dt, self.lag_steps = resolve_time_step(config.dt, spec.delay)
        self._decay_a = np.exp(-self.rates * self.dt)
        self._decay_b = self._decay_a[1:]
        phi = _phi1(self.rates, self.dt)
        self._phi_a = phi
        self._phi_b = phi[1:]
        self._needs_lagged = spec.variant in (
            Variant.FULL_DIRICHLET,
            Variant.FULL_ZERO_FLUX,
            Variant.RADIAL,
        )
        self._unit_forcing = None
        if spec.variant in (Variant.MODE_FORCED, Variant.MODE_FORCED_BIRTH):
            self._unit_forcing = forcing_profile(spec, self.grid)
        self._norm_stack = np.stack([basis.norms for basis in self.bases])

    def initialize_history(self, w0: Callable[[float, np.ndarray, np.ndarray], np.ndarray]) -> HistoryBuffer:
        """Fill the ring by analysing w0(t, r, theta) over [-delay, 0]."""
        r, th = self.grid.mesh()
        states = deque()
        for i in range(self.lag_steps + 1):
            t = -self.spec.delay + i * self.dt
            values = np.asarray(w0(t, r, th), dtype=float) + np.zeros_like(r)
            states.append(self.transform.analyze(DiskField(self.grid, values)))
        return HistoryBuffer(dt=self.dt, lag_steps=self.lag_steps, ring=states, t_head=0.0)

    def _source(self, t: float, state: SpectralField, lagged: SpectralField):
        lagged_field = self.transform.synthesize(lagged) if self._needs_lagged else None
        _, src = rhs(t, state, lagged_field, self.spec, self.transform, self._unit_forcing)
        return self.transform.analyze_values(src.values)

    def _rate_norm(self, da: np.ndarray, db: np.ndarray) -> float:
        """Disk L2 norm of a coefficient increment divided by dt."""
        total = 2.0 * np.pi * np.dot(self._norm_stack[0], da[0] ** 2)
        if len(self.bases) > 1:
            total += np.pi * np.sum(self._norm_stack[1:] * (da[1:] ** 2 + db**2))
        return float(np.sqrt(total)) / self.dt

    def step(self, buffer: HistoryBuffer, step_index: int = 0) -> HistoryBuffer:
        """Advance one dt; the first step uses the one-step Euler weights."""
        state = buffer.head()
        src_a, src_b = self._source(buffer.t_head, state, buffer.lagged())
        if buffer.prev_source is None:
            stage_a, stage_b = src_a, src_b
        else:
            prev_a, prev_b = buffer.prev_source
            stage_a = 1.5 * src_a - 0.5 * prev_a
            stage_b = 1.5 * src_b - 0.5 * prev_b
        new_a = self._decay_a * state.a + self._phi_a * stage_a
        new_b = self._decay_b * state.b + self._phi_b * stage_b
        new_state = SpectralField(self.bases, new_a, new_b)
        peak = new_state.max_abs()
        if not np.isfinite(peak) or peak > self.config.blowup_threshold:
            raise BlowUpError(buffer.t_head + self.dt, step_index, peak)
        buffer.prev_source = (src_a, src_b)
        buffer.push(new_state)
        return buffer

    def integrate(self, w0) -> SimulationResult:
        buffer = self.initialize_history(w0)
        n_steps = int(math.ceil(self.config.t_end / self.dt - 1e-9)) if self.config.t_end else 0

        times = np.empty(n_steps + 1)
        max_density = np.empty(n_steps + 1)
        min_density = np.empty(n_steps + 1)
        total_population = np.empty(n_steps + 1)
        dwdt_norm = np.empty(n_steps + 1)

        field0 = self.transform.synthesize(buffer.head())
        times[0] = 0.0
        max_density[0] = field0.values.max()
        min_density[0] = field0.values.min()
        total_population[0] = self.grid.integrate(field0.values)
        dwdt_norm[0] = 0.0
        snapshots = [(0.0, field0)]

        converged = False
        converged_at: Optional[float] = None
        streak = 0
        current = field0
        for i in range(1, n_steps + 1):
            previous_state = buffer.head()
            self.step(buffer, i)
            state = buffer.head()
            current = self.transform.synthesize(state)
            times[i] = buffer.t_head
            max_density[i] = current.values.max()
            min_density[i] = current.values.min()
            total_population[i] = self.grid.integrate(current.values)
            dwdt_norm[i] = self._rate_norm(
                state.a - previous_state.a, state.b - previous_state.b
            )
            if dwdt_norm[i] < self.config.convergence_tol:
                streak += 1
                if streak >= CONVERGED_STREAK and not converged:
                    converged = True
                    converged_at = buffer.t_head
            else:
                streak = 0
            if i % self.config.snapshot_every == 0 and i != n_steps:
                snapshots.append((buffer.t_head, current))
        if n_steps:
            snapshots.append((buffer.t_head, current))

        return SimulationResult(
            times=times,
            max_density=max_density,
            min_density=min_density,
            total_population=total_population,
            dwdt_norm=dwdt_norm,
            snapshots=snapshots,
            converged=converged,
            converged_at=converged_at,
            final_state=buffer.head(),
            final_field=current,
            grid=self.grid,
            spec=self.spec,
            config=self.config,
            dt=self.dt,
        )


def _phi1(lam: np.ndarray, dt: float) -> np.ndarray:
    """(1 - exp(-lam dt)) / lam, by series where cancellation would bite."""
    x = lam * dt
    small = np.abs(x) < 1e-4
    safe = np.where(small, 1.0, lam)
    direct = (1.0 - np.exp(-x)) / safe
    series = dt * (1.0 - x / 2.0 + x**2 / 6.0 - x**3 / 24.0)
    return np.where(small, series, direct)


def initialize_history(w0, spec: ModelSpec, config: SolverConfig, grid: DiskGrid | None = None) -> HistoryBuffer:
    return SpectralIntegrator(spec, config, grid).initialize_history(w0)


def step(buffer: HistoryBuffer, spec: ModelSpec, config: SolverConfig, grid: DiskGrid | None = None) -> HistoryBuffer:
    return SpectralIntegrator(spec, config, grid).step(buffer)


def integrate(spec: ModelSpec, config: SolverConfig, w0, grid: DiskGrid | None = None) -> SimulationResult:
    """Run the configured scheme; the FD scheme suits short cross-check horizons."""
    if config.scheme is Scheme.REFERENCE_FD:
        return _integrate_reference(spec, config, w0)
    return SpectralIntegrator(spec, config, grid).integrate(w0)


def _integrate_reference(spec: ModelSpec, config: SolverConfig, w0) -> SimulationResult:
    """SimulationResult-shaped run of the FD scheme.

    The FD step is stability-bounded, so diagnostics are recorded on the
    requested dt cadence rather than every internal step.
    """
    fd = FDGrid(spec.radius, config.fd_n_r, config.fd_n_theta)
    grid = fd.quadrature_grid()
    # The terminal projection is a diagnostic; cap its truncation to what
    # the mesh can resolve.
    n_max = min(spec.n_max, (config.fd_n_theta - 2) // 2)
    j_max = min(spec.j_max, config.fd_n_r - 2)
    bases = build_bases(n_max, j_max, spec.radius, spec.bc)
    dt_fd = 0.8 * fd_stability_limit(spec, fd)
    inner = max(1, math.ceil(config.dt / dt_fd - 1e-12))
    dt_fd = config.dt / inner
    n_records = int(math.ceil(config.t_end / config.dt - 1e-9)) if config.t_end else 0

    r, th = fd.mesh()
    values = np.asarray(w0(0.0, r, th), dtype=float) + np.zeros_like(r)
    forced = spec.variant in (Variant.MODE_FORCED, Variant.MODE_FORCED_BIRTH)
    local_birth = spec.variant is Variant.MODE_FORCED_BIRTH and spec.birth is not None
    unit = spec.forcing_damping() * forcing_profile(spec, fd) if forced else None

    times = np.empty(n_records + 1)
    max_density = np.empty(n_records + 1)
    min_density = np.empty(n_records + 1)
    total_population = np.empty(n_records + 1)
    dwdt_norm = np.empty(n_records + 1)
    weights = grid.r_weights * grid.r_nodes

    def record(i, t, current, rate):
        times[i] = t
        max_density[i] = current.max()
        min_density[i] = current.min()
        total_population[i] = grid.theta_spacing * float(np.dot(weights, current.sum(axis=1)))
        dwdt_norm[i] = rate

    record(0, 0.0, values, 0.0)
    snapshots = [(0.0, DiskField(grid, values.copy()))]
    converged = False
    converged_at = None
    streak = 0
    t = 0.0
    for i in range(1, n_records + 1):
        for _ in range(inner):
            if forced:
                new = _forced_euler_update(values, spec, fd, dt_fd, t, unit, local_birth)
            else:
                new = reference_fd_step(values, spec, fd, dt_fd, t)
            previous, values = values, new
            t += dt_fd
        peak = float(np.max(np.abs(values)))
        if not np.isfinite(peak) or peak > config.blowup_threshold:
            raise BlowUpError(t, i, peak)
        diff = values - previous
        rate = float(
            np.sqrt(grid.theta_spacing * np.dot(weights, (diff**2).sum(axis=1)))
        ) / dt_fd
        record(i, t, values, rate)
        if rate < config.convergence_tol:
            streak += 1
            if streak >= CONVERGED_STREAK and not converged:
                converged = True
                converged_at = t
        else:
            streak = 0
        if i % config.snapshot_every == 0 and i != n_records:
            snapshots.append((t, DiskField(grid, values.copy())))
    if n_records:
        snapshots.append((t, DiskField(grid, values.copy())))

    final_field = DiskField(grid, values)
    final_state = DiskTransform(grid, bases).analyze(final_field)
    return SimulationResult(
        times=times,
        max_density=max_density,
        min_density=min_density,
        total_population=total_population,
        dwdt_norm=dwdt_norm,
        snapshots=snapshots,
        converged=converged,
        converged_at=converged_at,
        final_state=final_state,
        final_field=final_field,
        grid=grid,
        spec=spec,
        config=config,
        dt=dt_fd,
    )


# ---------------------------------------------------------------------------
# Reference finite-difference integrator (independent cross-check)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FDGrid:
    """Cell-centered polar mesh: r_i = (i + 1/2) dr, periodic theta."""

    radius: float
    n_r: int
    n_theta: int

    @property
    def dr(self) -> float:
        return self.radius / self.n_r

    @property
    def dtheta(self) -> float:
        return 2.0 * np.pi / self.n_theta

    @cached_property
    def r(self) -> np.ndarray:
        return (np.arange(self.n_r) + 0.5) * self.dr

    @cached_property
    def theta(self) -> np.ndarray:
        return np.arange(self.n_theta) * self.dtheta

    def mesh(self) -> tuple[np.ndarray, np.ndarray]:
        return np.meshgrid(self.r, self.theta, indexing="ij")

    def quadrature_grid(self) -> DiskGrid:
        return DiskGrid.cell_centered(self.radius, self.n_r, self.n_theta)


def _forced_euler_update(
    values: np.ndarray,
    spec: ModelSpec,
    fd: FDGrid,
    dt: float,
    t: float,
    unit_forcing: np.ndarray,
    local_birth: bool,
) -> np.ndarray:
    """Euler step of a forced variant with the static profile precomputed."""
    source = spec.forcing_value(t) * unit_forcing
    if local_birth:
        source = source + np.asarray(spec.birth(values), dtype=float)
    lap = fd_laplacian(values, spec, fd)
    return values + dt * (spec.diffusion * lap - spec.mortality * values + source)


def fd_stability_limit(spec: ModelSpec, fd: FDGrid) -> float:
    """Explicit-Euler dt bound for the diffusion operator on this mesh.

    Gershgorin bound on the discrete operator: every row of the negated
    Laplacian satisfies diag + |offdiag| <= 4/dr^2 + 4/(r^2 dtheta^2),
    worst at the innermost cell r = dr/2.
    """
    r0 = 0.5 * fd.dr
    spectral_radius = 4.0 / fd.dr**2 + 4.0 / (r0**2 * fd.dtheta**2)
    return 2.0 / (spec.diffusion * spectral_radius + spec.mortality)


def _ghost_row(edge: np.ndarray, spec: ModelSpec, dr: float) -> np.ndarray:
    """Ghost-cell values encoding the boundary condition at the outer face."""
    bc = spec.bc
    if bc.kind is BoundaryKind.DIRICHLET:
        return -edge
    if bc.kind is BoundaryKind.ZERO_FLUX:
        return edge
    a, b = bc.coefficients()
    denom = a / dr + 0.5 * b
    if denom == 0.0:
        raise ValueError("mixed condition degenerates on this mesh; refine dr")
    return edge * (a / dr - 0.5 * b) / denom


def fd_laplacian(values: np.ndarray, spec: ModelSpec, fd: FDGrid) -> np.ndarray:
    """Conservative five-point polar Laplacian with ghost-cell edges.

    The inner face of the first cell sits at r = 0 and carries no area,
    which removes the coordinate singularity without special casing.
    """
    dr, dth = fd.dr, fd.dtheta
    r = fd.r[:, None]
    r_plus = r + 0.5 * dr
    r_minus = r - 0.5 * dr

    upper = np.empty_like(values)
    upper[:-1] = values[1:]
    upper[-1] = _ghost_row(values[-1], spec, dr)
    lower = np.empty_like(values)
    lower[1:] = values[:-1]
    lower[0] = 0.0  # multiplied by the zero-area inner face

    flux = r_plus * (upper - values) - r_minus * (values - lower)
    radial = flux / (r * dr**2)
    angular = (np.roll(values, 1, axis=1) - 2.0 * values + np.roll(values, -1, axis=1)) / (
        r**2 * dth**2
    )
    return radial + angular


def reference_fd_step(
    values: np.ndarray,
    spec: ModelSpec,
    fd: FDGrid,
    dt: float,
    t: float = 0.0,
    lagged: np.ndarray | None = None,
) -> np.ndarray:
    """One forward-Euler update on the FD mesh.

    Supports the forced variants directly; the maturation variants are
    accepted without delay (the lagged field defaults to the current one),
    evaluated through the same spectral kernel on the midpoint mesh.
    """
    if dt > fd_stability_limit(spec, fd):
        raise ValueError(
            f"dt={dt:g} exceeds the explicit stability bound "
            f"{fd_stability_limit(spec, fd):g} for this mesh"
        )
    source = np.zeros_like(values)
    if spec.variant in (Variant.MODE_FORCED, Variant.MODE_FORCED_BIRTH):
        amp = spec.forcing_damping() * spec.forcing_value(t)
        source += amp * forcing_profile(spec, fd)
        if spec.variant is Variant.MODE_FORCED_BIRTH and spec.birth is not None:
            source += np.asarray(spec.birth(values), dtype=float)
    else:
        if lagged is None:
            if spec.delay != 0.0:
                raise ValueError(
                    "the reference integrator handles maturation variants only "
                    "without delay (pass the lagged field explicitly otherwise)"
                )
            lagged = values
        grid = fd.quadrature_grid()
        bases = build_bases(spec.n_max, spec.j_max, spec.radius, spec.bc)
        if isinstance(spec.birth, ModeSeed):
            births = spec.birth.field(grid, t - spec.delay)
            source += maturation_term(
                DiskField(grid, births), lambda w: w, spec.survival, spec.spread, bases
            ).values
        else:
            source += maturation_term(
                DiskField(grid, lagged), spec.birth, spec.survival, spec.spread, bases
            ).values
    lap = fd_laplacian(values, spec, fd)
    return values + dt * (spec.diffusion * lap - spec.mortality * values + source)


def integrate_fd(
    spec: ModelSpec,
    fd: FDGrid,
    values: np.ndarray,
    t_end: float,
    dt: float | None = None,
    safety: float = 0.8,
) -> tuple[np.ndarray, float]:
    """March the FD scheme to t_end; returns (final values, dt used).

    Equivalent to chaining reference_fd_step, with the static pieces of
    the source hoisted out of the (stability-bounded, hence long) loop.
    """
    limit = fd_stability_limit(spec, fd)
    if dt is None:
        dt = safety * limit
    n_steps = max(1, int(math.ceil(t_end / dt - 1e-12)))
    dt = t_end / n_steps
    if dt > limit:
        raise ValueError("requested dt violates the stability bound")

    forced = spec.variant in (Variant.MODE_FORCED, Variant.MODE_FORCED_BIRTH)
    local_birth = spec.variant is Variant.MODE_FORCED_BIRTH and spec.birth is not None
    unit = spec.forcing_damping() * forcing_profile(spec, fd) if forced else None

    t = 0.0
    for _ in range(n_steps):
        if forced:
            values = _forced_euler_update(values, spec, fd, dt, t, unit, local_birth)
        else:
            values = reference_fd_step(values, spec, fd, dt, t)
        t += dt
    return values, dt
