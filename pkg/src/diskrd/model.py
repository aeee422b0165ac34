"""Birth laws, model variants, and the split right-hand side.

Every variant shares the linear backbone ``D Laplacian(w) - mortality*w``,
which is diagonal in the eigenfunction basis: the mode J_n(k r) cos(n
theta) evolves at rate -(diffusion * k^2 + mortality). Variants differ in
their source term:

    FULL_DIRICHLET / FULL_ZERO_FLUX   nonlocal maturation of the lagged field
    RADIAL                            the same, restricted to order zero
    MODE_FORCED                       a fixed single-mode birth pulse
    MODE_FORCED_BIRTH                 the pulse plus a local birth law b(w)
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Callable, Optional, Union

import numpy as np
from scipy.optimize import brentq
from scipy.special import jv

from .bessel import BesselBasis, BoundaryCondition, BoundaryKind
from .kernel import damping_factors, maturation_term, maturation_term_radial
from .transform import DiskField, DiskTransform, SpectralField

__all__ = [
    "Identity",
    "Logistic",
    "RickerQuadratic",
    "ModeSeed",
    "BirthLaw",
    "Variant",
    "ModelSpec",
    "linear_rates",
    "forcing_profile",
    "rhs",
    "homogeneous_equilibria",
]


class Identity:
    """b(w) = w."""

    def __call__(self, w):
        return w

    def __repr__(self) -> str:
        return "Identity()"


@dataclass(frozen=True)
class Logistic:
    """b(w) = rate * w * (1 - w / capacity)."""

    rate: float
    capacity: float

    def __post_init__(self) -> None:
        if self.rate <= 0.0 or self.capacity <= 0.0:
            raise ValueError("logistic birth needs rate > 0 and capacity > 0")

    def __call__(self, w):
        return self.rate * w * (1.0 - w / self.capacity)


@dataclass(frozen=True)
class RickerQuadratic:
    """b(w) = scale * w^2 * exp(-decay * w)."""

    scale: float
    decay: float

    def __post_init__(self) -> None:
        if self.scale <= 0.0 or self.decay <= 0.0:
            raise ValueError("quadratic birth needs scale > 0 and decay > 0")

    def __call__(self, w):
        return self.scale * w**2 * np.exp(-self.decay * w)


@dataclass(frozen=True)
class ModeSeed:
    """A fixed birth profile amplitude(t) * J_1(mode_k r) cos(theta).

    Unlike the density-dependent laws this ignores the population; it
    seeds one spatial mode, which is what reduces the full model to the
    forced variants.
    """

    amplitude: Callable[[float], float]
    mode_k: float

    def profile(self, grid) -> np.ndarray:
        r, th = grid.mesh()
        return jv(1, self.mode_k * r) * np.cos(th)

    def field(self, grid, t: float) -> np.ndarray:
        return float(self.amplitude(t)) * self.profile(grid)


BirthLaw = Union[Identity, Logistic, RickerQuadratic, ModeSeed]


class Variant(Enum):
    FULL_DIRICHLET = "full_dirichlet"
    FULL_ZERO_FLUX = "full_zero_flux"
    RADIAL = "radial"
    MODE_FORCED = "mode_forced"
    MODE_FORCED_BIRTH = "mode_forced_birth"


_DEFAULT_BC = {
    Variant.FULL_DIRICHLET: BoundaryCondition.dirichlet,
    Variant.FULL_ZERO_FLUX: BoundaryCondition.zero_flux,
    # The reductions below are derived with an absorbing edge; runs may
    # override the condition explicitly.
    Variant.RADIAL: BoundaryCondition.dirichlet,
    Variant.MODE_FORCED: BoundaryCondition.dirichlet,
    Variant.MODE_FORCED_BIRTH: BoundaryCondition.dirichlet,
}


@dataclass(frozen=True)
class ModelSpec:
    """All parameters selecting and sizing one model variant.

    diffusion / mortality act on the mature population; survival and
    spread summarise immaturity (fraction surviving, diffusivity
    accumulated over the delay). ``forcing`` is the time factor of the
    seeded mode in the forced variants, evaluated at t - delay.
    """

    variant: Variant
    diffusion: float
    mortality: float
    survival: float
    spread: float
    delay: float
    radius: float
    bc: Optional[BoundaryCondition] = None
    birth: Optional[BirthLaw] = None
    forcing: Optional[Callable[[float], float]] = None
    forcing_mode_k: float = 3.8317
    forcing_exponent_linear: bool = False
    n_max: int = 16
    j_max: int = 32

    def __post_init__(self) -> None:
        if self.diffusion <= 0.0:
            raise ValueError("diffusion must be positive")
        if self.mortality < 0.0:
            raise ValueError("mortality must be nonnegative")
        if not 0.0 < self.survival <= 1.0:
            raise ValueError("survival must lie in (0, 1]")
        if self.spread < 0.0 or self.delay < 0.0:
            raise ValueError("spread and delay must be nonnegative")
        if self.radius <= 0.0:
            raise ValueError("radius must be positive")
        if self.n_max < 0 or self.j_max < 1:
            raise ValueError("truncation must satisfy n_max >= 0, j_max >= 1")
        bc = self.bc if self.bc is not None else _DEFAULT_BC[self.variant]()
        object.__setattr__(self, "bc", bc)
        if self.variant is Variant.FULL_DIRICHLET and bc.kind is not BoundaryKind.DIRICHLET:
            raise ValueError("FULL_DIRICHLET runs under a Dirichlet condition")
        if self.variant is Variant.FULL_ZERO_FLUX and bc.kind is not BoundaryKind.ZERO_FLUX:
            raise ValueError("FULL_ZERO_FLUX runs under a zero-flux condition")
        if self.variant in (Variant.FULL_DIRICHLET, Variant.FULL_ZERO_FLUX, Variant.RADIAL):
            if self.birth is None:
                raise ValueError(f"{self.variant.value} requires a birth law")
        if self.variant in (Variant.MODE_FORCED, Variant.MODE_FORCED_BIRTH):
            if self.variant is Variant.MODE_FORCED_BIRTH and isinstance(self.birth, ModeSeed):
                raise ValueError("the forced-with-birth variant needs a density-dependent law")
            if self.forcing_mode_k <= 0.0:
                raise ValueError("forcing_mode_k must be positive")

    def forcing_value(self, t: float) -> float:
        """Forcing time factor f(t - delay); defaults to 1."""
        if self.forcing is None:
            return 1.0
        return float(self.forcing(t - self.delay))

    def forcing_damping(self) -> float:
        """Spectral damping of the seeded mode, survival included.

        The exponent is quadratic in the wavenumber, matching every other
        mode of the series; the linear variant is kept as an opt-in switch
        for literal reproduction of runs that used it.
        """
        k = self.forcing_mode_k
        exponent = k * self.spread if self.forcing_exponent_linear else k**2 * self.spread
        return self.survival * float(np.exp(-exponent))


def linear_rates(spec: ModelSpec, bases: tuple[BesselBasis, ...]) -> np.ndarray:
    """Per-mode decay rates diffusion * k^2 + mortality, shaped like ``a``.

    Sine coefficients of order n share row n of the result.
    """
    k = np.stack([basis.eigenvalues for basis in bases])
    return spec.diffusion * k**2 + spec.mortality


def forcing_profile(spec: ModelSpec, grid) -> np.ndarray:
    """Unit spatial profile J_1(mode_k r) cos(theta) of the seeded mode."""
    r, th = grid.mesh()
    return jv(1, spec.forcing_mode_k * r) * np.cos(th)


def rhs(
    t: float,
    state: SpectralField,
    lagged: Optional[DiskField],
    spec: ModelSpec,
    transform: DiskTransform,
    unit_forcing: Optional[np.ndarray] = None,
) -> tuple[np.ndarray, DiskField]:
    """Time-derivative contribution split into (linear rates, source field).

    The linear part is the per-mode rate array; the source field gathers
    the variant's nonlocal / forced / local birth terms on the grid. The
    lagged field is the population at t - delay and is only consulted by
    the maturation variants. ``unit_forcing`` lets callers reuse the
    static seeded-mode profile instead of retabulating it.
    """
    rates = linear_rates(spec, transform.bases)
    grid = transform.grid
    values = np.zeros((grid.n_r, grid.n_theta))

    if spec.variant in (Variant.FULL_DIRICHLET, Variant.FULL_ZERO_FLUX):
        if lagged is None:
            raise ValueError("maturation variants need the lagged field")
        if isinstance(spec.birth, ModeSeed):
            births = spec.birth.field(grid, t - spec.delay)
            a, b = transform.analyze_values(births)
            damp = damping_factors(transform.bases, spec.survival, spec.spread)
            values += transform.synthesize_values(a * damp, b * damp[1:])
        else:
            values += maturation_term(
                lagged, spec.birth, spec.survival, spec.spread, transform.bases, transform
            ).values
    elif spec.variant is Variant.RADIAL:
        if lagged is None:
            raise ValueError("maturation variants need the lagged field")
        # Radial reduction: only the order-zero content feeds the source.
        profile = lagged.values.mean(axis=1)
        out = maturation_term_radial(
            profile, spec.birth, spec.survival, spec.spread, transform.bases[0], grid
        )
        values += out[:, None]
    else:
        amp = spec.forcing_damping() * spec.forcing_value(t)
        if unit_forcing is None:
            unit_forcing = forcing_profile(spec, grid)
        values += amp * unit_forcing
        if spec.variant is Variant.MODE_FORCED_BIRTH and spec.birth is not None:
            current = transform.synthesize_values(state.a, state.b)
            values += np.asarray(spec.birth(current), dtype=float)

    return rates, DiskField(grid, values)


def homogeneous_equilibria(spec: ModelSpec, w_scan_max: float | None = None) -> np.ndarray:
    """Nonnegative roots of b(w) = mortality * w, the flat steady states.

    Located by bracketing sign changes of b(w) - mortality * w on a dense
    scan and bisecting each bracket to 1e-10; w = 0 is always included.
    """
    birth = spec.birth
    if not isinstance(birth, (Logistic, RickerQuadratic)):
        raise ValueError("equilibria are defined for the density-dependent birth laws")
    if w_scan_max is None:
        if isinstance(birth, RickerQuadratic):
            w_scan_max = 10.0 / birth.decay
        else:
            w_scan_max = 2.0 * birth.capacity

    def excess(w: float) -> float:
        return float(birth(w) - spec.mortality * w)

    roots = [0.0]
    grid = np.linspace(0.0, w_scan_max, 4001)
    vals = np.array([excess(w) for w in grid])
    for i in range(grid.size - 1):
        lo, hi = grid[i], grid[i + 1]
        if vals[i] == 0.0 and lo > 0.0:
            roots.append(float(lo))
        elif vals[i] * vals[i + 1] < 0.0:
            roots.append(float(brentq(excess, lo, hi, xtol=1e-10)))
    unique = []
    for w in sorted(roots):
        if not unique or w - unique[-1] > 1e-9:
            unique.append(w)
    return np.array(unique)
