"""Flux specifications, mollification, and Kruzhkov entropy pairs.

A flux is carried both as a callable (for on-demand point evaluation, e.g.
asymptotic slope estimation) and as a sampled table on a uniform state grid
(what the solvers interpolate). Mollified fluxes keep the same dual nature:
the mollified callable is the discrete convolution of the original callable
with the kernel.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, NamedTuple

import numpy as np

from .errors import (
    FluxRegularityError,
    InvalidInputError,
    NoRecessionLimitError,
    OutOfRangeError,
)


@dataclass
class FluxSpec:
    """Sampled flux with sublinearity certificate and asymptotic slopes.

    samples/values live on the uniform grid [-lam_max, lam_max]; the
    asymptotic slopes are filled in by recession_slopes() when they exist
    (superlinear fluxes legitimately have none and keep None here).
    """

    func: Callable[[np.ndarray], np.ndarray]
    lam_max: float
    samples: np.ndarray
    values: np.ndarray
    sublinear_constant: float
    recession_plus: float | None = None
    recession_minus: float | None = None
    derivative: np.ndarray = field(init=False, repr=False)

    @classmethod
    def from_callable(cls, func, lam_max=4.0, n_samples=4097,
                      sublinear_constant=None) -> "FluxSpec":
        if lam_max <= 0:
            raise InvalidInputError("lam_max must be positive")
        if n_samples < 33 or n_samples % 2 == 0:
            raise InvalidInputError("n_samples must be odd and >= 33")
        lam = np.linspace(-lam_max, lam_max, n_samples)
        vals = np.asarray(func(lam), dtype=float)
        if vals.shape != lam.shape or not np.all(np.isfinite(vals)):
            raise InvalidInputError("flux samples must be finite and match the grid")
        ratio = np.abs(vals) / (1.0 + np.abs(lam))
        c_min = float(np.max(ratio))
        if sublinear_constant is None:
            sublinear_constant = c_min
        elif sublinear_constant < c_min:
            raise InvalidInputError(
                f"sublinearity bound C={sublinear_constant} violated on the "
                f"sample grid (needs C >= {c_min:.6g})"
            )
        return cls(func, float(lam_max), lam, vals, float(sublinear_constant))

    def __post_init__(self):
        d = np.empty_like(self.values)
        dl = self.dlam
        d[1:-1] = (self.values[2:] - self.values[:-2]) / (2.0 * dl)
        d[0] = (self.values[1] - self.values[0]) / dl
        d[-1] = (self.values[-1] - self.values[-2]) / dl
        self.derivative = d

    @property
    def dlam(self) -> float:
        return float(self.samples[1] - self.samples[0])

    @property
    def max_speed(self) -> float:
        return float(np.max(np.abs(self.derivative)))

    def __call__(self, u):
        """Point evaluation via the callable, restricted to the sampled range."""
        u_arr = np.asarray(u, dtype=float)
        if np.any(np.abs(u_arr) > self.lam_max):
            raise OutOfRangeError(
                f"evaluation outside sampled range [-{self.lam_max}, {self.lam_max}]"
            )
        return self.func(u_arr)

    def max_speed_on(self, lo: float, hi: float) -> float:
        """Max |f'| restricted to sample points in [lo, hi]."""
        mask = (self.samples >= lo) & (self.samples <= hi)
        if not np.any(mask):
            raise OutOfRangeError("empty speed window")
        return float(np.max(np.abs(self.derivative[mask])))


@dataclass(frozen=True)
class KruzhkovPair:
    """Entropy/entropy-flux pair |u - k|, sgn(u - k)(f(u) - f(k))."""

    k: float

    def __post_init__(self):
        if not np.isfinite(self.k):
            raise InvalidInputError("Kruzhkov constant must be finite")


def eval_kruzhkov(pair: KruzhkovPair, flux: FluxSpec, u):
    """Evaluate the entropy pair at state u (scalar or array)."""
    fu = flux(u)
    fk = flux(pair.k)
    u_arr = np.asarray(u, dtype=float)
    eta = np.abs(u_arr - pair.k)
    q = np.sign(u_arr - pair.k) * (fu - fk)
    if np.isscalar(u) or u_arr.ndim == 0:
        return float(eta), float(q)
    return eta, q


class RecessionSlopes(NamedTuple):
    plus: float
    minus: float
    error_estimate: float


_RECESSION_CHECKPOINTS = (10.0, 100.0, 1000.0)


def recession_slopes(flux: FluxSpec, checkpoints=_RECESSION_CHECKPOINTS) -> RecessionSlopes:
    """Asymptotic slopes of the flux in both directions.

    The slope toward +infinity is the limit of f(s)/s, the one toward
    -infinity the limit of f(-s)/s, both estimated on a geometric ladder of
    checkpoints evaluated through the callable. The deepest checkpoint is
    the reported limit; successive differences must shrink, and the last
    difference is the reported error estimate.
    """
    cps = np.asarray(checkpoints, dtype=float)
    if len(cps) < 3:
        raise InvalidInputError("need at least three checkpoints")
    rp = np.asarray(flux.func(cps), dtype=float) / cps
    rm = np.asarray(flux.func(-cps), dtype=float) / cps
    est = 0.0
    for r in (rp, rm):
        d = np.abs(np.diff(r))
        if not np.all(np.isfinite(r)) or d[-1] > d[-2]:
            raise NoRecessionLimitError(
                "flux/state ratio does not settle along the checkpoint ladder"
            )
        est = max(est, float(d[-1]))
    return RecessionSlopes(float(rp[-1]), float(rm[-1]), est)


def attach_recession(flux: FluxSpec) -> FluxSpec:
    """Return a copy of the flux with asymptotic slopes filled in."""
    r = recession_slopes(flux)
    return FluxSpec(flux.func, flux.lam_max, flux.samples, flux.values,
                    flux.sublinear_constant, r.plus, r.minus)


def choose_epsilon_n(flux: FluxSpec, n: int, z_bound: float,
                     n_state=2049, n_shift=33) -> float:
    """Largest kernel width on the ladder 2**-j whose flux modulus of
    continuity stays below 1/n.

    The sup of |f(z+h) - f(z)| over |z| <= z_bound, |h| <= eps is taken on a
    fine sample including the endpoints; ties at exactly 1/n are accepted.
    """
    if n < 1:
        raise InvalidInputError("n must be >= 1")
    if z_bound < 0 or not np.isfinite(z_bound):
        raise InvalidInputError("z_bound must be finite and non-negative")
    z = np.linspace(-z_bound, z_bound, n_state)
    fz = np.asarray(flux.func(z), dtype=float)
    target = 1.0 / n
    for j in range(41):
        eps = 2.0 ** (-j)
        h = np.linspace(-eps, eps, n_shift)
        shifted = np.asarray(flux.func(z[None, :] + h[:, None]), dtype=float)
        sup = float(np.max(np.abs(shifted - fz[None, :])))
        if sup <= target:
            return eps
    raise FluxRegularityError(
        f"no ladder width down to 2**-40 meets the 1/{n} modulus bound"
    )


@dataclass
class Mollifier:
    """Symmetric non-negative kernel with unit discrete mass.

    Sampled at uniform offsets strictly inside (-epsilon, epsilon); the
    profile is the compactly supported bump (1 - s^2)^3.
    """

    epsilon: float
    offsets: np.ndarray
    weights: np.ndarray

    MIN_SAMPLES_PER_SIDE = 16

    @classmethod
    def from_epsilon(cls, epsilon: float, spacing: float) -> "Mollifier":
        if epsilon <= 0 or not np.isfinite(epsilon):
            raise InvalidInputError("mollifier width must be positive")
        # largest j with j*spacing strictly inside the open support
        n_side = int(np.floor(epsilon / spacing))
        while n_side * spacing >= epsilon:
            n_side -= 1
        if n_side < cls.MIN_SAMPLES_PER_SIDE:
            raise InvalidInputError(
                f"kernel underresolved: {n_side} samples per side, "
                f"need >= {cls.MIN_SAMPLES_PER_SIDE} (shrink the flux sample spacing)"
            )
        offsets = np.arange(-n_side, n_side + 1) * spacing
        s = offsets / epsilon
        w = (1.0 - s * s) ** 3
        w /= np.sum(w)
        return cls(float(epsilon), offsets, w)


def mollify_flux(flux: FluxSpec, moll: Mollifier) -> FluxSpec:
    """Convolve the flux with the kernel; returns a new FluxSpec.

    The output callable is the discrete convolution sum, so it inherits the
    sup bound |f_n(z) - f(z)| <= sup_{|h|<=eps} |f(z+h) - f(z)| pointwise
    (it is a convex combination of shifted values).
    """
    if moll.epsilon > flux.lam_max:
        raise OutOfRangeError("kernel support exceeds the flux sample range")

    base = flux.func
    offsets = moll.offsets
    weights = moll.weights

    def smoothed(z):
        z_arr = np.asarray(z, dtype=float)
        shifted = base(z_arr[..., None] - offsets)
        return shifted @ weights

    out = FluxSpec.from_callable(smoothed, flux.lam_max, len(flux.samples))
    out.recession_plus = flux.recession_plus
    out.recession_minus = flux.recession_minus
    return out


# Ready-made fluxes used throughout the experiments and tests.

def burgers_flux(lam_max=4.0, n_samples=4097) -> FluxSpec:
    return FluxSpec.from_callable(lambda u: 0.5 * u * u, lam_max, n_samples)


def linear_flux(speed=1.0, lam_max=4.0, n_samples=4097) -> FluxSpec:
    return FluxSpec.from_callable(lambda u: speed * u, lam_max, n_samples)
