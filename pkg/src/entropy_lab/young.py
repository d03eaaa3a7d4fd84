"""Empirical Young measures with concentration bookkeeping.

A sequence of runs is summarized by pooling the fine-grid values of its
highest-fidelity member over a coarse space-time partition: per coarse cell
a histogram over [-R, R] (the oscillation part), plus the L1 mass clipped
at radius R (the concentration part m1) split into +/- direction weights.

The mixed functional A(t) pairs two such measures per time slab with the
integrand |lambda - mu|; its slab averages, together with the clipped
masses, are what the averaged contraction check monitors.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DegeneratePartitionError,
    DimensionError,
    GrowthBoundError,
    InvalidInputError,
)
from .fluxes import FluxSpec
from .grids import Trajectory

DEFAULT_COARSE = (16, 8)   # space x time
DEFAULT_BINS = 64
ANGLE_MASS_THRESHOLD = 1e-14


@dataclass
class MeasureSequenceInput:
    """Approximating sequence (increasing fidelity) with a declared uniform
    L1-in-space bound."""

    members: list
    l1_bound: float

    def __post_init__(self):
        if len(self.members) < 1:
            raise InvalidInputError("need at least one trajectory")
        grid = self.members[0].grid
        times = self.members[0].times
        for tr in self.members[1:]:
            if not grid.compatible_with(tr.grid):
                raise DimensionError("sequence members must share one grid")
            if len(tr.times) != len(times) or np.max(np.abs(tr.times - times)) > 1e-12:
                raise DimensionError("sequence members must share snapshot times")
        for k, tr in enumerate(self.members):
            sup = max(grid.dx * float(np.sum(np.abs(s.values)))
                      for s in tr.snapshots)
            if sup > self.l1_bound * (1 + 1e-12):
                raise InvalidInputError(
                    f"member {k} violates the declared L1 bound "
                    f"({sup:.6g} > {self.l1_bound:.6g})"
                )

    @property
    def grid(self):
        return self.members[0].grid

    @property
    def times(self):
        return self.members[0].times


@dataclass
class EmpiricalYoungMeasure:
    """Per-cell histograms plus concentration mass and direction weights.

    weights[it, ix, :] is a probability vector over the bins; m1[it, ix] is
    the clipped L1 mass (time-averaged over the snapshots pooled into the
    slab); angle weights are NaN wherever m1 is below threshold.
    """

    length: float
    t_final: float
    n_x_coarse: int
    n_t_coarse: int
    truncation_radius: float
    bin_edges: np.ndarray
    weights: np.ndarray
    m1: np.ndarray
    angle_plus: np.ndarray
    angle_minus: np.ndarray
    slab_times: np.ndarray = field(init=False)

    def __post_init__(self):
        self.slab_times = (np.arange(self.n_t_coarse) + 0.5) * self.t_final / self.n_t_coarse

    @property
    def bin_midpoints(self) -> np.ndarray:
        return 0.5 * (self.bin_edges[1:] + self.bin_edges[:-1])

    @property
    def dx_coarse(self) -> float:
        return self.length / self.n_x_coarse

    def same_partition(self, other: "EmpiricalYoungMeasure") -> bool:
        return (
            self.n_x_coarse == other.n_x_coarse
            and self.n_t_coarse == other.n_t_coarse
            and self.bin_edges.shape == other.bin_edges.shape
            and np.max(np.abs(self.bin_edges - other.bin_edges)) == 0.0
            and self.length == other.length
        )


def build_measure(inp: MeasureSequenceInput, bins: int = DEFAULT_BINS,
                  R: float = 2.0,
                  coarse: tuple = DEFAULT_COARSE) -> EmpiricalYoungMeasure:
    """Pool the last sequence member into per-cell histograms.

    Values with |v| <= R populate the histogram; the clipped tail feeds the
    concentration mass m1 += |v| * dx (averaged over the snapshots in the
    slab) and the direction weights by sign.
    """
    if bins < 2:
        raise InvalidInputError("bins must be >= 2")
    if R <= 0:
        raise InvalidInputError("truncation radius must be positive")
    n_x_coarse, n_t_coarse = coarse
    tr = inp.members[-1]
    arr = tr.values_array()
    n_t, n_x = arr.shape
    if n_t_coarse > n_t or n_x_coarse > n_x:
        raise DegeneratePartitionError("coarse partition finer than the data")
    edges = np.linspace(-R, R, bins + 1)
    t_bounds = [(it * n_t) // n_t_coarse for it in range(n_t_coarse + 1)]
    x_bounds = [(ix * n_x) // n_x_coarse for ix in range(n_x_coarse + 1)]
    dx = tr.grid.dx

    weights = np.zeros((n_t_coarse, n_x_coarse, bins))
    m1 = np.zeros((n_t_coarse, n_x_coarse))
    ap = np.full((n_t_coarse, n_x_coarse), np.nan)
    am = np.full((n_t_coarse, n_x_coarse), np.nan)
    for it in range(n_t_coarse):
        t_lo, t_hi = t_bounds[it], t_bounds[it + 1]
        n_snap_slab = t_hi - t_lo
        if n_snap_slab == 0:
            raise DegeneratePartitionError("empty time slab")
        for ix in range(n_x_coarse):
            x_lo, x_hi = x_bounds[ix], x_bounds[ix + 1]
            if x_hi == x_lo:
                raise DegeneratePartitionError("empty space cell")
            vals = arr[t_lo:t_hi, x_lo:x_hi].ravel()
            clipped = np.abs(vals) > R
            kept = vals[~clipped]
            if kept.size == 0:
                raise InvalidInputError(
                    "cell fully concentrated: no values inside [-R, R]"
                )
            hist, _ = np.histogram(kept, bins=edges)
            weights[it, ix] = hist / kept.size
            tail = vals[clipped]
            if tail.size:
                masses = np.abs(tail) * dx / n_snap_slab
                m1[it, ix] = float(np.sum(masses))
                if m1[it, ix] > ANGLE_MASS_THRESHOLD:
                    ap[it, ix] = float(np.sum(masses[tail > 0])) / m1[it, ix]
                    am[it, ix] = float(np.sum(masses[tail < 0])) / m1[it, ix]
    return EmpiricalYoungMeasure(
        tr.grid.length, float(tr.times[-1]), n_x_coarse, n_t_coarse, R,
        edges, weights, m1, ap, am,
    )


def pair_with(measure: EmpiricalYoungMeasure, g) -> np.ndarray:
    """Duality pairing <nu, g> per cell; g is a callable on states or an
    array sampled at the bin midpoints."""
    mids = measure.bin_midpoints
    gv = np.asarray(g(mids) if callable(g) else g, dtype=float)
    if gv.shape != mids.shape:
        raise DimensionError("g samples do not match the bin midpoints")
    return measure.weights @ gv


def m2_density(measure: EmpiricalYoungMeasure, flux: FluxSpec) -> np.ndarray:
    """Concentration part of the entropy flux, reconstructed from the angle
    weights and the asymptotic flux slopes (never stored independently).

    The +1 direction contributes the upward slope, the -1 direction minus
    the downward one, so |m2| <= max(|slopes|) * m1 cell-wise.
    """
    if flux.recession_plus is None or flux.recession_minus is None:
        raise InvalidInputError("flux has no asymptotic slopes attached")
    qp = flux.recession_plus
    qm = -flux.recession_minus
    w_plus = np.nan_to_num(measure.angle_plus)
    w_minus = np.nan_to_num(measure.angle_minus)
    return (w_plus * qp + w_minus * qm) * measure.m1


def dirac_diagnostic(measure: EmpiricalYoungMeasure) -> np.ndarray:
    """Per-cell variance of the histogram; concentration to a point state
    shows up as this going to zero along a fidelity ladder."""
    mids = measure.bin_midpoints
    mean = measure.weights @ mids
    second = measure.weights @ (mids * mids)
    return second - mean * mean


def tensor_distance(nu: EmpiricalYoungMeasure,
                    sigma: EmpiricalYoungMeasure) -> np.ndarray:
    """Slab series of the mixed functional A(t): per time slab the spatial
    sum of the double histogram pairing with |lambda - mu|.

    Returns an (n_t_coarse, 2) array of (slab_time, A) rows.
    """
    if not nu.same_partition(sigma):
        raise DimensionError("measures use different partitions")
    mids = nu.bin_midpoints
    kernel = np.abs(mids[:, None] - mids[None, :])
    # per cell: w_nu . kernel . w_sigma
    cellvals = np.einsum("txi,ij,txj->tx", nu.weights, kernel, sigma.weights)
    a_series = nu.dx_coarse * np.sum(cellvals, axis=1)
    return np.column_stack([nu.slab_times, a_series])


@dataclass
class ContractionReport:
    slab_times: np.ndarray
    values: np.ndarray        # A(t) + clipped masses, per slab
    bound: float              # first-slab value * (1 + slack)
    per_slab_ok: np.ndarray
    ok: bool


def contraction_check(nu: EmpiricalYoungMeasure, sigma: EmpiricalYoungMeasure,
                      slack: float = 0.10) -> ContractionReport:
    """Averaged-contraction analogue on slabs: A(t) plus both concentration
    masses must stay within the first slab's value (up to slack)."""
    a = tensor_distance(nu, sigma)
    conc = np.sum(nu.m1, axis=1) + np.sum(sigma.m1, axis=1)
    vals = a[:, 1] + conc
    bound = vals[0] * (1.0 + slack) + 1e-12
    ok = vals <= bound
    return ContractionReport(a[:, 0], vals, bound, ok, bool(np.all(ok)))


@dataclass
class FundamentalLemmaReport:
    gaps: np.ndarray          # per member, max over test weights
    per_weight_gaps: np.ndarray
    decreasing: bool


def fundamental_lemma_check(inp: MeasureSequenceInput, g,
                            growth: tuple = (10.0, 2.0),
                            bins: int = DEFAULT_BINS, R: float = 2.0,
                            coarse: tuple = DEFAULT_COARSE,
                            slack: float = 0.10) -> FundamentalLemmaReport:
    """Weak-limit representation check along a fidelity ladder.

    For each member u_k and a fixed bank of bounded space-time weights,
    compare the direct space-time average of g(u_k) with the pairing of the
    measure built from the final member. The gap sequence must decrease in
    k up to the given slack.
    """
    if len(inp.members) < 3:
        raise InvalidInputError("need at least three members of increasing fidelity")
    c_growth, q_growth = growth
    measure = build_measure(inp, bins=bins, R=R, coarse=coarse)
    mids = measure.bin_midpoints
    gm = np.asarray(g(mids), dtype=float)

    def check_growth(vals):
        bound = c_growth * (1.0 + np.abs(vals) ** q_growth)
        gv = np.asarray(g(vals), dtype=float)
        if np.any(np.abs(gv) > bound):
            raise GrowthBoundError(
                f"|g| exceeds C(1+|v|^q) with C={c_growth}, q={q_growth}"
            )
        return gv

    check_growth(mids)

    grid = inp.grid
    times = inp.times
    n_t, n_x = len(times), grid.n_cells
    n_xc, n_tc = measure.n_x_coarse, measure.n_t_coarse
    # bounded test weights: indicator-like smooth bumps on a 2x2 lattice
    x = grid.cell_centers
    phis = []
    for ix in range(2):
        for it in range(2):
            xc = (ix + 0.5) * grid.length / 2
            tc = (it + 0.5) * times[-1] / 2
            wx = (x - xc) / (grid.length / 3)
            prof_x = np.exp(-np.clip(wx * wx, 0, 50.0) * 4.0)
            wt = (times - tc) / (times[-1] / 3)
            prof_t = np.exp(-np.clip(wt * wt, 0, 50.0) * 4.0)
            phis.append(np.outer(prof_t, prof_x))

    wt_time = np.full(n_t, times[1] - times[0])
    wt_time[0] = wt_time[-1] = 0.5 * (times[1] - times[0])
    dx = grid.dx
    t_bounds = [(it * n_t) // n_tc for it in range(n_tc + 1)]
    x_bounds = [(ix * n_x) // n_xc for ix in range(n_xc + 1)]

    pair_cells = measure.weights @ gm     # (n_tc, n_xc)
    per_weight = np.empty((len(inp.members), len(phis)))
    for ki, tr in enumerate(inp.members):
        arr = tr.values_array()
        gvals = check_growth(arr)
        for pi, phi in enumerate(phis):
            lhs = float(np.sum(wt_time[:, None] * gvals * phi) * dx)
            rhs = 0.0
            for it in range(n_tc):
                for ix in range(n_xc):
                    block = phi[t_bounds[it]:t_bounds[it + 1],
                                x_bounds[ix]:x_bounds[ix + 1]]
                    cell_phi_mass = float(
                        np.sum(wt_time[t_bounds[it]:t_bounds[it + 1], None] * block) * dx
                    )
                    rhs += pair_cells[it, ix] * cell_phi_mass
            per_weight[ki, pi] = abs(lhs - rhs)
    gaps = per_weight.max(axis=1)
    decreasing = bool(np.all(gaps[1:] <= gaps[:-1] * (1.0 + slack) + 1e-14))
    return FundamentalLemmaReport(gaps, per_weight, decreasing)
