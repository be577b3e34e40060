"""Frequency-plane geometry: sectors, restricted strips, multipliers, overlap.

For an interval J = (a, b) of slopes, the restricted strip with center
c in (a, b) is

    S_c(J) = { (x1, x2) : x1 > 1/(b - a),  |x2 - c x1| <= 5 },

a slab of half-width 5 around the slope-c ray, activated only beyond the
frequency 1/|J|.  For a complete lacunary decomposition the strips attached
to the poled rank intervals overlap at most ``MAX_POLE_STRIP_OVERLAP`` (40)
times at any point, and the endpoint strips of the top-rank intervals at
most ``MAX_TOP_OVERLAP`` (12) times; ``max_overlap`` computes the exact
maxima by an activation sweep (see its docstring for the exactness
argument).

``sector_multiplier`` applies the sharp frequency cutoff 1_S to a sampled
function: an orthogonal projection on the discrete Fourier lattice, hence
exactly idempotent and self-adjoint, with Parseval intact.

``support_containment_check`` verifies the geometric heart of the smoothed
operator decomposition: the spectral band of one dyadic piece of the kernel,

    { r_k <= xi1 <= 2 r_{k+1}, |xi2 - theta xi1| < 1 },     r_k = 1/|J_k|,

lies inside the strip S_{p_k}(J_k) whenever the interval chain satisfies the
pole-gap condition |J_{k+1}|/2 <= dist(p_k, J_{k+1}) <= |J_{k+1}|.  The band
is written on the x2 ~ +theta x1 side; the convolution kernel's transform
lives on the mirrored side, so equivalently this checks the reflected band.
The sign convention is fixed globally here and in the containment report.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np

from .errors import InvalidArgument, PreconditionViolation
from .grid_ops import Grid2D, OperatorConfig, gamma_op, m1, strong_maximal
from .lacunary import DirectionSet, LacunaryDecomposition, RankInterval

__all__ = [
    "Strip",
    "Sector",
    "FrequencyBand",
    "strip_contains",
    "overlap_count",
    "max_overlap",
    "max_overlap_with_argmax",
    "sector_multiplier",
    "support_containment_check",
    "ContainmentReport",
    "validate_pole_gap_chain",
    "random_pole_gap_chain",
    "domination_ratio",
    "strip_decomposition_report",
    "strip_multiplier_energy",
    "MAX_POLE_STRIP_OVERLAP",
    "MAX_TOP_OVERLAP",
    "STRIP_HALF_WIDTH",
]

STRIP_HALF_WIDTH = 5.0
MAX_POLE_STRIP_OVERLAP = 40
MAX_TOP_OVERLAP = 12


@dataclass(frozen=True)
class Strip:
    """Restricted strip S_c(J): x1 > 1/(hi-lo), |x2 - c x1| <= half_width."""

    slope_lo: float
    slope_hi: float
    center: float
    half_width: float = STRIP_HALF_WIDTH

    def __post_init__(self):
        if not (self.slope_lo < self.center < self.slope_hi):
            raise InvalidArgument(
                f"center {self.center} outside ({self.slope_lo}, {self.slope_hi})"
            )

    @property
    def min_x1(self) -> float:
        return 1.0 / (self.slope_hi - self.slope_lo)


@dataclass(frozen=True)
class Sector:
    """Sector of slopes a <= x2/x1 <= b in the right half plane x1 > 0."""

    slope_lo: float
    slope_hi: float

    def __post_init__(self):
        if not (self.slope_lo < self.slope_hi):
            raise InvalidArgument("sector needs slope_lo < slope_hi")


@dataclass(frozen=True)
class FrequencyBand:
    """Spectral band xi1 in [xi1_lo, xi1_hi], |xi2 - theta xi1| < bump_halfwidth."""

    xi1_lo: float
    xi1_hi: float
    theta: float
    bump_halfwidth: float = 1.0

    def __post_init__(self):
        if not (0.0 <= self.xi1_lo < self.xi1_hi):
            raise InvalidArgument("band needs 0 <= xi1_lo < xi1_hi")

    def corners(self) -> list[tuple[float, float]]:
        out = []
        for x1 in (self.xi1_lo, self.xi1_hi):
            for sgn in (-1.0, 1.0):
                out.append((x1, self.theta * x1 + sgn * self.bump_halfwidth))
        return out


def strip_contains(strip: Strip, p: tuple[float, float]) -> bool:
    """Membership in the strip; the x1 bound is strict, the slab bound closed."""
    x1, x2 = p
    return x1 > strip.min_x1 and abs(x2 - strip.center * x1) <= strip.half_width


# ---------------------------------------------------------------------------
# overlap counting
# ---------------------------------------------------------------------------


def _strip_arrays(decomp: LacunaryDecomposition, require_poles: bool):
    """(tau, center) arrays for the poled strips and (tau, a, b) for top rank.

    tau = 1/|J| is the activation threshold of a strip.  Rank <= mu-1
    intervals without a pole contribute no strip; with ``require_poles`` they
    raise instead (a complete decomposition always has them).

    Top-rank intervals that contain a pole are excluded: such a gap only
    exists because each lacunary sequence is truncated at finite depth, and
    stands in for its untruncated continuation (an accumulating cascade of
    ever finer gaps, none of which contains the pole).  Every other adjacent
    interval of the truncated set is an adjacent interval of the untruncated
    completion as well, so the endpoint-strip count tested here is the
    faithful finite realization.
    """
    mu = decomp.order
    poles = np.asarray(sorted(decomp.poles))
    tau_low, centers = [], []
    top_tau, top_centers = [], []
    for j in decomp.rank_intervals:
        if j.rank <= mu - 1:
            if j.pole is None:
                if require_poles:
                    raise InvalidArgument(
                        f"rank-{j.rank} interval ({j.lo}, {j.hi}) has no pole; "
                        "overlap needs a complete decomposition "
                        "(or pass require_poles=False to skip such intervals)"
                    )
                continue
            tau_low.append(1.0 / j.width)
            centers.append(j.pole)
        if j.rank == mu:
            if len(poles):
                k = int(np.searchsorted(poles, j.lo, side="right"))
                if k < len(poles) and poles[k] < j.hi:
                    continue  # truncation stand-in, see above
            top_tau.extend((1.0 / j.width, 1.0 / j.width))
            top_centers.extend((j.lo, j.hi))
    return (
        np.asarray(tau_low),
        np.asarray(centers),
        np.asarray(top_tau),
        np.asarray(top_centers),
    )


def overlap_count(
    decomp: LacunaryDecomposition,
    p: tuple[float, float],
    require_poles: bool = True,
) -> tuple[int, int]:
    """(n_low, n_top) strip membership counts at one frequency point.

    n_low counts the pole strips S_{p_J}(J) over rank <= mu-1 intervals;
    n_top counts the endpoint strips S_a(J), S_b(J) over top-rank intervals
    with multiplicity.
    """
    x1, x2 = float(p[0]), float(p[1])
    if not x1 > 0:
        raise InvalidArgument("overlap is defined on the half plane x1 > 0")
    tau_l, cen_l, tau_t, cen_t = _strip_arrays(decomp, require_poles)

    def count(tau, cen):
        if len(tau) == 0:
            return 0
        act = x1 > tau
        hit = np.abs(x2 - cen * x1) <= STRIP_HALF_WIDTH
        return int(np.sum(act & hit))

    return count(tau_l, cen_l), count(tau_t, cen_t)


def _sweep_max(tau: np.ndarray, centers: np.ndarray) -> tuple[int, tuple[float, float]]:
    """Exact maximum of sum_J 1_{S}(x) over the half plane, with an argmax.

    In slope coordinates sigma = x2/x1 a strip is active once x1 exceeds its
    threshold tau and then covers |sigma - center| <= 5/x1: a ball around its
    center whose radius shrinks as x1 grows.  Between consecutive activation
    thresholds the active set is fixed and every ball only shrinks, so the
    count at any fixed sigma is non-increasing there; maxima therefore occur
    immediately after activations, and only windows containing the newly
    activated center can set a record.  Sweeping activations in order and
    scanning the window of width 10/x1 around each new center is exact up to
    the measure-zero configurations where a maximum is achieved only in the
    limit x1 -> tau+ (the strict x1 bound excludes the threshold itself);
    evaluation uses x1 = tau * (1 + 1e-12).
    """
    if len(tau) == 0:
        return 0, (1.0, 0.0)
    order = np.argsort(tau, kind="stable")
    tau, centers = tau[order], centers[order]
    best, arg = 0, (float(tau[0]) * 2.0, float(centers[0]) * 2.0 * tau[0])
    active = np.empty(len(tau))
    n_act = 0
    for t, c in zip(tau, centers):
        pos = int(np.searchsorted(active[:n_act], c))
        active[pos + 1 : n_act + 1] = active[pos:n_act].copy()
        active[pos] = c
        n_act += 1
        x1 = t * (1.0 + 1e-12)
        width = 2.0 * STRIP_HALF_WIDTH / x1
        arr = active[:n_act]
        lo = int(np.searchsorted(arr, c - width, side="left"))
        hi = int(np.searchsorted(arr, c + width, side="right"))
        if hi - lo <= best:
            continue
        # best window of width ``width`` covering c, left edge at a member
        cut = int(np.searchsorted(arr, c, side="right"))
        starts = arr[lo:cut]
        ends = starts + width
        cnts = (
            np.searchsorted(arr, ends, side="right")
            - np.searchsorted(arr, starts, side="left")
        )
        cnts = np.where(ends >= c, cnts, 0)
        k = int(np.argmax(cnts))
        if cnts[k] > best:
            best = int(cnts[k])
            arg = (x1, (starts[k] + 0.5 * width) * x1)
    return best, arg


def max_overlap(
    decomp: LacunaryDecomposition, require_poles: bool = True
) -> tuple[int, int]:
    """Exact maxima of the two overlap counts over all frequency points."""
    n_low, n_top, _, _ = max_overlap_with_argmax(decomp, require_poles)
    return n_low, n_top


def max_overlap_with_argmax(
    decomp: LacunaryDecomposition, require_poles: bool = True
):
    """As ``max_overlap`` but also reporting witness points."""
    tau_l, cen_l, tau_t, cen_t = _strip_arrays(decomp, require_poles)
    n_low, arg_low = _sweep_max(tau_l, cen_l)
    n_top, arg_top = _sweep_max(tau_t, cen_t)
    return n_low, n_top, arg_low, arg_top


# ---------------------------------------------------------------------------
# sharp frequency cutoffs
# ---------------------------------------------------------------------------


def _region_mask(region: Union[Strip, Sector], xi1: np.ndarray, xi2: np.ndarray):
    if isinstance(region, Strip):
        return (xi1 > region.min_x1) & (
            np.abs(xi2 - region.center * xi1) <= region.half_width
        )
    if isinstance(region, Sector):
        with np.errstate(divide="ignore", invalid="ignore"):
            slope = np.where(xi1 != 0.0, xi2 / np.where(xi1 != 0, xi1, 1.0), np.inf)
        return (xi1 > 0) & (slope >= region.slope_lo) & (slope <= region.slope_hi)
    raise InvalidArgument(f"unsupported region {type(region).__name__}")


def _reflected_strip_mask(strip: Strip, xi1: np.ndarray, xi2: np.ndarray):
    """Strip membership in the rotated frequency frame (u, v) = (xi2, -xi1).

    The directional smoothing kernel V_r(x2 - a x1) phi_h(x1) has transform
    vhat_r(xi2) phihat_h(xi1 + a xi2), concentrated near the rotated ray
    v = a u; rotating the frame maps that support onto the standard strip
    picture, so strip multipliers meant to capture kernel pieces are
    evaluated here.  The rotation is the package-wide sign convention for
    relating kernel spectra to strips.
    """
    u, v = xi2, -xi1
    return _region_mask(strip, u, v) | _region_mask(strip, -u, -v)


def frequency_lattice(f: Grid2D) -> tuple[np.ndarray, np.ndarray]:
    """Angular frequency coordinates of the grid's DFT bins (xi1 cols, xi2 rows)."""
    xi1 = 2.0 * math.pi * np.fft.fftfreq(f.width, d=f.spacing)
    xi2 = 2.0 * math.pi * np.fft.fftfreq(f.height, d=f.spacing)
    return xi1, xi2


def sector_multiplier(f: Grid2D, region: Union[Strip, Sector]) -> Grid2D:
    """Sharp frequency restriction: inverse transform of 1_region * fhat.

    Computed on the grid's own Fourier lattice, so the operator is an
    orthogonal projection there: exactly idempotent, self-adjoint, and
    Parseval-compatible.  The output is complex for regions that are not
    symmetric under xi -> -xi (restricted strips are not).
    """
    xi1, xi2 = frequency_lattice(f)
    mask = _region_mask(region, xi1[None, :], xi2[:, None])
    fhat = np.fft.fft2(f.values)
    out = np.fft.ifft2(fhat * mask)
    return f.with_values(out)


def strip_multiplier_energy(
    decomp: LacunaryDecomposition, f: Grid2D, require_poles: bool = True
) -> tuple[float, float, int]:
    """(sum_J ||T_{S_{p_J}(J)} f||_2^2, ||f||_2^2, lattice overlap max).

    By Parseval each term is the spectral energy inside one strip, so the sum
    equals the integral of |fhat|^2 against the strip overlap count; the
    count never exceeds MAX_POLE_STRIP_OVERLAP, which bounds the ratio.
    """
    tau_l, cen_l, _, _ = _strip_arrays(decomp, require_poles)
    xi1, xi2 = frequency_lattice(f)
    fhat = np.fft.fft2(f.values)
    power = np.abs(fhat) ** 2
    count = np.zeros_like(power, dtype=np.int64)
    x1 = xi1[None, :]
    x2 = xi2[:, None]
    for t, c in zip(tau_l, cen_l):
        count += (x1 > t) & (np.abs(x2 - c * x1) <= STRIP_HALF_WIDTH)
    total = float(np.sum(power * count))
    denom = float(np.sum(power))
    scale = f.spacing**2 / (f.width * f.height)
    return total * scale, denom * scale, int(count.max(initial=0))


# ---------------------------------------------------------------------------
# pole-gap chains and band containment
# ---------------------------------------------------------------------------


def validate_pole_gap_chain(chain: Sequence[RankInterval]) -> None:
    """Check nesting and |J_{k+1}|/2 <= dist(p_k, J_{k+1}) <= |J_{k+1}|.

    Every interval except possibly the last must carry a pole.  Raises
    PreconditionViolation naming the first offending index (1-based).
    """
    for k in range(len(chain) - 1):
        j, jn = chain[k], chain[k + 1]
        if not (j.lo <= jn.lo and jn.hi <= j.hi):
            raise PreconditionViolation(f"chain not nested at k={k + 1}")
        if j.pole is None:
            raise PreconditionViolation(f"interval k={k + 1} lacks a pole")
        dist = max(jn.lo - j.pole, j.pole - jn.hi, 0.0)
        w = jn.width
        if not (0.5 * w <= dist <= w):
            raise PreconditionViolation(
                f"pole-gap condition fails at k={k + 1}: "
                f"dist={dist:.6g} not in [{0.5 * w:.6g}, {w:.6g}]"
            )


def random_pole_gap_chain(
    rng: np.random.Generator, n: int, domain: tuple[float, float] = (0.0, 1.0)
) -> list[RankInterval]:
    """Random nested interval chain satisfying the pole-gap condition.

    Each step places the next interval on a random side of the current pole
    with dist(p_k, J_{k+1}) uniform in [|J_{k+1}|/2, |J_{k+1}|].  The last
    interval carries no pole (the containment check substitutes theta there).
    """
    if n < 1:
        raise InvalidArgument("chain length must be >= 1")
    lo, hi = domain
    out: list[RankInterval] = []
    for k in range(1, n + 1):
        if k == 1:
            w = (hi - lo) * rng.uniform(0.5, 0.9)
            jlo = lo + (hi - lo - w) * rng.random()
            jhi = jlo + w
        else:
            prev = out[-1]
            p = prev.pole
            room_r, room_l = prev.hi - p, p - prev.lo
            go_right = room_r >= room_l
            if rng.random() < 0.35:
                go_right = not go_right
            room = room_r if go_right else room_l
            w = room * rng.uniform(0.15, 0.4)
            d = w * rng.uniform(0.5, 1.0)  # d + w <= 0.8 room, so J stays inside
            if go_right:
                jlo, jhi = p + d, p + d + w
            else:
                jlo, jhi = p - d - w, p - d
        pole = None
        if k < n:
            pole = jlo + (jhi - jlo) * rng.uniform(0.25, 0.75)
        out.append(RankInterval(jlo, jhi, k, pole))
    validate_pole_gap_chain(out)
    return out


@dataclass(frozen=True)
class BandCheck:
    k: int
    band: FrequencyBand
    strip: Strip
    corner_margin: float  # min over corners of half_width - |xi2 - c xi1|
    lattice_margin: Optional[float]
    contained: bool


@dataclass(frozen=True)
class ContainmentReport:
    m: int
    checks: tuple[BandCheck, ...]

    @property
    def all_contained(self) -> bool:
        return all(c.contained for c in self.checks)

    @property
    def min_margin(self) -> float:
        return min((c.corner_margin for c in self.checks), default=math.inf)


def support_containment_check(
    chain: Sequence[RankInterval],
    theta: float,
    R: float,
    samples: int = 512,
) -> ContainmentReport:
    """Check that each dyadic kernel band lands inside its strip.

    With r_k = 1/|J_k| and m = max{k : 2 r_k < R}, the k-th band is
    [r_k, 2 r_{k+1}] x {|xi2 - theta xi1| < 1} (the last band, k = n, runs to
    2R and is checked against the strip centered at theta itself).  The band
    and the strip are convex, so corner containment proves containment; a
    ``samples`` x ``samples`` lattice adds margin diagnostics (pass 0 to skip).
    The x1 edge xi1 = r_k coincides with the strip activation threshold; the
    check accepts the closure there and reports margins for the slab bound.
    """
    if not chain:
        raise InvalidArgument("chain must be nonempty")
    validate_pole_gap_chain(chain)
    n = len(chain)
    if not (chain[0].lo <= theta <= chain[0].hi):
        raise InvalidArgument("theta must lie in the outer interval")
    if not (chain[-1].lo <= theta <= chain[-1].hi):
        raise InvalidArgument("theta must lie in the last interval")
    r = [1.0 / j.width for j in chain]
    m = 0
    for k in range(1, n + 1):
        if 2.0 * r[k - 1] < R:
            m = k
    checks = []
    for k in range(1, m + 1):
        if k < n:
            band = FrequencyBand(r[k - 1], 2.0 * r[k], theta)
            strip = Strip(chain[k - 1].lo, chain[k - 1].hi, chain[k - 1].pole)
        else:
            band = FrequencyBand(r[k - 1], 2.0 * R, theta)
            center = theta
            if not (chain[k - 1].lo < center < chain[k - 1].hi):
                # theta on the interval boundary: the slab test is what matters
                center = np.clip(
                    center,
                    np.nextafter(chain[k - 1].lo, chain[k - 1].hi),
                    np.nextafter(chain[k - 1].hi, chain[k - 1].lo),
                )
            strip = Strip(chain[k - 1].lo, chain[k - 1].hi, float(center))
        margin = min(
            strip.half_width - abs(x2 - strip.center * x1)
            for x1, x2 in band.corners()
        )
        x1_ok = band.xi1_lo >= strip.min_x1 - 1e-12 * max(1.0, strip.min_x1)
        lat_margin = None
        if samples > 0:
            x1 = np.linspace(band.xi1_lo, band.xi1_hi, samples)
            x2 = theta * x1[None, :] + np.linspace(
                -band.bump_halfwidth, band.bump_halfwidth, samples
            )[:, None]
            lat_margin = float(
                np.min(strip.half_width - np.abs(x2 - strip.center * x1[None, :]))
            )
        checks.append(
            BandCheck(k, band, strip, float(margin), lat_margin, bool(margin >= 0 and x1_ok))
        )
    return ContainmentReport(m, tuple(checks))


# ---------------------------------------------------------------------------
# empirical domination checks
# ---------------------------------------------------------------------------


def _slope_angle(slope: float) -> float:
    return math.atan(slope) / (2.0 * math.pi)


def iterated_maximal(f: Grid2D, slope: float, cfg: OperatorConfig) -> Grid2D:
    """M_slope M_vertical f: vertical maximal first, then along (1, slope)."""
    inner = m1(f.abs(), DirectionSet((0.25,)), cfg)
    return m1(inner, DirectionSet((_slope_angle(slope),)), cfg)


def domination_ratio(
    f: Grid2D,
    alpha: float,
    beta: float,
    r: float,
    h: float,
    cfg: OperatorConfig,
    check_truncation: bool = True,
    interior_margin: float = 0.0,
) -> float:
    """Empirical constant in |Gamma_{alpha,r,h} f| <= C (h r |a-b| + 1) M_b M_perp f.

    Returns the max over pixels of the left side divided by the normalized
    right side; 0/0 counts as 0, and a zero denominator against a nonzero
    numerator reports +inf (a discretization artifact worth seeing).

    ``interior_margin`` restricts the sup to pixels at least that far from
    every grid edge.  Near corners the zero-extended composition loses the
    inner maximal field's off-grid values (the continuum line through such a
    pixel sees the support from outside the sampled window), deflating the
    denominator by orders of magnitude; a margin comparable to the top
    radius keeps the comparison where the discretization is faithful.
    """
    if not (0.0 < alpha < 1.0 and 0.0 < beta < 1.0):
        raise InvalidArgument("alpha and beta must lie in (0, 1)")
    fa = f.abs()
    num = np.abs(gamma_op(fa, alpha, r, h, check_truncation=check_truncation).values)
    den = (h * r * abs(alpha - beta) + 1.0) * iterated_maximal(fa, beta, cfg).values
    if interior_margin > 0.0:
        keep = f.interior_mask(interior_margin)
        num = num[keep]
        den = den[keep]
    pos = den > 0
    if np.any(~pos & (num > 1e-12 * max(1.0, float(num.max())))):
        return math.inf
    ratio = np.zeros_like(num)
    np.divide(num, den, out=ratio, where=pos)
    return float(ratio.max())


@dataclass(frozen=True)
class DominationReport:
    max_ratio: float
    argmax: tuple[int, int]
    lhs: Grid2D
    rhs: Grid2D


def strip_decomposition_report(
    f: Grid2D,
    chain: Sequence[RankInterval],
    theta: float,
    R: float,
    cfg: OperatorConfig,
    h: float = 0.25,
    check_truncation: bool = False,
) -> DominationReport:
    """Pointwise ratio of the smoothed operator to its strip-multiplier bound.

    Left side: |Gamma_{theta,R} f|.  Right side: the strong maximal field
    plus iterated maximal fields of the strip multipliers, one for the
    theta-centered strip of the innermost interval and one per chain pole.
    The bound hides an absolute constant, so the ratio is reported, not
    asserted against a fixed number.  ``h`` rescales the bump; the operator
    family is scaling invariant in h, and moderate h keeps the sampled
    kernel's mass inside the grid.
    """
    validate_pole_gap_chain(chain)
    n = len(chain)
    if not (chain[-1].lo <= theta <= chain[-1].hi):
        raise InvalidArgument("theta must lie in the innermost interval")
    fa = f.abs()
    lhs = np.abs(gamma_op(fa, theta, R, h, check_truncation=check_truncation).values)
    rhs = strong_maximal(fa, cfg).values.copy()
    last = chain[-1]
    c_theta = float(
        np.clip(theta, np.nextafter(last.lo, last.hi), np.nextafter(last.hi, last.lo))
    )
    pieces = [(Strip(last.lo, last.hi, c_theta), theta)]
    for k in range(n - 1):
        j = chain[k]
        pieces.append((Strip(j.lo, j.hi, j.pole), j.pole))
    xi1, xi2 = frequency_lattice(f)
    fhat = np.fft.fft2(fa.values)
    for strip, slope in pieces:
        # kernel spectra live in the rotated frame; mask the matching region
        mask = _reflected_strip_mask(strip, xi1[None, :], xi2[:, None])
        tf = f.with_values(np.fft.ifft2(fhat * mask))
        rhs += iterated_maximal(tf.abs(), slope, cfg).values
    pos = rhs > 0
    ratio = np.zeros_like(lhs)
    np.divide(lhs, rhs, out=ratio, where=pos)
    idx = int(np.argmax(ratio))
    return DominationReport(
        float(ratio.max()),
        (idx // f.width, idx % f.width),
        f.with_values(lhs),
        f.with_values(rhs),
    )
