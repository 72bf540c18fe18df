"""Periodic orbits of the plane quadratic map.

Enumeration runs damped Newton on p -> f^n(p) - p from three seed pools:
the closed-form fixed points, one shadowing seed per binary necklace when
the parameters pass the horseshoe test (alternating square-root branches
along the itinerary), and low-discrepancy points in the bidisk of radius
R.  Orbits deduplicate by cyclic alignment, carry multiplier eigenvalues
and a hyperbolicity class, and aggregate into equal-weight measures, the
saddle-count table, and the all-real/entropy report.
"""

from __future__ import annotations

import cmath
import csv
import json
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy.stats import qmc

from .dynamics import (MapParams, PointC2, derivative_along_orbit,
                       is_horseshoe_regime)
from .errors import ContractError
from .measures import DiscreteMeasure
from .symbolic import necklaces

DEDUP_TOL = 1e-7
REALITY_TOL = 1e-7
UNIT_BAND = 1e-8
ORBIT_CLASSES = ("saddle", "sink", "source", "nonhyperbolic")


@dataclass(frozen=True)
class PeriodicOrbit:
    """One periodic cycle: points in orbit order, minimal period, multipliers.

    multiplier_eigenvalues are the eigenvalues of the derivative of f^period
    at points[0], largest modulus first; their product has modulus |b|^period
    because every Jacobian factor has determinant b.
    """

    points: tuple
    period: int
    multiplier_eigenvalues: tuple
    orbit_class: str
    is_real: bool
    residual: float
    multiplicity: int = 1
    degenerate: bool = False

    def __post_init__(self):
        if self.period < 1 or len(self.points) != self.period:
            raise ContractError("period must match the point count")
        if self.orbit_class not in ORBIT_CLASSES:
            raise ContractError(f"unknown orbit class {self.orbit_class!r}")
        if self.multiplicity < 1:
            raise ContractError("multiplicity must be >= 1")

    @property
    def max_imag(self) -> float:
        return max(max(abs(p.x.imag), abs(p.y.imag)) for p in self.points)


def _classify(eigs) -> str:
    moduli = [abs(v) for v in eigs]
    if any(abs(mod - 1.0) <= UNIT_BAND for mod in moduli):
        return "nonhyperbolic"
    if all(mod < 1.0 for mod in moduli):
        return "sink"
    if all(mod > 1.0 for mod in moduli):
        return "source"
    return "saddle"


def _orbit_scale(points) -> float:
    return 1.0 + max(max(abs(p.x), abs(p.y)) for p in points) ** 2


def _build_orbit(points, m: MapParams, multiplicity: int = 1,
                 degenerate: bool = False) -> PeriodicOrbit | None:
    """Assemble and verify an orbit from a polished point cycle."""
    d = len(points)
    resid = 0.0
    for j, p in enumerate(points):
        q = points[(j + 1) % d]
        fx = -p.x * p.x + m.a - m.b * p.y
        resid = max(resid, abs(fx - q.x), abs(p.x - q.y))
    if resid > 1e-9 * _orbit_scale(points):
        return None
    J = derivative_along_orbit(points, m)
    eigs = np.linalg.eigvals(J)
    order = np.lexsort((eigs.imag, eigs.real, np.abs(eigs)))[::-1]
    eigs = tuple(complex(v) for v in eigs[order])
    is_real = all(abs(p.x.imag) < REALITY_TOL and abs(p.y.imag) < REALITY_TOL
                  for p in points)
    return PeriodicOrbit(tuple(points), d, eigs, _classify(eigs), is_real,
                         resid, multiplicity, degenerate)


def fixed_points_closed_form(m: MapParams):
    """Fixed points from x = y, x^2 + (1+b)x - a = 0, with classification."""
    beta = 1.0 + m.b
    disc = beta * beta + 4.0 * m.a
    if disc == 0:
        x = -0.5 * beta
        orb = _build_orbit((PointC2(x, x),), m, multiplicity=2, degenerate=True)
        return [orb]
    sq = cmath.sqrt(disc)
    if (beta.conjugate() * sq).real < 0.0:
        sq = -sq
    # stable split: the large root first, the small one via the product -a
    r1 = -0.5 * (beta + sq)
    r2 = -m.a / r1 if r1 != 0 else -beta
    out = []
    for x in (r1, r2):
        orb = _build_orbit((PointC2(x, x),), m)
        if orb is not None:
            out.append(orb)
    return out


def _divisors(n: int):
    return [d for d in range(1, n + 1) if n % d == 0]


def _cycle_defect(P: np.ndarray, m: MapParams) -> np.ndarray | None:
    """Per-step closure defect f(p_j) - p_{j+1} over a candidate cycle."""
    X, Y = P[:, 0], P[:, 1]
    if not np.all(np.isfinite(X)) or not np.all(np.isfinite(Y)):
        return None
    F = np.empty_like(P)
    F[:, 0] = -X * X + m.a - m.b * Y - np.roll(X, -1)
    F[:, 1] = X - np.roll(Y, -1)
    return F


def _newton_cycle(m: MapParams, init_pts) -> np.ndarray | None:
    """Damped Newton on the cyclic system f(p_j) = p_{j+1}, all points at
    once.  Solving the closure equations simultaneously keeps the residual
    at rounding level for any period; composing f^n instead would bury
    orbits with a strong multiplier under |lambda|^n amplification of
    rounding noise.
    """
    P = np.array(init_pts, dtype=complex).reshape(-1, 2)
    n = P.shape[0]
    dim = 2 * n
    rows = np.arange(n)
    for _ in range(60):
        F = _cycle_defect(P, m)
        if F is None:
            return None
        n_f = float(np.max(np.abs(F)))
        scale = 1.0 + float(np.max(np.abs(P))) ** 2
        if n_f < 1e-12 * scale:
            return P
        A = np.zeros((dim, dim), dtype=complex)
        A[2 * rows, 2 * rows] = -2.0 * P[:, 0]
        A[2 * rows, 2 * rows + 1] = -m.b
        A[2 * rows, (2 * rows + 2) % dim] = -1.0
        A[2 * rows + 1, 2 * rows] = 1.0
        A[2 * rows + 1, (2 * rows + 3) % dim] = -1.0
        try:
            delta = np.linalg.solve(A, F.ravel())
        except np.linalg.LinAlgError:
            return None
        if not np.all(np.isfinite(delta)):
            return None
        delta = delta.reshape(n, 2)
        step = 1.0
        for _ in range(20):
            Q = P - step * delta
            F2 = _cycle_defect(Q, m)
            if F2 is not None and float(np.max(np.abs(F2))) < n_f:
                P = Q
                break
            step *= 0.5
        else:
            return None
    return None


def _seed_cycle(m: MapParams, n: int, x0: complex, y0: complex):
    """Initial cycle for Newton: iterate a single seed point n-1 steps."""
    P = np.empty((n, 2), dtype=complex)
    x, y = complex(x0), complex(y0)
    for j in range(n):
        if max(abs(x), abs(y)) > 1e50 or not (cmath.isfinite(x)
                                              and cmath.isfinite(y)):
            return None
        P[j, 0], P[j, 1] = x, y
        x, y = -x * x + m.a - m.b * y, x
    return P


def symbolic_orbit_seed(m: MapParams, bits, sweeps: int = 60):
    """Shadowing seed for the cycle with itinerary `bits` (horseshoe only).

    Solves x_j^2 = a - x_{j+1} - b x_{j-1} cyclically by branch-respecting
    square-root sweeps; the branch argument stays off the cut because the
    horseshoe test guarantees |a| clears (1+|b|)R.  Returns the full
    candidate cycle as an (n, 2) array of (x_j, y_j) = (x_j, x_{j-1}).
    """
    sign = np.where(np.asarray(bits) == 1, 1.0, -1.0).astype(complex)
    x = sign * cmath.sqrt(abs(m.a))
    for _ in range(sweeps):
        x = sign * np.sqrt(m.a - np.roll(x, -1) - m.b * np.roll(x, 1))
    return np.stack([x, np.roll(x, 1)], axis=1)


def _halton_seeds(m: MapParams, count: int, rng_seed):
    sampler = qmc.Halton(d=4, scramble=True, seed=rng_seed)
    rows = sampler.random(count)
    span = 2.0 * m.R
    rows = span * rows - m.R
    for r in rows:
        yield complex(r[0], r[1]), complex(r[2], r[3])


def _minimal_period(pts, n: int) -> int:
    for d in _divisors(n):
        if d == n:
            return n
        ok = True
        for j in range(n):
            pa, pb = pts[j], pts[(j + d) % n]
            if max(abs(pa[0] - pb[0]), abs(pa[1] - pb[1])) > DEDUP_TOL:
                ok = False
                break
        if ok:
            return d
    return n


def _same_cycle(points_a, points_b, tol: float = DEDUP_TOL) -> bool:
    d = len(points_a)
    if d != len(points_b):
        return False
    for shift in range(d):
        if all(max(abs(points_a[j].x - points_b[(j + shift) % d].x),
                   abs(points_a[j].y - points_b[(j + shift) % d].y)) <= tol
               for j in range(d)):
            return True
    return False


@dataclass(frozen=True)
class PeriodicLevel:
    """All solutions of f^n(p) = p found for one n, grouped into cycles."""

    n: int
    orbits: tuple
    fixed_point_count: int
    complete: bool
    attempts: int

    @property
    def minimal_orbits(self) -> tuple:
        return tuple(o for o in self.orbits if o.period == self.n)

    @property
    def fixed_points(self) -> list:
        return [p for o in self.orbits for p in o.points]

    def minimal_point_count(self, saddles_only: bool = False) -> int:
        total = 0
        for o in self.minimal_orbits:
            if saddles_only and o.orbit_class != "saddle":
                continue
            total += o.period * o.multiplicity
        return total


def periodic_points_2d(m: MapParams, n: int, budget: int = 2048,
                       rng_seed=0) -> PeriodicLevel:
    """Enumerate fixed points of f^n up to the seed budget.

    Closed-form fixed points enter directly; every other orbit must come
    out of a converged Newton run.  Stops once the multiplicity-weighted
    count reaches 2^n; a shortfall is flagged, never padded.
    """
    if n < 1:
        raise ContractError("n must be >= 1")
    if budget < 1:
        raise ContractError("budget must be >= 1")
    target = 2 ** n
    orbits: list[PeriodicOrbit] = []
    count = 0
    for orb in fixed_points_closed_form(m):
        if orb is not None:
            orbits.append(orb)
            count += orb.period * orb.multiplicity

    def try_seed(init_pts) -> None:
        nonlocal count
        if init_pts is None:
            return
        pts = _newton_cycle(m, init_pts)
        if pts is None:
            return
        d = _minimal_period(pts, n)
        if d < n:
            # re-polish at the minimal period: detection tolerance is looser
            # than the orbit residual gate
            pts = _newton_cycle(m, pts[:d])
            if pts is None:
                return
        cycle = tuple(PointC2(complex(p[0]), complex(p[1])) for p in pts[:d])
        for o in orbits:
            if o.period == d and _same_cycle(cycle, o.points):
                return
        orb = _build_orbit(cycle, m)
        if orb is None:
            return
        orbits.append(orb)
        count += d * orb.multiplicity

    attempts = 0
    if is_horseshoe_regime(m):
        for bits in necklaces(n):
            if count >= target or attempts >= budget:
                break
            attempts += 1
            try_seed(symbolic_orbit_seed(m, bits))
    if count < target and attempts < budget:
        for x0, y0 in _halton_seeds(m, budget - attempts, rng_seed):
            if count >= target or attempts >= budget:
                break
            attempts += 1
            try_seed(_seed_cycle(m, n, x0, y0))
    return PeriodicLevel(n, tuple(orbits), count, count >= target, attempts)


def mu_n_measure(level: PeriodicLevel) -> DiscreteMeasure:
    """Equal weights 2^-n on the fixed points of f^n, multiplicity-weighted."""
    pts = []
    wts = []
    denom = 2 ** level.n
    for o in level.orbits:
        for p in o.points:
            pts.append([p.x, p.y])
            wts.append(Fraction(o.multiplicity, denom))
    if not pts:
        raise ContractError("level carries no points")
    return DiscreteMeasure(np.array(pts, dtype=complex), tuple(wts), 2,
                           level.complete, f"mu_n(n={level.n})")


@dataclass(frozen=True)
class SaddleRow:
    n: int
    saddle_count: int
    ratio: float
    complete: bool


@dataclass(frozen=True)
class SaddleRatioTable:
    rows: tuple
    verdict: str


def saddle_table(levels) -> SaddleRatioTable:
    """Minimal-period saddle counts against 2^n from enumerated levels."""
    rows = []
    for level in levels:
        cnt = level.minimal_point_count(saddles_only=True)
        rows.append(SaddleRow(level.n, cnt, cnt / 2.0 ** level.n,
                              level.complete))
    if not rows:
        raise ContractError("no levels to tabulate")
    if not all(r.complete for r in rows):
        verdict = "inconclusive"
    else:
        late = [r.ratio for r in rows if r.n >= 3]
        if late and min(late) >= 0.7 and rows[-1].ratio >= 0.8:
            verdict = "consistent with limit 1"
        else:
            verdict = "below trend"
    return SaddleRatioTable(tuple(rows), verdict)


def saddle_count_ratio(m: MapParams, n_max: int, budget: int = 2048,
                       rng_seed=0) -> SaddleRatioTable:
    """Enumerate levels 1..n_max and tabulate saddle counts and ratios."""
    if n_max < 1:
        raise ContractError("n_max must be >= 1")
    levels = [periodic_points_2d(m, n, budget=budget, rng_seed=rng_seed)
              for n in range(1, n_max + 1)]
    return saddle_table(levels)


@dataclass(frozen=True)
class RealityRow:
    n: int
    complete: bool
    orbit_count: int
    max_imag: float
    worst_condition: float


@dataclass(frozen=True)
class RealityReport:
    rows: tuple
    all_real: bool
    nonreal_periods: tuple
    verdict: str


def reality_conditions_report(m: MapParams, n_max: int, budget: int = 2048,
                              rng_seed=0) -> RealityReport:
    """Are all periodic points real?  all real -> full-shift entropy log 2;
    any nonreal point -> strictly smaller entropy expected.

    A nonreal finding stands even when enumeration is incomplete; the
    all-real verdict needs every level complete, else "inconclusive".
    """
    if m.a.imag != 0.0 or m.b.imag != 0.0:
        raise ContractError("reality report needs real parameters")
    if n_max < 1:
        raise ContractError("n_max must be >= 1")
    rows = []
    nonreal = set()
    all_complete = True
    any_nonreal = False
    for n in range(1, n_max + 1):
        level = periodic_points_2d(m, n, budget=budget, rng_seed=rng_seed)
        worst_imag = 0.0
        worst_cond = 0.0
        for o in level.minimal_orbits:
            worst_imag = max(worst_imag, o.max_imag)
            J = derivative_along_orbit(o.points, m)
            try:
                cond = float(np.linalg.cond(J - np.eye(2)))
            except np.linalg.LinAlgError:
                cond = math.inf
            worst_cond = max(worst_cond, cond)
            if not o.is_real:
                any_nonreal = True
                nonreal.add(o.period)
        rows.append(RealityRow(n, level.complete, len(level.minimal_orbits),
                               worst_imag, worst_cond))
        all_complete = all_complete and level.complete
    if any_nonreal:
        verdict = "entropy < log 2 expected"
    elif all_complete:
        verdict = "log 2"
    else:
        verdict = "inconclusive"
    return RealityReport(tuple(rows), not any_nonreal, tuple(sorted(nonreal)),
                         verdict)


def _runs(mask: np.ndarray):
    idx = np.flatnonzero(mask)
    if idx.size == 0:
        return []
    cuts = np.flatnonzero(np.diff(idx) > 1)
    return np.split(idx, cuts + 1)


def _resample_curve(xs: np.ndarray, ys: np.ndarray, count: int):
    """Uniform-arclength resampling of one polyline run."""
    if len(xs) < 2 or count < 2:
        return xs, ys
    seg = np.sqrt(np.abs(np.diff(xs)) ** 2 + np.abs(np.diff(ys)) ** 2)
    s = np.concatenate([[0.0], np.cumsum(seg)])
    if s[-1] <= 0.0:
        return xs[:1], ys[:1]
    t = np.linspace(0.0, s[-1], count)
    xr = np.interp(t, s, xs.real) + 1j * np.interp(t, s, xs.imag)
    yr = np.interp(t, s, ys.real) + 1j * np.interp(t, s, ys.imag)
    return xr, yr


def unstable_disk_sample(orbit: PeriodicOrbit, m: MapParams, steps: int,
                         samples: int, backward: bool = False) -> np.ndarray:
    """Push a radius-1e-6 seed along the expanding eigenvector through
    `steps` map applications, arclength-resampled to `samples` points per
    step, discarding anything with sup-norm beyond 4R.  Returns the union
    cloud as an (N, 2) complex array sorted lexicographically.

    backward=True runs the inverse map from the contracting eigenvector,
    which traces the stable side instead.
    """
    if orbit.orbit_class != "saddle":
        raise ContractError("manifold sampling needs a saddle orbit")
    if steps < 1 or samples < 8:
        raise ContractError("need steps >= 1 and samples >= 8")
    J = derivative_along_orbit(orbit.points, m)
    w, V = np.linalg.eig(J)
    order = np.argsort(-np.abs(w))
    pick = order[1] if backward else order[0]
    lam = w[pick]
    if (abs(lam) <= 1.0) if not backward else (abs(lam) >= 1.0):
        raise ContractError("selected eigenvalue is not on the expanding side")
    v = V[:, pick]
    # rotate the eigenvector phase so a real manifold gets a real chart
    lead = v[np.argmax(np.abs(v))]
    v = v * (lead.conjugate() / abs(lead))
    v = v / max(abs(v[0]), abs(v[1]))
    p0 = orbit.points[0]
    radius = 1e-6
    base = min(samples, 257)
    real_chart = orbit.is_real and float(np.max(np.abs(v.imag))) < 1e-9
    if real_chart:
        ts = radius * np.linspace(-1.0, 1.0, base).astype(complex)
    else:
        ts = radius * np.exp(2j * math.pi * np.linspace(0.0, 1.0, base))
    xs = p0.x + ts * v[0]
    ys = p0.y + ts * v[1]
    lim = 4.0 * m.R
    a, b = m.a, m.b
    cycle_x = np.array([p.x for p in orbit.points])
    cycle_y = np.array([p.y for p in orbit.points])
    cloud_x = [cycle_x]
    cloud_y = [cycle_y]
    for _ in range(steps):
        if backward:
            xs, ys = ys, (a - ys * ys - xs) / b
        else:
            xs, ys = -xs * xs + a - b * ys, xs
        keep = np.maximum(np.abs(xs), np.abs(ys)) <= lim
        runs = _runs(keep)
        if not runs:
            break
        lengths = []
        for run in runs:
            if len(run) < 2:
                lengths.append(0.0)
                continue
            seg = np.sqrt(np.abs(np.diff(xs[run])) ** 2
                          + np.abs(np.diff(ys[run])) ** 2)
            lengths.append(float(seg.sum()))
        total_len = sum(lengths)
        new_x, new_y = [], []
        for run, ln in zip(runs, lengths):
            if len(run) < 2 or ln == 0.0 or total_len == 0.0:
                new_x.append(xs[run])
                new_y.append(ys[run])
                continue
            quota = max(2, int(samples * ln / total_len) + 1)
            xr, yr = _resample_curve(xs[run], ys[run], quota)
            new_x.append(xr)
            new_y.append(yr)
        xs = np.concatenate(new_x)
        ys = np.concatenate(new_y)
        cloud_x.append(xs)
        cloud_x.append(cycle_x)
        cloud_y.append(ys)
        cloud_y.append(cycle_y)
    cx = np.concatenate(cloud_x)
    cy = np.concatenate(cloud_y)
    order = np.lexsort((cy.imag, cy.real, cx.imag, cx.real))
    return np.stack([cx[order], cy[order]], axis=1)


def negative_fixed_point(m: MapParams) -> PeriodicOrbit:
    """The fixed-point orbit on the symbol-0 side (x.real < 0)."""
    for orb in fixed_points_closed_form(m):
        if orb is not None and orb.points[0].x.real < 0:
            return orb
    raise ContractError("no fixed point with negative real part")


def cylinder_point_measure(m: MapParams, level: int, buffer: int = 15,
                           sweeps: int = 80) -> DiscreteMeasure:
    """Pushforward of the level-n cylinder weights to phase space.

    Each length-2n itinerary window is extended by zeros on both sides,
    clamped at the window ends to the symbol-0 fixed point, and shadowed
    by square-root sweeps; the box's mass 4^-n lands on the resulting
    center point (x_0, x_{-1}).
    """
    if level < 1:
        raise ContractError("level must be >= 1")
    if not is_horseshoe_regime(m):
        raise ContractError("cylinder pushforward needs horseshoe-regime "
                            "parameters")
    x_fix = negative_fixed_point(m).points[0].x
    n_words = 4 ** level
    window = 2 * level + 2 * buffer
    codes = np.arange(n_words)
    bits = (codes[:, None] >> np.arange(2 * level)[None, ::-1]) & 1
    signs = np.full((n_words, window), -1.0, dtype=complex)
    signs[:, buffer:buffer + 2 * level] = np.where(bits == 1, 1.0, -1.0)
    x = signs * cmath.sqrt(abs(m.a))
    pad = np.full((n_words, 1), complex(x_fix))
    for _ in range(sweeps):
        ext = np.concatenate([pad, x, pad], axis=1)
        x = signs * np.sqrt(m.a - ext[:, 2:] - m.b * ext[:, :-2])
    mid = buffer + level
    pts = np.stack([x[:, mid], x[:, mid - 1]], axis=1)
    wts = (Fraction(1, n_words),) * n_words
    return DiscreteMeasure(pts, wts, 2, True, f"cylinder_push(level={level})")


def orbits_to_csv(orbits, path) -> None:
    """One row per orbit point: cycle id, period, coordinates, multipliers."""
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(["orbit", "period", "index", "x_re", "x_im", "y_re", "y_im",
                     "lam1_re", "lam1_im", "lam2_re", "lam2_im", "class",
                     "is_real", "residual", "multiplicity"])
        for oi, o in enumerate(orbits):
            l1, l2 = o.multiplier_eigenvalues
            for j, p in enumerate(o.points):
                wr.writerow([oi, o.period, j,
                             repr(p.x.real), repr(p.x.imag),
                             repr(p.y.real), repr(p.y.imag),
                             repr(l1.real), repr(l1.imag),
                             repr(l2.real), repr(l2.imag),
                             o.orbit_class, int(o.is_real),
                             repr(o.residual), o.multiplicity])


def level_to_json(level: PeriodicLevel, path) -> None:
    doc = {
        "n": level.n,
        "complete": level.complete,
        "fixed_point_count": level.fixed_point_count,
        "attempts": level.attempts,
        "orbit_count": len(level.orbits),
        "minimal_orbit_count": len(level.minimal_orbits),
        "orbits": [
            {
                "period": o.period,
                "class": o.orbit_class,
                "is_real": o.is_real,
                "residual": o.residual,
                "multiplicity": o.multiplicity,
                "points": [[p.x.real, p.x.imag, p.y.real, p.y.imag]
                           for p in o.points],
                "eigenvalues": [[v.real, v.imag]
                                for v in o.multiplier_eigenvalues],
            }
            for o in level.orbits
        ],
    }
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=1, sort_keys=True)
        fh.write("\n")
