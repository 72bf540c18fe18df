"""Potential kernels, escape-rate functions, and grid mass recovery.

The escape-rate estimators share one pattern: iterate until the orbit
enters a region of strict quadratic growth, read off log-norm over d^n,
and certify the answer with an a-posteriori geometric tail bound.  Orbits
that never reach the growth region within the budget are reported as
presumed bounded, value 0; no exact membership claim is made.

The plane-measure side discretizes the Laplacian with the five-point
stencil; cell mass is stencil-sum over 2*pi (the h^2 of the stencil and
of the area element cancel), with singular cells and their stencil
neighbors excluded rather than clipped.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np

from .dynamics import MapParams
from .errors import ContractError

TWO_PI = 2.0 * math.pi
# freeze orbits before squaring can overflow float64
SAFE_NORM = 1e130


def potential_kernel(z, d: int) -> float:
    """Radial kernel by ambient dimension: |z|, log|z|, or -1/|z|^(d-2)."""
    if not isinstance(d, (int, np.integer)) or d < 1:
        raise ContractError("dimension must be an integer >= 1")
    if isinstance(z, (complex, np.complexfloating)):
        vec = np.array([z.real, z.imag], dtype=float)
        if d == 1:
            if z.imag != 0:
                raise ContractError("d=1 needs a real argument")
            vec = vec[:1]
    else:
        vec = np.atleast_1d(np.asarray(z, dtype=float))
    if vec.shape != (d,):
        raise ContractError(f"point has {vec.shape[0]} coordinates, expected {d}")
    r = float(np.linalg.norm(vec))
    if d == 1:
        return r
    if d == 2:
        return math.log(r) if r > 0.0 else -math.inf
    return -math.inf if r == 0.0 else -1.0 / r ** (d - 2)


@dataclass(frozen=True)
class GreenEstimate:
    """Escape-rate value with certificate: bound dominates the discarded tail."""

    value: float
    n_used: int
    converged: bool
    bound: float
    presumed_bounded: bool = False

    def __post_init__(self):
        if self.value < 0.0:
            raise ContractError("escape-rate values are nonnegative")


class GreenField(NamedTuple):
    """Vectorized counterpart of GreenEstimate over an array of start points."""

    values: np.ndarray
    bounds: np.ndarray
    converged: np.ndarray
    presumed_bounded: np.ndarray
    n_used: np.ndarray


def green_poly(z: complex, f, tol: float = 1e-9, n_max: int = 200) -> GreenEstimate:
    """Escape rate log|f^n(z)| / d^n for a monic polynomial.

    Outside |w| = 2(1 + sum|c_i|) the lower-order terms perturb log|f(w)|
    by at most 2 sum|c_i| / |w|, so the remaining increments are dominated
    by a geometric series; that sum is the reported bound.
    """
    if tol <= 0.0:
        raise ContractError("tol must be positive")
    if n_max < 1:
        raise ContractError("n_max must be >= 1")
    d = f.degree
    csum = f.lower_coeff_sum()
    w_esc = 2.0 * (1.0 + csum)
    w = complex(z)
    for n in range(n_max + 1):
        aw = abs(w)
        if aw > w_esc:
            scale = float(d) ** n
            value = math.log(aw) / scale
            bound = 2.0 * csum / (aw * scale * (d - 1.0))
            if bound < tol:
                return GreenEstimate(value, n, True, bound)
            if aw > SAFE_NORM or n == n_max:
                return GreenEstimate(value, n, False, bound)
        elif n == n_max:
            return GreenEstimate(0.0, n_max, True, 0.0, presumed_bounded=True)
        w = complex(f(w))
    raise AssertionError("unreachable")


def green_poly_field(zs, f, tol: float = 1e-9, n_max: int = 200) -> GreenField:
    """green_poly over an array of points; same algorithm, masked advance."""
    if tol <= 0.0:
        raise ContractError("tol must be positive")
    z = np.asarray(zs, dtype=complex)
    shape = z.shape
    w = z.ravel().copy()
    d = f.degree
    csum = f.lower_coeff_sum()
    w_esc = 2.0 * (1.0 + csum)
    size = w.size
    values = np.zeros(size)
    bounds = np.zeros(size)
    conv = np.zeros(size, dtype=bool)
    presumed = np.zeros(size, dtype=bool)
    n_used = np.zeros(size, dtype=np.int32)
    active = np.ones(size, dtype=bool)
    for n in range(n_max + 1):
        aw = np.abs(w)
        esc = active & (aw > w_esc)
        if esc.any():
            scale = float(d) ** n
            idx = np.flatnonzero(esc)
            val = np.log(aw[idx]) / scale
            bnd = 2.0 * csum / (aw[idx] * scale * (d - 1.0))
            ok = bnd < tol
            stop = ok | (aw[idx] > SAFE_NORM) | (n == n_max)
            fi = idx[stop]
            values[fi] = val[stop]
            bounds[fi] = bnd[stop]
            conv[fi] = ok[stop]
            n_used[fi] = n
            active[fi] = False
        if n == n_max:
            rest = np.flatnonzero(active)
            conv[rest] = True
            presumed[rest] = True
            n_used[rest] = n_max
            break
        adv = active & (np.abs(w) <= SAFE_NORM)
        w[adv] = f(w[adv])
    return GreenField(values.reshape(shape), bounds.reshape(shape),
                      conv.reshape(shape), presumed.reshape(shape),
                      n_used.reshape(shape))


def _coords(p):
    if hasattr(p, "x"):
        return complex(p.x), complex(p.y)
    x, y = p
    return complex(x), complex(y)


def green_plus(p, m: MapParams, tol: float = 1e-9, n_max: int = 100) -> GreenEstimate:
    """Forward escape rate log|x_n| / 2^n.

    Once |x| > 2R with |x| >= |y| the first coordinate strictly dominates
    and squares up to a relative error |a|/|x|^2 + |b|/|x|, giving the
    geometric tail bound 2(|a|/|x|^2 + |b|/|x|) / 2^n.
    """
    if tol <= 0.0:
        raise ContractError("tol must be positive")
    if n_max < 1:
        raise ContractError("n_max must be >= 1")
    thr = 2.0 * m.R
    a, b = m.a, m.b
    x, y = _coords(p)
    for n in range(n_max + 1):
        ax, ay = abs(x), abs(y)
        if ax > thr and ax >= ay:
            scale = 2.0 ** n
            value = math.log(ax) / scale
            bound = 2.0 * (abs(a) / (ax * ax) + abs(b) / ax) / scale
            if bound < tol:
                return GreenEstimate(value, n, True, bound)
            if ax > SAFE_NORM or n == n_max:
                return GreenEstimate(value, n, False, bound)
        elif max(ax, ay) > SAFE_NORM:
            return GreenEstimate(0.0, n, False, math.inf)
        elif n == n_max:
            return GreenEstimate(0.0, n_max, True, 0.0, presumed_bounded=True)
        x, y = -x * x + a - b * y, x
    raise AssertionError("unreachable")


def green_minus(p, m: MapParams, tol: float = 1e-9, n_max: int = 100) -> GreenEstimate:
    """Backward escape rate (log|y_m| - log|b|) / 2^m.

    Under the inverse map the second coordinate squares and picks up a
    constant 1/b factor each step; the factor telescopes exactly into
    -log|b| / 2^m, leaving the same geometric error as the forward case
    with epsilon = |a|/|y|^2 + 1/|y|.
    """
    if tol <= 0.0:
        raise ContractError("tol must be positive")
    if n_max < 1:
        raise ContractError("n_max must be >= 1")
    thr = 2.0 * m.R
    a, b = m.a, m.b
    x, y = _coords(p)
    for n in range(n_max + 1):
        ax, ay = abs(x), abs(y)
        if ay > thr and ay >= ax:
            scale = 2.0 ** n
            value = (math.log(ay) - math.log(abs(b))) / scale
            bound = 2.0 * (abs(a) / (ay * ay) + 1.0 / ay) / scale
            if bound < tol:
                return GreenEstimate(value, n, True, bound)
            if ay > SAFE_NORM or n == n_max:
                return GreenEstimate(value, n, False, bound)
        elif max(ax, ay) > SAFE_NORM:
            return GreenEstimate(0.0, n, False, math.inf)
        elif n == n_max:
            return GreenEstimate(0.0, n_max, True, 0.0, presumed_bounded=True)
        x, y = y, (a - y * y - x) / b
    raise AssertionError("unreachable")


def _henon_field(xs, ys, m: MapParams, tol: float, n_max: int,
                 forward: bool) -> GreenField:
    x = np.asarray(xs, dtype=complex)
    shape = x.shape
    x = x.ravel().copy()
    y = np.asarray(ys, dtype=complex).ravel().copy()
    if x.shape != y.shape:
        raise ContractError("coordinate arrays must have matching shapes")
    thr = 2.0 * m.R
    a, b = m.a, m.b
    log_b = math.log(abs(b))
    size = x.size
    values = np.zeros(size)
    bounds = np.zeros(size)
    conv = np.zeros(size, dtype=bool)
    presumed = np.zeros(size, dtype=bool)
    n_used = np.zeros(size, dtype=np.int32)
    active = np.ones(size, dtype=bool)
    for n in range(n_max + 1):
        ax = np.abs(x)
        ay = np.abs(y)
        if forward:
            esc = active & (ax > thr) & (ax >= ay)
            lead = ax
        else:
            esc = active & (ay > thr) & (ay >= ax)
            lead = ay
        if esc.any():
            scale = 2.0 ** n
            idx = np.flatnonzero(esc)
            if forward:
                val = np.log(lead[idx]) / scale
                bnd = 2.0 * (abs(a) / lead[idx] ** 2 + abs(b) / lead[idx]) / scale
            else:
                val = (np.log(lead[idx]) - log_b) / scale
                bnd = 2.0 * (abs(a) / lead[idx] ** 2 + 1.0 / lead[idx]) / scale
            ok = bnd < tol
            stop = ok | (lead[idx] > SAFE_NORM) | (n == n_max)
            fi = idx[stop]
            values[fi] = val[stop]
            bounds[fi] = bnd[stop]
            conv[fi] = ok[stop]
            n_used[fi] = n
            active[fi] = False
        over = active & (np.maximum(np.abs(x), np.abs(y)) > SAFE_NORM)
        if over.any():
            oi = np.flatnonzero(over)
            bounds[oi] = np.inf
            n_used[oi] = n
            active[oi] = False
        if n == n_max:
            rest = np.flatnonzero(active)
            conv[rest] = True
            presumed[rest] = True
            n_used[rest] = n_max
            break
        adv = active
        if forward:
            xa, ya = x[adv], y[adv]
            x[adv], y[adv] = -xa * xa + a - b * ya, xa
        else:
            xa, ya = x[adv], y[adv]
            x[adv], y[adv] = ya, (a - ya * ya - xa) / b
    return GreenField(values.reshape(shape), bounds.reshape(shape),
                      conv.reshape(shape), presumed.reshape(shape),
                      n_used.reshape(shape))


def green_plus_field(xs, ys, m: MapParams, tol: float = 1e-9,
                     n_max: int = 100) -> GreenField:
    if tol <= 0.0:
        raise ContractError("tol must be positive")
    return _henon_field(xs, ys, m, tol, n_max, forward=True)


def green_minus_field(xs, ys, m: MapParams, tol: float = 1e-9,
                      n_max: int = 100) -> GreenField:
    if tol <= 0.0:
        raise ContractError("tol must be positive")
    return _henon_field(xs, ys, m, tol, n_max, forward=False)


@dataclass(frozen=True)
class ScalarGrid:
    """Row-major sampled scalar field.

    origin is the coordinate of cell (0, 0); cell (i, j) sits at
    origin + j*spacing + i*spacing*1j.  Values may contain nan or -inf
    at flagged singular cells.
    """

    origin: complex
    spacing: float
    values: np.ndarray

    def __post_init__(self):
        if self.spacing <= 0.0:
            raise ContractError("spacing must be positive")
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 2 or v.shape[0] < 1 or v.shape[1] < 1:
            raise ContractError("values must be a 2-D array")
        object.__setattr__(self, "origin", complex(self.origin))
        object.__setattr__(self, "values", v)

    @property
    def height(self) -> int:
        return self.values.shape[0]

    @property
    def width(self) -> int:
        return self.values.shape[1]

    def points(self) -> np.ndarray:
        ii, jj = np.mgrid[0:self.height, 0:self.width]
        return self.origin + self.spacing * (jj + 1j * ii)

    @classmethod
    def sample(cls, fn: Callable, origin: complex, spacing: float,
               width: int, height: int) -> "ScalarGrid":
        """Evaluate a vectorized complex->real function on the lattice."""
        ii, jj = np.mgrid[0:height, 0:width]
        zz = complex(origin) + spacing * (jj + 1j * ii)
        return cls(complex(origin), float(spacing), np.asarray(fn(zz), dtype=float))

    @classmethod
    def over_window(cls, fn: Callable, xmin: float, xmax: float,
                    ymin: float, ymax: float, spacing: float) -> "ScalarGrid":
        """Sample cell centers tiling the window; the lattice never touches
        the window edges, which keeps isolated singularities off the grid."""
        if xmax <= xmin or ymax <= ymin:
            raise ContractError("window must have positive extent")
        nx = int(round((xmax - xmin) / spacing))
        ny = int(round((ymax - ymin) / spacing))
        if nx < 1 or ny < 1:
            raise ContractError("window is narrower than one cell")
        origin = complex(xmin + 0.5 * spacing, ymin + 0.5 * spacing)
        return cls.sample(fn, origin, float(spacing), nx, ny)

    def to_bytes(self) -> bytes:
        head = struct.pack("<5d", float(self.width), float(self.height),
                           self.origin.real, self.origin.imag, self.spacing)
        return head + self.values.astype("<f8").tobytes(order="C")

    @classmethod
    def from_bytes(cls, data: bytes) -> "ScalarGrid":
        if len(data) < 40:
            raise ContractError("grid blob shorter than its header")
        w, h, ore, oim, sp = struct.unpack("<5d", data[:40])
        width, height = int(round(w)), int(round(h))
        body = np.frombuffer(data[40:], dtype="<f8")
        if body.size != width * height:
            raise ContractError("grid blob size does not match its header")
        return cls(complex(ore, oim), sp, body.reshape(height, width).copy())

    def save(self, path) -> None:
        with open(path, "wb") as fh:
            fh.write(self.to_bytes())

    @classmethod
    def load(cls, path) -> "ScalarGrid":
        with open(path, "rb") as fh:
            return cls.from_bytes(fh.read())

    def interpolate(self, z: complex) -> float:
        """Bilinear value at an interior point; singular corners are an error."""
        fx = (z.real - self.origin.real) / self.spacing
        fy = (z.imag - self.origin.imag) / self.spacing
        eps = 1e-9
        if not (-eps <= fx <= self.width - 1 + eps and
                -eps <= fy <= self.height - 1 + eps):
            raise ContractError("point lies outside the sampled domain")
        j0 = min(max(int(math.floor(fx)), 0), self.width - 2) if self.width > 1 else 0
        i0 = min(max(int(math.floor(fy)), 0), self.height - 2) if self.height > 1 else 0
        tx = min(max(fx - j0, 0.0), 1.0)
        ty = min(max(fy - i0, 0.0), 1.0)
        j1 = min(j0 + 1, self.width - 1)
        i1 = min(i0 + 1, self.height - 1)
        corners = self.values[[i0, i0, i1, i1], [j0, j1, j0, j1]]
        if not np.all(np.isfinite(corners)):
            raise ContractError("interpolation touches a singular cell")
        v00, v01, v10, v11 = corners
        return float((1 - ty) * ((1 - tx) * v00 + tx * v01)
                     + ty * ((1 - tx) * v10 + tx * v11))


def discrete_ddc_mass(grid: ScalarGrid) -> ScalarGrid:
    """Cell masses from the five-point stencil: (sum of 4 neighbors - 4v) / 2pi.

    The h^2 in the Laplacian estimate cancels against the cell area, so
    masses integrate a unit point mass to 1 regardless of spacing.
    Boundary cells, singular cells and their stencil neighbors are nan.
    """
    v = grid.values
    if v.shape[0] < 3 or v.shape[1] < 3:
        raise ContractError("grid must be at least 3x3")
    finite = np.isfinite(v)
    ok = (finite[1:-1, 1:-1] & finite[:-2, 1:-1] & finite[2:, 1:-1]
          & finite[1:-1, :-2] & finite[1:-1, 2:])
    if not ok.any():
        raise ContractError("degenerate grid: no regular interior cells")
    stencil = (v[:-2, 1:-1] + v[2:, 1:-1] + v[1:-1, :-2] + v[1:-1, 2:]
               - 4.0 * v[1:-1, 1:-1])
    mass = np.full(v.shape, np.nan)
    mass[1:-1, 1:-1] = np.where(ok, stencil / TWO_PI, np.nan)
    return ScalarGrid(grid.origin, grid.spacing, mass)


def mass_total(mass_grid: ScalarGrid) -> float:
    return float(np.nansum(mass_grid.values))


def mass_in_disk(mass_grid: ScalarGrid, center: complex, radius: float) -> float:
    inside = np.abs(mass_grid.points() - complex(center)) <= radius
    vals = mass_grid.values[inside]
    return float(np.nansum(vals))


class SubaverageResult(NamedTuple):
    passed: bool
    deficit: float


def subaverage_check(target, center: complex, radius: float,
                     n_samples: int = 512, tol: float = 1e-9) -> SubaverageResult:
    """Compare the value at center to the circle average.

    deficit = average - center value; subharmonic functions never come out
    negative beyond the quadrature tolerance.  target is a scalar callable
    or a ScalarGrid (bilinear samples).
    """
    if radius <= 0.0:
        raise ContractError("radius must be positive")
    if n_samples < 8:
        raise ContractError("insufficient samples on the circle")
    center = complex(center)
    theta = TWO_PI * np.arange(n_samples) / n_samples
    ring = center + radius * np.exp(1j * theta)
    if isinstance(target, ScalarGrid):
        vals = [target.interpolate(z) for z in ring]
        mid = target.interpolate(center)
    else:
        vals = [float(target(z)) for z in ring]
        mid = float(target(center))
    avg = math.fsum(vals) / n_samples
    deficit = avg - mid
    return SubaverageResult(deficit >= -tol * (1.0 + abs(avg)), deficit)
