"""One-variable polynomial dynamics: preimage trees, inverse-iteration
sampling, periodic points and the two equilibrium-measure estimators.

Both estimators average point masses with weight d^-n: over the solutions
of f^n(z) = c (backward tree, c nonexceptional) or of f^n(z) = z
(periodic points).  Either family converges weakly to the equilibrium
measure of the filled Julia set, which is what the measure comparisons
downstream exercise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
import numpy.polynomial.polynomial as npp

from .errors import CapError, ContractError, ConvergenceError
from .measures import DiscreteMeasure

PREIMAGE_CAP = 1 << 20
PERIODIC_CAP = 4096
CLUSTER_TOL = 1e-7


@dataclass(frozen=True)
class Poly:
    """Monic polynomial of degree >= 2, coefficients ascending."""

    coeffs: tuple

    def __post_init__(self):
        c = tuple(complex(v) for v in self.coeffs)
        if len(c) < 3:
            raise ContractError("degree must be >= 2")
        if c[-1] != 1:
            raise ContractError("polynomial must be monic")
        if not all(math.isfinite(v.real) and math.isfinite(v.imag) for v in c):
            raise ContractError("coefficients must be finite")
        object.__setattr__(self, "coeffs", c)

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def __call__(self, z):
        return npp.polyval(z, self.coeffs)

    def eval_deriv(self, z):
        return npp.polyval(z, npp.polyder(self.coeffs))

    def lower_coeff_sum(self) -> float:
        return float(sum(abs(v) for v in self.coeffs[:-1]))

    def iterate_coeffs(self, n: int) -> np.ndarray:
        """Expanded coefficients of f^n (degree d^n)."""
        if n < 1:
            raise ContractError("n must be >= 1")
        if self.degree ** n > PERIODIC_CAP:
            raise CapError(f"degree {self.degree}^{n} exceeds the expansion cap "
                           f"{PERIODIC_CAP}; use preimage or sampled modes")
        cur = np.array([0.0, 1.0], dtype=complex)
        for _ in range(n):
            # Horner in the coefficient ring: f(cur)
            acc = np.array([1.0 + 0.0j])
            for coef in reversed(self.coeffs[:-1]):
                acc = npp.polymul(acc, cur)
                acc[0] += coef
            cur = acc
        if not np.all(np.isfinite(cur)):
            raise CapError("coefficient overflow expanding the iterate; "
                           "use preimage or sampled modes")
        return cur

    def iter_eval(self, z, n: int):
        """(f^n(z), (f^n)'(z)) by forward composition, no expansion."""
        w = np.asarray(z, dtype=complex)
        dw = np.ones_like(w)
        for _ in range(n):
            dw = self.eval_deriv(w) * dw
            w = self(w)
        return w, dw


def simultaneous_roots(coeffs, tol: float = 1e-13,
                       max_sweeps: int = 600) -> np.ndarray:
    """All roots of a monic polynomial by simultaneous iteration.

    Ehrlich-Aberth corrections: each point takes a Newton step repelled by
    its siblings.  Compared with the plain Weierstrass product form this
    stays bounded at high degree (sums of reciprocals, no d-fold products)
    and converges fast enough to resolve degree ~1000 constellations.
    """
    c = np.asarray(coeffs, dtype=complex)
    if abs(c[-1] - 1.0) > 0:
        raise ContractError("simultaneous_roots expects monic coefficients")
    d = len(c) - 1
    if d == 1:
        return np.array([-c[0]])
    dc = npp.polyder(c)
    radius = 1.0 + float(np.max(np.abs(c[:-1])))
    # keep radius^d representable: evaluating the polynomial on the start
    # circle must not overflow doubles at high degree
    radius = min(radius, 10.0 ** (100.0 / d))
    k = np.arange(d)
    # stagger moduli and angles: a perfectly circular start constellation
    # can stall on root sets with interior points
    spread = np.mod(k * 0.6180339887498949, 1.0)
    z = (radius * (0.55 + 0.9 * spread)
         * np.exp(2j * math.pi * (k + 0.354) / d))
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        for _ in range(max_sweeps):
            pz = npp.polyval(z, c)
            newton = pz / npp.polyval(z, dc)
            diff = z[:, None] - z[None, :]
            np.fill_diagonal(diff, np.inf)
            repel = np.sum(1.0 / diff, axis=1)
            delta = newton / (1.0 - newton * repel)
            # a stray iterate in overflow land sits out this sweep
            delta = np.where(np.isfinite(delta), delta, 0.0)
            z = z - delta
            if (np.max(np.abs(delta)) < tol * (1.0 + np.max(np.abs(z)))
                    and np.all(np.isfinite(pz))):
                return z
    resid = float(np.max(np.abs(npp.polyval(z, c))))
    raise ConvergenceError(f"simultaneous_roots: no convergence in "
                           f"{max_sweeps} sweeps (max residual {resid:.3e})")


def _quadratic_roots(beta, gamma):
    """Stable roots of z^2 + beta z + gamma = 0, vectorized, fixed order."""
    beta = np.asarray(beta, dtype=complex)
    gamma = np.asarray(gamma, dtype=complex)
    u = np.sqrt(beta * beta - 4.0 * gamma)
    # pick the sign that avoids cancellation in beta + u
    u = np.where((np.conj(beta) * u).real >= 0.0, u, -u)
    q = -0.5 * (beta + u)
    r2 = np.where(q != 0, gamma / np.where(q != 0, q, 1.0), -beta)
    return q, r2


def solve_offset(f: Poly, w) -> np.ndarray:
    """Roots of f(z) = w for each w; shape (len(w), d), deterministic order."""
    w = np.atleast_1d(np.asarray(w, dtype=complex))
    d = f.degree
    if d == 2:
        c0, c1, _ = f.coeffs
        r1, r2 = _quadratic_roots(np.full_like(w, c1), c0 - w)
        return np.stack([r1, r2], axis=1)
    out = np.empty((len(w), d), dtype=complex)
    for i, wi in enumerate(w):
        c = np.array(f.coeffs, dtype=complex)
        c[0] -= wi
        roots = simultaneous_roots(c)
        # one Newton step sharpens the simultaneous-iteration output
        fz = npp.polyval(roots, c)
        dz = f.eval_deriv(roots)
        safe = np.abs(dz) > 1e-12
        roots = np.where(safe, roots - fz / np.where(safe, dz, 1.0), roots)
        out[i] = roots[np.lexsort((roots.imag, roots.real))]
    return out


@dataclass(frozen=True)
class PreimageTree:
    """Backward-orbit levels: level k holds solutions of f^k(z) = root.

    In full mode level k holds all d^k preimages and the parent of
    levels[k+1][i] is levels[k][i // d]; in sampled mode levels have the
    walk count and parents share the walk index.
    """

    root: complex
    levels: list
    mode: str
    branching: int

    def max_parent_residual(self, f: Poly) -> float:
        worst = 0.0
        for k in range(1, len(self.levels)):
            child = self.levels[k]
            if self.mode == "full":
                parent = np.repeat(self.levels[k - 1], self.branching)
            else:
                parent = self.levels[k - 1]
            worst = max(worst, float(np.max(np.abs(f(child) - parent))))
        return worst


def preimages(f: Poly, c: complex, n: int, mode: str = "full",
              k: int | None = None, rng_seed: int | None = None,
              cap: int = PREIMAGE_CAP) -> PreimageTree:
    """Backward orbit of c to depth n, full tree or k sampled walks."""
    if n < 1:
        raise ContractError("depth must be >= 1")
    d = f.degree
    if mode == "full":
        if d ** n > cap:
            raise CapError(f"full preimage tree would hold {d}^{n} points, "
                           f"over the cap {cap}; use sampled mode")
        levels = [np.array([complex(c)])]
        for _ in range(n):
            levels.append(solve_offset(f, levels[-1]).ravel())
        return PreimageTree(complex(c), levels, "full", d)
    if mode == "sampled":
        if k is None or k < 1:
            raise ContractError("sampled mode needs a walk count k >= 1")
        rng = np.random.default_rng(rng_seed)
        choices = rng.integers(0, d, size=(n, k))
        levels = [np.full(k, complex(c))]
        for step in range(n):
            roots = solve_offset(f, levels[-1])
            levels.append(roots[np.arange(k), choices[step]])
        return PreimageTree(complex(c), levels, "sampled", d)
    raise ContractError(f"unknown mode {mode!r}")


def exceptional_check(f: Poly, c: complex, probe_depth: int = 4,
                      tol: float = 1e-9) -> bool:
    """True when the backward orbit of c stays below 3 distinct points."""
    if probe_depth < 2:
        raise ContractError("probe_depth must be >= 2")
    distinct = [complex(c)]
    frontier = np.array([complex(c)])
    for _ in range(probe_depth):
        frontier = solve_offset(f, frontier).ravel()
        for z in frontier:
            if all(abs(z - w) > tol for w in distinct):
                distinct.append(complex(z))
                if len(distinct) >= 3:
                    return False
    return True


def _cluster(points: np.ndarray, tol: float):
    order = np.lexsort((points.imag, points.real))
    reps: list[complex] = []
    counts: list[int] = []
    for z in points[order]:
        for i, r in enumerate(reps):
            if abs(z - r) <= tol:
                counts[i] += 1
                break
        else:
            reps.append(complex(z))
            counts.append(1)
    return np.array(reps), np.array(counts)


def periodic_points_1d(f: Poly, n: int, cap: int = PERIODIC_CAP):
    """All d^n solutions of f^n(z) = z: (cluster representatives, multiplicities).

    Expanded-polynomial simultaneous iteration, then Newton polish through
    the composed map, then clustering at 1e-7 for multiplicity attribution.
    """
    d = f.degree
    if d ** n > cap:
        raise CapError(f"{d}^{n} periodic points exceed the cap {cap}")
    coeffs = f.iterate_coeffs(n)
    coeffs = npp.polysub(coeffs, (0.0, 1.0))
    roots = simultaneous_roots(coeffs)
    for _ in range(3):
        w, dw = f.iter_eval(roots, n)
        denom = dw - 1.0
        safe = np.abs(denom) > 1e-8
        roots = np.where(safe, roots - (w - roots) / np.where(safe, denom, 1.0), roots)
    w, _ = f.iter_eval(roots, n)
    resid = np.abs(w - roots)
    # residual scale follows the natural size of f^n at the root
    log_scale = (d ** n) * np.maximum(0.0, np.log(np.maximum(np.abs(roots), 1e-300)))
    allowed = 1e-10 * np.exp(np.minimum(log_scale, 600.0))
    bad = resid > np.maximum(allowed, 1e-10)
    if np.any(bad):
        raise ConvergenceError(f"{int(bad.sum())} periodic roots failed the residual "
                               f"check (worst {float(resid[bad].max()):.3e})")
    return _cluster(roots, CLUSTER_TOL)


def brolin_measure(f: Poly, mode: str, n: int, c: complex | None = None,
                   cap: int | None = None) -> DiscreteMeasure:
    """Equal-weight measure (weight d^-n) on preimages of c or on periodic points."""
    d = f.degree
    if mode == "preimage":
        if c is None:
            raise ContractError("preimage mode needs the base point c")
        if exceptional_check(f, c):
            raise ContractError(f"c = {c} is exceptional (backward orbit has fewer "
                                "than 3 points); the equidistribution hypothesis "
                                "requires a nonexceptional base point")
        tree = preimages(f, c, n, "full", cap=cap or PREIMAGE_CAP)
        pts = tree.levels[n]
        wts = (Fraction(1, d ** n),) * len(pts)
        return DiscreteMeasure(pts, wts, 1, True, f"preimage(c={c}, n={n})")
    if mode == "periodic":
        reps, mult = periodic_points_1d(f, n, cap=cap or PERIODIC_CAP)
        wts = tuple(Fraction(int(m), d ** n) for m in mult)
        complete = int(mult.sum()) == d ** n
        return DiscreteMeasure(reps, wts, 1, complete, f"periodic(n={n})")
    raise ContractError(f"unknown mode {mode!r}")


def julia_render_points(f: Poly, c: complex, walks: int, depth: int,
                        burn_in: int = 10, rng_seed: int = 0):
    """Backward random walks from c, keeping levels past burn_in.

    Uniform independent branch choices reproduce the equal-weight averaging
    of the preimage estimator; the walk is biased toward parts of the Julia
    set easily reached from outside, which is documented, not corrected.
    Output is sorted by (level, re, im), so it does not depend on walk
    scheduling; identical seeds give identical clouds.
    """
    if walks < 1:
        raise ContractError("need at least one walk")
    if not 0 <= burn_in < depth:
        raise ContractError("need 0 <= burn_in < depth")
    if exceptional_check(f, c):
        raise ContractError(f"c = {c} is exceptional; backward walks would collapse")
    tree = preimages(f, c, depth, "sampled", k=walks, rng_seed=rng_seed)
    pts, lvls = [], []
    for lvl in range(burn_in + 1, depth + 1):
        pts.append(tree.levels[lvl])
        lvls.append(np.full(len(tree.levels[lvl]), lvl))
    points = np.concatenate(pts)
    levels = np.concatenate(lvls)
    order = np.lexsort((points.imag, points.real, levels))
    return points[order], levels[order]
