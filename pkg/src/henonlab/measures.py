"""Finite atomic measures, logarithmic potentials and weak-convergence probes.

Equilibrium measures are approximated by finite point clouds (preimage
trees, periodic points, cylinder boxes).  Closeness of two such clouds is
probed by integrating a fixed battery of smooth windowed test functions
and taking the worst disagreement, a pseudometric adequate for detecting
weak-convergence trends without any density estimation.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

import numpy as np

from .errors import ContractError

UNIT_CIRCLE_TOL = 1e-6


@dataclass(frozen=True)
class DiscreteMeasure:
    """Weighted atoms in C (ambient_dim 1, points shape (N,)) or C^2 (dim 2,
    points shape (N, 2)).  Weights may be exact Fractions; complete means the
    cloud is the whole intended atom set, not a sampled or truncated one."""

    points: np.ndarray
    weights: tuple
    ambient_dim: int
    complete: bool = True
    provenance: str = ""

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=complex)
        if self.ambient_dim == 1:
            if pts.ndim != 1:
                raise ContractError("ambient_dim 1 expects a flat complex array")
        elif self.ambient_dim == 2:
            if pts.ndim != 2 or pts.shape[1] != 2:
                raise ContractError("ambient_dim 2 expects an (N, 2) complex array")
        else:
            raise ContractError("ambient_dim must be 1 or 2")
        if len(self.weights) != len(pts):
            raise ContractError("one weight per atom required")
        if any(w <= 0 for w in self.weights):
            raise ContractError("weights must be positive")
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "weights", tuple(self.weights))
        if self.complete:
            if abs(float(self.total_mass()) - 1.0) > 1e-12:
                raise ContractError("complete measure must have total mass 1")

    def __len__(self) -> int:
        return len(self.weights)

    def total_mass(self):
        exact = all(isinstance(w, Fraction) for w in self.weights)
        if exact:
            return sum(self.weights, Fraction(0))
        return math.fsum(float(w) for w in self.weights)

    @property
    def weight_array(self) -> np.ndarray:
        return np.array([float(w) for w in self.weights])

    @classmethod
    def equal_weights(cls, points, ambient_dim: int, complete: bool = True,
                      provenance: str = "") -> "DiscreteMeasure":
        pts = np.asarray(points, dtype=complex)
        n = len(pts)
        if n == 0:
            raise ContractError("measure needs at least one atom")
        return cls(pts, (Fraction(1, n),) * n, ambient_dim, complete, provenance)

    def save(self, path) -> None:
        """CSV of atoms plus a JSON sidecar carrying the metadata."""
        path = Path(path)
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            if self.ambient_dim == 1:
                w.writerow(["re", "im", "weight"])
                for p, wt in zip(self.points, self.weights):
                    w.writerow([repr(float(p.real)), repr(float(p.imag)),
                                _weight_str(wt)])
            else:
                w.writerow(["x_re", "x_im", "y_re", "y_im", "weight"])
                for p, wt in zip(self.points, self.weights):
                    w.writerow([repr(float(p[0].real)), repr(float(p[0].imag)),
                                repr(float(p[1].real)), repr(float(p[1].imag)),
                                _weight_str(wt)])
        sidecar = {"ambient_dim": self.ambient_dim, "complete": self.complete,
                   "provenance": self.provenance, "count": len(self)}
        path.with_suffix(path.suffix + ".json").write_text(
            json.dumps(sidecar, sort_keys=True, indent=1) + "\n")

    @classmethod
    def load(cls, path) -> "DiscreteMeasure":
        path = Path(path)
        meta = json.loads(path.with_suffix(path.suffix + ".json").read_text())
        dim = meta["ambient_dim"]
        pts, wts = [], []
        with open(path, newline="") as fh:
            for row in list(csv.reader(fh))[1:]:
                if dim == 1:
                    pts.append(complex(float(row[0]), float(row[1])))
                    wts.append(_weight_parse(row[2]))
                else:
                    pts.append((complex(float(row[0]), float(row[1])),
                                complex(float(row[2]), float(row[3]))))
                    wts.append(_weight_parse(row[4]))
        return cls(np.asarray(pts, dtype=complex), tuple(wts), dim,
                   meta["complete"], meta.get("provenance", ""))


def _weight_str(w) -> str:
    return str(w) if isinstance(w, Fraction) else repr(float(w))


def _weight_parse(s: str):
    return Fraction(s) if "/" in s else float(s)


class TestBattery:
    """Gaussian-windowed polynomial moments, normalized to sup norm <= 1.

    ambient_dim 2 carries the ten probes {1, Re x, Im x, Re y, Im y, Re x^2,
    Im x^2, Re xy, Im xy, |p|^2} times exp(-|p|^2 / 2 sigma^2); ambient_dim 1
    the analogous six in one variable.
    """

    def __init__(self, ambient_dim: int, sigma: float):
        if ambient_dim not in (1, 2):
            raise ContractError("ambient_dim must be 1 or 2")
        if sigma <= 0:
            raise ContractError("sigma must be positive")
        self.ambient_dim = ambient_dim
        self.sigma = float(sigma)
        # sup of r^k exp(-r^2/2s^2) over r >= 0 is (k s^2)^(k/2) e^(-k/2)
        s = self.sigma
        lin = s * math.exp(-0.5)
        quad = 2.0 * s * s * math.exp(-1.0)
        cross = s * s * math.exp(-1.0)
        if ambient_dim == 2:
            self._probes = [
                ("gauss", lambda x, y: np.ones_like(x.real), 1.0),
                ("g_re_x", lambda x, y: x.real, lin),
                ("g_im_x", lambda x, y: x.imag, lin),
                ("g_re_y", lambda x, y: y.real, lin),
                ("g_im_y", lambda x, y: y.imag, lin),
                ("g_re_x2", lambda x, y: (x * x).real, quad),
                ("g_im_x2", lambda x, y: (x * x).imag, quad),
                ("g_re_xy", lambda x, y: (x * y).real, cross),
                ("g_im_xy", lambda x, y: (x * y).imag, cross),
                ("g_norm2", lambda x, y: np.abs(x) ** 2 + np.abs(y) ** 2, quad),
            ]
        else:
            self._probes = [
                ("gauss", lambda z: np.ones_like(z.real), 1.0),
                ("g_re", lambda z: z.real, lin),
                ("g_im", lambda z: z.imag, lin),
                ("g_re2", lambda z: (z * z).real, quad),
                ("g_im2", lambda z: (z * z).imag, quad),
                ("g_abs2", lambda z: np.abs(z) ** 2, quad),
            ]

    @property
    def ids(self) -> list[str]:
        return [name for name, _, _ in self._probes]

    def evaluate(self, test_id: str, points: np.ndarray) -> np.ndarray:
        pts = np.asarray(points, dtype=complex)
        if self.ambient_dim == 2:
            x, y = pts[:, 0], pts[:, 1]
            window = np.exp(-(np.abs(x) ** 2 + np.abs(y) ** 2) / (2.0 * self.sigma ** 2))
            for name, fn, norm in self._probes:
                if name == test_id:
                    return fn(x, y) * window / norm
        else:
            window = np.exp(-(np.abs(pts) ** 2) / (2.0 * self.sigma ** 2))
            for name, fn, norm in self._probes:
                if name == test_id:
                    return fn(pts) * window / norm
        raise ContractError(f"unknown test id {test_id!r}")


def integrate(mu: DiscreteMeasure, values_or_fn) -> float:
    """Integral of a test function against mu, summed in fixed atom order."""
    if callable(values_or_fn):
        vals = np.asarray(values_or_fn(mu.points), dtype=float)
    else:
        vals = np.asarray(values_or_fn, dtype=float)
    if vals.shape != (len(mu),):
        raise ContractError("need one test value per atom")
    w = mu.weight_array
    return math.fsum(float(a) for a in w * vals)


@dataclass(frozen=True)
class ComparisonResult:
    discrepancy: float
    advisory: bool
    worst_id: str = ""

    def __float__(self) -> float:
        return self.discrepancy


def compare(mu1: DiscreteMeasure, mu2: DiscreteMeasure,
            battery: TestBattery) -> ComparisonResult:
    """Worst |int f dmu1 - int f dmu2| over the battery; advisory when either
    cloud is incomplete (sampled or truncated atom sets compare loosely)."""
    if mu1.ambient_dim != mu2.ambient_dim:
        raise ContractError("measures live in different ambient dimensions")
    if battery.ambient_dim != mu1.ambient_dim:
        raise ContractError("battery dimension mismatch")
    worst, worst_id = 0.0, battery.ids[0]
    for test_id in battery.ids:
        d = abs(integrate(mu1, battery.evaluate(test_id, mu1.points))
                - integrate(mu2, battery.evaluate(test_id, mu2.points)))
        if d > worst:
            worst, worst_id = d, test_id
    return ComparisonResult(worst, advisory=not (mu1.complete and mu2.complete),
                            worst_id=worst_id)


def potential_of_measure(mu: DiscreteMeasure, z: complex) -> float:
    """Logarithmic potential sum w_i log|z - p_i|; -inf if z hits an atom."""
    if mu.ambient_dim != 1:
        raise ContractError("logarithmic potential is defined for planar measures")
    d = np.abs(z - mu.points)
    if np.any(d == 0.0):
        return -math.inf
    return math.fsum(float(v) for v in mu.weight_array * np.log(d))


def angular_discrepancy(mu: DiscreteMeasure, radial_tol: float = UNIT_CIRCLE_TOL) -> float:
    """Kolmogorov distance between the atom angle distribution and the uniform
    law on the circle.  Atoms must sit within radial_tol of the unit circle;
    deep backward-walk clouds carry shadowing error above the default."""
    if mu.ambient_dim != 1:
        raise ContractError("angular discrepancy needs planar atoms")
    radii = np.abs(mu.points)
    if np.any(np.abs(radii - 1.0) > radial_tol):
        worst = float(np.max(np.abs(radii - 1.0)))
        raise ContractError(f"atoms are not on the unit circle "
                            f"(worst radial deviation {worst:.3e})")
    u = np.mod(np.angle(mu.points) / (2.0 * math.pi), 1.0)
    order = np.argsort(u, kind="stable")
    u = u[order]
    w = mu.weight_array[order]
    w = w / w.sum()
    cum_after = np.cumsum(w)
    cum_before = cum_after - w
    return float(np.max(np.maximum(np.abs(cum_after - u), np.abs(cum_before - u))))
