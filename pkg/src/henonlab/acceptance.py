"""End-to-end acceptance checks for the whole toolkit.

Twelve numbered criteria, each an independent function returning a verdict
plus the measured quantities that justify it.  `run_all` executes them in
order and never raises: a crashing criterion is reported as failed with the
exception recorded.  The CLI `validate` subcommand and the test suite both
run through this module, so there is exactly one definition of "works".
"""

from __future__ import annotations

import math
import tempfile
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .dynamics import MapParams
from .measures import TestBattery, angular_discrepancy, compare, \
    potential_of_measure
from .periodic2d import (cylinder_point_measure, mu_n_measure,
                         negative_fixed_point, periodic_points_2d,
                         saddle_count_ratio, unstable_disk_sample)
from .poly1d import Poly, brolin_measure
from .potential import (ScalarGrid, discrete_ddc_mass, green_plus_field,
                        green_poly_field, mass_in_disk)
from .symbolic import (PeriodicSequence, SymbolWord, count_admissible_words,
                       entropy_estimate)

SQUARE = Poly((0.0, 0.0, 1.0))
HORSESHOE = MapParams(10.0, 0.3)


@dataclass(frozen=True)
class CriterionResult:
    cid: int
    name: str
    passed: bool
    details: dict = field(default_factory=dict)
    elapsed: float = 0.0


def _criterion_01():
    """Squaring-map field: computed values equal log+ |z| to 1e-9."""
    rng = np.random.default_rng(11)
    pts = rng.uniform(-3.0, 3.0, size=(1000, 2))
    zs = pts[:, 0] + 1j * pts[:, 1]
    t0 = time.perf_counter()
    fld = green_poly_field(zs, SQUARE)
    dt = time.perf_counter() - t0
    target = np.log(np.maximum(np.abs(zs), 1.0))
    err = float(np.max(np.abs(fld.values - target)))
    all_conv = bool(np.all(fld.converged))
    return err < 1e-9 and all_conv and dt < 1.0, {
        "points": 1000, "max_error": err, "all_converged": all_conv,
        "seconds": dt, "time_limit": 1.0,
    }


def _criterion_02():
    """Backward-tree equidistribution on the circle for the squaring map."""
    t0 = time.perf_counter()
    mu_exact = brolin_measure(SQUARE, "preimage", 12, c=1.0)
    d_exact = angular_discrepancy(mu_exact)
    # depth-12 preimages of 1 are the exact 4096th roots of unity, so the
    # Kolmogorov distance can only reach the atomic floor 1/4096
    gap = abs(d_exact - 1.0 / 4096.0)
    mu_off = brolin_measure(SQUARE, "preimage", 14, c=0.5)
    # depth-14 preimages of 0.5 still sit ~4e-5 inside the circle
    d_off = angular_discrepancy(mu_off, radial_tol=1e-3)
    dt = time.perf_counter() - t0
    return gap <= 1e-9 and d_off < 0.02 and dt < 10.0, {
        "floor_gap_at_c1": gap, "discrepancy_at_c05": d_off,
        "atoms": [len(mu_exact), len(mu_off)],
        "seconds": dt, "time_limit": 10.0,
    }


def _criterion_03():
    """Periodic-point measure reproduces the squaring-map potential."""
    t0 = time.perf_counter()
    mu = brolin_measure(SQUARE, "periodic", 10)
    errs = {}
    for z in (1.5, 2.0, 3.0):
        errs[str(z)] = abs(potential_of_measure(mu, z) - math.log(z))
    dt = time.perf_counter() - t0
    worst = max(errs.values())
    return mu.complete and worst < 0.01, {
        "complete": mu.complete, "atoms": len(mu),
        "potential_errors": errs, "worst": worst, "seconds": dt,
    }


def _criterion_04():
    """Five-point laplacian of log|z| concentrates unit mass at the origin."""
    t0 = time.perf_counter()
    grid = ScalarGrid.over_window(lambda z: np.log(np.abs(z)),
                                  -1.0, 1.0, -1.0, 1.0, 0.01)
    mass = discrete_ddc_mass(grid)
    inside = mass_in_disk(mass, 0.0, 0.5)
    dt = time.perf_counter() - t0
    return 0.99 <= inside <= 1.01 and dt < 5.0, {
        "grid": [grid.height, grid.width], "mass_in_half_disk": inside,
        "seconds": dt, "time_limit": 5.0,
    }


def _criterion_05():
    """Forward escape rate doubles under one map application."""
    cases = [(10.0, 0.3), (3.0, -0.5), (1.4 + 0.2j, 0.3)]
    t0 = time.perf_counter()
    worst_by_case = {}
    for a, b in cases:
        m = MapParams(a, b)
        rng = np.random.default_rng(23)
        collected = 0
        worst = 0.0
        for _ in range(10):
            if collected >= 1000:
                break
            box = rng.uniform(-2.0 * m.R, 2.0 * m.R, size=(4000, 4))
            xs = box[:, 0] + 1j * box[:, 1]
            ys = box[:, 2] + 1j * box[:, 3]
            f1 = green_plus_field(xs, ys, m)
            keep = (f1.converged & ~f1.presumed_bounded & (f1.values > 0.0)
                    & (f1.bounds <= 1e-8))
            if not np.any(keep):
                continue
            xs, ys, v1 = xs[keep], ys[keep], f1.values[keep]
            x2 = -xs * xs + m.a - m.b * ys
            f2 = green_plus_field(x2, xs, m)
            ok = f2.converged & (f2.bounds <= 1e-8)
            err = np.abs(f2.values[ok] - 2.0 * v1[ok])
            take = min(err.size, 1000 - collected)
            if take:
                worst = max(worst, float(np.max(err[:take])))
            collected += take
        worst_by_case[f"a={a}, b={b}"] = worst
        if collected < 1000:
            worst_by_case[f"a={a}, b={b}"] = math.inf
    dt = time.perf_counter() - t0
    worst = max(worst_by_case.values())
    return worst < 1e-6 and dt < 10.0, {
        "points_per_case": 1000, "worst_defect": worst,
        "by_case": worst_by_case, "seconds": dt, "time_limit": 10.0,
    }


def _mobius_minimal_count(n: int) -> int:
    # inclusion-exclusion over divisors: points of minimal period n
    def mu(k):
        out, p = 1, 2
        while p * p <= k:
            if k % p == 0:
                k //= p
                if k % p == 0:
                    return 0
                out = -out
            p += 1
        return -out if k > 1 else out

    return sum(mu(n // d) * 2 ** d for d in range(1, n + 1) if n % d == 0)


def _criterion_06():
    """Complete period-n census at (10, 0.3) for n <= 6, all orbits real."""
    t0 = time.perf_counter()
    counts, minimal, imag_worst, complete = {}, {}, 0.0, True
    for n in range(1, 7):
        lv = periodic_points_2d(HORSESHOE, n)
        counts[n] = lv.fixed_point_count
        minimal[n] = lv.minimal_point_count(saddles_only=True)
        complete = complete and lv.complete
        for o in lv.orbits:
            imag_worst = max(imag_worst, o.max_imag)
    dt = time.perf_counter() - t0
    count_ok = all(counts[n] == 2 ** n for n in counts)
    minimal_ok = all(minimal[n] == _mobius_minimal_count(n) for n in minimal)
    return (complete and count_ok and minimal_ok
            and imag_worst <= 1e-7 and dt < 120.0), {
        "counts": counts, "minimal_saddle_counts": minimal,
        "complete": complete, "worst_imag_part": imag_worst,
        "seconds": dt, "time_limit": 120.0,
    }


def _criterion_07():
    """Saddle-count ratio never drops below its n=3 value through n=6."""
    t0 = time.perf_counter()
    tab = saddle_count_ratio(HORSESHOE, 6)
    dt = time.perf_counter() - t0
    ratios = {row.n: row.ratio for row in tab.rows}
    floor = ratios[3]
    ok_floor = all(ratios[n] >= floor - 1e-12 for n in range(3, 7))
    ok_end = ratios[6] >= 0.75
    counts_ok = all(row.saddle_count == _mobius_minimal_count(row.n)
                    for row in tab.rows)
    return ok_floor and ok_end and counts_ok, {
        "ratios": {str(k): v for k, v in ratios.items()},
        "baseline": floor, "verdict": tab.verdict, "seconds": dt,
    }


def _criterion_08():
    """Period-n measures tighten with n and match the itinerary pushforward."""
    t0 = time.perf_counter()
    mus = {n: mu_n_measure(periodic_points_2d(HORSESHOE, n))
           for n in (4, 6, 8)}
    battery = TestBattery(2, sigma=HORSESHOE.R)
    d46 = compare(mus[4], mus[6], battery).discrepancy
    d68 = compare(mus[6], mus[8], battery).discrepancy
    cyl = cylinder_point_measure(HORSESHOE, 3)
    d_cyl = compare(mus[6], cyl, battery).discrepancy
    dt = time.perf_counter() - t0
    return d46 > d68 and d_cyl < 0.05, {
        "d(mu4, mu6)": d46, "d(mu6, mu8)": d68,
        "d(mu6, cylinder3)": d_cyl, "seconds": dt,
    }


def _golden_mean_counts(n_max: int) -> dict:
    # blocks with no adjacent 1s: S(n) follows the Fibonacci recurrence
    counts = {1: 2, 2: 3}
    for n in range(3, n_max + 1):
        counts[n] = counts[n - 1] + counts[n - 2]
    return counts


def _criterion_09():
    """Word census gives log 2 on the full shift, log phi on the golden mean."""
    t0 = time.perf_counter()
    lv = periodic_points_2d(HORSESHOE, 8)
    seqs = []
    for o in lv.orbits:
        bits = tuple(0 if p.x.real < 0.0 else 1 for p in o.points)
        seqs.append(PeriodicSequence(SymbolWord(bits)))
    counts = {n: count_admissible_words(seqs, n) for n in range(1, 9)}
    census_ok = all(counts[n] == 2 ** n for n in counts)
    est = entropy_estimate(counts, 8)
    full_err = abs(est.point - math.log(2.0))
    gm = entropy_estimate(_golden_mean_counts(20), 20)
    phi = math.log((1.0 + math.sqrt(5.0)) / 2.0)
    gm_rel = abs(gm.point - phi) / phi
    dt = time.perf_counter() - t0
    return (lv.complete and census_ok and full_err < 1e-6
            and gm_rel <= 0.05), {
        "word_counts": counts, "full_shift_error": full_err,
        "golden_mean_relative_error": gm_rel, "seconds": dt,
    }


def _criterion_10():
    """The outgoing cone absorbs forward orbits with |x| strictly growing."""
    cases = [(10.0, 0.3), (3.0, -0.5), (1.4 + 0.2j, 0.3), (0.1, 0.3),
             (2.0, 1.0)]
    t0 = time.perf_counter()
    by_case = {}
    all_ok = True
    for a, b in cases:
        m = MapParams(a, b)
        rng = np.random.default_rng(31)
        n = 10000
        rad = rng.uniform(m.R, 4.0 * m.R, size=n)
        x = rad * np.exp(2j * math.pi * rng.uniform(size=n))
        y = (rng.uniform(0.0, 1.0, size=n) * rad
             * np.exp(2j * math.pi * rng.uniform(size=n)))
        ok = bool(np.all((np.abs(x) >= np.abs(y)) & (np.abs(x) >= m.R)))
        active = np.ones(n, dtype=bool)
        with np.errstate(over="ignore", invalid="ignore"):
            for _ in range(20):
                x2 = -x * x + m.a - m.b * y
                ax, ax2 = np.abs(x[active]), np.abs(x2[active])
                # next point is (x2, x): cone membership needs |x2| >= |x|
                # and |x2| >= R, and the growth clause wants it strict
                step_ok = np.all(ax2 > ax) and np.all(ax2 >= m.R)
                ok = ok and bool(step_ok)
                y = np.where(active, x, y)
                x = np.where(active, x2, x)
                # freeze past double range; escape is already certain there
                active &= np.abs(x) < 1e100
                if not np.any(active):
                    break
        by_case[f"a={a}, b={b}"] = ok
        all_ok = all_ok and ok
    dt = time.perf_counter() - t0
    return all_ok, {"points_per_case": 10000, "iterates": 20,
                    "by_case": by_case, "seconds": dt}


def _criterion_11():
    """Unstable-manifold cloud passes within 1e-2 of every short saddle."""
    t0 = time.perf_counter()
    cloud = unstable_disk_sample(negative_fixed_point(HORSESHOE), HORSESHOE,
                                 steps=14, samples=20000)
    worst = 0.0
    saddle_points = 0
    for n in range(1, 7):
        lv = periodic_points_2d(HORSESHOE, n)
        for o in lv.minimal_orbits:
            if o.orbit_class != "saddle":
                continue
            for p in o.points:
                saddle_points += 1
                d = np.sqrt(np.abs(cloud[:, 0] - p.x) ** 2
                            + np.abs(cloud[:, 1] - p.y) ** 2)
                worst = max(worst, float(d.min()))
    dt = time.perf_counter() - t0
    return worst < 1e-2 and dt < 60.0, {
        "cloud_points": int(cloud.shape[0]), "saddle_points": saddle_points,
        "worst_distance": worst, "seconds": dt, "time_limit": 60.0,
    }


def _criterion_12(workdir):
    """Every subcommand yields byte-identical files across thread counts."""
    from .cli import main as cli_main

    base = Path(workdir) if workdir is not None else None
    if base is None:
        base = Path(tempfile.mkdtemp(prefix="determinism-"))
    base.mkdir(parents=True, exist_ok=True)

    jobs = {
        "render-green": {
            "command": "render-green", "mode": "plus",
            "window": {"center": [0.0, 0.0], "width": 14.0, "height": 10.0,
                       "pixels": [96, 64]},
            "budgets": {"n_max": 60},
        },
        "julia-cloud": {
            "command": "julia-cloud",
            "budgets": {"walks": 512, "depth": 25, "burn_in": 10},
            "window": {"center": [0.0, 0.0], "width": 4.0, "height": 4.0,
                       "pixels": [64, 64]},
        },
        "periodic-report": {
            "command": "periodic-report",
            "budgets": {"level_max": 4, "budget": 512},
        },
        "entropy-report": {
            "command": "entropy-report",
            "budgets": {"word_max": 6, "reality_n_max": 3, "budget": 512},
        },
        "validate": {
            "command": "validate",
            "params": {"criteria": [4]},
        },
    }

    import json as _json
    identical = {}
    codes = {}
    all_ok = True
    for name, doc in jobs.items():
        cfg_path = base / f"{name}.json"
        cfg_path.write_text(_json.dumps(doc))
        outputs = []
        rcs = []
        for threads, tag in ((1, "t1"), (4, "t4")):
            out_dir = base / f"{name}-{tag}"
            rc = cli_main([name, "--config", str(cfg_path),
                           "--threads", str(threads),
                           "--out", str(out_dir)])
            rcs.append(rc)
            listing = {}
            for p in sorted(out_dir.rglob("*")):
                if p.is_file():
                    listing[str(p.relative_to(out_dir))] = p.read_bytes()
            outputs.append(listing)
        same = (outputs[0].keys() == outputs[1].keys()
                and all(outputs[0][k] == outputs[1][k] for k in outputs[0]))
        identical[name] = same
        codes[name] = rcs
        all_ok = all_ok and same and rcs[0] == rcs[1] == 0
    return all_ok, {"identical": identical, "exit_codes": codes,
                    "workdir": str(base)}


_CRITERIA = (
    (1, "squaring-map escape rate matches log+|z|", _criterion_01),
    (2, "backward tree equidistributes over the circle", _criterion_02),
    (3, "periodic-point potential matches the escape rate", _criterion_03),
    (4, "discrete laplacian of log|z| carries unit mass", _criterion_04),
    (5, "forward escape rate doubles under the map", _criterion_05),
    (6, "period census at (10, 0.3) complete and real through n=6",
     _criterion_06),
    (7, "saddle-count ratio holds its n=3 floor", _criterion_07),
    (8, "periodic measures converge and match the cylinder pushforward",
     _criterion_08),
    (9, "word census entropy: log 2 full shift, log phi control",
     _criterion_09),
    (10, "outgoing cone absorbs orbits with growing |x|", _criterion_10),
    (11, "unstable manifold cloud shadows every short saddle", _criterion_11),
    (12, "CLI outputs are byte-identical across thread counts",
     _criterion_12),
)


def run_all(workdir=None, only=None) -> list[CriterionResult]:
    """Run the acceptance criteria in order, catching per-criterion crashes.

    `workdir` hosts scratch output for the CLI determinism check; `only`
    restricts the run to the listed criterion ids.
    """
    results = []
    wanted = None if not only else {int(k) for k in only}
    for cid, name, fn in _CRITERIA:
        if wanted is not None and cid not in wanted:
            continue
        t0 = time.perf_counter()
        try:
            if fn is _criterion_12:
                passed, details = fn(workdir)
            else:
                passed, details = fn()
        except Exception as exc:  # a crash is a failure, not an abort
            passed, details = False, {"error": repr(exc)}
        results.append(CriterionResult(cid, name, bool(passed), details,
                                       time.perf_counter() - t0))
    return results
