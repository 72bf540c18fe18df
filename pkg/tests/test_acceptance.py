"""End-to-end checks, one test per shipped guarantee.

Each test prints a single PASS/FAIL line (run pytest -s to see them all);
tolerances are pinned inside henonlab.acceptance next to each check.
"""

import pytest

from henonlab.acceptance import _CRITERIA, run_all

ALL_IDS = [cid for cid, _, _ in _CRITERIA]


def test_criteria_registry_shape():
    assert ALL_IDS == list(range(1, 13))
    names = [name for _, name, _ in _CRITERIA]
    assert len(set(names)) == 12


@pytest.mark.parametrize("cid", ALL_IDS)
def test_criterion(cid, tmp_path):
    results = run_all(tmp_path, only=[cid])
    assert len(results) == 1
    r = results[0]
    print(f"criterion {cid:02d} {'PASS' if r.passed else 'FAIL'}: {r.name}")
    assert r.passed, f"criterion {cid:02d} ({r.name}) failed: {r.details}"
