import numpy as np
import pytest

from swapcluster import CandidateSet, Instance, Metric, ObjectiveSpec, PointSet


def line_instance(xs, k=2, q=2.0, family="lq", cands=None, costs=None, weights=None):
    pts = np.asarray(xs, dtype=float)[:, None]
    cs = pts.copy() if cands is None else np.asarray(cands, dtype=float)[:, None]
    if family == "ufl":
        obj = ObjectiveSpec.ufl(q)
    elif family == "gkm":
        obj = ObjectiveSpec.gkm(k, q)
    else:
        obj = ObjectiveSpec.lq(q, k)
    return Instance(PointSet.from_coords(pts, weights), CandidateSet.from_coords(cs, costs), Metric.euclidean(1), obj)


def plane_instance(coords, k=2, q=2.0):
    xy = np.asarray(coords, dtype=float)
    return Instance(PointSet.from_coords(xy), CandidateSet.from_coords(xy.copy()), Metric.euclidean(xy.shape[1]),
                    ObjectiveSpec.lq(q, k))


@pytest.fixture
def line():
    return line_instance


def pytest_terminal_summary(terminalreporter):
    reports = []
    for outcome in ("passed", "failed", "error"):
        for rep in terminalreporter.stats.get(outcome, []):
            if getattr(rep, "when", None) != "call" and outcome != "error":
                continue
            if "test_acceptance.py::test_criterion" in rep.nodeid:
                reports.append((rep.nodeid, outcome, dict(getattr(rep, "user_properties", []))))
    if not reports:
        return
    terminalreporter.section("acceptance criteria")
    for nodeid, outcome, props in sorted(reports):
        name = nodeid.split("::")[-1]
        verdict = "PASS" if outcome == "passed" else "FAIL"
        detail = props.get("summary", "")
        terminalreporter.write_line(f"{verdict} {name} {detail}".rstrip())
