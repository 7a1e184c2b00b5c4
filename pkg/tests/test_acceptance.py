"""Acceptance suite: runs the CLI selftest and reports one PASS/FAIL line per criterion."""

import json
import subprocess
import sys

import pytest

SEED = 1
CRITERIA = list(range(1, 13))
LINES = []


def _selftest(tmp, name, *extra):
    path = tmp / name
    cmd = [sys.executable, "-m", "ffsummatory", "selftest", "--seed", str(SEED), "--threads", "1",
           "--out", str(path), *extra]
    proc = subprocess.run(cmd, capture_output=True, text=True)
    return proc.returncode, path.read_bytes() if path.exists() else b""


@pytest.fixture(scope="session")
def runs(tmp_path_factory):
    tmp = tmp_path_factory.mktemp("selftest")
    first = _selftest(tmp, "run1.json")
    second = _selftest(tmp, "run2.json")
    return first, second


@pytest.fixture(scope="session")
def report(runs):
    (_, raw), _ = runs
    assert raw, "selftest produced no report"
    return json.loads(raw)


def _line(cid, name, ok, detail=""):
    line = f"{'PASS' if ok else 'FAIL'} criterion {cid:2d}: {name}" + (f" [{detail}]" if detail else "")
    LINES.append(line)
    print(line)


def _summary(measured):
    if not isinstance(measured, dict):
        return ""
    keys = [k for k, v in measured.items() if isinstance(v, (int, float, str, bool)) and k != "rows"]
    return ", ".join(f"{k}={measured[k]}" for k in sorted(keys)[:4])


@pytest.mark.parametrize("cid", CRITERIA)
def test_criterion(report, runs, cid):
    crit = {c["id"]: c for c in report["criteria"]}[cid]
    ok = bool(crit["pass"])
    detail = _summary(crit.get("measured"))
    if cid == 12:
        (code1, raw1), (code2, raw2) = runs
        same = raw1 == raw2 and code1 == code2
        ok = ok and same
        detail = f"in-process={crit['pass']}, two subprocess runs byte-identical={same}"
    _line(cid, crit["name"], ok, detail)
    assert ok, json.dumps(crit, indent=1)[:4000]


def test_exit_code_reflects_report(report, runs):
    (code, _), _ = runs
    assert code == (0 if report["all_pass"] else 2)


def test_fault_injection_is_detected(tmp_path):
    code, raw = _selftest(tmp_path, "fault.json", "--inject-fault")
    rep = json.loads(raw)
    crit = {c["id"]: c for c in rep["criteria"]}
    assert code == 2 and not rep["all_pass"]
    assert not crit[2]["pass"]
