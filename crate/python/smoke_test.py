#!/usr/bin/env python3
"""Smoke test for the ckalg_py extension module.

Builds nothing itself: it locates the cdylib produced by
`cargo build -p ckalg-py`, stages it under the import name Python
expects, and drives the bound API end to end with exact assertions.
"""

import json
import pathlib
import shutil
import sys
import tempfile

ROOT = pathlib.Path(__file__).resolve().parent.parent


def locate_extension() -> pathlib.Path:
    candidates = []
    for profile in ("debug", "release"):
        d = ROOT / "target" / profile
        candidates.extend(d.glob("libckalg_py.so"))
        candidates.extend(d.glob("ckalg_py.dll"))
        candidates.extend(d.glob("libckalg_py.dylib"))
    if not candidates:
        sys.exit("extension not found; run `cargo build -p ckalg-py` first")
    return max(candidates, key=lambda p: p.stat().st_mtime)


def stage(libpath: pathlib.Path) -> pathlib.Path:
    stage_dir = pathlib.Path(tempfile.mkdtemp(prefix="ckalg-py-"))
    shutil.copy2(libpath, stage_dir / "ckalg_py.so")
    return stage_dir


sys.path.insert(0, str(stage(locate_extension())))

import ckalg_py  # noqa: E402

EXP_SYSTEM = """\
derivations 1
unknown u
eq d1 u = u
init u 0: 1
point 0
order 6
"""


def check_solver() -> None:
    doc_text = ckalg_py.solve(EXP_SYSTEM)
    doc = json.loads(doc_text)
    assert doc["format"] == ckalg_py.SERIES_FORMAT
    assert doc["order"] == 6
    assert doc["residuals"][0]["pass"] is True

    series = ckalg_py.Series.from_document(doc_text, "u")
    assert series.order == 6
    assert series.variables == 1
    assert series.coeff([0]) == "1"
    assert series.coeff([3]) == "1/6"
    assert series.coeff([6]) == "1/720"

    report = ckalg_py.verify(doc_text)
    assert "pass" in report, report

    # The order flag overrides the file directive.
    short = json.loads(ckalg_py.solve(EXP_SYSTEM, order=3))
    assert short["order"] == 3


def check_extension_step() -> None:
    lower = ckalg_py.solve(EXP_SYSTEM, order=8)
    upper_system = "derivations 2\nunknown u\nrelation d1 u - u\npoint 0 0\norder 4\n"
    extended = ckalg_py.extend(upper_system, lower)
    series = ckalg_py.Series.from_document(extended, "u")
    # e^(z1 + z2): coefficient of z1 z2 is 1, of z1^2 is 1/2.
    assert series.variables == 2
    assert series.coeff([1, 1]) == "1"
    assert series.coeff([2, 0]) == "1/2"
    assert ckalg_py.verify(extended).endswith("pass\n")


def check_diffpoly_algebra() -> None:
    names = ["u", "w"]
    p = ckalg_py.DiffPoly.parse("d1 u * w + z1", 2, names)
    q = ckalg_py.DiffPoly.parse("d2 w", 2, names)

    # Leibniz in the bound API.
    lhs = (p * q).derive(1)
    rhs = p.derive(1) * q + p * q.derive(1)
    assert lhs == rhs
    assert (lhs - rhs).is_zero()

    sq = ckalg_py.DiffPoly.parse("(d1 u)^2 - 4*u", 2, names)
    assert sq.leader("u") == "d1 u"
    assert str(sq.separant("u")) == "2*d1 u"

    # Printing round-trips through the parser.
    again = ckalg_py.DiffPoly.parse(str(p), 2, names)
    assert again == p


def check_reports_and_errors() -> None:
    rel = "derivations 1\nunknown x\nrelation (d1 x)^2 - 4*x\nexpr d1^3 x\n"
    assert "separant: 2*d1 x" in ckalg_py.separant_report(rel)
    reduced = ckalg_py.reduce(rel)
    assert "reduced: 0" in reduced and "separant power: 2" in reduced

    chg = "derivations 2\nunknown x\nrelation d2 x - 1\nwitness x: z2\n"
    assert "lambda: 1" in ckalg_py.change_derivations(chg)

    geo = json.loads(ckalg_py.expand("derivations 1\nexpr 1/(1 - z1)\norder 4\n"))
    assert geo["unknowns"][0]["terms"][-1]["value"] == "1"

    heat = "derivations 2\nunknown u\neq d1 u = d2^2 u\ninit u 0: z2^2\norder 3\n"
    try:
        ckalg_py.solve(heat)
    except ckalg_py.CkalgError as e:
        msg = str(e)
        assert msg.startswith("normal-form:"), msg
        assert "d2^2 u" in msg, msg
    else:
        raise AssertionError("heat equation must be rejected")


def main() -> None:
    check_solver()
    check_extension_step()
    check_diffpoly_algebra()
    check_reports_and_errors()
    print("smoke test passed")


if __name__ == "__main__":
    main()
