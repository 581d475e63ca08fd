"""Smoke test for the latwin_py extension.

Build first:
    cargo build --release -p latwin-py --features extension-module
then run this script; it looks for the built library under target/release
(or pass its directory as the first argument).
"""

import importlib.util
import json
import pathlib
import shutil
import sys
import tempfile

ROOT = pathlib.Path(__file__).resolve().parents[3]


def load():
    search = [pathlib.Path(sys.argv[1])] if len(sys.argv) > 1 else [ROOT / "target/release", ROOT / "target/debug"]
    for d in search:
        for name in ("liblatwin_py.so", "liblatwin_py.dylib", "latwin_py.dll"):
            lib = d / name
            if lib.exists():
                tmp = pathlib.Path(tempfile.mkdtemp()) / "latwin_py.so"
                shutil.copy(lib, tmp)
                spec = importlib.util.spec_from_file_location("latwin_py", tmp)
                mod = importlib.util.module_from_spec(spec)
                spec.loader.exec_module(mod)
                return mod
    sys.exit("latwin_py library not found; build it first")


def main():
    lw = load()

    assert lw.merge([1, 0, 2], [0, 3, 1]) == [1, 3, 2]

    # P0 sends at the end of its state 0; P1 receives it, which starts its state 1.
    a0 = lw.LocalState(0, 0, [1, 0], {"p": True})
    a1 = lw.LocalState(0, 1, [2, 0], {"p": True})
    b0 = lw.LocalState(1, 0, [0, 1], {"p": False})
    b1 = lw.LocalState(1, 1, [2, 2], {"p": True})
    assert lw.happens_before(a0, b1)
    assert lw.concurrent(a1, b1)

    eng = lw.LatWin(2, 2)
    reports = []
    for s in (b1, a0, b0, a1):
        reports.extend(eng.receive(s))
    assert len(reports) == 4, reports
    eng.validate()
    full = sorted(lw.full_lattice([a0, a1, b0, b1]))
    assert sorted(eng.nodes()) == full, (eng.nodes(), full)
    assert eng.c_min() == [0, 0] and eng.c_max() == [1, 1]
    assert eng.detect(["p"], "possibly")
    assert eng.detect(["p"], "definitely")
    assert eng.stats()["advances"] == 4

    states = lw.simulate(json.dumps({"n": 2, "lifetime": "20min", "seed": 3}))
    eng = lw.LatWin(2, 3)
    for s in states:
        eng.receive(s)
        eng.validate()
    assert eng.stats()["max_nodes"] <= 9

    csv = lw.run_sweep("benefit", [1, 2], json.dumps({"lifetime": "20min", "seeds": 2}))
    lines = csv.strip().splitlines()
    assert lines[0].startswith("sweep,param") and len(lines) == 3, csv

    checked, violations = lw.oracle_check(seeds=5, ns=[2], ws=[1, 2], max_events=6)
    assert checked > 0 and violations == 0

    print("latwin_py smoke test: ok")


if __name__ == "__main__":
    main()
