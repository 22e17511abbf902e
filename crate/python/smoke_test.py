"""Smoke test for the Python extension.

Build and run from the repository root:

    PYO3_BUILD_EXTENSION_MODULE=1 cargo build -p monodromy-py --release
    cp target/release/libmonodromy_py.so python/monodromy_py.so
    python3 python/smoke_test.py
"""

import json
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent))

import monodromy_py as m  # noqa: E402


def main():
    diag = json.dumps({"n": 2, "B": [[[0.3, 0], [0, 0]], [[0, 0], [-0.2, 0.1]]]})
    sd = json.loads(m.stokes_data(diag))
    assert sd["S_plus"] == [[[1.0, 0.0], [0.0, 0.0]], [[0.0, 0.0], [1.0, 0.0]]], sd["S_plus"]

    p = json.loads(m.nu(json.dumps({"n": 3, "seed": 4})))
    assert len(p["b_plus"]) == 3

    assert "poisson" in m.checks()
    rep = json.loads(m.verify("monodromy", json.dumps({"dims": [2, 3], "trials": 3})))
    assert rep["passed"], rep
    again = json.loads(m.verify("monodromy", json.dumps({"dims": [2, 3], "trials": 3})))
    assert rep == again

    assert m.markoff(3, 3, 3) == 0
    assert m.markoff(3, 0, 0) == 9

    try:
        m.verify("nothing")
    except ValueError:
        pass
    else:
        raise AssertionError("unknown check accepted")

    print("smoke test ok: monodromy max_error %.3e" % rep["max_error"])


if __name__ == "__main__":
    main()
