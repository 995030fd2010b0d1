#!/usr/bin/env python3
"""Smoke test for the sealimb_py extension module.

Build the module first:

    cargo build --release -p sealimb-py

then run this script from anywhere inside the repository:

    python3 python/smoke_test.py
"""

import math
import shutil
import sys
import tempfile
from pathlib import Path

REPO = Path(__file__).resolve().parent.parent


def load_module():
    candidates = [
        REPO / "target" / "release" / "libsealimb_py.so",
        REPO / "target" / "debug" / "libsealimb_py.so",
    ]
    lib = next((p for p in candidates if p.exists()), None)
    if lib is None:
        sys.exit(
            "libsealimb_py.so not found; run `cargo build --release -p sealimb-py` first"
        )
    stage = Path(tempfile.mkdtemp(prefix="sealimb_py_"))
    shutil.copy2(lib, stage / "sealimb_py.so")
    sys.path.insert(0, str(stage))
    import sealimb_py

    return sealimb_py


def approx(a, b, tol=1e-9):
    assert abs(a - b) <= tol, f"{a} != {b} (tol {tol})"


def main():
    m = load_module()
    print(f"loaded sealimb_py {m.__version__}")

    # Lyapunov solve against the hand-derived identity-weight solution
    p, residual = m.solve_lyapunov([[0.0, 1.0], [-6.0, -4.0]])
    approx(p[0][0], 29.0 / 24.0, 1e-12)
    approx(p[0][1], 1.0 / 12.0, 1e-12)
    approx(p[1][0], 1.0 / 12.0, 1e-12)
    approx(p[1][1], 7.0 / 48.0, 1e-12)
    assert residual <= 1e-12
    print("solve_lyapunov ok")

    # geometry: direct-substitution length and the torque round trip
    linkage = m.Linkage(beta_offset=0.0)
    approx(linkage.lsea_length(0.0), math.sqrt(0.007309), 1e-12)
    default = m.Linkage()
    ge = default.eval(0.2)
    assert ge["g"] < 0.0 and ge["l_sea"] > 0.0
    assert 0.0 < ge["sin_delta"] <= 1.0 and 0.0 < ge["sin_gamma"] <= 1.0
    tau = 1.7
    approx(default.torque_from_deflection(default.deflection_from_torque(tau, 0.2), 0.2), tau, 1e-12)
    try:
        m.Linkage(beta_offset=0.0).angle_sines(-0.29)
    except ValueError as exc:
        assert "degenerate" in str(exc)
    else:
        sys.exit("expected a degenerate-angle error")
    print("geometry ok")

    # configuration and a short closed-loop run
    cfg = m.default_config()
    assert "[simulation]" in cfg and "k1 = 30.0" in cfg
    short = "[simulation]\nduration = 1.0\n"
    a = m.simulate(short)
    b = m.simulate(short)
    assert a["rows"] == 101 and a["fault"] is None
    assert a["columns"]["x1"][0] == 0.2
    assert a["columns"]["x1"] == b["columns"]["x1"], "runs are not deterministic"
    assert a["columns"]["t"][-1] == 1.0
    print("simulate ok")

    results = m.run_checks()
    for name, passed, detail in results:
        print(f"  {'PASS' if passed else 'FAIL'} {name}: {detail}")
    assert all(passed for _, passed, _ in results), "built-in checks failed"

    print("smoke test passed")


if __name__ == "__main__":
    main()
