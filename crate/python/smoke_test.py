#!/usr/bin/env python3
"""Smoke test for the oldroyd_py extension module.

Build the module first:

    cargo build -p oldroyd-py --release

then run this script from the repository root (or anywhere):

    python3 python/smoke_test.py
"""

import math
import shutil
import sys
import tempfile
from pathlib import Path


def load_module():
    root = Path(__file__).resolve().parent.parent
    candidates = [
        root / "target" / "release" / "liboldroyd_py.so",
        root / "target" / "debug" / "liboldroyd_py.so",
    ]
    lib = next((p for p in candidates if p.exists()), None)
    if lib is None:
        sys.exit("liboldroyd_py.so not found; run `cargo build -p oldroyd-py --release` first")
    stage = Path(tempfile.mkdtemp(prefix="oldroyd_py_"))
    shutil.copy(lib, stage / "oldroyd_py.so")
    sys.path.insert(0, str(stage))
    import oldroyd_py

    return oldroyd_py


def approx(a, b, tol=1e-9):
    assert abs(a - b) <= tol * max(abs(b), 1.0), f"{a} vs {b}"


def main():
    m = load_module()
    checks = 0

    # grid construction and validation
    g = m.Grid(2, 32, 2.0 * math.pi)
    assert g.d == 2 and g.n == 32 and g.modes() == 1024
    try:
        m.Grid(2, 7, 1.0)
        raise AssertionError("non-power-of-two grid must be rejected")
    except ValueError:
        pass
    checks += 2

    # single-mode spectral calculus: d/dx sin(x) = cos(x)
    n = g.n
    h = 2.0 * math.pi / n
    sin_x = m.ScalarField.from_values(g, [math.sin((i // n) * h) for i in range(n * n)])
    cos_x = sin_x.derivative(0)
    expected = [math.cos((i // n) * h) for i in range(n * n)]
    worst = max(abs(a - b) for a, b in zip(cos_x.values(), expected))
    assert worst < 1e-12, worst
    checks += 1

    # heat flow on an eigenmode: exact multiplier
    flowed = sin_x.heat_propagate(0.25, 1.0)
    approx(flowed.lp_norm(2.0), math.exp(-0.25) * sin_x.lp_norm(2.0), 1e-12)
    checks += 1

    # L2 norm of sin over the torus: sqrt(2 pi^2)
    approx(sin_x.lp_norm(2.0), math.sqrt(2.0 * math.pi**2), 1e-12)
    checks += 1

    # weak norm of the four-cell example {3,1,1,1} on unit cells
    g4 = m.Grid(2, 8, 8.0)  # 64 unit cells
    vals = [0.0] * 64
    vals[0] = 3.0
    vals[1] = vals[2] = vals[3] = 1.0
    f4 = m.ScalarField.from_values(g4, vals)
    approx(f4.weak_lp_norm(2.0), 3.0, 1e-12)
    checks += 1

    # Besov norm of a single-block field scales by 2^s per octave
    gb = m.Grid(2, 64, 2.0 * math.pi)
    f1 = m.ScalarField.from_values(
        gb, [math.sin(2.0 * ((i // 64) * 2.0 * math.pi / 64)) for i in range(64 * 64)]
    )
    f2 = m.ScalarField.from_values(
        gb, [math.sin(4.0 * ((i // 64) * 2.0 * math.pi / 64)) for i in range(64 * 64)]
    )
    s = 0.5
    ratio = f2.besov_norm(s, 2.0, 1.0) / f1.besov_norm(s, 2.0, 1.0)
    approx(ratio, 2.0**s, 1e-6)
    checks += 1

    # bound functionals: spot values
    approx(m.gamma(0.0, 1.0, 4.0), 2.0, 1e-14)
    approx(m.theta_a(1.0, math.log(2.0)), 0.5, 1e-14)
    approx(m.phi(1.0, 1.0, 0.0, 0.0, 1.0, 1.0), 16.0, 1e-12)
    approx(m.theta_nu(1.0, 1.0, 1.0, 1.0, 1.0), 2.0 * math.e - 1.0, 1e-12)
    approx(m.gronwall_t_max([0.0, 1.0], [], [0.37]), math.sqrt(2.0 / 0.37), 1e-7)
    assert m.gronwall_t_max([0.0, 1.0], [0.1], []) == math.inf
    assert m.lifespan_lower_bound(1.0, 0.0, 0.0, 1.0, 1.0, 1.0, 1.0, 8.0) == math.inf
    checks += 7

    # short corotational decay run: ||tau(t)|| = e^{-a t} ||tau(0)||
    out = m.simulate(2, 32, 1.0, 1.0, 0.0, 0.0, 0.1, 1e-3, seed=3, amplitude=0.2)
    rel = abs(out["final_tau_l2"] / out["tau_l2"][0] - math.exp(-out["final_time"]))
    assert rel < 1e-6, rel
    assert out["times"][0] == 0.0 and out["final_time"] >= 0.1 - 1e-12
    checks += 2

    print(f"oldroyd_py smoke test: {checks} checks passed")


if __name__ == "__main__":
    main()
