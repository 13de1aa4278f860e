"""Smoke test for the sc_scaling_py extension.

Build first with `maturin develop -m crates/python/Cargo.toml`, or with
`cargo build -p sc-scaling-py --release`; in the second case the shared
library under target/ is loaded directly.
"""

import importlib.util
import math
import pathlib
import shutil
import sys
import tempfile

ROOT = pathlib.Path(__file__).resolve().parent.parent


def load():
    try:
        import sc_scaling_py

        return sc_scaling_py
    except ImportError:
        pass
    for profile in ("release", "debug"):
        lib = ROOT / "target" / profile / "libsc_scaling_py.so"
        if lib.exists():
            tmp = pathlib.Path(tempfile.mkdtemp()) / "sc_scaling_py.so"
            shutil.copy(lib, tmp)
            spec = importlib.util.spec_from_file_location("sc_scaling_py", tmp)
            mod = importlib.util.module_from_spec(spec)
            spec.loader.exec_module(mod)
            return mod
    sys.exit("sc_scaling_py not built")


def close(a, b, tol):
    assert abs(a - b) <= tol, (a, b)


def main():
    sc = load()

    close(sc.margin([0.6, 0.4]), (math.sqrt(0.6) - math.sqrt(0.4)) ** 2, 1e-15)
    # x = 3 on (0.6, 0.4): the mode loses with at most one vote.
    close(sc.exact_mode_error([0.6, 0.4], 3), 0.4**3 + 3 * 0.4**2 * 0.6, 1e-12)
    value, stderr = sc.mc_mode_error([0.6, 0.4], 3, 50_000, 1)
    close(value, 0.352, 4 * stderr)
    assert sc.exact_mode_error([0.5, 0.3, 0.2], 9) <= sc.thm1_bound([0.5, 0.3, 0.2], 9)
    assert sc.kl_lower_bound([0.6, 0.4], 0.05) > 0

    close(sc.asc_confidence(3, 0), 1 / 16, 1e-14)
    close(sc.ppr_confidence([10, 0]), 11 / 1024, 1e-12)

    lam, err = sc.lagrangian_allocation(0.5, 100.0)
    assert 0 < lam < 1 and 0 < err < 1

    xs = [10.0 ** (2 + k / 4) for k in range(9)]
    slope, _, r2 = sc.fit_power_law(xs, sc.laplace_error_curve("d1", xs))
    close(slope, -0.5, 0.03)
    assert r2 > 0.99
    assert len(sc.lemma1_curve(1.0, 0.5, [0.0, 1.0])) == 2

    curves = [[(0, 1.0), (1, 0.5), (2, 0.3)], [(0, 1.0), (1, 0.9), (2, 0.85)]]
    assert sum(sc.greedy_allocation(curves, 3)) == 3

    errors, stderrs = sc.simulate("ppr", [[0.7, 0.3], [0.55, 0.45]], [2.0, 8.0], 5, 3)
    assert len(errors) == len(stderrs) == 2

    print("smoke test ok")


if __name__ == "__main__":
    main()
