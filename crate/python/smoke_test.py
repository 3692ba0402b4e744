#!/usr/bin/env python3
"""Smoke test for the transitory_sim extension module.

Builds are loaded straight from the cargo target directory (no wheel or
virtualenv needed): the script locates the compiled cdylib, copies it next to
a temp directory under the importable name, and drives the main types and
operations end to end.

    cargo build -p transitory-sim-py --release
    python3 python/smoke_test.py
"""

import importlib
import json
import pathlib
import shutil
import sys
import tempfile

REPO = pathlib.Path(__file__).resolve().parent.parent


def load_module():
    candidates = [
        REPO / "target" / profile / name
        for profile in ("release", "debug")
        for name in ("libtransitory_sim.so", "libtransitory_sim.dylib", "transitory_sim.dll")
    ]
    built = next((p for p in candidates if p.exists()), None)
    if built is None:
        sys.exit(
            "no compiled extension found; run `cargo build -p transitory-sim-py` first"
        )
    tmp = pathlib.Path(tempfile.mkdtemp(prefix="transitory-sim-"))
    suffix = ".pyd" if built.suffix == ".dll" else ".so"
    shutil.copy2(built, tmp / f"transitory_sim{suffix}")
    sys.path.insert(0, str(tmp))
    return importlib.import_module("transitory_sim")


def approx(a, b, tol):
    assert abs(a - b) <= tol, f"{a} vs {b} (tol {tol})"


def main():
    ts = load_module()

    # Conditional-mean integral: exponential closed form 1/(n+1).
    model = ts.Model.exponential(1.0)
    approx(ts.mu_n(model, 9, 1.0), 0.1, 1e-8)
    approx(ts.mu_n(model, 99, 1.0), 0.01, 1e-8)

    # Distribution functionals.
    approx(model.cdf(1.0), 1.0 - 2.718281828459045 ** -1.0, 1e-12)
    approx(model.integrated_hazard(3.0), 3.0, 1e-12)

    # Ordered-statistics sampler: sorted, interior, deterministic in the seed.
    poisson = ts.Model.poisson_homogeneous(10.0, 1.0)
    epochs = ts.sample_conditioned_poisson(poisson, 10, 1.0, seed=42)
    assert len(epochs) == 10
    assert all(0.0 < e < 1.0 for e in epochs)
    assert all(a < b for a, b in zip(epochs, epochs[1:]))
    assert epochs == ts.sample_conditioned_poisson(poisson, 10, 1.0, seed=42)
    assert epochs != ts.sample_conditioned_poisson(poisson, 10, 1.0, seed=42, stream=1)

    # Rejection sampler: the row straddles the horizon.
    exp10 = ts.Model.exponential(10.0)
    xi, attempts = ts.sample_conditioned_renewal(exp10, 10, 1.0, seed=7)
    assert len(xi) == 11 and attempts >= 1
    assert sum(xi[:10]) <= 1.0 < sum(xi)

    # Reflection map on a known step path.
    gamma = ts.StepPath(0.0, 1.0, [0.25, 0.5, 0.75], [1.0, -1.0, -0.5])
    phi = gamma.reflect()
    assert phi.post_jump_values == [1.0, 0.0, 0.5]
    assert phi.eval(0.6) == 0.0
    assert gamma.sup_neg(0.6) == 1.0

    # Workload path is nonnegative and dominates its netput.
    workload = ts.sample_workload(exp10, 10, 1.0, seed=3)
    assert workload.initial_value >= 0.0
    assert all(v >= 0.0 for v in workload.post_jump_values)

    # Brownian bridge is pinned at both ends.
    bridge = ts.sample_gaussian("bridge", 64, seed=5)
    assert bridge[0] == 0.0 and bridge[-1] == 0.0

    # Statistics kernel.
    d, p = ts.ks_two_sample([1.0, 2.0, 3.0, 4.0, 5.0], [1.0, 2.0, 3.0, 4.0, 5.0])
    assert d == 0.0 and p > 0.999
    stat, p, dof = ts.chi_square([25, 50, 25], [0.25, 0.5, 0.25])
    assert stat == 0.0 and dof == 2

    # A reduced verification run comes back as canonical JSON and passes.
    report = json.loads(
        ts.run_verification("inverse_bound", seed=11, n=[10, 25], reps=120)
    )
    assert report["passed"] is True
    assert report["seed"] == 11
    assert all(c["passed"] for c in report["checks"])

    print("smoke test: OK")


if __name__ == "__main__":
    main()
