"""Smoke test for the `ssep` extension module.

Build and run:
    cargo build --release -p ssep-py --features extension-module
    cp target/release/libssep.so python/ssep.so
    python3 python/smoke_test.py
"""
import json
import math
import os
import sys
import tempfile

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

import ssep  # noqa: E402


def main():
    p = ssep.Params(40, 0.5, 1.0, 0.2, 0.5, 0.3, 1.0, 0.9, 0.5, 0.3)
    assert p.n == 40 and p.h1_holds()
    a = ssep.alpha_from_params(1.0, 0.5, 0.2)
    assert abs(1.0 * (0.2 - a) + 0.5 * a * (1 - a)) < 1e-12
    assert abs(p.alpha - a) < 1e-15
    q = ssep.Params.from_json(p.to_json())
    assert q.alpha_prime == p.alpha_prime

    pp, pm, pb = ssep.outcome_probs(p, "left", "limit")
    assert pp + pm + pb == 1.0
    try:
        ssep.outcome_probs(p, "middle")
    except ValueError:
        pass
    else:
        raise AssertionError("bad side accepted")

    eta0 = [i % 2 == 0 for i in range(39)]
    eta = ssep.run_gillespie(eta0, p, 0.01, 3)
    assert len(eta) == 39

    small = ssep.Params(8, 0.5, 1.0, 0.2, 0.5, 0.3, 1.0, 0.9, 0.5, 0.3)
    e0 = [True, False, True, True, False, False, True]
    for seed in range(20):
        for x in range(1, 8):
            v = ssep.resolve_site(x, 0.5, e0, small, seed)
            outcome, tree, tv = ssep.determination_tree(x, 0.5, e0, small, seed)
            if outcome == "tree":
                assert tv == v and tree.startswith("(")

    f0 = json.dumps({"kind": "sine_bump", "base": 0.0, "amplitude": 1.0})
    u = [0.25, 0.5]
    h = ssep.heat_solution(f0, 0.0, 0.0, 0.1, u)
    assert abs(h[1] - math.exp(-math.pi ** 2 * 0.1)) < 1e-6
    assert ssep.stationary_profile(0.2, 0.6, [0.5]) == [0.4]
    prof = ssep.solve_discrete_density(p, f0, [0.0, 0.05])
    assert len(prof) == 2 and len(prof[0]) == 35

    cfg = {"params": json.loads(small.to_json()), "n_samples": 200, "seed": 4, "times": [0.3]}
    with tempfile.TemporaryDirectory() as d:
        summary = json.loads(ssep.run_experiment("duality", json.dumps(cfg), d))
        assert os.path.exists(os.path.join(d, "summary.json"))
    assert summary["experiment"] == "duality"
    assert all(c["pass"] for c in summary["checks"])
    print("ssep", ssep.__version__, "smoke test ok")


if __name__ == "__main__":
    main()
