"""Smoke test for the subweibull extension module.

Build first, e.g. `maturin develop -m crates/python/Cargo.toml`, then run
`python python/smoke_test.py`.
"""

import math
import os
import tempfile

import subweibull as sw


def main():
    x = sw.Law.exponential().draw(200_000, seed=1)
    psi1 = sw.orlicz_norm(x, 1.0)
    assert abs(psi1 / 2.0 - 1.0) < 0.03, psi1

    g = sw.Law.gaussian().draw(50_000, seed=2)
    assert abs(sw.orlicz_norm(g, 2.0) - math.sqrt(8 / 3)) < 0.05
    assert sw.orlicz_norm(g, 2.0, kind="gbo", l=1.0) <= sw.orlicz_norm(g, 2.0, kind="gbo_phi", l=1.0)

    w = sw.Law.weibull(1.0)
    rows = [w.draw(6, seed=3, stream=i) for i in range(400)]
    s = sw.gram(rows)
    d = [[s[i][j] - (2.0 if i == j else 0.0) for j in range(6)] for i in range(6)]
    exact = sw.rip(d, 2)
    net = sw.rip(d, 2, method="net")
    assert net <= exact + 1e-12 and exact <= 2 * net
    assert sw.hard_threshold(s, 10.0) == [[0.0] * 6 for _ in range(6)]

    beta0 = [1.0, -1.0, 0.0, 0.0, 0.0, 0.0]
    eps = sw.Law.gaussian(0.5).draw(400, seed=4)
    y = [sum(r[j] * beta0[j] for j in range(6)) + e for r, e in zip(rows, eps)]
    fit = sw.lasso(rows, y, 0.05)
    assert fit.converged and fit.kkt_residual < 1e-6
    assert abs(fit.beta[0] - 1.0) < 0.3 and abs(fit.beta[1] + 1.0) < 0.3

    thr, prob = sw.tail_threshold(1.0, 1.0, 100, 10, 1.0, 2.0)
    assert thr > 0 and abs(prob - 3 * math.exp(-2.0)) < 1e-12
    b1, _ = sw.hdclt_bound(1.0, 1.0, 1000, 50, 1.0)
    b2, _ = sw.hdclt_bound(1.0, 1.0, 4000, 50, 1.0)
    assert b2 < b1

    assert "lasso" in sw.experiments()
    with tempfile.TemporaryDirectory() as out:
        cfg = "experiment=covariance\nseed=7\np=5\nn=100,200\nreps=3\n"
        path = sw.run_experiment(cfg, out=out, workers=1)
        for name in ("results.csv", "summary.csv", "manifest.json"):
            assert os.path.exists(os.path.join(path, name)), name

    print("smoke test passed")


if __name__ == "__main__":
    main()
