"""Smoke test for the kronalign_py extension.

Build and install first:
    pip install --no-build-isolation ./crates/python
then run:
    python python/smoke_test.py
"""

import math
import os
import tempfile

import kronalign_py as ka


def check(cond, what):
    if not cond:
        raise SystemExit(f"FAILED: {what}")
    print(f"ok  {what}")


def main():
    tri = ka.Graph(3, [(0, 1), (1, 2), (0, 2)])
    check(tri.n == 3 and tri.num_edges == 3, "graph construction")

    t = ka.MotifTensor.cliques(tri, 3)
    check(t.nnz == 1 and t.hyperedges() == [[0, 1, 2]], "triangle tensor")
    y = t.ttv([1.0, 1.0, 1.0])
    check(all(abs(v - 2.0) < 1e-12 for v in y), "T x^2 for the all-ones vector")
    check(abs(t.ttv_scalar([1.0, 1.0, 1.0]) - 6.0) < 1e-12, "T x^3")

    with tempfile.TemporaryDirectory() as d:
        p = os.path.join(d, "g.el")
        tri.write(p)
        g = ka.Graph.read(p)
        check(sorted(g.edges()) == sorted(tri.edges()), "edge list round trip")
        try:
            ka.Graph.read(os.path.join(d, "missing.el"))
            check(False, "missing file raises")
        except OSError:
            check(True, "missing file raises")

    d2 = ka.DenseTensor.diagonal(3, 2)
    vals = sorted({round(abs(lam), 6) for lam, _ in d2.spectrum(restarts=50, seed=1)})
    check(vals == [round(1 / math.sqrt(2), 6), 1.0], "diagonal tensor spectrum")

    a = ka.DenseTensor.random_symmetric(3, 3, 1)
    b = ka.DenseTensor.random_symmetric(3, 2, 2)
    rep = ka.verify_decoupling(a, b, restarts=200, seed=3)
    check(rep["eig_gap"] <= 1e-6 and rep["vec_gap"] <= 1e-6, "Kronecker eigen decoupling")
    lam, x, res = a.dominant_eigen(restarts=50, seed=4)
    check(res <= 1e-8 and abs(sum(v * v for v in x) - 1.0) < 1e-12, "dominant eigenpair")
    check(b.kron(a).dim == 6, "dense Kronecker product")

    pairs = ka.max_weight_matching([[1.0, 5.0], [4.0, 1.0]])
    check(sorted(pairs) == [(0, 1), (1, 0)], "max weight matching")

    ga, gb, truth = ka.make_problem(60, model="er", p=0.0, seed=5)
    check(len(truth) == 60 and ga.num_edges == gb.num_edges, "synthetic problem")
    for method in ["tame", "lowrank-tame", "lambda-tame+local-search"]:
        rec, pairs = ka.align(ga, gb, method=method, seed=1, truth=truth)
        check(len(pairs) == rec["result"]["matched_pairs"], f"align {method}")
    check(rec["result"]["accuracy"] > 0.5, "refined accuracy on a noiseless problem")

    try:
        ka.align(ga, gb, method="klau")
        check(False, "unknown method raises")
    except ValueError:
        check(True, "unknown method raises")
    print("smoke test passed")


if __name__ == "__main__":
    main()
