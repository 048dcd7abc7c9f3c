"""Trace of Sigma(X) for the KL bound on a 200-point grid over [-3, 3].

SE kernel (lengthscale 1, signal 1); Z = greedy residual-variance selection
of M in {5, 10, 20, 40}; Nystroem on (1/M) k(Z,Z); r from the empirical
measure on X. Negative diagonal entries are clamped to zero.
Frozen into tests/unit/test_diagnostics.cpp.
"""
import numpy as np


def se(a, b):
    return np.exp(-0.5 * (a[:, None] - b[None, :]) ** 2)


def greedy(x, m, tol=1e-10):
    # residuals below tol * max diagonal count as exhausted (exactly zero),
    # so the remaining picks fall back to the lowest unselected index
    d = np.ones(len(x))
    L = np.zeros((len(x), m))
    chosen = []
    for t in range(m):
        dd = d.copy()
        dd[chosen] = -np.inf
        p = int(np.argmax(dd))
        chosen.append(p)
        col = se(x, x[p:p + 1])[:, 0] - L[:, :t] @ L[p, :t]
        if d[p] > 0.0:
            L[:, t] = col / np.sqrt(d[p])
        d = d - L[:, t] ** 2
        d[d <= tol] = 0.0
    return np.array(chosen)


x = np.linspace(-3.0, 3.0, 200)
order = greedy(x, 40)
for m in (5, 10, 20, 40):
    z = x[order[:m]]
    w, v = np.linalg.eigh(se(z, z) / m)
    keep = w >= 1e-10 * w.max()
    w, v = w[keep], v[:, keep]
    e = (v / np.sqrt(m * w)).T @ se(z, x)
    diag = (se(x, x) ** 2).mean(axis=1) - (w[:, None] * e ** 2).sum(axis=0)
    print(m, sorted(order[:m].tolist()) if m < 40 else "", repr(float(np.clip(diag, 0.0, None).sum())), int((diag < 0).sum()))
