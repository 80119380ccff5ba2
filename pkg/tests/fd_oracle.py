"""Independent finite-difference oracles.

This is the second route the jet pipeline is checked against: plain numeric
evaluation of the model expressions (no jets anywhere) and central
differences for every derivative.  Conventions mirror the engine's
definitions, but the code shares no derivative machinery with it.
"""

import numpy as np

from paracheck.expr_jet import eval_expr_numeric, parse_expr

FD_STEP_FIRST = 1e-4
FD_STEP_SECOND = 1e-3


def metric_fn(model):
    exprs = [[parse_expr(s, model.coords) for s in row] for row in model.metric]

    def f(x):
        return np.array([[eval_expr_numeric(e, x) for e in row] for row in exprs])

    return f


def vector_fn(model, sources):
    exprs = [parse_expr(s, model.coords) for s in sources]

    def f(x):
        return np.array([eval_expr_numeric(e, x) for e in exprs])

    return f


def fd_partial(fn, x, i, h):
    xp = np.array(x, dtype=float)
    xm = xp.copy()
    xp[i] += h
    xm[i] -= h
    return (np.asarray(fn(xp)) - np.asarray(fn(xm))) / (2 * h)


def fd_christoffel(metric, x, h=FD_STEP_FIRST):
    n = len(x)
    ginv = np.linalg.inv(metric(x))
    dg = np.stack([fd_partial(metric, x, l, h) for l in range(n)])  # dg[l, i, j]
    gam = 0.5 * np.einsum('kl,ijl->kij', ginv, dg)
    gam += 0.5 * np.einsum('kl,jil->kij', ginv, dg)
    gam -= 0.5 * np.einsum('kl,lij->kij', ginv, dg)
    return gam


def fd_riemann(metric, x, h=FD_STEP_SECOND):
    n = len(x)
    dG = np.stack([fd_partial(lambda y: fd_christoffel(metric, y), x, i, h) for i in range(n)])
    gam = fd_christoffel(metric, x)
    R = np.einsum('iljk->lijk', dG) - np.einsum('jlik->lijk', dG)
    R += np.einsum('lim,mjk->lijk', gam, gam) - np.einsum('ljm,mik->lijk', gam, gam)
    return R


def fd_curvature_package(metric, x):
    """(g, ginv, Gamma, R^l_ijk, S, r) by finite differences only."""
    g = metric(x)
    ginv = np.linalg.inv(g)
    gam = fd_christoffel(metric, x)
    R = fd_riemann(metric, x)
    S = np.einsum('aajk->jk', R)
    r = float(np.einsum('jk,jk->', ginv, S))
    return g, ginv, gam, R, S, r


def fd_grad_vector_field(metric, field, x, h=FD_STEP_FIRST):
    """(nabla X)^a_i = d_i X^a + Gamma^a_{im} X^m by finite differences."""
    n = len(x)
    gam = fd_christoffel(metric, x)
    dX = np.stack([fd_partial(field, x, i, h) for i in range(n)], axis=1)  # [a, i]
    return dX + np.einsum('aim,m->ai', gam, field(x))


def signed_orthonormal_frame(g, rng, tries=50):
    """Gram-Schmidt with the indefinite inner product; returns (frame rows
    e_i, signs eps_i) with g(e_i, e_j) = eps_i delta_ij."""
    n = g.shape[0]
    for _ in range(tries):
        basis = rng.uniform(-1, 1, (n, n))
        frame = []
        signs = []
        ok = True
        for v in basis:
            w = v.copy()
            for e, s in zip(frame, signs):
                w = w - s * (e @ g @ w) * e
            q = w @ g @ w
            if abs(q) < 1e-4:
                ok = False
                break
            s = 1.0 if q > 0 else -1.0
            frame.append(w / np.sqrt(abs(q)))
            signs.append(s)
        if ok:
            return np.array(frame), np.array(signs)
    raise RuntimeError("could not build a signed orthonormal frame")
