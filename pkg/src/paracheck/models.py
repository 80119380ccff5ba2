"""Builtin model catalog and evaluation of chart models into structures.

The closed-form fixtures:

  E1   upper half-space {y > 0}, g = y^-2 (sum dx_i^2 + dy^2), xi = y d/dy,
       eta = dy/y, phi = -(I - eta(x)xi), eps = +1  (para-Sasakian, curvature -1)
  E2   same chart with g = y^-2 (sum dx_i^2 - dy^2) and phi = +(I - eta(x)xi),
       eps = -1  (para-Sasakian, curvature +1)
  N1   E1 with phi scaled by 1.01: breaks the algebraic axioms (negative control)
  F0   flat chart with the formal (phi, xi, eta) of E1: passes the axioms but is
       not para-Sasakian and has R = 0 (negative control)

plus the hypersurface bundles defined in :mod:`paracheck.hypersurface_lab`
(E3a hyperplane, E3b cone, B1 sphere patch whose JN is not tangent).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .expr_jet import JetSpace, ScalarExpr, eval_expr, parse_expr
from .paracontact_core import ParacontactStructure
from .tensor_algebra import TensorValue, inertia

DEFAULT_ORDER = 4


@dataclass
class ManifoldModel:
    """A chart model: coordinate names, expression-valued tensors, a sample
    domain box, and the declared metric index.

    Invariants checked by :func:`validate_model`: the metric expression grid
    is symmetric as written, the domain intervals are non-empty, and the
    declared index matches the computed inertia at sampled points.
    """

    name: str
    dim: int
    coords: list[str]
    epsilon: int
    index: int
    metric: list[list[str]]
    domain: list[tuple[float, float]]
    phi: list[list[str]] | None = None
    xi: list[str] | None = None
    eta: list[str] | None = None
    description: str = ""
    expected: dict = field(default_factory=dict, compare=False)  # golden values for tests/suites

    def parsed(self, source: str) -> ScalarExpr:
        return parse_expr(source, self.coords)

    @property
    def has_structure(self) -> bool:
        return self.phi is not None and self.xi is not None and self.eta is not None


class ModelValidationError(ValueError):
    pass


def validate_model(model: ManifoldModel, rng: np.random.Generator | None = None, checks_points: int = 10):
    """Raises ModelValidationError on any violated model invariant."""
    n = model.dim
    if len(model.coords) != n:
        raise ModelValidationError(f"{model.name}: expected {n} coordinate names, got {len(model.coords)}")
    if len(model.metric) != n or any(len(row) != n for row in model.metric):
        raise ModelValidationError(f"{model.name}: metric must be an {n}x{n} expression grid")
    for i in range(n):
        for j in range(i + 1, n):
            if model.metric[i][j].replace(" ", "") != model.metric[j][i].replace(" ", ""):
                raise ModelValidationError(
                    f"{model.name}: metric entry ({i},{j}) is not symmetric as written: "
                    f"{model.metric[i][j]!r} vs {model.metric[j][i]!r}")
    if len(model.domain) != n:
        raise ModelValidationError(f"{model.name}: domain must give one interval per coordinate")
    for k, (lo, hi) in enumerate(model.domain):
        if not (hi > lo):
            raise ModelValidationError(f"{model.name}: empty domain interval for {model.coords[k]}")
    if model.epsilon not in (1, -1):
        raise ModelValidationError(f"{model.name}: epsilon must be +1 or -1")
    # parse everything now so bad expressions fail at load time
    for row in model.metric:
        for s in row:
            model.parsed(s)
    for grid in (model.phi,):
        if grid is not None:
            for row in grid:
                for s in row:
                    model.parsed(s)
    for vec in (model.xi, model.eta):
        if vec is not None:
            for s in vec:
                model.parsed(s)
    # declared index vs computed inertia at sample points
    rng = np.random.default_rng(20240101) if rng is None else rng
    lo = np.array([d[0] for d in model.domain])
    hi = np.array([d[1] for d in model.domain])
    pts = rng.uniform(lo, hi, size=(checks_points, n))
    g0 = _eval_grid_numeric(model.metric, model, pts)
    for k in range(checks_points):
        nu = inertia(g0[k])
        if nu != model.index:
            raise ModelValidationError(
                f"{model.name}: declared index {model.index} but computed inertia {nu} "
                f"at point {tuple(pts[k])}")


def _eval_grid_numeric(grid, model, pts):
    from .expr_jet import eval_expr_numeric
    P = pts.shape[0]
    n = len(grid)
    out = np.zeros((P, n, len(grid[0])))
    for i, row in enumerate(grid):
        for j, s in enumerate(row):
            e = model.parsed(s)
            out[:, i, j] = [eval_expr_numeric(e, p) for p in pts]
    return out


def evaluate_structure(model: ManifoldModel, points: np.ndarray,
                       order: int = DEFAULT_ORDER) -> ParacontactStructure:
    """Evaluate the model's tensors as jets at the given points."""
    if not model.has_structure:
        raise ValueError(f"model {model.name} declares no (phi, xi, eta) structure")
    points = np.asarray(points, dtype=float)
    space = JetSpace.get(model.dim, order)
    cj = space.point_jets(points)
    P = points.shape[0]
    n = model.dim
    m = space.ncoeffs

    def grid(exprs, valence):
        out = np.zeros((P,) + (n,) * 2 + (m,))
        for i, row in enumerate(exprs):
            for j, s in enumerate(row):
                out[:, i, j] = eval_expr(model.parsed(s), space, cj, points=points)
        return TensorValue(n, valence[0], valence[1], out, space, True)

    def vec(exprs, valence):
        out = np.zeros((P, n, m))
        for i, s in enumerate(exprs):
            out[:, i] = eval_expr(model.parsed(s), space, cj, points=points)
        return TensorValue(n, valence[0], valence[1], out, space, True)

    g = grid(model.metric, (0, 2))
    phi = grid(model.phi, (1, 1))
    xi = vec(model.xi, (1, 0))
    eta = vec(model.eta, (0, 1))
    return ParacontactStructure(space, points, model.epsilon, g, phi, xi, eta, g_order=order)


def evaluate_metric(model: ManifoldModel, points: np.ndarray, order: int = DEFAULT_ORDER) -> TensorValue:
    points = np.asarray(points, dtype=float)
    space = JetSpace.get(model.dim, order)
    cj = space.point_jets(points)
    P = points.shape[0]
    out = np.zeros((P, model.dim, model.dim, space.ncoeffs))
    for i, row in enumerate(model.metric):
        for j, s in enumerate(row):
            out[:, i, j] = eval_expr(model.parsed(s), space, cj, points=points)
    return TensorValue(model.dim, 0, 2, out, space, True)


# --------------------------------------------------------------------------
# builtin charts
# --------------------------------------------------------------------------


def _half_space_model(name: str, n: int, timelike_y: bool, phi_scale: float, epsilon: int,
                      description: str, expected: dict) -> ManifoldModel:
    coords = [f"x{i}" for i in range(1, n)] + ["y"]
    zero = "0"
    inv_y2 = "1/(y^2)"
    metric = [[zero] * n for _ in range(n)]
    for i in range(n - 1):
        metric[i][i] = inv_y2
    metric[n - 1][n - 1] = ("-" + inv_y2) if timelike_y else inv_y2
    sign = -phi_scale if not timelike_y else phi_scale
    # phi = sign * (I - eta (x) xi): diagonal sign on ker eta, 0 on xi
    phi = [[zero] * n for _ in range(n)]
    for i in range(n - 1):
        phi[i][i] = f"{sign}"
    phi[n - 1][n - 1] = "0"
    xi = [zero] * (n - 1) + ["y"]
    eta = [zero] * (n - 1) + ["1/y"]
    domain = [(-2.0, 2.0)] * (n - 1) + [(0.5, 3.0)]
    return ManifoldModel(
        name=name, dim=n, coords=coords, epsilon=epsilon,
        index=(1 if timelike_y else 0),
        metric=metric, phi=phi, xi=xi, eta=eta, domain=domain,
        description=description, expected=expected,
    )


def _flat_formal_model() -> ManifoldModel:
    n = 3
    coords = ["x1", "x2", "y"]
    metric = [["1" if i == j else "0" for j in range(n)] for i in range(n)]
    phi = [["-1" if i == j and i < n - 1 else "0" for j in range(n)] for i in range(n)]
    return ManifoldModel(
        name="F0", dim=n, coords=coords, epsilon=1, index=0,
        metric=metric, phi=phi, xi=["0", "0", "1"], eta=["0", "0", "1"],
        domain=[(-2.0, 2.0)] * n,
        description="flat chart with a formal structure: passes the algebraic axioms, "
                    "fails everything with a derivative in it (negative control)",
        expected={"r": 0.0},
    )


def builtin_models() -> dict[str, ManifoldModel]:
    """Chart models by name.  Hypersurface bundles live in builtin_bundles()."""
    models = {}
    for n in (3, 5):
        suffix = "" if n == 3 else f"n{n}"
        models[f"E1{suffix}"] = _half_space_model(
            f"E1{suffix}", n, timelike_y=False, phi_scale=1.0, epsilon=1,
            description=f"hyperbolic upper half-space (n={n}), para-Sasakian with eps=+1",
            expected={"r": -float(n * (n - 1)), "ricci_factor": -(n - 1.0), "trace_phi": -(n - 1.0)},
        )
        models[f"E2{suffix}"] = _half_space_model(
            f"E2{suffix}", n, timelike_y=True, phi_scale=1.0, epsilon=-1,
            description=f"timelike-fiber upper half-space (n={n}), para-Sasakian with eps=-1",
            expected={"r": float(n * (n - 1)), "ricci_factor": (n - 1.0), "trace_phi": (n - 1.0)},
        )
    models["N1"] = _half_space_model(
        "N1", 3, timelike_y=False, phi_scale=1.01, epsilon=1,
        description="E1 with phi scaled by 1.01 (negative control: axioms fail)",
        expected={},
    )
    models["F0"] = _flat_formal_model()
    return models


def get_model(name: str) -> ManifoldModel:
    models = builtin_models()
    if name not in models:
        raise KeyError(f"unknown model {name!r}; builtin: {', '.join(sorted(models))}")
    return models[name]
