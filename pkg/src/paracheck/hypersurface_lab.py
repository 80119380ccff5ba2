"""Hypersurfaces of indefinite almost product Riemannian ambients.

Given an embedding chart into an ambient (n+1)-manifold carrying a product
structure J with g~(JX, JY) = g~(X, Y) and parallel J, this module derives
the induced structure (phi, xi, eta, g, eps) from the tangential/normal
split of J, the shape operator A from the Weingarten map, and verifies the
induced covariant-derivative displays, the shape-operator characterization
of para-Sasakian hypersurfaces, and the Gauss-equation algebra.

The final-theorem verification is synthetic: a random tangent-space
structure is drawn, A = -eps I + eps eta(x)xi is planted, the ambient
almost-constant-curvature ansatz is pushed through the Gauss equation, and
the resulting displays are compared coefficient by coefficient.  Where the
published displays disagree with the computed reduction (they do: the gg
coefficient and the eta-cross prefactor, hence the recovered constant and
the final Ricci form), both variants are reported, with the re-derived one
normative.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .expr_jet import JetSpace, eval_expr, parse_expr
from .geometry_engine import christoffel, covariant_derivative, curvature
from .paracontact_core import (
    ALGEBRAIC_TOL,
    ONE_DERIVATIVE_TOL,
    TWO_DERIVATIVE_TOL,
    ParacontactStructure,
    StructureCheckResult,
    apply_op,
    form,
    pair,
    residual_norm,
)
from .sampling import derive_rng
from .tensor_algebra import TensorValue, invert_jet_matrix

LIGHTLIKE_FLOOR = 1e-6
COMPONENT_SIGN_FLOOR = 1e-8


class InducedStructureError(ValueError):
    pass


@dataclass
class AmbientProductModel:
    """Ambient chart: metric and product-structure expressions over the
    ambient coordinates, with an optional almost-constant-curvature constant
    for reference."""

    dim: int
    coords: list[str]
    metric: list[list[str]]
    J: list[list[str]]
    curvature_constant: float | None = None

    def parsed(self, source: str):
        return parse_expr(source, self.coords)


@dataclass
class Embedding:
    """Chart-to-ambient map with an orientation sign for the normal."""

    coords: list[str]
    map: list[str]
    domain: list[tuple[float, float]]
    orientation: int = 1

    def parsed(self, source: str):
        return parse_expr(source, self.coords)


@dataclass
class HypersurfaceBundle:
    name: str
    ambient: AmbientProductModel
    embedding: Embedding
    description: str = ""
    expected: dict = field(default_factory=dict, compare=False)

    @property
    def dim(self) -> int:
        return self.ambient.dim - 1


@dataclass
class ShapeData:
    """Shape operator and second fundamental form at the sample points.

    Invariants: g(AX, Y) = g(X, AY) and h = eps g(A., .), both enforced by
    tests rather than construction."""

    A: np.ndarray        # (P, n, n) values, A^a_b
    N: np.ndarray        # (P, n+1) ambient components of the unit normal
    epsilon: int
    h: np.ndarray        # (P, n, n)


@dataclass
class HypersurfaceData:
    """Everything evaluated along the embedding at a batch of chart points."""

    bundle: HypersurfaceBundle
    points: np.ndarray
    structure: ParacontactStructure
    shape: ShapeData
    tangency_residual: float       # max |g~(JN, N)| over the samples
    frame_residual: float          # normal part of the Weingarten derivative
    ambient_points: np.ndarray     # F(points)


# --------------------------------------------------------------------------
# jet linear algebra helpers
# --------------------------------------------------------------------------


def jet_det(space: JetSpace, M: np.ndarray, order: int) -> np.ndarray:
    """Determinant of a jet matrix (..., k, k, m) by cofactor expansion."""
    k = M.shape[-2]
    if k == 1:
        return M[..., 0, 0, :]
    out = None
    for j in range(k):
        minor = np.delete(np.delete(M, 0, axis=-3), j, axis=-2)
        term = space.mul(M[..., 0, j, :], jet_det(space, minor, order), order)
        if j % 2:
            term = -term
        out = term if out is None else out + term
    return out


def _eval_ambient_grid(ambient: AmbientProductModel, space: JetSpace,
                       var_jets: list[np.ndarray], points: np.ndarray) -> np.ndarray:
    P = var_jets[0].shape[0]
    N = ambient.dim
    out = np.zeros((P, N, N, space.ncoeffs))
    for i in range(N):
        for j in range(N):
            out[:, i, j] = eval_expr(ambient.parsed(ambient.metric[i][j]), space, var_jets, points=points)
    return out


def _eval_ambient_J(ambient: AmbientProductModel, space: JetSpace,
                    var_jets: list[np.ndarray], points: np.ndarray) -> np.ndarray:
    P = var_jets[0].shape[0]
    N = ambient.dim
    out = np.zeros((P, N, N, space.ncoeffs))
    for i in range(N):
        for j in range(N):
            out[:, i, j] = eval_expr(ambient.parsed(ambient.J[i][j]), space, var_jets, points=points)
    return out


# --------------------------------------------------------------------------
# the induced package
# --------------------------------------------------------------------------


def evaluate_bundle(bundle: HypersurfaceBundle, points: np.ndarray,
                    order: int = 4, require_tangent: bool = True) -> HypersurfaceData:
    """Push the embedding through the jet pipeline: tangent frames, unit
    normal, induced (phi, xi, eta, g), and the shape operator."""
    amb = bundle.ambient
    emb = bundle.embedding
    n = bundle.dim
    N1 = amb.dim
    points = np.asarray(points, dtype=float)
    P = points.shape[0]
    space = JetSpace.get(n, order)
    m = space.ncoeffs
    cj = space.point_jets(points)

    # embedding jets and tangent frame T_a^B = d_a F^B (order - 1 valid)
    F = np.zeros((P, N1, m))
    for B, src in enumerate(emb.map):
        F[:, B] = eval_expr(emb.parsed(src), space, cj, points=points)
    T = np.stack([np.stack([space.diff(F[:, B], a) for B in range(N1)], axis=1)
                  for a in range(n)], axis=1)       # (P, n, N1, m)
    t_order = order - 1

    # ambient tensors along F, as chart jets
    F_jets = [F[:, B] for B in range(N1)]
    g_amb = _eval_ambient_grid(amb, space, F_jets, points)   # (P, N1, N1, m)
    J_amb = _eval_ambient_J(amb, space, F_jets, points)

    # induced metric g_ab = g~(T_a, T_b)
    gT = np.zeros((P, n, n, m))
    for a in range(n):
        Ta_low = np.sum(space.mul(g_amb, T[:, a, None, :, :], t_order), axis=2)   # (P, N1, m)
        for b in range(n):
            gT[:, a, b] = np.sum(space.mul(Ta_low, T[:, b], t_order), axis=1)
    g_ind = TensorValue(n, 0, 2, gT, space, True)

    # normal covector: cofactor cross product of the Jacobian rows
    nu = np.zeros((P, N1, m))
    for B in range(N1):
        minor = np.delete(T, B, axis=2)            # (P, n, n, m)
        sign = -1.0 if (n + B) % 2 else 1.0
        nu[:, B] = sign * jet_det(space, minor, t_order)
    if np.max(np.abs(nu[..., 0])) < 1e-12:
        raise InducedStructureError("embedding differential is rank-deficient at the samples")
    g_amb_inv = invert_jet_matrix(space, g_amb, t_order)
    N_un = np.sum(space.mul(g_amb_inv, nu[:, None, :, :], t_order), axis=2)   # N^A = g~^{AB} nu_B

    # orientation: first component with |value| above threshold made positive
    vals = N_un[..., 0]
    flip = np.ones(P)
    for p in range(P):
        for B in range(N1):
            if abs(vals[p, B]) > COMPONENT_SIGN_FLOOR:
                flip[p] = 1.0 if vals[p, B] > 0 else -1.0
                break
    N_un = N_un * (emb.orientation * flip)[:, None, None]

    # normalize to |g~(N, N)| = 1
    N_low = np.sum(space.mul(g_amb, N_un[:, None, :, :], t_order), axis=2)
    q = np.sum(space.mul(N_low, N_un, t_order), axis=1)       # g~(N, N) jets
    q0 = q[..., 0]
    if np.min(np.abs(q0)) < LIGHTLIKE_FLOOR:
        k = int(np.argmin(np.abs(q0)))
        raise InducedStructureError(
            f"lightlike normal direction (|g~(N,N)| = {abs(q0[k]):.2e}) "
            f"at point {tuple(float(c) for c in points[k])}: unsupported")
    signs = np.sign(q0)
    if len(set(signs.tolist())) != 1:
        raise InducedStructureError("normal causal character flips over the sample set")
    eps = int(signs[0])
    scale = space.reciprocal(space.sqrt(eps * q, t_order), t_order)
    N_hat = space.mul(N_un, scale[:, None, :], t_order)

    # frame matrix columns (T_1 .. T_n, N) and its jet inverse
    frame = np.concatenate([np.moveaxis(T, 1, 2), N_hat[:, :, None, :]], axis=2)  # (P, N1, n+1, m)
    frame_inv = invert_jet_matrix(space, frame, t_order)

    def split(V: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Ambient jet vector -> (tangential chart components, normal part)."""
        x = np.sum(space.mul(frame_inv, V[:, None, :, :], t_order), axis=2)
        return x[:, :n], x[:, n]

    # J N = xi (must be tangent), J T_a = phi^b_a T_b + eta_a N
    JN = np.sum(space.mul(J_amb, N_hat[:, None, :, :], t_order), axis=2)
    xi_c, xi_norm = split(JN)
    gJNN = np.sum(space.mul(N_low, JN, t_order), axis=1)[..., 0]
    tangency = float(np.max(np.abs(gJNN)))
    if require_tangent and tangency > 1e-8:
        k = int(np.argmax(np.abs(gJNN)))
        raise InducedStructureError(
            f"JN not tangent: g~(JN, N) = {gJNN[k]:+.6f} at point {tuple(float(c) for c in points[k])}")

    phi_c = np.zeros((P, n, n, m))
    eta_c = np.zeros((P, n, m))
    for a in range(n):
        JTa = np.sum(space.mul(J_amb, T[:, a][:, None, :, :], t_order), axis=2)
        tan, nor = split(JTa)
        phi_c[:, :, a] = tan
        eta_c[:, a] = nor

    structure = ParacontactStructure(
        space, points, eps,
        g=g_ind,
        phi=TensorValue(n, 1, 1, phi_c, space, True),
        xi=TensorValue(n, 1, 0, xi_c, space, True),
        eta=TensorValue(n, 0, 1, eta_c, space, True),
        g_order=t_order,
        validate=require_tangent,
    )

    # shape operator: nabla~_{T_a} N = -A T_a, ambient Christoffels at F(p)
    amb_space = JetSpace.get(N1, 2)
    F0 = F[..., 0]
    amb_cj = amb_space.point_jets(F0)
    g_amb_pts = np.zeros((P, N1, N1, amb_space.ncoeffs))
    for i in range(N1):
        for j in range(N1):
            g_amb_pts[:, i, j] = eval_expr(amb.parsed(amb.metric[i][j]), amb_space, amb_cj, points=F0)
    conn_amb = christoffel(TensorValue(N1, 0, 2, g_amb_pts, amb_space, True), F0)
    Gam_amb = conn_amb.gamma.components[..., 0]        # (P, C, A, B)

    N0 = N_hat[..., 0]
    dN = space.gradient_values(N_hat)                  # (P, N1, n): d_a (N o F)^C
    T0 = T[..., 0]                                     # (P, n, N1)
    W = np.einsum('pca->pac', dN) + np.einsum('pCAB,paA,pB->paC', Gam_amb, T0, N0)
    frame0 = frame[..., 0]
    x = np.linalg.solve(frame0, np.moveaxis(W, 1, 2))  # (P, n+1, n): coeffs of W_a
    A = -x[:, :n, :]                                   # A^b_a
    frame_res = float(np.max(np.abs(x[:, n, :])))
    g0 = gT[..., 0]
    h = eps * np.einsum('pma,pmb->pab', A, g0)

    shape = ShapeData(A=A, N=N0, epsilon=eps, h=h)
    return HypersurfaceData(bundle=bundle, points=points, structure=structure, shape=shape,
                            tangency_residual=tangency, frame_residual=frame_res,
                            ambient_points=F0)


def induced_structure(bundle: HypersurfaceBundle, points: np.ndarray, order: int = 4) -> ParacontactStructure:
    return evaluate_bundle(bundle, points, order=order).structure


def shape_operator(bundle: HypersurfaceBundle, points: np.ndarray, order: int = 4) -> ShapeData:
    return evaluate_bundle(bundle, points, order=order).shape


# --------------------------------------------------------------------------
# ambient and induced checks
# --------------------------------------------------------------------------


def check_ambient(bundle: HypersurfaceBundle, ambient_points: np.ndarray) -> StructureCheckResult:
    """J^2 = I, g~(JX,JY) = g~(X,Y), and parallel J at the given ambient points."""
    amb = bundle.ambient
    N1 = amb.dim
    space = JetSpace.get(N1, 2)
    pts = np.asarray(ambient_points, dtype=float)
    cj = space.point_jets(pts)
    g = _eval_ambient_grid(amb, space, cj, pts)
    J = _eval_ambient_J(amb, space, cj, pts)
    res = StructureCheckResult()
    J0 = J[..., 0]
    g0 = g[..., 0]
    JJ = np.einsum('pab,pbc->pac', J0, J0)
    res.add("ambient-j-squared", residual_norm(JJ - np.eye(N1), J0), ALGEBRAIC_TOL)
    pullback = np.einsum('pma,pmn,pnb->pab', J0, g0, J0)
    res.add("ambient-j-metric", residual_norm(pullback - g0, g0), ALGEBRAIC_TOL)
    conn = christoffel(TensorValue(N1, 0, 2, g, space, True), pts)
    nJ = covariant_derivative(TensorValue(N1, 1, 1, J, space, True), conn, order=1)
    res.add("ambient-j-parallel", residual_norm(nJ.components[..., 0], J0), ONE_DERIVATIVE_TOL)
    return res


def verify_induced_derivatives(data: HypersurfaceData, vectors: np.ndarray,
                               tolerance: float = TWO_DERIVATIVE_TOL) -> StructureCheckResult:
    """The three induced covariant-derivative displays:

        (nabla_X phi) Y = eta(Y) A X + eps g(A X, Y) xi
        (nabla_X eta) Y = -eps g(A X, phi Y)
        nabla_X xi      = -phi A X
    """
    s = data.structure
    eps = data.shape.epsilon
    A = data.shape.A
    conn = s.connection
    phi, xi, eta, g = s.phi0, s.xi0, s.eta0, s.g0
    X = vectors[:, 0::2]
    Y = vectors[:, 1::2]
    res = StructureCheckResult()

    nphi = covariant_derivative(s.phi, conn, order=s.g_order - 1).components[..., 0]
    lhs = np.einsum('pcib,pvi,pvb->pvc', nphi, X, Y)
    AX = apply_op(A, X)
    rhs = form(eta, Y)[..., None] * AX + eps * pair(g, AX, Y)[..., None] * xi[:, None, :]
    res.add("induced-grad-phi", residual_norm(lhs - rhs, lhs, rhs, X, Y), tolerance)

    neta = covariant_derivative(s.eta, conn, order=s.g_order - 1).components[..., 0]
    lhs = np.einsum('pib,pvi,pvb->pv', neta, X, Y)
    rhs = -eps * pair(g, AX, apply_op(phi, Y))
    res.add("induced-grad-eta", residual_norm(lhs - rhs, lhs, rhs, X, Y), tolerance)

    nxi = covariant_derivative(s.xi, conn, order=s.g_order - 1).components[..., 0]  # (p, a, i)
    rhs_xi = -np.einsum('pam,pmi->pai', phi, A)
    res.add("induced-grad-xi", residual_norm(nxi - rhs_xi, nxi, rhs_xi), tolerance)
    return res


def shape_self_adjoint_residual(data: HypersurfaceData) -> float:
    A, g = data.shape.A, data.structure.g0
    Alow = np.einsum('pma,pmb->pab', A, g)
    return residual_norm(Alow - np.swapaxes(Alow, 1, 2), Alow)


def gauss_consistency_residual(data: HypersurfaceData) -> float:
    """Intrinsic R against ambient R restricted plus the eps (h wedge h)
    correction, classical index order."""
    s = data.structure
    eps = data.shape.epsilon
    h = data.shape.h
    R_int = s.curvature.riemann_dddd.components[..., 0]

    amb = data.bundle.ambient
    N1 = amb.dim
    amb_space = JetSpace.get(N1, 3)
    F0 = data.ambient_points
    cj = amb_space.point_jets(F0)
    g_amb = _eval_ambient_grid(amb, amb_space, cj, F0)
    conn = christoffel(TensorValue(N1, 0, 2, g_amb, amb_space, True), F0)
    R_amb = curvature(conn).riemann_dddd.components[..., 0]

    n = s.dim
    # tangent-frame jets only needed at values here
    T0 = np.zeros((F0.shape[0], n, N1))
    space = s.space
    emb = data.bundle.embedding
    cj_chart = space.point_jets(data.points)
    for B, src in enumerate(emb.map):
        FB = eval_expr(emb.parsed(src), space, cj_chart, points=data.points)
        T0[:, :, B] = space.gradient_values(FB)
    R_res = np.einsum('pABCD,pxA,pyB,pzC,pwD->pxyzw', R_amb, T0, T0, T0, T0)
    corr = eps * (np.einsum('pyz,pxw->pxyzw', h, h) - np.einsum('pxz,pyw->pxyzw', h, h))
    return residual_norm(R_int - R_res - corr, R_int, R_res, corr)


# --------------------------------------------------------------------------
# para-Sasakian characterization
# --------------------------------------------------------------------------


def defining_equation_gap_per_point(struct: ParacontactStructure, vectors: np.ndarray) -> np.ndarray:
    """Pointwise normalized residual of the para-Sasakian defining equation."""
    eps = struct.epsilon
    conn = struct.connection
    phi, xi, eta, g = struct.phi0, struct.xi0, struct.eta0, struct.g0
    X = vectors[:, 0::2]
    Y = vectors[:, 1::2]
    nphi = covariant_derivative(struct.phi, conn, order=struct.g_order - 1).components[..., 0]
    lhs = np.einsum('paib,pvi,pvb->pva', nphi, X, Y)
    phiX = apply_op(phi, X)
    phiY = apply_op(phi, Y)
    phi2X = apply_op(phi, phiX)
    rhs = -pair(g, phiX, phiY)[..., None] * xi[:, None, :] - eps * form(eta, Y)[..., None] * phi2X
    gap = np.max(np.abs(lhs - rhs), axis=(1, 2))
    scale = 1.0 + max(np.max(np.abs(lhs)), np.max(np.abs(rhs)), np.max(np.abs(X)))
    return gap / scale


def shape_characterization_gap_per_point(struct: ParacontactStructure, A: np.ndarray) -> np.ndarray:
    """Pointwise normalized residual of A = -eps I + eps eta(x)xi."""
    eps = struct.epsilon
    target = -eps * np.eye(struct.dim)[None] + eps * np.einsum('pa,pb->pab', struct.xi0, struct.eta0)
    gap = np.max(np.abs(A - target), axis=(1, 2))
    return gap / (1.0 + np.max(np.abs(A)))


def recover_shape_operator(struct: ParacontactStructure, vectors: np.ndarray) -> tuple[np.ndarray, int]:
    """Solve the induced (nabla phi) display against the para-Sasakian right
    side as a linear system in A over the vector pairs; at every point of any
    valid structure this has the unique solution -eps I + eps eta(x)xi.

    Returns (A_hat per point, min system rank over points).
    """
    eps = struct.epsilon
    n = struct.dim
    P = struct.npoints
    phi, xi, eta, g = struct.phi0, struct.xi0, struct.eta0, struct.g0
    X = vectors[:, 0::2]
    Y = vectors[:, 1::2]
    V = X.shape[1]
    if V * n < n * n:
        raise ValueError(f"need at least {n} vector pairs to determine A, got {V}")
    A_hat = np.zeros((P, n, n))
    min_rank = n * n
    for p in range(P):
        rows = np.zeros((V * n, n * n))
        rhs = np.zeros(V * n)
        gY = np.einsum('pmb,pvb->pvm', g, Y)[p]
        etaY = np.einsum('pa,pva->pv', eta, Y)[p]
        phiX = np.einsum('pab,pvb->pva', phi, X)[p]
        phiY = np.einsum('pab,pvb->pva', phi, Y)[p]
        phi2X = np.einsum('pab,pvb->pva', phi, phiX[None])[p] if False else np.einsum('ab,vb->va', phi[p], phiX)
        gphiXphiY = np.einsum('ab,va,vb->v', g[p], phiX, phiY)
        for v in range(V):
            # eta(Y) A X + eps g(A X, Y) xi = -g(phi X, phi Y) xi - eps eta(Y) phi^2 X
            for l in range(n):
                r = v * n + l
                for mm in range(n):
                    for cc in range(n):
                        val = 0.0
                        if mm == l:
                            val += etaY[v] * X[p, v, cc]
                        val += eps * xi[p, l] * X[p, v, cc] * gY[v, mm]
                        rows[r, mm * n + cc] = val
                rhs[r] = -gphiXphiY[v] * xi[p, l] - eps * etaY[v] * phi2X[v, l]
        sol, _, rank, _ = np.linalg.lstsq(rows, rhs, rcond=None)
        A_hat[p] = sol.reshape(n, n)
        min_rank = min(min_rank, int(rank))
    return A_hat, min_rank


def check_ps_characterization(data: HypersurfaceData, vectors: np.ndarray,
                              tolerance: float = TWO_DERIVATIVE_TOL) -> StructureCheckResult:
    """The equivalence "para-Sasakian iff A = -eps I + eps eta(x)xi", asserted
    pointwise, plus the constructive recovery of A from the displays."""
    s = data.structure
    eps = s.epsilon
    res = StructureCheckResult()
    rho1 = defining_equation_gap_per_point(s, vectors)
    rho2 = shape_characterization_gap_per_point(s, data.shape.A)
    mismatch = (rho1 <= tolerance) != (rho2 <= tolerance)
    res.add("characterization-iff", float(np.sum(mismatch)), 0.5,
            f"rho1 in [{rho1.min():.2e}, {rho1.max():.2e}], rho2 in [{rho2.min():.2e}, {rho2.max():.2e}]; "
            "residual counts points violating the equivalence")

    A_hat, rank = recover_shape_operator(s, vectors)
    target = -eps * np.eye(s.dim)[None] + eps * np.einsum('pa,pb->pab', s.xi0, s.eta0)
    rec = residual_norm(A_hat - target, A_hat, target)
    detail = f"linear system rank {rank} of {s.dim ** 2}"
    if rank < s.dim ** 2:
        res.add("characterization-linear-solve", np.inf, tolerance, detail + " (rank-deficient)")
    else:
        res.add("characterization-linear-solve", rec, ONE_DERIVATIVE_TOL, detail)
    return res


def quasi_umbilical_check(shape: ShapeData, struct: ParacontactStructure,
                          gate_tolerance: float = 1e-2,
                          tolerance: float = ALGEBRAIC_TOL) -> StructureCheckResult:
    """For shapes close to the characterized operator, assert the
    quasi-umbilical decomposition h = -g + eps eta(x)eta (alpha = -1,
    beta = eps, u = eta); otherwise report not-applicable."""
    res = StructureCheckResult()
    gap = shape_characterization_gap_per_point(struct, shape.A)
    if float(np.max(gap)) > gate_tolerance:
        res.add("quasi-umbilical", 0.0, np.inf,
                f"not applicable: A differs from the characterized form by {float(np.max(gap)):.3f}")
        res.checks[-1].status = "not-applicable"
        return res
    eps = struct.epsilon
    ee = np.einsum('pa,pb->pab', struct.eta0, struct.eta0)
    gap = shape.h + struct.g0 - eps * ee
    res.add("quasi-umbilical", float(np.max(np.abs(gap))), tolerance,
            "h = -g + eps eta(x)eta with alpha = -1, beta = eps, u = eta")
    return res


# --------------------------------------------------------------------------
# synthetic tangent-space models and the Gauss-equation adjudication
# --------------------------------------------------------------------------


def random_pointwise_structure(rng: np.random.Generator, n: int, epsilon: int,
                               plus_dim: int | None = None) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Random (g, phi, xi, eta) satisfying the structure axioms at a point.

    Built in the canonical frame (phi diagonal +-1 on ker eta, metric block
    diagonal) and conjugated by a random invertible map, so components are
    generic.  Returns numeric arrays (g, phi, xi, eta).
    """
    p = int(rng.integers(0, n)) if plus_dim is None else plus_dim
    p = min(p, n - 1)
    q = n - 1 - p
    phi0 = np.diag([1.0] * p + [-1.0] * q + [0.0])
    xi0 = np.zeros(n)
    xi0[-1] = 1.0
    eta0 = np.zeros(n)
    eta0[-1] = 1.0

    def rand_orth(k):
        Q, R = np.linalg.qr(rng.standard_normal((k, k)))
        return Q * np.sign(np.diag(R))

    def rand_sym(k):
        # well-conditioned symmetric block with random signature
        if k == 0:
            return np.zeros((0, 0))
        Q = rand_orth(k)
        w = rng.uniform(0.5, 2.0, k) * rng.choice([-1.0, 1.0], k)
        return Q @ np.diag(w) @ Q.T

    g0 = np.zeros((n, n))
    g0[:p, :p] = rand_sym(p)
    g0[p:n - 1, p:n - 1] = rand_sym(q)
    g0[-1, -1] = epsilon
    # generic but well-conditioned change of frame
    L = rand_orth(n) @ np.diag(rng.uniform(0.75, 1.35, n)) @ rand_orth(n)
    Linv = np.linalg.inv(L)
    return Linv.T @ g0 @ Linv, L @ phi0 @ Linv, L @ xi0, eta0 @ Linv


def _wedge(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Pattern a(Y,Z) b(X,W) - a(X,Z) b(Y,W) in classical order [x,y,z,w]."""
    return np.einsum('yz,xw->xyzw', a, b) - np.einsum('xz,yw->xyzw', a, b)


def _eta_cross(g: np.ndarray, eta: np.ndarray) -> np.ndarray:
    return (-np.einsum('yz,x,w->xyzw', g, eta, eta)
            - np.einsum('xw,y,z->xyzw', g, eta, eta)
            + np.einsum('xz,y,w->xyzw', g, eta, eta)
            + np.einsum('yw,x,z->xyzw', g, eta, eta))


@dataclass
class SyntheticGaussOutcome:
    result: StructureCheckResult
    k_recovered: np.ndarray       # per trial, from the computed Gauss reduction
    k_solve_residual: np.ndarray  # lsq residual of the k fit per trial
    resampled: int


def synthetic_gauss_check(epsilon: int, n: int, trials: int, seed: int,
                          k_input: float | None = None,
                          perturb_a: float = 0.0) -> SyntheticGaussOutcome:
    """Per trial: draw a random structure, plant A = -eps I + eps eta(x)xi,
    push the almost-constant-curvature ansatz

        R~(X,Y,Z,W) = k { g~ g~ terms + (J g~)(J g~) terms }

    through the Gauss equation R = R~|tan + eps (h wedge h), and compare.

    The computed reduction equals, identically in k,

        (k + eps)[gg] + k[PhiPhi] + {eta-cross}                  (derived)

    while the published display reads (k - 1)[gg] + k[PhiPhi] + eps{eta-cross};
    solving R(X,Y)xi = eta(X) Y - eta(Y) X on the computed reduction forces
    k = -eps (printed chain: k = 2 - eps).  Both chains are reported; the
    derived one is normative.  The quasi-umbilical form h = -g + eps eta(x)eta
    and the constraint eps a + c = 1 - n hold on both chains.
    """
    if n < 3:
        raise ValueError("synthetic check needs n >= 3")
    if trials < 1:
        raise ValueError("trials must be >= 1")
    res = StructureCheckResult()
    k_values = np.zeros(trials)
    k_resid = np.zeros(trials)
    resampled = 0
    worst: dict[str, float] = {
        "quasi-umbilical-exact": 0.0,
        "gauss-vs-derived-display": 0.0,
        "gauss-vs-printed-display": 0.0,
        "k-vs-derived": 0.0,
        "k-vs-printed": 0.0,
        "ricci-vs-derived-form": 0.0,
        "ricci-vs-printed-form": 0.0,
        "printed-chain-self-consistency": 0.0,
        "eps-a-plus-c": 0.0,
        "einstein-like-fit": 0.0,
    }
    eye = np.eye(n)
    for t in range(trials):
        rng = derive_rng(seed, "synthetic-gauss", epsilon + 1, n, t)
        while True:
            g, phi, xi, eta = random_pointwise_structure(rng, n, epsilon)
            if abs(np.linalg.det(g)) > 1e-4:
                break
            resampled += 1
        Phi = phi.T @ g
        ee = np.outer(eta, eta)
        A = -epsilon * eye + epsilon * np.outer(xi, eta)
        if perturb_a:
            A = A + perturb_a * np.outer(xi, eta)
        h = epsilon * np.einsum('ma,mb->ab', A, g)
        worst["quasi-umbilical-exact"] = max(worst["quasi-umbilical-exact"],
                                             float(np.max(np.abs(h + g - epsilon * ee))))

        M1 = _wedge(g, g) + _wedge(Phi, Phi)       # coefficient of k
        M0 = epsilon * (np.einsum('yz,xw->xyzw', h, h) - np.einsum('xz,yw->xyzw', h, h))
        cross = _eta_cross(g, eta)
        for k in (0.0, 1.0, 2.0, 3.0) if k_input is None else (float(k_input),):
            Rk = k * M1 + M0
            derived = (k + epsilon) * _wedge(g, g) + k * _wedge(Phi, Phi) + cross
            printed = (k - 1) * _wedge(g, g) + k * _wedge(Phi, Phi) + epsilon * cross
            worst["gauss-vs-derived-display"] = max(worst["gauss-vs-derived-display"],
                                                    float(np.max(np.abs(Rk - derived))))
            worst["gauss-vs-printed-display"] = max(worst["gauss-vs-printed-display"],
                                                    float(np.max(np.abs(Rk - printed))))

        # solve R(X,Y)xi = eta(X) Y - eta(Y) X for k on the computed reduction
        lhs1 = np.einsum('xyzw,z->xyw', M1, xi)
        lhs0 = np.einsum('xyzw,z->xyw', M0, xi)
        target = np.einsum('x,yw->xyw', eta, g) - np.einsum('y,xw->xyw', eta, g)
        av = lhs1.ravel()
        bv = (target - lhs0).ravel()
        denom = float(av @ av)
        k_solved = float(av @ bv) / denom
        k_values[t] = k_solved
        k_resid[t] = float(np.max(np.abs(k_solved * lhs1 + lhs0 - target)))
        worst["k-vs-derived"] = max(worst["k-vs-derived"], abs(k_solved - (-epsilon)), k_resid[t])
        worst["k-vs-printed"] = max(worst["k-vs-printed"], abs(k_solved - (2 - epsilon)))

        # Ricci of the computed reduction at the recovered k
        ginv = np.linalg.inv(g)
        R = k_solved * M1 + M0
        S = np.einsum('iw,ijkw->jk', ginv, R)
        trphi = float(np.trace(phi))
        S_derived = -epsilon * trphi * Phi + (1 - n) * ee
        S_printed = (((2 - epsilon) * (n - 2) - n) * g + (2 - epsilon) * trphi * Phi
                     + epsilon * (4 - epsilon - n) * ee)
        worst["ricci-vs-derived-form"] = max(worst["ricci-vs-derived-form"],
                                             float(np.max(np.abs(S - S_derived))))
        worst["ricci-vs-printed-form"] = max(worst["ricci-vs-printed-form"],
                                             float(np.max(np.abs(S - S_printed))))

        # internal consistency of the printed chain: contracting the printed
        # display at k = 2 - eps reproduces the printed Ricci display
        Rp = ((2 - epsilon) - 1) * _wedge(g, g) + (2 - epsilon) * _wedge(Phi, Phi) + epsilon * cross
        Sp = np.einsum('iw,ijkw->jk', ginv, Rp)
        worst["printed-chain-self-consistency"] = max(worst["printed-chain-self-consistency"],
                                                      float(np.max(np.abs(Sp - S_printed))))

        # Einstein-like fit of the computed Ricci and the coefficient constraint
        cols = np.column_stack([g.ravel(), Phi.ravel(), ee.ravel()])
        coef, _, _, _ = np.linalg.lstsq(cols, S.ravel(), rcond=None)
        fit_gap = float(np.max(np.abs(cols @ coef - S.ravel())))
        worst["einstein-like-fit"] = max(worst["einstein-like-fit"], fit_gap)
        worst["eps-a-plus-c"] = max(worst["eps-a-plus-c"],
                                    abs(epsilon * coef[0] + coef[2] - (1 - n)))

    res.add("quasi-umbilical-exact", worst["quasi-umbilical-exact"], 1e-12,
            "h = -g + eps eta(x)eta by substitution of the planted operator")
    res.add("gauss-vs-derived-display", worst["gauss-vs-derived-display"], 1e-10,
            "computed reduction vs (k+eps)[gg] + k[PhiPhi] + {eta-cross}, k in {0,1,2,3}")
    res.add("gauss-vs-printed-display", worst["gauss-vs-printed-display"], 1e-10,
            "computed reduction vs printed (k-1)[gg] + k[PhiPhi] + eps{eta-cross}; informational")
    if worst["gauss-vs-printed-display"] > 1e-10:
        res.checks[-1].status = "printed-form-mismatch"
    res.add("k-vs-derived", worst["k-vs-derived"], 1e-10,
            "unique k solving the xi identity on the computed reduction equals -eps")
    res.add("k-vs-printed", worst["k-vs-printed"], 1e-10,
            "printed expectation k = 2 - eps; informational")
    if worst["k-vs-printed"] > 1e-10:
        res.checks[-1].status = "printed-form-mismatch"
    res.add("ricci-vs-derived-form", worst["ricci-vs-derived-form"], 1e-10,
            "S = -eps trace(phi) Phi + (1-n) eta(x)eta")
    res.add("ricci-vs-printed-form", worst["ricci-vs-printed-form"], 1e-10,
            "printed S = ((2-eps)(n-2)-n) g + (2-eps) trace(phi) Phi + eps(4-eps-n) eta(x)eta; informational")
    if worst["ricci-vs-printed-form"] > 1e-10:
        res.checks[-1].status = "printed-form-mismatch"
    res.add("printed-chain-self-consistency", worst["printed-chain-self-consistency"], 1e-10,
            "contracting the printed display at k = 2-eps reproduces the printed Ricci display")
    res.add("eps-a-plus-c", worst["eps-a-plus-c"], 1e-10,
            "fitted coefficients of the computed Ricci satisfy eps a + c = 1 - n")
    res.add("einstein-like-fit", worst["einstein-like-fit"], 1e-10,
            "the computed Ricci is an exact constant-coefficient combination of g, Phi, eta(x)eta")
    return SyntheticGaussOutcome(result=res, k_recovered=k_values, k_solve_residual=k_resid,
                                 resampled=resampled)


# --------------------------------------------------------------------------
# builtin bundles
# --------------------------------------------------------------------------


def _flat_product_ambient() -> AmbientProductModel:
    coords = ["u1", "u2", "v1", "v2"]
    metric = [["1" if i == j else "0" for j in range(4)] for i in range(4)]
    J = [["0"] * 4 for _ in range(4)]
    J[0][0] = J[1][1] = "1"
    J[2][2] = J[3][3] = "-1"
    return AmbientProductModel(dim=4, coords=coords, metric=metric, J=J, curvature_constant=0.0)


def builtin_bundles() -> dict[str, HypersurfaceBundle]:
    amb = _flat_product_ambient()
    inv_sqrt2 = "0.7071067811865476"
    bundles = {
        "E3a": HypersurfaceBundle(
            name="E3a",
            ambient=amb,
            embedding=Embedding(
                coords=["s", "t", "w"],
                map=[f"s*{inv_sqrt2}", "t", f"-s*{inv_sqrt2}", "w"],
                domain=[(-1.5, 1.5)] * 3,
                orientation=1,
            ),
            description="totally geodesic hyperplane in flat R^2 x R^2: induced structure "
                        "passes all axioms with A = 0",
            expected={"A": "zero", "epsilon": 1},
        ),
        "E3b": HypersurfaceBundle(
            name="E3b",
            ambient=amb,
            embedding=Embedding(
                coords=["t", "a", "b"],
                map=["t*cos(a)", "t*sin(a)", "t*cos(b)", "t*sin(b)"],
                domain=[(0.6, 1.6), (0.15, 6.1), (0.15, 6.1)],
                orientation=1,
            ),
            description="cone |x| = |y| in flat R^2 x R^2: JN is tangent, the induced "
                        "structure passes the axioms, and the shape operator has "
                        "eigenvalues {0, +-1/(t sqrt 2)} so the hypersurface is not "
                        "para-Sasakian anywhere",
            expected={"eigenvalues_at": ((1.0, 0.0, 0.0), (-0.7071067811865476, 0.0, 0.7071067811865476)),
                      "epsilon": 1},
        ),
        "B1": HypersurfaceBundle(
            name="B1",
            ambient=amb,
            embedding=Embedding(
                coords=["a", "b", "c"],
                map=["cos(a)", "sin(a)*cos(b)", "sin(a)*sin(b)*cos(c)", "sin(a)*sin(b)*sin(c)"],
                domain=[(0.4, 1.2), (0.4, 1.2), (0.4, 1.2)],
                orientation=1,
            ),
            description="unit-sphere patch: g~(JN, N) != 0, so the induced-structure "
                        "hypothesis fails (negative control)",
            expected={"jn_tangent": False},
        ),
    }
    return bundles


def get_bundle(name: str) -> HypersurfaceBundle:
    bundles = builtin_bundles()
    if name not in bundles:
        raise KeyError(f"unknown bundle {name!r}; builtin: {', '.join(sorted(bundles))}")
    return bundles[name]
