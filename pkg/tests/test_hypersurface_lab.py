"""Hypersurface tests: induced structures, shape operators against the
finite-difference Weingarten oracle, the characterization theorem, the
quasi-umbilical decomposition, and the synthetic Gauss-equation trials."""

import numpy as np
import pytest

from paracheck.hypersurface_lab import (
    AmbientProductModel,
    Embedding,
    HypersurfaceBundle,
    InducedStructureError,
    check_ambient,
    check_ps_characterization,
    evaluate_bundle,
    gauss_consistency_residual,
    get_bundle,
    quasi_umbilical_check,
    random_pointwise_structure,
    recover_shape_operator,
    shape_self_adjoint_residual,
    synthetic_gauss_check,
    verify_induced_derivatives,
)
from paracheck.paracontact_core import ParacontactStructure, check_axioms
from paracheck.sampling import derive_rng, random_vectors, sample_points
from paracheck.tensor_algebra import TensorValue


@pytest.fixture(scope="module")
def e3a_data():
    b = get_bundle("E3a")
    pts = sample_points(b.embedding.domain, 20, derive_rng(7, "E3a", "pts"))
    return evaluate_bundle(b, pts)


@pytest.fixture(scope="module")
def e3b_data():
    b = get_bundle("E3b")
    pts = sample_points(b.embedding.domain, 20, derive_rng(7, "E3b", "pts"))
    pts = np.vstack([[1.0, 0.0, 0.0], pts])  # reference chart point over (1,0,1,0)
    return evaluate_bundle(b, pts)


def _vectors(npoints, tag, dim=3, tuples=20):
    return random_vectors(derive_rng(7, tag, "v"), npoints, 2 * tuples, dim)


class TestInducedStructure:
    def test_hyperplane_is_totally_geodesic(self, e3a_data):
        assert e3a_data.shape.epsilon == 1
        assert np.max(np.abs(e3a_data.shape.A)) == 0.0
        assert e3a_data.tangency_residual < 1e-12

    def test_hyperplane_induced_axioms(self, e3a_data):
        res = check_axioms(e3a_data.structure, _vectors(e3a_data.points.shape[0], "E3a"))
        assert res.passed
        assert max(c.residual for c in res.checks) < 1e-9

    def test_cone_tangency_identity(self, e3b_data):
        """On |x| = |y| the normal is (x, -y)/|.| and J maps it to the radial
        direction, so g~(JN, N) = 0 identically."""
        assert e3b_data.tangency_residual < 1e-10
        assert e3b_data.shape.epsilon == 1

    def test_cone_induced_axioms_and_radial_xi(self, e3b_data):
        res = check_axioms(e3b_data.structure, _vectors(e3b_data.points.shape[0], "E3b"))
        assert res.passed
        # xi is the radial direction: in the (t, a, b) chart xi ~ dt/sqrt(2)
        xi0 = e3b_data.structure.xi0
        expected = np.zeros_like(xi0)
        expected[:, 0] = 1.0 / np.sqrt(2.0)
        assert np.max(np.abs(np.abs(xi0) - expected)) < 1e-10

    def test_sphere_patch_jn_not_tangent(self):
        b = get_bundle("B1")
        pts = sample_points(b.embedding.domain, 5, derive_rng(7, "B1", "pts"))
        with pytest.raises(InducedStructureError, match="JN not tangent"):
            evaluate_bundle(b, pts)

    def test_lightlike_normal_reported(self):
        """A graph in a signature-(2,2) ambient whose normal becomes null is
        rejected as unsupported."""
        amb = AmbientProductModel(
            dim=4,
            coords=["u1", "u2", "v1", "v2"],
            metric=[["1", "0", "0", "0"], ["0", "1", "0", "0"],
                    ["0", "0", "-1", "0"], ["0", "0", "0", "-1"]],
            J=[["0", "0", "1", "0"], ["0", "0", "0", "1"],
               ["1", "0", "0", "0"], ["0", "1", "0", "0"]],
        )
        # u1 = v1 graph: tangents e(u1)+e(v1), e(u2), e(v2); normal direction
        # e(u1) - e(v1) wrt the indefinite metric... g~(N,N) = 1 - 1 = 0
        emb = Embedding(coords=["s", "t", "w"], map=["s", "t", "s", "w"],
                        domain=[(-1.0, 1.0)] * 3)
        bundle = HypersurfaceBundle(name="null", ambient=amb, embedding=emb)
        pts = sample_points(emb.domain, 4, derive_rng(7, "null", "pts"))
        with pytest.raises(InducedStructureError, match="lightlike"):
            evaluate_bundle(bundle, pts, require_tangent=False)


class TestShapeOperator:
    def test_cone_eigenvalues_at_reference_point(self, e3b_data):
        eig = np.sort(np.linalg.eigvals(e3b_data.shape.A[0]).real)
        expected = np.array([-1.0 / np.sqrt(2.0), 0.0, 1.0 / np.sqrt(2.0)])
        assert np.max(np.abs(eig - expected)) < 1e-6

    def test_cone_zero_eigenvector_is_xi(self, e3b_data):
        Axi = np.einsum('pab,pb->pa', e3b_data.shape.A, e3b_data.structure.xi0)
        assert np.max(np.abs(Axi)) < 1e-9

    def test_self_adjointness(self, e3a_data, e3b_data):
        assert shape_self_adjoint_residual(e3a_data) < 1e-8
        assert shape_self_adjoint_residual(e3b_data) < 1e-8

    def test_h_is_eps_g_a(self, e3b_data):
        h = e3b_data.shape.h
        g = e3b_data.structure.g0
        A = e3b_data.shape.A
        assert np.max(np.abs(h - e3b_data.shape.epsilon * np.einsum('pma,pmb->pab', A, g))) < 1e-12

    def test_weingarten_matches_finite_differences(self):
        """Independent oracle: differentiate the explicit unit normal of the
        cone numerically and project; compare with the jet-built A."""
        b = get_bundle("E3b")
        pts = np.array([[1.0, 0.0, 0.0], [0.9, 0.7, 1.3], [1.4, 2.0, 0.5]])
        data = evaluate_bundle(b, pts)

        def emb_map(u):
            t, a, bb = u
            return np.array([t * np.cos(a), t * np.sin(a), t * np.cos(bb), t * np.sin(bb)])

        def normal(u):
            t, a, bb = u
            N = np.array([np.cos(a), np.sin(a), -np.cos(bb), -np.sin(bb)]) / np.sqrt(2)
            for comp in N:
                if abs(comp) > 1e-8:
                    return N if comp > 0 else -N
            return N

        h = 1e-6
        for k, u0 in enumerate(pts):
            T = np.zeros((3, 4))
            dN = np.zeros((3, 4))
            for a in range(3):
                up, um = u0.copy(), u0.copy()
                up[a] += h
                um[a] -= h
                T[a] = (emb_map(up) - emb_map(um)) / (2 * h)
                dN[a] = (normal(up) - normal(um)) / (2 * h)
            A_fd = np.zeros((3, 3))
            for a in range(3):
                coef, *_ = np.linalg.lstsq(T.T, -dN[a], rcond=None)
                A_fd[:, a] = coef
            assert np.max(np.abs(data.shape.A[k] - A_fd)) < 1e-5

    def test_graph_amplitude_continuity(self):
        """A graph hypersurface u2 = amp * f(s, t, w): A -> 0 with the
        amplitude."""
        amb = get_bundle("E3a").ambient
        norms = []
        for amp in (0.2, 0.1, 0.05):
            emb = Embedding(coords=["s", "t", "w"],
                            map=["s", f"{amp}*sin(s)*cos(w)", "t", "w"],
                            domain=[(-1.0, 1.0)] * 3)
            bundle = HypersurfaceBundle(name=f"graph{amp}", ambient=amb, embedding=emb)
            pts = sample_points(emb.domain, 8, derive_rng(7, "graph", "pts"))
            data = evaluate_bundle(bundle, pts, require_tangent=False)
            norms.append(float(np.max(np.abs(data.shape.A))))
        assert norms[0] > norms[1] > norms[2]
        assert norms[2] < 0.12


class TestInducedDerivatives:
    def test_hyperplane_trivial(self, e3a_data):
        res = verify_induced_derivatives(e3a_data, _vectors(e3a_data.points.shape[0], "E3a-ind"))
        assert res.passed
        assert max(c.residual for c in res.checks) < 1e-9

    def test_cone_displays(self, e3b_data):
        res = verify_induced_derivatives(e3b_data, _vectors(e3b_data.points.shape[0], "E3b-ind"))
        assert res.passed
        assert max(c.residual for c in res.checks) < 1e-7

    def test_wrong_epsilon_sign_detected(self, e3b_data):
        """Flipping the declared eps flips the sign of the (nabla eta)
        display's right side, so the check must fail."""
        s = e3b_data.structure

        class Flipped:
            structure = s
            shape = type(e3b_data.shape)(A=e3b_data.shape.A, N=e3b_data.shape.N,
                                         epsilon=-e3b_data.shape.epsilon, h=e3b_data.shape.h)

        res = verify_induced_derivatives(Flipped, _vectors(s.npoints, "E3b-flip"))
        assert "induced-grad-eta" in res.failed_names()


class TestAmbient:
    def test_flat_product_ambient(self, e3a_data):
        res = check_ambient(get_bundle("E3a"), e3a_data.ambient_points)
        assert res.passed

    def test_curved_product_ambient_has_parallel_j(self):
        """Block-diagonal J over a product metric (flat R^2 times a curved
        half-plane factor) still has parallel J."""
        amb = AmbientProductModel(
            dim=4,
            coords=["u1", "u2", "v1", "v2"],
            metric=[["1", "0", "0", "0"], ["0", "1", "0", "0"],
                    ["0", "0", "1/(v2^2)", "0"], ["0", "0", "0", "1/(v2^2)"]],
            J=[["1", "0", "0", "0"], ["0", "1", "0", "0"],
               ["0", "0", "-1", "0"], ["0", "0", "0", "-1"]],
        )
        bundle = HypersurfaceBundle(name="curved", ambient=amb,
                                    embedding=get_bundle("E3a").embedding)
        rng = np.random.default_rng(5)
        pts = np.column_stack([rng.uniform(-1, 1, 6), rng.uniform(-1, 1, 6),
                               rng.uniform(-1, 1, 6), rng.uniform(0.5, 2.0, 6)])
        res = check_ambient(bundle, pts)
        assert res.passed
        assert res.residual("ambient-j-parallel") < 1e-8

    def test_gauss_equation_consistency(self, e3a_data, e3b_data):
        assert gauss_consistency_residual(e3a_data) < 1e-6
        assert gauss_consistency_residual(e3b_data) < 1e-6


class TestCharacterization:
    def test_cone_iff_both_sides_false(self, e3b_data):
        vec = _vectors(e3b_data.points.shape[0], "E3b-char")
        res = check_ps_characterization(e3b_data, vec)
        assert res.passed
        assert res.residual("characterization-iff") == 0.0

    def test_hyperplane_iff_both_sides_false(self, e3a_data):
        res = check_ps_characterization(e3a_data, _vectors(e3a_data.points.shape[0], "E3a-char"))
        assert res.passed

    def test_planted_operator_satisfies_defining_equation_exactly(self, rng):
        """Substituting A = -eps I + eps eta(x)xi into the induced (nabla phi)
        display reproduces the para-Sasakian right side pointwise."""
        for eps in (1, -1):
            g, phi, xi, eta = random_pointwise_structure(rng, 4, eps)
            A = -eps * np.eye(4) + eps * np.outer(xi, eta)
            X = rng.uniform(-1, 1, (6, 4))
            Y = rng.uniform(-1, 1, (6, 4))
            for x, y in zip(X, Y):
                display = eta @ y * (A @ x) + eps * (A @ x) @ g @ y * xi
                phix, phiy = phi @ x, phi @ y
                ps_rhs = -(phix @ g @ phiy) * xi - eps * (eta @ y) * (phi @ phix)
                assert np.max(np.abs(display - ps_rhs)) < 1e-12

    def test_constructive_inverse_recovers_planted_operator(self, rng):
        for eps in (1, -1):
            g, phi, xi, eta = random_pointwise_structure(rng, 3, eps)
            struct = _pointwise_structure(g, phi, xi, eta, eps)
            vec = random_vectors(rng, 1, 24, 3)
            A_hat, rank = recover_shape_operator(struct, vec)
            assert rank == 9
            target = -eps * np.eye(3) + eps * np.outer(xi, eta)
            assert np.max(np.abs(A_hat[0] - target)) < 1e-10


def _pointwise_structure(g, phi, xi, eta, eps):
    """Wrap numeric tensors as a single-point structure (constant jets)."""
    from paracheck.expr_jet import JetSpace

    n = len(xi)
    space = JetSpace.get(n, 2)
    m = space.ncoeffs

    def lift(arr, p, q):
        comps = np.zeros((1,) + arr.shape + (m,))
        comps[..., 0] = arr
        return TensorValue(n, p, q, comps, space, True)

    return ParacontactStructure(space, np.zeros((1, n)), eps,
                                g=lift(g, 0, 2), phi=lift(phi, 1, 1),
                                xi=lift(xi, 1, 0), eta=lift(eta, 0, 1),
                                g_order=2)


class TestQuasiUmbilical:
    def test_planted_operator_exact(self, rng):
        from paracheck.hypersurface_lab import ShapeData

        g, phi, xi, eta = random_pointwise_structure(rng, 4, -1)
        eps = -1
        A = -eps * np.eye(4) + eps * np.outer(xi, eta)
        struct = _pointwise_structure(g, phi, xi, eta, eps)
        h = eps * np.einsum('ma,mb->ab', A, g)
        shape = ShapeData(A=A[None], N=np.zeros((1, 5)), epsilon=eps, h=h[None])
        res = quasi_umbilical_check(shape, struct)
        assert res.passed
        assert res.residual("quasi-umbilical") < 1e-12

    def test_hyperplane_not_applicable(self, e3a_data):
        res = quasi_umbilical_check(e3a_data.shape, e3a_data.structure)
        assert res.get("quasi-umbilical").effective_status == "not-applicable"

    def test_perturbed_operator_fails(self, rng):
        from paracheck.hypersurface_lab import ShapeData

        g, phi, xi, eta = random_pointwise_structure(rng, 3, 1)
        A = -np.eye(3) + np.outer(xi, eta) + 5e-3 * np.outer(xi, eta)
        struct = _pointwise_structure(g, phi, xi, eta, 1)
        h = np.einsum('ma,mb->ab', A, g)
        shape = ShapeData(A=A[None], N=np.zeros((1, 4)), epsilon=1, h=h[None])
        res = quasi_umbilical_check(shape, struct)
        assert not res.passed


class TestSyntheticGauss:
    @pytest.mark.parametrize("eps,n", [(1, 3), (1, 5), (-1, 3), (-1, 5)])
    def test_trials(self, eps, n):
        out = synthetic_gauss_check(eps, n, trials=25, seed=42)
        res = out.result
        assert res.get("quasi-umbilical-exact").residual < 1e-12
        assert res.get("gauss-vs-derived-display").residual < 1e-10
        assert res.get("gauss-vs-printed-display").effective_status == "printed-form-mismatch"
        # the xi identity on the computed reduction forces k = -eps, every trial
        assert np.max(np.abs(out.k_recovered - (-eps))) < 1e-10
        assert res.get("k-vs-printed").effective_status == "printed-form-mismatch"
        assert abs(res.get("k-vs-printed").residual - abs(-eps - (2 - eps))) < 1e-10
        assert res.get("ricci-vs-derived-form").residual < 1e-10
        assert res.get("printed-chain-self-consistency").residual < 1e-10
        assert res.get("eps-a-plus-c").residual < 1e-10
        assert res.get("einstein-like-fit").residual < 1e-10

    def test_axioms_of_random_structures(self, rng):
        for eps in (1, -1):
            for n in (3, 4, 5):
                g, phi, xi, eta = random_pointwise_structure(rng, n, eps)
                I = np.eye(n)
                assert np.max(np.abs(phi @ phi - (I - np.outer(xi, eta)))) < 1e-10
                assert eta @ xi == pytest.approx(1.0)
                assert np.max(np.abs(phi @ xi)) < 1e-12
                assert np.max(np.abs(eta @ phi)) < 1e-12
                assert np.max(np.abs(phi.T @ g @ phi - (g - eps * np.outer(eta, eta)))) < 1e-10
                assert xi @ g @ xi == pytest.approx(eps)

    def test_perturbed_negative_control(self):
        out = synthetic_gauss_check(1, 3, trials=5, seed=42, perturb_a=5e-3)
        assert out.result.get("quasi-umbilical-exact").residual > 1e-12

    def test_k_input_restriction(self):
        out = synthetic_gauss_check(1, 3, trials=3, seed=1, k_input=2.0)
        assert out.result.get("gauss-vs-derived-display").residual < 1e-10

    def test_input_validation(self):
        with pytest.raises(ValueError):
            synthetic_gauss_check(1, 2, trials=1, seed=0)
        with pytest.raises(ValueError):
            synthetic_gauss_check(1, 3, trials=0, seed=0)
