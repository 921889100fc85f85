import numpy as np
import pytest

from sympstiefel.manifold import MetricSpec, SymplecticStiefel
from sympstiefel.matkit import (
    J_dense,
    apply_J_left,
    canonical_basis_point,
    expm,
    rand_gaussian,
    rand_symplectic,
)
from sympstiefel.retraction import (
    CayleyGradientStep,
    DomainError,
    cayley_dense_from_S,
    retract_cayley_dense,
    retract_cayley_generic,
    retract_cayley_lowrank,
    retract_qgeo,
)


def moderate_point(n, p, seed, spread=0.3):
    """Feasible point with O(1) norm (raw strategy-2 points can be huge)."""
    W = spread * rand_gaussian(2 * p, 2 * p, seed)
    return canonical_basis_point(n, p) @ expm(apply_J_left(p, W + W.T))


def make_case(n, p, seed):
    man = SymplecticStiefel(n, p)
    X = moderate_point(n, p, seed)
    Z = man.random_tangent(X, seed + 1000)
    Z /= np.linalg.norm(Z)
    return man, X, Z


RETRACTIONS = {
    "qgeo": retract_qgeo,
    "cayley": retract_cayley_generic,
    "cayley-dense": retract_cayley_dense,
}


class TestRetractionAxioms:
    @pytest.mark.parametrize("name", RETRACTIONS)
    @pytest.mark.parametrize("n,p", [(3, 1), (4, 2)])
    def test_zero_step_is_identity(self, name, n, p):
        man, X, Z = make_case(n, p, seed=n * 7 + p)
        Y = RETRACTIONS[name](man, X, Z, 0.0)
        assert np.linalg.norm(Y - X) <= 1e-14

    @pytest.mark.parametrize("name", RETRACTIONS)
    def test_first_order_slope(self, name):
        # ||(R(tZ) - X)/t - Z|| must shrink linearly with t
        man, X, Z = make_case(3, 1, seed=5)
        ts = [1e-3, 1e-4]
        errs = [
            np.linalg.norm((RETRACTIONS[name](man, X, Z, t) - X) / t - Z) for t in ts
        ]
        assert errs[1] <= 0.3 * errs[0]
        assert errs[0] <= 1e-2  # O(t) scale at t = 1e-3 for a unit direction


class TestQuasiGeodesic:
    @pytest.mark.parametrize("seed", range(5))
    def test_feasibility(self, seed):
        man, X, Z = make_case(5, 2, seed)
        spec = MetricSpec.default()
        Z = Z / max(man.norm(X, spec, Z), 1e-12)
        for t in (0.1, 1.0, 5.0, 10.0):
            Y = retract_qgeo(man, X, Z, t)
            assert man.check_symplectic(Y) <= 1e-8

    def test_group_case_closed_form(self):
        # p = n: the curve collapses to U exp(-t J W) with W = U.T J U'
        n = 3
        man, U, Z = make_case(n, n, seed=9)
        W = U.T @ (J_dense(n) @ Z)
        for t in (0.3, 1.0):
            Y = retract_qgeo(man, U, Z, t)
            Y_ref = U @ expm(-t * (J_dense(n) @ W))
            assert np.linalg.norm(Y - Y_ref) <= 1e-10 * np.linalg.norm(Y_ref)


class TestCayley:
    @pytest.mark.parametrize("seed", range(8))
    def test_lowrank_matches_dense(self, seed):
        man, X, Z = make_case(4, 1, seed)
        for t in (0.01, 0.1, 1.0):
            Y_lr = retract_cayley_generic(man, X, Z, t)
            Y_d = retract_cayley_dense(man, X, Z, t)
            assert np.linalg.norm(Y_lr - Y_d) <= 1e-10 * max(1.0, np.linalg.norm(Y_d))

    @pytest.mark.parametrize("seed", range(5))
    def test_gradient_form_matches_dense(self, seed):
        # the antigradient step must equal cay(-(t/2) S_X J) X with S_X
        # densified from the gradient factors
        man, X, _ = make_case(3, 1, seed + 40)
        spec = MetricSpec.default()
        egrad = rand_gaussian(2 * man.n, 2 * man.p, seed + 80)
        gr = man.riemannian_gradient(X, egrad, spec)
        XJ = X @ J_dense(man.p)
        S_X = gr.p_f @ XJ.T + XJ @ gr.p_f.T
        t = 0.1
        Y_lr = retract_cayley_lowrank(man, X, gr.p_f, gr.e_rho, t)
        Y_d = cayley_dense_from_S(X, -S_X, t)
        assert np.linalg.norm(Y_lr - Y_d) <= 1e-10 * max(1.0, np.linalg.norm(Y_d))
        # and it must agree with the generic path along Z = -grad
        Y_g = retract_cayley_generic(man, X, -gr.grad, t)
        assert np.linalg.norm(Y_lr - Y_g) <= 1e-9 * max(1.0, np.linalg.norm(Y_g))

    @pytest.mark.parametrize("seed", range(10))
    def test_feasibility_sweep(self, seed):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(2, 12))
        p = int(rng.integers(1, min(n, 3) + 1))
        man, X, Z = make_case(n, p, seed + 300)
        t = float(rng.uniform(0.01, 1.0))
        Y = retract_cayley_generic(man, X, Z, t)
        assert man.check_symplectic(Y) <= 1e-10

    def test_dense_2x2_closed_form(self):
        # p = n = 1, X = I, S = s I: with a = t s / 2,
        # cay(a J) = [[1 - a^2, 2a], [-2a, 1 - a^2]] / (1 + a^2)
        man = SymplecticStiefel(1, 1)
        X = np.eye(2)
        s, t = 2.0, 0.3
        Z = (s * np.eye(2)) @ J_dense(1) @ X
        a = 0.5 * t * s
        want = np.array([[1 - a**2, 2 * a], [-2 * a, 1 - a**2]]) / (1 + a**2)
        Y = retract_cayley_dense(man, X, Z, t)
        np.testing.assert_allclose(Y, want, rtol=1e-14, atol=1e-15)

    def test_engineered_singularity(self):
        # S = diag(s, -s) makes S J have real eigenvalues +-s, so the
        # transform is undefined exactly at t = 2/s
        man = SymplecticStiefel(1, 1)
        X = np.eye(2)
        s = 4.0
        S = np.diag([s, -s])
        Z = S @ J_dense(1) @ X
        t_bad = 2.0 / s
        for _ in range(2):  # deterministic failure
            with pytest.raises(DomainError):
                retract_cayley_dense(man, X, Z, t_bad)
            with pytest.raises(DomainError):
                retract_cayley_generic(man, X, Z, t_bad)
        # slightly away from the pole both are defined again
        Y = retract_cayley_generic(man, X, Z, 0.5 * t_bad)
        assert man.check_symplectic(Y) <= 1e-10

    def test_engineered_singularity_gradient_path(self):
        # at X = I with P_f = diag(a, -a), the step matrix -S_X J has real
        # eigenvalues +-2a, so the curve is undefined exactly at t = 1/a
        man = SymplecticStiefel(1, 1)
        X = np.eye(2)
        a = 3.0
        step = CayleyGradientStep(man, X, np.diag([a, -a]), np.zeros((2, 2)))
        with pytest.raises(DomainError):
            step.at(1.0 / a)
        Y = step.at(0.5 / a)
        assert man.check_symplectic(Y) <= 1e-12

    def test_gradient_step_reusable_across_backtracks(self):
        man, X, _ = make_case(4, 2, seed=77)
        egrad = rand_gaussian(2 * man.n, 2 * man.p, 78)
        gr = man.riemannian_gradient(X, egrad, MetricSpec.default())
        step = CayleyGradientStep(man, X, gr.p_f, gr.e_rho)
        for t in (1.0, 0.1, 0.01):
            one_shot = retract_cayley_lowrank(man, X, gr.p_f, gr.e_rho, t)
            np.testing.assert_array_equal(step.at(t), one_shot)


class TestFeasibilitySweep:
    def test_both_retractions_over_random_draws(self):
        # 500 (X, Z, t) draws per retraction kind, n up to 100, with the
        # step scaled so that t ||Z||_X <= 5 in the metric norm
        rng = np.random.default_rng(91)
        spec = MetricSpec.default()
        worst = 0.0
        for _ in range(500):
            n = int(rng.integers(2, 101))
            p = int(rng.integers(1, min(n, 3) + 1))
            man = SymplecticStiefel(n, p)
            W = 0.3 * rand_gaussian(2 * p, 2 * p, rng)
            X = canonical_basis_point(n, p) @ expm(apply_J_left(p, W + W.T))
            Z = man.random_tangent(X, rng)
            t = float(rng.uniform(0.05, 1.0)) * 5.0 / max(man.norm(X, spec, Z), 1e-12)
            for R in (retract_qgeo, retract_cayley_generic):
                worst = max(worst, man.check_symplectic(R(man, X, Z, t)))
        assert worst <= 1e-8


class TestDirectionalDerivativeOfObjective:
    @pytest.mark.parametrize("name", ["qgeo", "cayley"])
    def test_first_order_decay_along_retraction(self, name):
        # (f(R(tZ)) - f(X))/t approaches <egrad, Z> at a linear rate in t
        man, X, Z = make_case(4, 1, seed=21)
        A = rand_gaussian(2 * man.n, 2 * man.p, 22)

        def f(Y):
            return float(np.sum((Y - A) ** 2))

        egrad = 2.0 * (X - A)
        want = float(np.sum(egrad * Z))
        errs = []
        for t in (1e-3, 1e-4, 1e-5):
            fd = (f(RETRACTIONS[name](man, X, Z, t)) - f(X)) / t
            errs.append(abs(fd - want))
        assert errs[1] <= 0.3 * errs[0]
        assert errs[2] <= 0.3 * errs[1]
