import numpy as np
import pytest

from avica.avica import (
    MACHINE_ZERO_RTOL,
    avica_eval,
    avica_fit,
    evaluate_feature,
    feature_count_profile,
)
from avica.dataio import circle_threshold
from avica.ipca import FeatureLabel, ipca_eval, ipca_fit
from avica.kernels import KernelSpec, kernel_matrix
from avica.polyring import span_principal_angle, vanishing_slice
from avica.tsvd import low_rank_project, thresholded_svd

from conftest import circle_points, expand_to_poly

THETA = 1.0 / np.sqrt(2.0)
SPEC1 = KernelSpec.inhomogeneous(1, THETA)


class TestFitBasics:
    def test_requires_degree_one_or_gaussian(self):
        X = np.ones((4, 2))
        with pytest.raises(ValueError, match="degree-1"):
            avica_fit(X, KernelSpec.inhomogeneous(2, THETA), maxdeg=2, epsilon=0.1)
        avica_fit(X, KernelSpec.gaussian(5.0), maxdeg=2, epsilon=0.1)

    def test_parameter_validation(self):
        X = np.ones((4, 2))
        with pytest.raises(ValueError):
            avica_fit(X, SPEC1, maxdeg=0, epsilon=0.1)
        with pytest.raises(ValueError):
            avica_fit(X, SPEC1, maxdeg=1, epsilon=0.0)
        with pytest.raises(ValueError):
            avica_fit(X, SPEC1, maxdeg=1, epsilon=0.1, n_anchors=0)

    def test_threshold_chain(self):
        rng = np.random.default_rng(0)
        X = rng.normal(size=(10, 2))
        model = avica_fit(X, SPEC1, maxdeg=3, epsilon=0.5, seed=1)
        eps = 0.5
        for layer in model.layers:
            eps = eps * THETA
            assert layer.epsilon_d == eps

    def test_repeated_point_is_rank_one_everywhere(self):
        X = np.tile([[1.5, -2.0]], (10, 1))
        model = avica_fit(X, SPEC1, maxdeg=3, epsilon=1e-3, seed=1)
        assert feature_count_profile(model) == [(1, 1, 0), (2, 1, 0), (3, 1, 0)]

    def test_circle_profile_follows_dimension_growth(self):
        # the space of degree<=d functions on a circle has dimension 2d+1
        rng = np.random.default_rng(2)
        X = circle_points(30, 10.0, 0.0, rng)
        model = avica_fit(X, SPEC1, maxdeg=3, epsilon=None, seed=4)
        assert [(d, r) for d, r, _ in feature_count_profile(model)] == [(1, 3), (2, 5), (3, 7)]

    def test_circle_linear_kernel_rank_three(self):
        rng = np.random.default_rng(3)
        X = circle_points(25, 10.0, 0.0, rng)
        model = avica_fit(X, SPEC1, maxdeg=1, epsilon=None, seed=5)
        profile = feature_count_profile(model)
        assert profile[0][0] == 1 and profile[0][1] == 3

    def test_rank_cap(self):
        rng = np.random.default_rng(4)
        X = rng.normal(size=(20, 3))
        capped = avica_fit(X, SPEC1, maxdeg=2, epsilon=1e-8, seed=6, rank_caps={1: 2, 2: 3})
        assert capped.layers[0].retained_rank == 2
        assert capped.layers[1].retained_rank <= 3

    def test_seed_determinism_bitwise(self):
        rng = np.random.default_rng(5)
        X = rng.normal(size=(12, 2))
        a = avica_fit(X, SPEC1, maxdeg=2, epsilon=0.3, seed=11)
        b = avica_fit(X, SPEC1, maxdeg=2, epsilon=0.3, seed=11)
        np.testing.assert_array_equal(a.Y, b.Y)
        for la, lb in zip(a.layers, b.layers):
            np.testing.assert_array_equal(la.V, lb.V)
            np.testing.assert_array_equal(la.S, lb.S)


class TestGenerativeRecovery:
    def test_noiseless_rejected_block_contains_the_quadric(self, radius10_quadric):
        # On exactly clean data the vanishing direction sits among the
        # rejected singular directions (rank drops to 5), but its singular
        # value is float noise, below the machine-zero emission cutoff, so
        # no generative feature is emitted.  The structural claim that holds
        # is about the rejected subspace itself.
        rng = np.random.default_rng(6)
        X = circle_points(30, 10.0, 0.0, rng)
        model = avica_fit(X, SPEC1, maxdeg=2, epsilon=1e-8, seed=7)
        layer2 = model.layers[1]
        assert layer2.retained_rank == 5
        assert layer2.generative_rows.size == 0
        spec2 = KernelSpec.inhomogeneous(2, THETA)
        polys = [expand_to_poly(v, model.Y, spec2) for v in layer2.V_perp]
        assert span_principal_angle(polys, [radius10_quadric]) <= 1e-4

    def test_noisy_circle_emits_the_quadric(self, radius10_quadric):
        # with real noise the vanishing direction carries a real singular
        # value below the noise threshold and is emitted as a feature
        rng = np.random.default_rng(7)
        sigma = 0.5
        X = circle_points(30, 10.0, sigma, rng)
        model = avica_fit(X, SPEC1, maxdeg=2, epsilon=circle_threshold(THETA, sigma), seed=8)
        gens2 = [f for f in model.generative_features if f.degree == 2]
        assert len(gens2) >= 1
        spec2 = KernelSpec.inhomogeneous(2, THETA)
        polys = [expand_to_poly(f.alphas, model.Y, spec2) for f in gens2]
        assert span_principal_angle(polys, [radius10_quadric]) <= 0.05

    def test_noise_sweep_rejected_span_converges(self, radius10_quadric):
        spec2 = KernelSpec.inhomogeneous(2, THETA)
        angles = []
        for sigma in (1.0, 1e-1, 1e-2, 1e-3, 0.0):
            rng = np.random.default_rng(42)
            X = circle_points(30, 10.0, sigma, rng)
            eps = circle_threshold(THETA, sigma) if sigma > 0 else 1e-8
            model = avica_fit(X, SPEC1, maxdeg=2, epsilon=eps, seed=5)
            layer2 = model.layers[1]
            polys = [expand_to_poly(v, model.Y, spec2) for v in layer2.V_perp]
            angle = span_principal_angle(polys, [radius10_quadric]) if polys else np.pi / 2
            angles.append(angle)
        inversions = sum(1 for a, b in zip(angles, angles[1:]) if b > a + 1e-12)
        assert inversions <= 1
        assert angles[-1] <= 1e-6

    def test_ideal_absorption_into_next_degree(self, radius10_quadric):
        # multiplying the degree-2 vanishing directions by degree-1 sections
        # must stay inside the degree-3 vanishing slice: once a relation is
        # found, its multiples carry no new information
        rng = np.random.default_rng(8)
        X = circle_points(30, 10.0, 0.0, rng)
        model = avica_fit(X, SPEC1, maxdeg=2, epsilon=1e-8, seed=9)
        layer2 = model.layers[1]
        spec2 = KernelSpec.inhomogeneous(2, THETA)
        truth3 = vanishing_slice(X, 3)
        assert len(truth3) == 3  # dim K[X]_{<=3} - (2*3+1)
        products = []
        for v in layer2.V_perp:
            base = expand_to_poly(v, model.Y, spec2)
            for y in model.Y[:3]:
                section = expand_to_poly(np.array([1.0]), y[np.newaxis, :], SPEC1)
                products.append(base * section)
        assert span_principal_angle(products, truth3) <= 1e-4


class TestIpcaEquivalence:
    def test_maxdeg_one_matches_ipca(self):
        rng = np.random.default_rng(9)
        X = rng.uniform(-2, 2, (25, 3))
        eps = 0.05
        av = avica_fit(X, SPEC1, maxdeg=1, epsilon=eps, seed=13)
        ip = ipca_fit(X, SPEC1, epsilon=eps * THETA, seed=13)
        np.testing.assert_array_equal(av.Y, ip.Y)
        assert av.layers[0].retained_rank == len(ip.discriminative_features)
        # evaluation matrices agree on the shared features
        disc, gen = avica_eval(av, X)[0]
        ip_vals = ipca_eval(ip, X)
        stacked = np.hstack([disc, gen])
        np.testing.assert_allclose(stacked, ip_vals[:, : stacked.shape[1]], atol=1e-10)
        # singular values agree; avica quanta carry the extra theta^d factor
        layer = av.layers[0]
        sv = np.concatenate([layer.S, layer.S_perp[layer.generative_rows]])
        iq = np.array([f.quantum for f in ip.features[: sv.size]])
        np.testing.assert_allclose(np.sort(sv), np.sort(iq), rtol=1e-12)


class TestEval:
    def test_training_reproduces_power_project_recursion(self):
        rng = np.random.default_rng(10)
        X = rng.normal(0, 2, (30, 2))
        model = avica_fit(X, SPEC1, maxdeg=3, epsilon=0.5, seed=3)
        K = kernel_matrix(SPEC1, X, model.Y) / model.normalizer
        K_d = np.ones_like(K)
        eps_d = model.epsilon
        for layer, (disc, _) in zip(model.layers, avica_eval(model, X)):
            eps_d *= THETA
            K_d = K_d * K
            t = thresholded_svd(K_d, eps_d)
            expected = t.U * t.S
            if expected.size:
                assert np.abs(disc - expected).max() <= 1e-8
            K_d = low_rank_project(t)

    def test_generative_values_vanish_on_fresh_circle_points(self):
        rng = np.random.default_rng(11)
        X = circle_points(30, 10.0, 0.0, rng)
        model = avica_fit(X, SPEC1, maxdeg=2, epsilon=1e-8, seed=7)
        fresh = circle_points(60, 10.0, 0.0, rng)
        K = kernel_matrix(SPEC1, fresh, model.Y) / model.normalizer
        K2 = (K * K)
        layer2 = model.layers[1]
        values = K2 @ layer2.V_perp.T
        scale = np.linalg.norm(K2, 2)
        assert np.abs(values).max() <= 1e-6 * scale

    def test_empty_input(self):
        rng = np.random.default_rng(12)
        X = rng.normal(size=(8, 2))
        model = avica_fit(X, SPEC1, maxdeg=2, epsilon=0.5, seed=1)
        out = avica_eval(model, np.zeros((0, 2)))
        assert len(out) == 2
        for disc, gen in out:
            assert disc.shape[0] == 0 and gen.shape[0] == 0

    def test_dimension_mismatch(self):
        rng = np.random.default_rng(13)
        model = avica_fit(rng.normal(size=(8, 2)), SPEC1, maxdeg=1, epsilon=0.5, seed=1)
        with pytest.raises(ValueError, match="dimension"):
            avica_eval(model, np.ones((3, 4)))

    def test_evaluate_feature_matches_columns(self):
        rng = np.random.default_rng(14)
        X = circle_points(25, 10.0, 0.4, rng)
        model = avica_fit(X, SPEC1, maxdeg=2, epsilon=circle_threshold(THETA, 0.4), seed=2)
        fresh = rng.normal(0, 8, (10, 2))
        per_degree = avica_eval(model, fresh)
        for f in model.features:
            vals = evaluate_feature(model, f, fresh)
            li = f.degree - 1
            disc, gen = per_degree[li]
            if f.label is FeatureLabel.DISCRIMINATIVE:
                np.testing.assert_array_equal(vals, disc[:, f.source_index])
            else:
                col = int(np.searchsorted(model.layers[li].generative_rows, f.source_index))
                np.testing.assert_array_equal(vals, gen[:, col])


class TestRegistry:
    def test_informativity_order(self):
        rng = np.random.default_rng(15)
        X = circle_points(30, 10.0, 0.6, rng)
        model = avica_fit(X, SPEC1, maxdeg=3, epsilon=circle_threshold(THETA, 0.6), seed=3)
        gens = model.generative_features
        discs = model.discriminative_features
        # generative ascending, discriminative descending, generative first
        assert model.features == gens + discs
        gq = [f.quantum for f in gens]
        dq = [f.quantum for f in discs]
        assert gq == sorted(gq)
        assert dq == sorted(dq, reverse=True)

    def test_quanta_scaled_by_theta_power(self):
        rng = np.random.default_rng(16)
        X = rng.normal(size=(10, 2))
        model = avica_fit(X, SPEC1, maxdeg=2, epsilon=0.2, seed=4)
        for f in model.discriminative_features:
            layer = model.layers[f.degree - 1]
            assert f.quantum == pytest.approx(layer.S[f.source_index] * THETA**f.degree, rel=1e-15)

    def test_machine_zero_directions_not_emitted(self):
        # exactly clean circle: everything rejected at degree 2 is float junk
        rng = np.random.default_rng(17)
        X = circle_points(30, 10.0, 0.0, rng)
        model = avica_fit(X, SPEC1, maxdeg=2, epsilon=1e-8, seed=7)
        base = kernel_matrix(SPEC1, X, model.Y) / model.normalizer
        cutoff = MACHINE_ZERO_RTOL * np.linalg.svd(base, compute_uv=False)[0]
        for layer in model.layers:
            kept = layer.S_perp[layer.generative_rows]
            assert np.all(kept > cutoff)
            dropped = np.delete(layer.S_perp, layer.generative_rows)
            assert np.all(dropped <= cutoff)


class TestGaussianMode:
    def test_gaussian_fit_and_eval(self):
        rng = np.random.default_rng(18)
        X = np.vstack([
            rng.normal(0, 0.3, (15, 2)),
            rng.normal(5, 0.3, (15, 2)),
        ])
        model = avica_fit(X, KernelSpec.gaussian(2.0, theta=THETA), maxdeg=2, epsilon=None, seed=5)
        out = avica_eval(model, X)
        assert len(out) == 2
        assert out[0][0].shape[0] == 30
