import numpy as np
import pytest

from carnotmv import (
    DimensionMismatchError,
    DomainError,
    Euclidean,
    GroupModel,
    GroupPoint,
    Heisenberg,
    Step2,
    Stratification,
    UnsupportedModelError,
    dilate,
    distance,
    horizontal_frame,
    inverse,
    multiply,
    parse_group_spec,
    pseudonorm,
)

H1 = Heisenberg(1)
E2 = Euclidean(2)
STEP2 = Step2(2, [[[0.0, 1.0], [-1.0, 0.0]], [[0.0, -0.5], [0.5, 0.0]]])
MODELS = [E2, Euclidean(3), H1, Heisenberg(2), STEP2]


def random_points(model, rng, n):
    sigma = model.strat.homogeneity.astype(float)
    return rng.uniform(-1.5, 1.5, size=(n, model.strat.total_dim)) * 2.0**sigma


class TestStratification:
    def test_basic_derived_quantities(self):
        s = Stratification((3, 2, 1))
        assert s.step == 3
        assert s.total_dim == 6
        assert s.hom_dim == 3 * 1 + 2 * 2 + 1 * 3
        assert list(s.homogeneity) == [1, 1, 1, 2, 2, 3]

    def test_homogeneity_counts(self):
        s = Stratification((2, 1))
        hom = s.homogeneity
        assert hom[0] == 1 and hom[-1] == s.step
        for j, v in enumerate(s.layer_dims, start=1):
            assert int(np.sum(hom == j)) == v

    @pytest.mark.parametrize("layers", [(0,), (2, 0), (-1, 2), ()])
    def test_invalid_layers_rejected(self, layers):
        with pytest.raises(DomainError):
            Stratification(layers)

    def test_hom_dim_exceeds_total_dim_unless_step_one(self):
        assert Stratification((4,)).hom_dim == 4
        assert Stratification((2, 1)).hom_dim > Stratification((2, 1)).total_dim


class TestGroupPoint:
    def test_layer_views(self):
        p = GroupPoint(H1.strat, [1.0, 2.0, 3.0])
        assert np.array_equal(p.layer(1), [1.0, 2.0])
        assert np.array_equal(p.layer(2), [3.0])

    def test_rejects_wrong_length_and_nonfinite(self):
        with pytest.raises(DimensionMismatchError):
            GroupPoint(H1.strat, [1.0, 2.0])
        with pytest.raises(DomainError):
            GroupPoint(H1.strat, [1.0, np.nan, 0.0])


class TestMultiply:
    def test_h1_example(self):
        out = multiply(H1, np.array([1.0, 0.0, 0.0]), np.array([0.0, 1.0, 0.0]))
        # z1 = 1, z2 = i: t = 2 Im(z1 conj(z2)) = -2
        np.testing.assert_allclose(out, [1.0, 1.0, -2.0], atol=0)

    def test_euclidean_abelian(self):
        np.testing.assert_array_equal(multiply(E2, [1.0, 2.0], [3.0, 4.0]), [4.0, 6.0])

    @pytest.mark.parametrize("model", MODELS)
    def test_identity_element(self, model):
        rng = np.random.default_rng(3)
        x = random_points(model, rng, 8)
        zero = np.zeros(model.strat.total_dim)
        np.testing.assert_array_equal(model.multiply(x, zero), x)
        np.testing.assert_array_equal(model.multiply(zero, x), x)

    def test_group_point_round_trip(self):
        a = GroupPoint(H1.strat, [1.0, 0.0, 0.0])
        b = GroupPoint(H1.strat, [0.0, 1.0, 0.0])
        out = multiply(H1, a, b)
        assert isinstance(out, GroupPoint)
        np.testing.assert_allclose(out.coords, [1.0, 1.0, -2.0])

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatchError):
            multiply(H1, [1.0, 0.0], [0.0, 1.0, 0.0])


class TestInverse:
    def test_examples(self):
        np.testing.assert_array_equal(inverse(H1, [1.0, 1.0, -2.0]), [-1.0, -1.0, 2.0])
        np.testing.assert_array_equal(inverse(Euclidean(2), [3.0, 4.0]), [-3.0, -4.0])

    @pytest.mark.parametrize("model", MODELS)
    def test_defining_property(self, model):
        rng = np.random.default_rng(4)
        x = random_points(model, rng, 16)
        prod = model.multiply(x, model.inverse(x))
        assert np.max(np.abs(prod)) == 0.0


class TestDilate:
    def test_examples(self):
        np.testing.assert_array_equal(dilate(H1, 2.0, [1.0, 1.0, 1.0]), [2.0, 2.0, 4.0])
        np.testing.assert_array_equal(dilate(Euclidean(3), 3.0, [1.0, 0.0, 2.0]), [3.0, 0.0, 6.0])

    @pytest.mark.parametrize("model", MODELS)
    def test_identity_dilation(self, model):
        rng = np.random.default_rng(5)
        x = random_points(model, rng, 4)
        np.testing.assert_array_equal(model.dilate(1.0, x), x)

    @pytest.mark.parametrize("lam", [0.0, -1.0])
    def test_nonpositive_factor_rejected(self, lam):
        with pytest.raises(DomainError):
            dilate(H1, lam, [1.0, 0.0, 0.0])

    def test_semigroup(self):
        x = np.array([0.3, -0.7, 1.1])
        np.testing.assert_allclose(
            H1.dilate(2.0, H1.dilate(3.0, x)), H1.dilate(6.0, x), rtol=1e-15
        )


class TestPseudonorm:
    def test_h1_units(self):
        assert pseudonorm(H1, [1.0, 0.0, 0.0]) == pytest.approx(1.0)
        assert pseudonorm(H1, [0.0, 0.0, 1.0]) == pytest.approx(1.0)

    def test_h1_homogeneity_identity(self):
        # |delta_lam (1,0,1)| = lam * (1^4 + 1^2)^(1/4)
        lam = 1.7
        expected = lam * (1.0 + 1.0) ** 0.25
        assert pseudonorm(H1, dilate(H1, lam, [1.0, 0.0, 1.0])) == pytest.approx(expected, rel=1e-14)

    def test_euclidean_is_two_norm(self):
        assert pseudonorm(E2, [3.0, 4.0]) == pytest.approx(5.0)

    def test_zero_iff_origin(self):
        assert pseudonorm(H1, [0.0, 0.0, 0.0]) == 0.0
        assert pseudonorm(H1, [0.0, 0.0, 1e-9]) > 0.0

    @pytest.mark.parametrize("model", MODELS)
    def test_inverse_invariance(self, model):
        rng = np.random.default_rng(6)
        x = random_points(model, rng, 8)
        np.testing.assert_array_equal(model.pseudonorm(model.inverse(x)), model.pseudonorm(x))


class TestDistance:
    def test_examples(self):
        assert distance(H1, [0.5, 1.0, -2.0], [0.5, 1.0, -2.0]) == 0.0
        assert distance(E2, [1.0, 1.0], [4.0, 5.0]) == pytest.approx(5.0)
        assert distance(H1, [1.0, 0.0, 0.0], [0.0, 0.0, 0.0]) == pytest.approx(1.0)

    @pytest.mark.parametrize("model", MODELS)
    def test_left_invariance(self, model):
        rng = np.random.default_rng(7)
        x, y, z = (random_points(model, rng, 64) for _ in range(3))
        d0 = model.distance(x, y)
        d1 = model.distance(model.multiply(z, x), model.multiply(z, y))
        np.testing.assert_allclose(d1, d0, rtol=0, atol=1e-12 * np.max(1 + d0))

    @pytest.mark.parametrize("model", MODELS)
    def test_symmetry(self, model):
        rng = np.random.default_rng(8)
        x, y = (random_points(model, rng, 32) for _ in range(2))
        np.testing.assert_allclose(model.distance(x, y), model.distance(y, x), rtol=1e-12)


class TestHorizontalFrame:
    def test_h1_at_origin(self):
        X1, X2 = horizontal_frame(H1, np.zeros(3))
        np.testing.assert_array_equal(X1, [1.0, 0.0, 0.0])
        np.testing.assert_array_equal(X2, [0.0, 1.0, 0.0])

    def test_h1_general_point_against_curve_oracle(self):
        # oracle: X_i(x) = d/dt [ x . (t e_i) ] at t = 0, by central differences
        x = np.array([0.4, -1.2, 0.9])
        frame = horizontal_frame(H1, x)
        t = 1e-6
        for i, X in enumerate(frame):
            step = np.zeros(3)
            step[i] = t
            fd = (H1.multiply(x, step) - H1.multiply(x, -step)) / (2 * t)
            np.testing.assert_allclose(X, fd, atol=1e-9)
        np.testing.assert_allclose(frame[0], [1.0, 0.0, 2 * x[1]], atol=0)
        np.testing.assert_allclose(frame[1], [0.0, 1.0, -2 * x[0]], atol=0)

    def test_euclidean_canonical_everywhere(self):
        for pt in ([0.0, 0.0], [3.0, -4.0]):
            frame = horizontal_frame(E2, pt)
            np.testing.assert_array_equal(np.stack(frame), np.eye(2))

    def test_step3_system_rejected(self):
        class FakeStep3(GroupModel):
            strat = Stratification((2, 1, 1))

        with pytest.raises(UnsupportedModelError):
            horizontal_frame(FakeStep3(), np.zeros(4))


class TestGroupAxioms:
    @pytest.mark.parametrize("model", MODELS)
    def test_associativity(self, model):
        rng = np.random.default_rng(11)
        x, y, z = (random_points(model, rng, 1000) for _ in range(3))
        left = model.multiply(model.multiply(x, y), z)
        right = model.multiply(x, model.multiply(y, z))
        scale = np.max(np.abs(left)) + 1.0
        assert np.max(np.abs(left - right)) <= 1e-12 * scale

    @pytest.mark.parametrize("model", MODELS)
    @pytest.mark.parametrize("lam", [0.5, 2.0, 10.0])
    def test_dilation_homomorphism(self, model, lam):
        rng = np.random.default_rng(12)
        x, y = (random_points(model, rng, 200) for _ in range(2))
        a = model.dilate(lam, model.multiply(x, y))
        b = model.multiply(model.dilate(lam, x), model.dilate(lam, y))
        np.testing.assert_allclose(a, b, rtol=1e-12, atol=1e-12)

    @pytest.mark.parametrize("model", MODELS)
    @pytest.mark.parametrize("lam", [0.5, 2.0, 10.0])
    def test_norm_homogeneity(self, model, lam):
        rng = np.random.default_rng(13)
        x = random_points(model, rng, 200)
        np.testing.assert_allclose(
            model.pseudonorm(model.dilate(lam, x)), lam * model.pseudonorm(x), rtol=1e-12
        )


class TestStep2Construction:
    def test_non_skew_rejected(self):
        with pytest.raises(DomainError):
            Step2(2, [[[0.0, 1.0], [1.0, 0.0]]])

    def test_heisenberg_matches_step2_with_one_skew_tensor(self):
        lift = Step2(2, [[[0.0, 2.0], [-2.0, 0.0]]])
        rng = np.random.default_rng(14)
        x, y = (rng.normal(size=(64, 3)) for _ in range(2))
        np.testing.assert_array_equal(H1.multiply(x, y), lift.multiply(x, y))

    def test_tensor_shape_validated(self):
        with pytest.raises(DimensionMismatchError):
            Step2(3, [[[0.0, 1.0], [-1.0, 0.0]]])


class TestGroupSpecFormat:
    @pytest.mark.parametrize(
        "text, kind",
        [
            ("group=euclidean n=3", Euclidean),
            ("group=heisenberg n=1", Heisenberg),
            ("group=step2 n=2 k=1 B1=0,1;-1,0", Step2),
        ],
    )
    def test_parse_and_round_trip(self, text, kind):
        model = parse_group_spec(text)
        assert isinstance(model, kind)
        again = parse_group_spec(model.spec_string())
        assert again.strat == model.strat
        rng = np.random.default_rng(15)
        x, y = (random_points(model, rng, 8) for _ in range(2))
        np.testing.assert_array_equal(model.multiply(x, y), again.multiply(x, y))

    @pytest.mark.parametrize(
        "text",
        [
            "n=3",
            "group=unknown n=2",
            "group=step2 n=2 k=1",
            "group=euclidean",
            "group=step2 n=2 k=1 B1=0,1;1,0",
        ],
    )
    def test_malformed_specs_rejected(self, text):
        with pytest.raises(DomainError):
            parse_group_spec(text)
