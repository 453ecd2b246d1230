import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fsir.basis import BasisSpec, FunctionCoef, synthesize
from fsir.diagnostics import (
    beta_membership_check,
    decay_exponent,
    dyadic_block_sums,
    evaluation_representer,
    hgamma_membership,
    inverse_amplification,
    linearity_check,
    mean_range_check,
    series_verdict,
    theorem1_check,
)
from fsir.estimate import SliceMeans
from fsir.operators import SpectralOperator, apply, power
from fsir.simulate import ExampleSpec, oracle_beta


@pytest.fixture(scope="module")
def basis1024():
    return BasisSpec("cosine", 1024, 2048)


@pytest.fixture(scope="module")
def gw1024(basis1024):
    i = np.arange(1, 1025)
    return SpectralOperator.diagonal(i**-2.0, basis1024)


class TestSeries:
    def test_block_sums(self):
        assert dyadic_block_sums(np.ones(7)).tolist() == [1, 2, 4]
        assert dyadic_block_sums(np.ones(6)).tolist() == [1, 2]

    def test_decay_exponent(self):
        i = np.arange(1, 1024.0)
        assert abs(decay_exponent(i**-2.0) - 2.0) < 1e-10
        assert abs(decay_exponent(i**-0.7) - 0.7) < 1e-10

    @pytest.mark.parametrize(
        "p, verdict",
        [(2.0, "converging"), (1.5, "converging"), (1.0, "diverging"), (0.5, "diverging"), (0.0, "diverging")],
    )
    def test_power_series(self, p, verdict):
        i = np.arange(1, 1025.0)
        assert series_verdict(i**-p)[0] == verdict

    def test_short_series_inconclusive(self):
        assert series_verdict(np.arange(1, 150.0) ** -2.0)[0] == "inconclusive"

    def test_finite_support_converges(self):
        t = np.zeros(500)
        t[:10] = 1.0
        assert series_verdict(t)[0] == "converging"


class TestMembership:
    def test_range_of_gamma_is_in_hgamma(self, basis1024, gw1024):
        i = np.arange(1, 1025)
        for seed in range(3):
            h = FunctionCoef(np.random.default_rng(seed).standard_normal(1024) * i**-2.0, basis1024)
            rep = hgamma_membership(h, gw1024)
            assert rep.verdict == "converging"
            assert rep.outside_mass == 0

    def test_range_of_root_is_in_hgamma(self, basis1024, gw1024):
        # g = Gamma^{1/2} h with square-summable h_i = Z_i / i
        half = power(gw1024, 0.5)
        i = np.arange(1, 1025)
        rng = np.random.default_rng(6)
        for _ in range(100):
            h = FunctionCoef(rng.standard_normal(1024) / i, basis1024)
            rep = hgamma_membership(apply(half, h), gw1024)
            assert rep.verdict == "converging"
            assert rep.value == pytest.approx(h.norm() ** 2, rel=1e-10)

    def test_boundary_function_not_in_hgamma(self, basis1024, gw1024):
        i = np.arange(1, 1025)
        # coefficients i^{-1.5}: in L2 but sum i^{-3} / i^{-2} is harmonic
        rep = hgamma_membership(FunctionCoef(i**-1.5, basis1024), gw1024)
        assert rep.verdict == "diverging"
        assert rep.decay_exponent == pytest.approx(1.0, abs=1e-8)

    def test_leading_eigenfunction(self, binary_model):
        G = binary_model[3]
        # N = 200 is the smallest truncation allowed a verdict
        rep = hgamma_membership(G.eigenfunction(0), G)
        assert rep.verdict == "converging"
        assert rep.value == pytest.approx(1 / G.eigvals[0], rel=1e-10)

    def test_quarter_power_coefficients_diverge(self, basis1024, gw1024):
        xi = np.arange(1, 1025.0) ** -2
        rep = hgamma_membership(FunctionCoef(xi**0.25, basis1024), gw1024)
        assert rep.verdict == "diverging"

    def test_slice_means_example(self, basis1024, gw1024):
        spec = ExampleSpec("binary", 1.0, 0.5, 1024)
        m = spec.alpha * spec.signal
        sm = SliceMeans(np.array([0.5, 0.5]), np.vstack([-m, m]), basis1024)
        reps = mean_range_check(sm, gw1024)
        assert [r.verdict for r in reps] == ["converging", "converging"]
        assert reps[0].value == pytest.approx(np.sum(np.arange(1, 1025.0) ** -3.0), rel=1e-12)

    def test_oracle_beta(self, basis1024, gw1024):
        beta = oracle_beta(ExampleSpec(delta=0.5, n_basis=1024), basis1024)
        rep = beta_membership_check(beta, gw1024)
        assert rep["L2"].verdict == "diverging"
        assert rep["R_Gamma_minus_half"].verdict == "converging"
        beta = oracle_beta(ExampleSpec(delta=0.5, n_basis=100), BasisSpec("cosine", 100, 256))
        assert beta_membership_check(beta, SpectralOperator.diagonal(np.ones(100), beta.basis))["L2"].verdict == (
            "inconclusive"
        )


class TestNormIdentityCheck:
    def test_zero_between(self, binary_model):
        _, _, _, G = binary_model
        out = theorem1_check(G, SpectralOperator.zero(G.basis), trials=20)
        assert out["verdict"] == "pass"
        assert out["statistics"]["operator_norm_T"] == 0

    def test_between_equals_total(self):
        b = BasisSpec("cosine", 20, 64)
        G = SpectralOperator.diagonal(np.arange(1, 21.0) ** -2, b)
        s = theorem1_check(G, G, trials=50)["statistics"]
        assert s["operator_norm_T"] == pytest.approx(1.0, abs=1e-12)
        assert s["max_relative_discrepancy_inverse_substitution"] < 1e-10
        assert s["operator_norm_hgamma_exact"] == pytest.approx(1.0, abs=1e-12)

    def test_binary_model_statistics(self, binary_model):
        _, _, Ge, G = binary_model
        out = theorem1_check(G, Ge, trials=100)
        s = out["statistics"]
        r = np.sum(np.arange(1, 201.0) ** -3)
        assert s["operator_norm_T"] == pytest.approx(r / (1 + r), abs=1e-12)
        assert s["sup_ratio_l2"] <= s["operator_norm_T"] * (1 + 1e-12)
        assert s["max_relative_discrepancy_inverse_substitution"] < 1e-8
        assert out["inputs"]["rank_Ge"] == 1

    @settings(max_examples=15, deadline=None)
    @given(seed=st.integers(0, 2**32 - 1), rank=st.integers(1, 5))
    def test_inverse_substitution_identity(self, seed, rank):
        b = BasisSpec("cosine", 20, 64)
        rng = np.random.default_rng(seed)
        i = np.arange(1, 21.0)
        G = SpectralOperator.diagonal(i**-2, b)
        F = rng.standard_normal((20, rank)) * i[:, None] ** -1.5
        Ge = SpectralOperator.from_matrix(F @ F.T, b)
        s = theorem1_check(G, Ge, trials=30, seed=seed % 1000)["statistics"]
        assert s["max_relative_discrepancy_inverse_substitution"] < 1e-8


class TestEvaluation:
    def test_representer_reproduces_values(self, rng):
        b = BasisSpec("cosine", 30, 128)
        f = FunctionCoef(rng.standard_normal(30), b)
        for s in (0.0, 0.31, 1.0):
            assert evaluation_representer(s, b).inner(f) == pytest.approx(f([s])[0], abs=1e-12)

    def test_representer_on_grid(self, binary_model, rng):
        G = binary_model[3]
        b = G.basis
        f = FunctionCoef(rng.standard_normal(200), b)
        vals = synthesize(f)
        half = power(G, 0.5)
        diag = np.diag(G.kernel_on_grid().values)
        for k in (0, 77, 300, 511):
            rep = evaluation_representer(b.nodes[k], b)
            assert abs(rep.inner(f) - vals[k]) < 1e-8
            assert abs(apply(half, rep).norm() ** 2 - diag[k]) < 1e-8

    def test_representer_norm(self):
        b = BasisSpec("cosine", 30, 128)
        assert evaluation_representer(0.0, b).norm() ** 2 == pytest.approx(2 * 30 - 1, rel=1e-12)
        # the norm grows without bound with N
        norms = [evaluation_representer(0.0, BasisSpec("cosine", n, 4 * n)).norm() for n in (10, 100, 1000)]
        assert norms[0] < norms[1] < norms[2]

    def test_representer_synthesis(self):
        b = BasisSpec("cosine", 8, 32)
        vals = synthesize(evaluation_representer(0.0, b))
        assert vals[0] == pytest.approx(2 * 8 - 1)

    def test_inverse_amplification(self, binary_model):
        _, Gw, _, G = binary_model
        amp = inverse_amplification(Gw)
        assert np.all(np.diff(amp) > 0)
        assert np.allclose(amp, np.arange(1, 201.0) ** 2, rtol=1e-12)
        assert np.allclose(inverse_amplification(G), 1 / G.eigvals, rtol=1e-10)


class TestLinearity:
    def test_coordinate_direction(self):
        b = BasisSpec("cosine", 20, 64)
        G = SpectralOperator.diagonal(np.arange(1, 21.0) ** -2, b)
        out = linearity_check(G, b.unit(1), n=20000, seed=3)
        assert out["verdict"] == "pass"
        s = out["statistics"]
        assert s["fitted_slopes"][0] == pytest.approx(1.0, abs=1e-12)
        assert s["probes_within_3se"]

    def test_example_direction(self):
        spec = ExampleSpec("binary", 2.0, 0.5, 30)
        out = linearity_check(spec, oracle_beta(spec), n=20000, seed=1)
        assert out["verdict"] == "pass"
        assert len(out["statistics"]["probe_z"]) == 5

    def test_zero_direction(self):
        b = BasisSpec("cosine", 10, 32)
        G = SpectralOperator.diagonal(np.ones(10), b)
        with pytest.raises(ValueError):
            linearity_check(G, b.zeros(), n=100)
