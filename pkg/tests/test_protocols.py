import math
import warnings
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cavsqueeze.atomfield import PhysicalParams, derive_effective
from cavsqueeze.errors import DegenerateSpectrumError, InvalidSeedError, ResonanceWarning, ZeroNormError
from cavsqueeze.fock import FockSpace, fock_state
from cavsqueeze.gates import fidelity, min_variance, odd_population, squeeze_static
from cavsqueeze.protocols import (
    REFERENCE_TABLE,
    CatSpec,
    ladder_coefficients,
    ladder_success_rate,
    optimal_time,
    pipeline_sdns,
    pipeline_sscs,
    prepare_cat,
    run_ladder,
    transfer_probability,
)

FROZEN_FIDELITY = 0.9916
SP = FockSpace(512)


def random_params(rng):
    lg, le = rng.uniform(1e5, 2e6, size=2) * np.exp(1j * rng.uniform(-np.pi, np.pi, size=2))
    delta = rng.choice([-1, 1]) * rng.uniform(5e6, 5e7)
    return PhysicalParams(1.0, complex(lg), complex(le), 0.0, float(delta), 0.0)


class TestLadderCoefficients:
    @settings(max_examples=60)
    @given(st.integers(0, 2**31), st.integers(0, 20))
    def test_invariants(self, seed, n):
        c = ladder_coefficients(random_params(np.random.default_rng(seed)), n)
        assert c.eta_plus >= c.eta_minus
        assert np.isclose(c.eta_plus + c.eta_minus, c.Lambda + c.Xi, rtol=1e-9)
        lhs = (c.eta_plus - c.eta_minus) ** 2
        assert np.isclose(lhs, (c.Lambda - c.Xi) ** 2 + 4 * abs(c.Upsilon) ** 2, rtol=1e-9)

    def test_preset_n0(self, preset_params):
        c = ladder_coefficients(preset_params, 0)
        assert np.isclose(c.splitting, 3.395e5, rtol=1e-3)
        assert np.isclose(abs(c.Upsilon), 2 * 4.9e11 / 1e7 * math.sqrt(2), rtol=1e-12)
        assert np.isclose(optimal_time(preset_params, 0), 0.925e-5, rtol=1e-3)

    @pytest.mark.parametrize("which", ["lambda_g", "lambda_e"])
    def test_decoupled(self, preset_params, which):
        c = ladder_coefficients(replace(preset_params, **{which: 0}), 2)
        assert c.Upsilon == 0
        assert c.eta_plus == pytest.approx(max(c.Lambda, c.Xi))
        assert c.eta_minus == pytest.approx(min(c.Lambda, c.Xi))

    def test_decoupled_time(self, preset_params):
        p = replace(preset_params, lambda_g=0)
        c = ladder_coefficients(p, 0)
        assert np.isclose(optimal_time(p, 0), math.pi / abs(c.Lambda - c.Xi))
        assert transfer_probability(p, 0, optimal_time(p, 0), "closed-form") == 0

    def test_degenerate(self, preset_params):
        with pytest.raises(DegenerateSpectrumError):
            optimal_time(replace(preset_params, lambda_g=0, lambda_e=0), 0)

    @pytest.mark.parametrize("k, n", [(1, 0), (2, 2), (3, 4)])
    def test_table_times(self, preset_params, k, n):
        assert abs(optimal_time(preset_params, n) / REFERENCE_TABLE[k][0] - 1) < 5e-3


class TestTransfer:
    def test_zero_time(self, preset_params):
        assert transfer_probability(preset_params, 0, 0.0) == pytest.approx(0, abs=1e-15)

    def test_peak(self, preset_params):
        t = optimal_time(preset_params, 0)
        for method in ("numeric", "closed-form"):
            assert np.isclose(transfer_probability(preset_params, 0, t, method), 2 / 3, atol=1e-12)

    def test_closed_form_matches_numeric(self):
        rng = np.random.default_rng(2024)
        worst = 0.0
        for _ in range(100):
            p = random_params(rng)
            n = int(rng.choice([0, 2, 4]))
            t = rng.uniform(0, 3) * optimal_time(p, n)
            worst = max(worst, abs(transfer_probability(p, n, t) - transfer_probability(p, n, t, "closed-form")))
        assert worst < 1e-9

    def test_optimal_is_argmax(self, preset_params):
        for n in (0, 2, 4):
            t0 = optimal_time(preset_params, n)
            ts = np.linspace(0, 2 * t0, 2001)
            ps = [transfer_probability(preset_params, n, t, "closed-form") for t in ts]
            assert np.isclose(ts[int(np.argmax(ps))], t0, rtol=2e-3)

    @pytest.mark.parametrize("n", [0, 2, 4])
    def test_dispersive_limit(self, n):
        # lambda_g = lambda_e = lambda with lambda^2/delta fixed: the peak tends to (n+1)(n+2)/(1+(n+1)(n+2))
        kappa = 4.9e4
        limit = (n + 1) * (n + 2) / (1 + (n + 1) * (n + 2))
        for delta in (1e7, 1e9, 1e11):
            lam = math.sqrt(kappa * delta)
            p = PhysicalParams(1.0, lam, lam, 0.0, delta, 0.0)
            assert np.isclose(ladder_coefficients(p, n).max_transfer, limit, rtol=1e-12)
            assert np.isclose(transfer_probability(p, n, optimal_time(p, n)), limit, atol=1e-8)

    def test_bounds(self, preset_params):
        for t in np.linspace(0, 3e-5, 17):
            assert 0 <= transfer_probability(preset_params, 2, t) <= 1

    def test_negative_time(self, preset_params):
        with pytest.raises(ValueError):
            transfer_probability(preset_params, 0, -1.0)


class TestRunLadder:
    def test_one_atom(self, preset_params):
        res = run_ladder(preset_params, 1)
        assert fidelity(res.final_state, fock_state(res.final_state.space, 2)) > 0.999
        assert np.isclose(res.cumulative_probability, ladder_coefficients(preset_params, 0).max_transfer)

    def test_three_atoms(self, preset_params):
        res = run_ladder(preset_params, 3)
        for step in res.steps:
            assert abs(step.t_k / step.t_reference - 1) < 5e-3
            assert np.isclose(step.p_success_numeric, step.p_success_closed_form, atol=1e-9)
            assert step.p_success_numeric >= step.p_success_paper_table
            assert 0 <= step.p_success_numeric <= 1 and step.t_k > 0
        assert np.isclose(res.cumulative_probability, np.prod([s.p_success_numeric for s in res.steps]))
        assert fidelity(res.final_state, fock_state(res.final_state.space, 6)) > 0.999

    def test_monte_carlo_rate(self, preset_params):
        trials = 10_000
        P = run_ladder(preset_params, 1).cumulative_probability
        rate = ladder_success_rate(preset_params, 1, trials, seed=12345)
        sigma = math.sqrt(P * (1 - P) / trials)
        assert abs(rate - P) < 3 * sigma

    def test_monte_carlo_reproducible(self, preset_params):
        a = run_ladder(preset_params, 3, "monte-carlo", seed=99)
        b = run_ladder(preset_params, 3, "monte-carlo", seed=99)
        assert [s.detected for s in a.steps] == [s.detected for s in b.steps]
        assert a.success == b.success and a.failed_step == b.failed_step

    def test_failure_reported(self, preset_params):
        outcomes = [run_ladder(preset_params, 3, "monte-carlo", seed=s) for s in range(40)]
        failed = [r for r in outcomes if not r.success]
        assert failed
        for r in failed:
            assert r.steps[-1].detected == "e" and r.failed_step == len(r.steps)
            assert r.final_state is None

    def test_seed_required_when_reproducible(self, preset_params):
        with pytest.raises(InvalidSeedError):
            run_ladder(preset_params, 1, "monte-carlo", reproducible=True)

    @pytest.mark.parametrize("seed", [-1, 2**64, 1.5])
    def test_bad_seed(self, preset_params, seed):
        with pytest.raises(InvalidSeedError):
            run_ladder(preset_params, 1, "monte-carlo", seed=seed)

    def test_weak_transfer_flagged(self, preset_params):
        with pytest.warns(RuntimeWarning):
            res = run_ladder(replace(preset_params, lambda_g=1e-3), 1)
        assert res.steps[0].weak_transfer


class TestCat:
    def test_even_parity(self):
        assert odd_population(prepare_cat(SP, CatSpec(2.0))) < 1e-20

    def test_odd_parity(self):
        psi = prepare_cat(SP, CatSpec(2.0, sign="-"))
        assert np.sum(psi.populations()[0::2]) < 1e-20

    def test_zero_norm(self):
        with pytest.raises(ZeroNormError):
            prepare_cat(SP, CatSpec(0.0, sign="-"))

    def test_norm_constant(self):
        spec = CatSpec(2.0, c_g=0.5, c_e=0.5)
        expected = (2 * (1 + math.exp(-8))) ** -0.5 / 0.5
        assert np.isclose(spec.norm, expected)
        psi = prepare_cat(SP, spec)
        assert np.isclose(psi.norm(), 1, atol=1e-10)

    @settings(max_examples=30)
    @given(st.complex_numbers(max_magnitude=3), st.complex_numbers(min_magnitude=0.1, max_magnitude=2),
           st.sampled_from("+-"))
    def test_norm_formula(self, alpha, ce, sign):
        spec = CatSpec(alpha, 1.0, ce, sign)
        if spec.norm_squared_inverse <= 1e-6:
            return
        psi = prepare_cat(FockSpace(64), spec)
        assert np.isclose(psi.norm(), 1, atol=1e-10)

    def test_from_beta(self):
        assert CatSpec.from_beta(1.5).alpha == 1.5j

    def test_bad_sign(self):
        with pytest.raises(ValueError):
            CatSpec(1.0, sign="*")


class TestPipelines:
    def test_squeezed_vacuum(self, preset_params):
        t = 1e-4
        rep = pipeline_sdns(preset_params, 0, 0, t, space=SP)
        r = 2 * abs(derive_effective(preset_params).xi) * t
        assert np.isclose(rep.quadratures.var_min, math.exp(-2 * r) / 4, rtol=1e-8)

    def test_scs_matches_squeezed_vacuum_variance(self, preset_params):
        rep = pipeline_sdns(preset_params, 0, 1.0 + 0.5j, 1e-4, space=SP)
        r = 2 * 6.86e3 * 1e-4
        assert np.isclose(rep.quadratures.var_min, math.exp(-2 * r) / 4, rtol=1e-8)
        assert len(rep.step_log) == 3

    def test_literal_convention_displacement(self, preset_params):
        a = pipeline_sdns(preset_params, 1, 1.0, 5e-5, space=FockSpace(128), convention="paper-literal")
        b = pipeline_sdns(preset_params, 1, -0.5, 5e-5, space=FockSpace(128))
        assert np.isclose(fidelity(a.ideal_state, b.ideal_state), 1)

    def test_cat_t0(self, preset_params):
        spec = CatSpec(2.0)
        rep = pipeline_sscs(preset_params, spec, 0.0, space=SP)
        assert np.isclose(fidelity(rep.ideal_state, prepare_cat(SP, spec)), 1)

    def test_cat_parity(self, preset_params):
        rep = pipeline_sscs(preset_params, CatSpec(2.0), 1.36 / (2 * 6.86e3), space=SP)
        assert odd_population(rep.ideal_state) < 1e-10

    def test_effective_matches_ideal(self, preset_params):
        rep = pipeline_sdns(preset_params, 2, 0, 1e-4, "effective", space=SP)
        assert rep.fidelity > FROZEN_FIDELITY

    def test_full_pipeline(self, preset_params):
        rep = pipeline_sdns(preset_params, 0, 0, 1e-5, "full", space=FockSpace(96))
        assert 0 <= rep.fidelity <= 1 + 1e-12
        assert rep.fidelity > FROZEN_FIDELITY
        assert 0.95 < rep.branch_population <= 1
        assert rep.quadratures.uncertainty_product >= 1 / 16 - 1e-9

    def test_resonance_warning(self, preset_params):
        with pytest.warns(ResonanceWarning):
            pipeline_sdns(replace(preset_params, Delta=0.0), 0, 0, 1e-5, space=FockSpace(32))

    def test_no_warning_at_resonance(self, preset_params):
        with warnings.catch_warnings():
            warnings.simplefilter("error")
            pipeline_sdns(preset_params, 0, 0, 1e-5, space=FockSpace(32))

    def test_wigner_hook(self, preset_params):
        rep = pipeline_sdns(preset_params, 0, 0, 2e-5, space=FockSpace(64))
        assert abs(rep.wigner().integral() - 1) < 0.02

    def test_matches_static_squeeze(self, preset_params):
        t = 1e-4
        rep = pipeline_sdns(preset_params, 0, 0, t, space=SP)
        zeta = 2 * 6.86e3 * t * 1j  # real xi, phi = pi/2
        ref = squeeze_static(SP, zeta) @ fock_state(SP, 0)
        assert np.isclose(fidelity(rep.ideal_state, ref), 1)
        assert np.isclose(min_variance(ref).var_min, rep.quadratures.var_min)
