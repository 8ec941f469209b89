import math

import numpy as np
import pytest

from resonant_fk import FKModel, example_model, expand
from resonant_fk.errors import AliasingExcess, CutoffOverflow, NoContraction
from resonant_fk.fourier import GridSampling, TrigSeries, evaluate, lift_last_axis, partial_average
from resonant_fk.lindstedt import (apply_symmetry, build_W, dumps, jet_compose_W, loads, normalize_phase, residual,
                                   residual_of)
from resonant_fk.model import example_potential
from resonant_fk.verify import loglog_slope, newton_family

SQRT2 = math.sqrt(2.0)
OMEGA = SQRT2 - 1.0


def psi_quadrature_average(W, eta, n=32):
    psi = np.arange(n) / n
    return float(np.mean(evaluate(W, np.stack([psi, np.full(n, eta)], axis=1))))


class TestBuildW:
    def test_two_mode_potential(self, model, amp):
        W = model_W = build_W(model.V, model.alpha, model.intrinsic)
        for psi, eta in [(0.1, 0.2), (0.37, 0.81), (0.9, 0.05)]:
            expected = -2 * math.pi * (amp * math.sin(2 * math.pi * psi)
                                       + (1 + SQRT2) * amp * math.sin(2 * math.pi * eta))
            assert evaluate(model_W, (psi, eta)) == pytest.approx(expected, abs=1e-14)
        # defining identity W(B theta) = (alpha . grad V)(theta), checked pointwise
        theta = np.array([0.123, 0.456])
        h = 1e-6
        dV = (evaluate(model.V, theta + h * model.alpha.alpha) - evaluate(model.V, theta - h * model.alpha.alpha)) / (2 * h)
        assert evaluate(W, np.mod(model.intrinsic.B @ theta, 1.0)) == pytest.approx(dV, abs=1e-8)

    def test_constant_potential(self, model):
        V = TrigSeries.constant(3.0, 2, (1, 1))
        assert build_W(V, model.alpha, model.intrinsic).is_zero()

    def test_eta_only(self, model):
        V = TrigSeries.cosine((1, 1), 0.2)
        W = build_W(V, model.alpha, model.intrinsic)
        assert set(W.coeffs) == {(0, 1), (0, -1)}
        assert evaluate(W, (0.3, 0.1)) == pytest.approx(-2 * math.pi * (1 + SQRT2) * 0.2 * math.sin(0.2 * math.pi))


class TestExpand:
    def test_first_order_closed_forms(self, amp):
        A, C = 0.3 * amp, 1.7 * amp
        sol = expand(example_model(A, C), 1)
        lam1, v1 = sol.lambda_jet[1], sol.v_jet[1]
        for eta in np.linspace(0, 1, 7):
            assert evaluate(lam1, [eta]) == pytest.approx(-psi_quadrature_average(sol.W, eta), abs=1e-14)
        expected_lam = TrigSeries.sine((1,), 2 * math.pi * (1 + SQRT2) * C)
        expected_v = TrigSeries.sine((1, 0), math.pi * A / (math.cos(2 * math.pi * OMEGA) - 1))
        for k in expected_lam.coeffs:
            assert abs(lam1.coeff(k) - expected_lam.coeff(k)) <= 1e-12
        assert set(v1.coeffs) == set(expected_v.coeffs)
        for k in expected_v.coeffs:
            assert abs(v1.coeff(k) - expected_v.coeff(k)) <= 1e-12

    def test_fourier_divisor_relation(self, sol3):
        # v^1_k * 2(cos 2 pi k Omega - 1) = -W_k for k_psi != 0
        for k, c in sol3.v_jet[1].coeffs.items():
            assert c * 2 * (math.cos(2 * math.pi * k[0] * OMEGA) - 1) == pytest.approx(-sol3.W.coeff(k), abs=1e-15)

    def test_zero_potential(self, model):
        m = FKModel(TrigSeries.zero(2, (1, 1)), model.alpha, model.resonance, model.intrinsic)
        sol = expand(m, 3, cutoff=(3, 3))
        assert all(t.is_zero() for t in sol.v_jet.terms + sol.lambda_jet.terms)

    def test_psi_independent_W(self, amp):
        sol = expand(example_model(0.0, amp), 2)
        assert sol.v_jet[1].is_zero(1e-16)
        assert sol.v_jet[2].is_zero(1e-16)
        assert sol.lambda_jet[2].is_zero(1e-16)
        assert sol.lambda_jet[1].coeff((1,)) == pytest.approx(-1j * math.pi * (1 + SQRT2) * amp)

    def test_invariants(self, sol3):
        assert sol3.v_jet[0].is_zero() and sol3.lambda_jet[0].is_zero()
        for n in range(1, 4):
            vn, ln = sol3.v_jet[n], sol3.lambda_jet[n]
            assert partial_average(vn).max_abs_coeff() <= 1e-12
            assert vn.hermitian_defect() <= 1e-15 and ln.hermitian_defect() <= 1e-15
            Rn = jet_compose_W(sol3.W, sol3.beta, sol3.v_jet, n)
            assert (partial_average(Rn) + ln).max_abs_coeff() <= 1e-12

    def test_cutoff_too_small(self, model):
        with pytest.raises(CutoffOverflow):
            expand(model, 3, cutoff=(2, 2))


class TestJet:
    def test_first_term_is_W(self, sol3):
        assert dict(jet_compose_W(sol3.W, sol3.beta, sol3.v_jet, 1).coeffs) == dict(sol3.W.coeffs)

    @pytest.mark.parametrize("n", [2, 3])
    def test_finite_difference_in_eps(self, n, sol3):
        beta = sol3.beta
        v1, v2 = sol3.v_jet[1], sol3.v_jet[2]
        Rn = jet_compose_W(sol3.W, beta, sol3.v_jet, n)
        pts = GridSampling.nodes((5, 5)).reshape(-1, 2) + 0.03
        u = lambda e: e * evaluate(v1, pts) + (e * e * evaluate(v2, pts) if n == 3 else 0.0)
        f = lambda e: evaluate(sol3.W, pts + u(e)[:, None] * beta)
        if n == 2:
            h = 1e-4
            fd = (f(h) - f(-h)) / (2 * h)
        else:
            h = 1e-3
            fd = (f(h) - 2 * f(0.0) + f(-h)) / (2 * h * h)
        scale = np.max(np.abs(evaluate(Rn, pts)))
        assert np.max(np.abs(evaluate(Rn, pts) - fd)) <= 1e-5 * max(scale, 1e-3)


class TestResidual:
    def test_zero_eps(self, sol3):
        assert residual(sol3, 0.0) == 0.0

    def test_halving_ratio_unit_amplitudes(self):
        sol = expand(example_model(1.0, 1.0), 1)
        ratio = residual(sol, 1e-2) / residual(sol, 5e-3)
        assert 3.2 <= ratio <= 4.8

    def test_third_order_two_point_slope(self):
        sol = expand(example_model(1.0, 1.0), 3)
        slope = loglog_slope([5e-3, 1e-2], [residual(sol, 5e-3), residual(sol, 1e-2)])
        assert abs(slope - 4.0) <= 0.3

    def test_grid_must_resolve_cutoff(self, sol3):
        with pytest.raises(ValueError):
            residual(sol3, 1e-3, grid=5)


class TestSymmetry:
    def test_zero_iota(self, sol3):
        v, lam = sol3.v_at(1e-3), sol3.lambda_at(1e-3)
        vt, lt = apply_symmetry(v, lam, TrigSeries.zero(1, 1), sol3.beta, grid=16)
        for k in set(v.coeffs) | set(vt.coeffs):
            assert abs(vt.coeff(k) - v.coeff(k)) <= 1e-15
        for k in set(lam.coeffs) | set(lt.coeffs):
            assert abs(lt.coeff(k) - lam.coeff(k)) <= 1e-15

    def test_constant_shift_of_zero_solution(self, sol3):
        vt, lt = apply_symmetry(TrigSeries.zero(2, 2), TrigSeries.zero(1, 2), TrigSeries.constant(0.2, 1, 1),
                                sol3.beta)
        assert vt.coeff((0, 0)) == pytest.approx(0.2, abs=1e-15)
        assert vt.is_zero() is False and len(vt.chop(1e-15)) == 1
        assert lt.is_zero(1e-15)

    def test_residual_preserved_within_loss(self, sol3):
        eps = 1e-3
        v, lam = newton_family(sol3.W, sol3.Omega, sol3.beta, eps, M=24, n_eta=24, cutoff=10)
        v, lam = v.chop(1e-17), lam.chop(1e-17)
        r0 = residual_of(v, lam, sol3.W, eps, sol3.Omega, sol3.beta, 24)
        iota = TrigSeries.sine((1,), 1e-2, cutoff=(1,)) + 3e-3
        vt, lt = apply_symmetry(v, lam, iota, sol3.beta, cutoff=(10, 10))
        r1 = residual_of(vt, lt, sol3.W, eps, sol3.Omega, sol3.beta, 24)
        assert abs(r1 - r0) <= vt.loss + lt.loss
        assert r1 <= r0 + vt.loss + lt.loss

    def test_aliasing_excess(self, sol3):
        v = TrigSeries.cosine((3, 3), 0.5, cutoff=(3, 3))
        with pytest.raises(AliasingExcess):
            apply_symmetry(v, TrigSeries.zero(1, 1), TrigSeries.sine((1,), 0.3), sol3.beta, cutoff=(1, 1))


class TestNormalize:
    beta_eta = 1 + SQRT2

    def test_zero(self):
        assert normalize_phase(TrigSeries.zero(1, 1), self.beta_eta).is_zero(1e-15)

    def test_constant(self):
        iota = normalize_phase(TrigSeries.constant(0.01, 1, 1), self.beta_eta)
        assert evaluate(iota, [0.3]) == pytest.approx(-0.01, abs=1e-14)

    def test_small_sine(self):
        d = 1e-3
        I = TrigSeries.sine((1,), d)
        iota = normalize_phase(I, self.beta_eta)
        eta = np.linspace(0, 1, 101)[:, None]
        io = evaluate(iota, eta)
        assert np.max(np.abs(io + d * np.sin(2 * math.pi * eta[:, 0]))) <= 10 * d * d
        implicit = evaluate(I, eta + self.beta_eta * io[:, None]) + io
        assert np.max(np.abs(implicit)) <= 1e-12

    def test_symmetry_clears_average(self, sol3):
        v = sol3.v_at(1e-2) + lift_last_axis(TrigSeries.sine((1,), 2e-3, cutoff=(2,)) + 1e-3, 2, sol3.cutoff)
        iota = normalize_phase(v, self.beta_eta)
        vt, _ = apply_symmetry(v, sol3.lambda_at(1e-2), iota, sol3.beta, cutoff=(6, 12))
        assert partial_average(vt).max_abs_coeff() <= 1e-10

    def test_no_contraction(self):
        with pytest.raises(NoContraction):
            normalize_phase(TrigSeries.sine((1,), 0.2), self.beta_eta)


def test_json_round_trip_is_bit_exact(sol3):
    text = dumps(sol3)
    back = loads(text)
    assert dumps(back) == text
    for a, b in zip(sol3.v_jet.terms + sol3.lambda_jet.terms, back.v_jet.terms + back.lambda_jet.terms):
        assert dict(a.coeffs) == dict(b.coeffs)
    np.testing.assert_array_equal(back.model.intrinsic.B, sol3.model.intrinsic.B)
    assert back.model.omega == sol3.model.omega


def test_potential_dimension_check(model):
    with pytest.raises(ValueError):
        FKModel.build(TrigSeries.cosine((1,), 1.0), model.alpha, k=(1, 1), m=1)
