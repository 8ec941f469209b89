import itertools
import math

import numpy as np
import pytest

from resonant_fk.errors import (DegenerateDirection, IntrinsicResonant, MediumResonant, MultiplicityViolation,
                                NotPrimitive)
from resonant_fk.resonance import (MediumFrequency, Resonance, find_resonance, intrinsic_data, omega_from_resonance,
                                   subexponential_profile, unimodular_completion)

SQRT2 = math.sqrt(2.0)
ALPHA = (1.0, SQRT2)


def brute_force_hits(alpha, omega, K, M, tol):
    """Every (k, m) in the box with |k.omega alpha - m| <= tol; plain loops."""
    hits = []
    for k in itertools.product(range(-K, K + 1), repeat=len(alpha)):
        if not any(k):
            continue
        for m in range(-M, M + 1):
            if abs(sum(ki * a for ki, a in zip(k, alpha)) * omega - m) <= tol:
                hits.append((k, m))
    return hits


class TestOmega:
    def test_diagonal(self):
        w = omega_from_resonance((1, 1), 1, ALPHA)
        assert w == pytest.approx(SQRT2 - 1, abs=1e-15)
        assert abs((1 + SQRT2) * w - 1) < 1e-15

    def test_first_axis(self):
        assert omega_from_resonance((1, 0), 2, ALPHA) == 2.0

    def test_second_axis(self):
        w = omega_from_resonance((0, 1), 1, ALPHA)
        assert w == pytest.approx(1 / SQRT2, abs=1e-15)
        assert abs(SQRT2 * w - 1) < 1e-14

    def test_degenerate(self):
        with pytest.raises(DegenerateDirection):
            omega_from_resonance((0, 0), 1, ALPHA)


class TestFind:
    def test_example(self):
        res = find_resonance(MediumFrequency(ALPHA), SQRT2 - 1, 3, 3)
        assert (res.k, res.m) == ((1, 1), 1)
        # every hit in the box is a multiple of the generator
        for k, m in brute_force_hits(ALPHA, SQRT2 - 1, 3, 3, 1e-9):
            assert k[0] * res.m == res.k[0] * m and k[1] * res.m == res.k[1] * m

    def test_empty(self):
        # omega = 1 is resonant through k = (1, 0); pi/7 is not, which the scan confirms
        omega = math.pi / 7
        assert brute_force_hits(ALPHA, omega, 3, 3, 1e-9) == []
        assert find_resonance(MediumFrequency(ALPHA), omega, 3, 3) is None

    def test_omega_one_resonates_on_first_axis(self):
        assert brute_force_hits(ALPHA, 1.0, 3, 3, 1e-9)[0] is not None
        res = find_resonance(MediumFrequency(ALPHA), 1.0, 3, 3)
        assert (res.k, res.m) == ((1, 0), 1)

    def test_multiples_reduce_to_generator(self):
        hits = brute_force_hits(ALPHA, SQRT2 - 1, 3, 3, 1e-9)
        assert ((1, 1), 1) in hits and ((2, 2), 2) in hits
        assert find_resonance(MediumFrequency(ALPHA), SQRT2 - 1).k == (1, 1)

    def test_multiplicity_violation_with_loose_tol(self):
        with pytest.raises(MultiplicityViolation):
            find_resonance(MediumFrequency(ALPHA), SQRT2 - 1, 3, 3, tol=0.2)

    @pytest.mark.parametrize("k,m", [((1, 1), 1), ((0, 1), 1), ((1, 0), 2), ((2, -1), 1), ((1, 2), -1)])
    def test_round_trip(self, k, m):
        w = omega_from_resonance(k, m, ALPHA)
        res = find_resonance(MediumFrequency(ALPHA), w, 3, 3)
        assert (res.k, res.m) in {(k, m), (tuple(-x for x in k), -m)}


class TestCompletion:
    @pytest.mark.parametrize("k", [(1, 1), (1, 0), (0, 1), (2, 3), (-3, 5), (1, 2, 3), (6, 10, 15), (0, 0, 1, 0)])
    def test_unimodular_with_last_row(self, k):
        B = unimodular_completion(k)
        assert B.dtype.kind == "i"
        assert tuple(B[-1]) == k
        assert round(np.linalg.det(B.astype(float))) == 1

    def test_known_outputs(self):
        np.testing.assert_array_equal(unimodular_completion((1, 1)), [[1, 0], [1, 1]])
        np.testing.assert_array_equal(unimodular_completion((2, 3)), [[1, 1], [2, 3]])
        B = unimodular_completion((1, 0))
        assert B[0, 0] * B[1, 1] - B[0, 1] * B[1, 0] == 1

    def test_deterministic(self):
        assert np.array_equal(unimodular_completion((4, 7, 9)), unimodular_completion((4, 7, 9)))

    def test_not_primitive(self):
        with pytest.raises(NotPrimitive):
            unimodular_completion((2, 4))


class TestIntrinsic:
    def test_example(self):
        alpha = MediumFrequency(ALPHA)
        res = Resonance((1, 1), 1, omega_from_resonance((1, 1), 1, alpha))
        intr = intrinsic_data(res, alpha)
        np.testing.assert_array_equal(intr.B, [[1, 0], [1, 1]])
        np.testing.assert_array_equal(intr.L, [0, 1])
        assert intr.Omega[0] == pytest.approx(SQRT2 - 1, abs=1e-12)
        assert intr.beta_psi[0] == 1.0
        assert intr.beta_eta == pytest.approx(1 + SQRT2, abs=1e-12)
        lhs = intr.B @ (res.omega * alpha.alpha)
        assert np.max(np.abs(lhs - np.append(intr.Omega, 0.0) - intr.L)) <= 1e-12

    def test_intrinsic_resonant(self):
        alpha = MediumFrequency((1.0, 1.0), check=False)
        res = Resonance((1, 1), 1, 0.5)
        with pytest.raises(IntrinsicResonant):
            intrinsic_data(res, alpha)

    def test_medium_check(self):
        with pytest.raises(MediumResonant):
            MediumFrequency((1.0, 2.0))

    def test_immutable(self):
        alpha = MediumFrequency(ALPHA)
        intr = intrinsic_data(Resonance((1, 1), 1, SQRT2 - 1), alpha)
        with pytest.raises(ValueError):
            intr.B[0, 0] = 5


class TestProfile:
    def test_quadratic_irrational_decreases(self):
        prof = subexponential_profile([SQRT2 - 1], 64)
        values = [s for _, s in prof]
        assert all(math.isfinite(s) for s in values)
        assert values[-1] < values[0]

    def test_half_is_infinite(self):
        prof = dict(subexponential_profile([0.5], 8))
        assert math.isinf(prof[2])

    def test_two_frequencies(self):
        assert all(math.isfinite(s) for _, s in subexponential_profile([SQRT2 - 1, math.sqrt(3) - 1], 32))
