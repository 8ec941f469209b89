"""Difference equations along the rotation psi -> psi + Omega, solved mode by mode.

Series are functions of (psi_1..psi_{d-1}, eta); the divisors depend only on
the psi part of each index, so eta rides along as an extra Fourier axis.
"""
from __future__ import annotations

import numpy as np

from .errors import DimensionMismatch, NonZeroAverage, SmallDivisor
from .fourier import TrigSeries, partial_average

DIVISOR_FLOOR = 1e-12
AVERAGE_TOL = 1e-12


def _check(phi: TrigSeries, Omega) -> np.ndarray:
    Omega = np.asarray(Omega, dtype=float).reshape(-1)
    if Omega.size != phi.dim - 1:
        raise DimensionMismatch(f"Omega of length {Omega.size} for a dim-{phi.dim} series")
    avg = partial_average(phi)
    if avg.max_abs_coeff() > AVERAGE_TOL * max(1.0, phi.max_abs_coeff()):
        raise NonZeroAverage(f"psi-average has a coefficient of size {avg.max_abs_coeff():.3e}")
    return Omega


def first_difference_divisors(ks: np.ndarray, Omega) -> np.ndarray:
    return np.exp(2j * np.pi * (ks[:, :-1] @ np.asarray(Omega, dtype=float))) - 1.0


def second_difference_divisors(ks: np.ndarray, Omega) -> np.ndarray:
    return 2.0 * (np.cos(2.0 * np.pi * (ks[:, :-1] @ np.asarray(Omega, dtype=float))) - 1.0)


def _solve(phi: TrigSeries, Omega, divisor_floor: float, divisors) -> TrigSeries:
    Omega = _check(phi, Omega)
    ks, cs = phi.modes()
    out = {}
    if len(cs):
        active = np.any(ks[:, :-1] != 0, axis=1)
        div = divisors(ks, Omega)
        for k, c, dv, act in zip(ks.tolist(), cs, div, active):
            if not act:
                continue
            if abs(dv) < divisor_floor:
                raise SmallDivisor(k, abs(dv))
            out[tuple(k)] = c / dv
    return TrigSeries(out, phi.cutoff, phi.dim, loss=phi.loss)


def solve_first_difference(phi: TrigSeries, Omega, divisor_floor: float = DIVISOR_FLOOR) -> TrigSeries:
    """Zero-average v with v(psi + Omega, eta) - v(psi, eta) = phi(psi, eta)."""
    return _solve(phi, Omega, divisor_floor, first_difference_divisors)


def solve_second_difference(phi: TrigSeries, Omega, divisor_floor: float = DIVISOR_FLOOR) -> TrigSeries:
    """Zero-average v with v(psi + Omega) + v(psi - Omega) - 2 v(psi) = phi."""
    return _solve(phi, Omega, divisor_floor, second_difference_divisors).hermitize()


def apply_first_difference(v: TrigSeries, Omega) -> TrigSeries:
    ks_omega = np.asarray(Omega, dtype=float)
    return v.map_coeffs(lambda ks, cs: cs * first_difference_divisors(ks, ks_omega)).chop(0.0)


def apply_second_difference(v: TrigSeries, Omega) -> TrigSeries:
    ks_omega = np.asarray(Omega, dtype=float)
    return v.map_coeffs(lambda ks, cs: cs * second_difference_divisors(ks, ks_omega)).chop(0.0)
