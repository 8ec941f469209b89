"""The auxiliary equation lambda(eta, eps) = lambda*: zeros, phase series, depinning range."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import optimize

from .errors import Degenerate, DimensionMismatch, IdenticallyZero
from .fourier import GridSampling, TrigSeries, directional_derivative, evaluate
from .lindstedt import LindstedtSolution

ZERO_COEFF = 1e-14
NONDEG_FLOOR = 1e-8


def lambda_zeros(lambda_n: TrigSeries, level: float = 0.0, samples: int = 4096,
                 xtol: float = 1e-13) -> list[tuple[float, float]]:
    """Zeros of lambda_n(eta) - level on [0, 1) with the slope of lambda_n there.

    Sign changes on a uniform grid are refined with Brent's method; tangential
    zeros are not detected.
    """
    if lambda_n.dim != 1:
        raise DimensionMismatch("lambda_zeros expects a series in eta alone")
    if lambda_n.is_zero(ZERO_COEFF):
        raise IdenticallyZero("all coefficients vanish; move to the next order")
    slope = directional_derivative(lambda_n, [1.0], 1)

    def f(x):
        return evaluate(lambda_n, [x]) - level

    eta = np.arange(samples + 1) / samples
    vals = evaluate(lambda_n, eta[:, None]) - level
    vals[-1] = vals[0]
    found = []
    for j in range(samples):
        a, b = vals[j], vals[j + 1]
        if a == 0.0:
            found.append(eta[j])
        elif a * b < 0.0:
            found.append(optimize.brentq(f, eta[j], eta[j + 1], xtol=xtol, rtol=4 * np.finfo(float).eps))
    roots = []
    for x in sorted(x % 1.0 for x in found):
        if x > 1.0 - xtol:
            x = 0.0
        if any(min(abs(x - r), 1.0 - abs(x - r)) < 1e-10 for r in roots):
            continue
        roots.append(x)
    roots.sort()
    return [(float(x), float(evaluate(slope, [x]))) for x in roots]


def _first_nonzero_order(sol: LindstedtSolution, N: int) -> int:
    for j in range(1, N + 1):
        if not sol.lambda_jet[j].is_zero(ZERO_COEFF):
            return j
    raise IdenticallyZero(f"lambda^1..lambda^{N} all vanish")


def _taylor(series: TrigSeries, x: float, order: int) -> np.ndarray:
    """Taylor coefficients f^(r)(x)/r!, r = 0..order, of a series in eta."""
    return np.array([evaluate(directional_derivative(series, [1.0], r), [x]) / math.factorial(r)
                     for r in range(order + 1)])


def _mul(a: np.ndarray, b: np.ndarray, n: int) -> np.ndarray:
    return np.convolve(a, b)[: n + 1]


@dataclass(frozen=True)
class PhaseSeries:
    """eta(eps) = eta_star + sum_{n>=1} eps^n coeffs[n-1], solving lambda(eta, eps) = eps^n0 mu."""

    eta_star: float
    coeffs: tuple[float, ...]
    n0: int
    mu: float = 0.0

    def eta(self, eps: float) -> float:
        total = 0.0
        for c in reversed(self.coeffs):
            total = (total + c) * eps
        return self.eta_star + total

    def defect(self, sol: LindstedtSolution, eps: float, order: int | None = None) -> float:
        """sum_n eps^n lambda^n(eta(eps)) - eps^n0 mu."""
        order = sol.order if order is None else order
        x = self.eta(eps)
        lam = sum(eps ** n * evaluate(sol.lambda_jet[n], [x]) for n in range(1, order + 1))
        return float(lam - eps ** self.n0 * self.mu)


def phase_series(sol: LindstedtSolution, eta_star: float, mu: float = 0.0, N: int | None = None,
                 nondeg_floor: float = NONDEG_FLOOR, root_tol: float = 1e-9) -> PhaseSeries:
    """Power series of the transversal phase by order-by-order matching.

    With lambda* = eps^n0 mu the equation divided by eps^n0 reads
    sum_{j>=n0} eps^(j-n0) lambda^j(eta(eps)) = mu.  Each lambda^j is
    Taylor expanded about eta_star; at order n the unknown eta^n enters only
    through d lambda^n0/d eta (eta_star), which must clear ``nondeg_floor``.
    """
    N = sol.order if N is None else min(N, sol.order)
    n0 = _first_nonzero_order(sol, N)
    lead = sol.lambda_jet[n0]
    base = float(evaluate(lead, [eta_star]))
    if abs(base - mu) > root_tol:
        raise ValueError(f"lambda^{n0}(eta_star) = {base:.6g} differs from mu = {mu:.6g}")
    K = N - n0
    taylor = {j: _taylor(sol.lambda_jet[j], eta_star, max(K, 1)) for j in range(n0, N + 1)}
    slope = taylor[n0][1]
    if abs(slope) <= nondeg_floor:
        raise Degenerate(f"|d lambda^{n0}/d eta| = {abs(slope):.3e} at eta_star={eta_star}")

    h = np.zeros(K + 1)
    for n in range(1, K + 1):
        # powers of h(eps) = sum_{i>=1} h_i eps^i, truncated at eps^n
        powers = [np.eye(1, K + 1, 0).ravel()]
        for _ in range(K):
            powers.append(_mul(powers[-1], h, K))
        G = np.zeros(K + 1)
        for j in range(n0, N + 1):
            inner = sum(taylor[j][r] * powers[r] for r in range(K + 1))
            G[j - n0:] += inner[: K + 1 - (j - n0)]
        h[n] = -G[n] / slope
    return PhaseSeries(float(eta_star), tuple(float(x) for x in h[1:]), n0, float(mu))


def depinning_range(sol: LindstedtSolution, eps: float, order: int | None = None,
                    samples: int = 4096) -> tuple[float, float]:
    """Min and max over eta of sum_{n<=N} eps^n lambda^n(eta)."""
    lam = sol.lambda_at(eps, order)
    if lam.is_zero(0.0):
        return 0.0, 0.0
    eta = GridSampling.nodes((samples,))
    vals = evaluate(lam, eta)
    out = []
    for sign, idx in ((1.0, int(np.argmin(vals))), (-1.0, int(np.argmax(vals)))):
        x0 = eta[idx, 0]
        h = 1.0 / samples
        fn = lambda x: sign * evaluate(lam, [x])
        best = optimize.minimize_scalar(fn, bounds=(x0 - h, x0 + h), method="bounded",
                                        options={"xatol": 1e-12})
        out.append(min(sign * vals[idx], float(best.fun)) * sign)
    return float(out[0]), float(out[1])
