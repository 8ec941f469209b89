"""Equilibria as orbits of the volume-preserving map F on R x T^d:

    p' = p - eps (alpha . grad V)(q) - lambda
    q' = q + alpha p'
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import eigh_tridiagonal

from .fourier import GridSampling, TrigSeries, directional_derivative, evaluate
from .lindstedt import LindstedtSolution


@dataclass(frozen=True)
class OrbitState:
    """Momentum p = x_n - x_{n-1} and the lift of q = alpha x_n."""

    p: float
    q_lift: np.ndarray

    def __post_init__(self):
        q = np.array(self.q_lift, dtype=float)
        q.setflags(write=False)
        object.__setattr__(self, "q_lift", q)
        object.__setattr__(self, "p", float(self.p))

    @property
    def q(self) -> np.ndarray:
        return np.mod(self.q_lift, 1.0)


class SkewMap:
    """F_{eps, lambda} with precomputed mode tables for the force and its gradient."""

    def __init__(self, V: TrigSeries, alpha, eps: float, lam: float = 0.0):
        self.alpha = np.asarray(alpha, dtype=float)
        self.eps = float(eps)
        self.lam = float(lam)
        self.V = V
        dV = directional_derivative(V, self.alpha, 1)
        ks, cs = dV.modes()
        self._ks = ks.astype(float)
        self._cs = cs
        self._grad_cs = cs[:, None] * (2j * np.pi * self._ks)

    @property
    def exact(self) -> bool:
        """Exact volume preserving iff lambda = 0."""
        return self.lam == 0.0

    def force(self, q) -> float:
        """(alpha . grad V)(q)."""
        if len(self._cs) == 0:
            return 0.0
        e = np.exp(2j * np.pi * (self._ks @ np.asarray(q, dtype=float)))
        return float((e @ self._cs).real)

    def force_gradient(self, q) -> np.ndarray:
        """grad (alpha . grad V)(q)."""
        if len(self._cs) == 0:
            return np.zeros_like(self.alpha)
        e = np.exp(2j * np.pi * (self._ks @ np.asarray(q, dtype=float)))
        return (e @ self._grad_cs).real

    def map1(self, p: float, q_lift: np.ndarray) -> tuple[float, np.ndarray]:
        return p - self.eps * self.force(np.mod(q_lift, 1.0)) - self.lam, q_lift

    def map2(self, p: float, q_lift: np.ndarray) -> tuple[float, np.ndarray]:
        return p, q_lift + self.alpha * p

    def step(self, s: OrbitState) -> OrbitState:
        p = s.p - self.eps * self.force(s.q) - self.lam
        return OrbitState(p, s.q_lift + self.alpha * p)

    def jacobian(self, q) -> np.ndarray:
        """Tangent map in (p, q) coordinates at a point with angle q."""
        d = len(self.alpha)
        g = -self.eps * self.force_gradient(q)
        J = np.empty((d + 1, d + 1))
        J[0, 0] = 1.0
        J[0, 1:] = g
        J[1:, 0] = self.alpha
        J[1:, 1:] = np.eye(d) + np.outer(self.alpha, g)
        return J


def step(s: OrbitState, V: TrigSeries, alpha, eps: float, lam: float = 0.0) -> OrbitState:
    return SkewMap(V, alpha, eps, lam).step(s)


@dataclass
class OrbitSummary:
    p: np.ndarray
    q_lift: np.ndarray
    mean_p: float
    lyapunov: np.ndarray | None = None


def iterate(s0: OrbitState, n_steps: int, fmap: SkewMap, tangent: bool = False, reortho: int = 20,
            sample_every: int = 1) -> OrbitSummary:
    """Iterate F, optionally accumulating tangent maps for Lyapunov exponents.

    Tangent products are re-orthonormalised by QR every ``reortho`` steps;
    the exponents are returned sorted in decreasing order.
    """
    if n_steps < 1:
        raise ValueError("n_steps must be >= 1")
    d = len(fmap.alpha)
    p, q = s0.p, np.array(s0.q_lift, dtype=float)
    ps, qs = [p], [q.copy()]
    sum_p = 0.0
    Q = np.eye(d + 1) if tangent else None
    logs = np.zeros(d + 1)
    alpha, eps, lam = fmap.alpha, fmap.eps, fmap.lam
    for n in range(1, n_steps + 1):
        angle = q - np.floor(q)
        if tangent:
            Q = fmap.jacobian(angle) @ Q
        p = p - eps * fmap.force(angle) - lam
        q = q + alpha * p
        sum_p += p
        if tangent and (n % reortho == 0 or n == n_steps):
            Q, R = np.linalg.qr(Q)
            diag = np.diag(R)
            logs += np.log(np.abs(diag))
            Q = Q * np.sign(diag)
        if n % sample_every == 0:
            ps.append(p)
            qs.append(q.copy())
    lyap = np.sort(logs / n_steps)[::-1] if tangent else None
    return OrbitSummary(np.array(ps), np.array(qs), sum_p / n_steps, lyap)


def lyapunov_spectrum(s0: OrbitState, n_steps: int, fmap: SkewMap, reortho: int = 20) -> np.ndarray:
    return iterate(s0, n_steps, fmap, tangent=True, reortho=reortho, sample_every=n_steps).lyapunov


@dataclass
class StructureReport:
    leaf_deviation: float
    det_deviation: float
    factorization_deviation: float
    exact: bool
    steps: int


def _leaf_deviation(dq: np.ndarray, alpha: np.ndarray) -> float:
    """Distance of a lift displacement from the line spanned by alpha."""
    t = dq @ alpha / (alpha @ alpha)
    return float(np.max(np.abs(dq - t * alpha)))


def structure_checks(s: OrbitState, fmap: SkewMap, n_steps: int = 1) -> StructureReport:
    """Leaf preservation, unit Jacobian determinant and map2 o map1 factorisation along an orbit."""
    leaf = det = fact = 0.0
    alpha = fmap.alpha
    for _ in range(n_steps):
        nxt = fmap.step(s)
        leaf = max(leaf, _leaf_deviation(nxt.q_lift - s.q_lift, alpha))
        det = max(det, abs(np.linalg.det(fmap.jacobian(s.q)) - 1.0))
        p1, q1 = fmap.map1(s.p, s.q_lift)
        p2, q2 = fmap.map2(p1, q1)
        fact = max(fact, abs(p2 - nxt.p), float(np.max(np.abs(q2 - nxt.q_lift))))
        s = nxt
    return StructureReport(leaf, det, fact, fmap.exact, n_steps)


# -- orbits from hull functions ------------------------------------------

def hull_phases(beta, eta: float, branch: int = 0) -> tuple[np.ndarray, float]:
    """(xi1, xi2) with beta xi2 = (xi1, eta) mod 1, picking xi2 = (eta + branch) / beta_eta."""
    beta = np.asarray(beta, dtype=float)
    xi2 = (eta + branch) / beta[-1]
    return np.mod(beta[:-1] * xi2, 1.0), float(xi2)


def hull_configuration(sol: LindstedtSolution, eps: float, eta: float, xi1, xi2: float,
                       n: np.ndarray, order: int | None = None) -> np.ndarray:
    """x_n = n omega + v(n Omega + xi1, eta) + xi2."""
    n = np.asarray(n, dtype=float)
    Omega = sol.Omega
    psi = n[:, None] * Omega + np.asarray(xi1, dtype=float)
    pts = np.concatenate([psi, np.full((len(n), 1), float(eta))], axis=1)
    return n * sol.model.omega + evaluate(sol.v_at(eps, order), pts) + xi2


@dataclass
class HullOrbitReport:
    x: np.ndarray
    lam: float
    p_deviation: float
    q_deviation: float
    step_defect: float = 0.0  # max over n of |F(hull state n) - hull state n+1|

    @property
    def deviation(self) -> float:
        return max(self.p_deviation, self.q_deviation)


def orbit_from_hull(sol: LindstedtSolution, eps: float, eta: float, xi1, xi2: float, n_steps: int,
                    order: int | None = None, phase_tol: float = 1e-9) -> HullOrbitReport:
    """Compare the hull configuration with the F-orbit started from (p_1, q_1)."""
    beta = sol.beta
    xi1 = np.atleast_1d(np.asarray(xi1, dtype=float))
    mismatch = beta * xi2 - np.concatenate([xi1, [eta]])
    if np.max(np.abs(mismatch - np.rint(mismatch))) > phase_tol:
        raise ValueError("phases violate beta * xi2 = (xi1, eta) mod 1")
    idx = np.arange(n_steps + 2)
    x = hull_configuration(sol, eps, eta, xi1, xi2, idx, order)
    alpha = sol.model.alpha.alpha
    lam = sol.lambda_value(eps, eta, order)
    fmap = SkewMap(sol.model.V, alpha, eps, lam)
    p_hull = np.diff(x)  # p_n for n = 1..n_steps+1
    q_hull = x[1:, None] * alpha
    orbit = iterate(OrbitState(p_hull[0], q_hull[0]), n_steps, fmap)
    # Free iteration amplifies the truncation error along unstable directions;
    # the one-step defect measures how far the hull points are from an orbit.
    defect = 0.0
    for j in range(n_steps):
        nxt = fmap.step(OrbitState(p_hull[j], q_hull[j]))
        defect = max(defect, abs(nxt.p - p_hull[j + 1]), float(np.max(np.abs(nxt.q_lift - q_hull[j + 1]))))
    return HullOrbitReport(x, lam, float(np.max(np.abs(orbit.p - p_hull))),
                           float(np.max(np.abs(orbit.q_lift - q_hull))), defect)


# -- phonons ---------------------------------------------------------------

@dataclass(frozen=True)
class PhononSection:
    diag: np.ndarray
    offdiag: np.ndarray

    @property
    def size(self) -> int:
        return len(self.diag)

    @classmethod
    def build(cls, x: np.ndarray, V: TrigSeries, alpha, eps: float) -> "PhononSection":
        """Dirichlet section of xi -> xi_{n+1} + xi_{n-1} - 2 xi_n + eps (alpha.grad)^2 V(alpha x_n) xi_n."""
        alpha = np.asarray(alpha, dtype=float)
        curv = directional_derivative(V, alpha, 2)
        x = np.asarray(x, dtype=float)
        diag = -2.0 + eps * evaluate(curv, x[:, None] * alpha) if len(curv) else np.full(len(x), -2.0)
        return cls(np.asarray(diag, dtype=float), np.ones(len(x) - 1))

    def eigenvalues(self) -> np.ndarray:
        return eigh_tridiagonal(self.diag, self.offdiag, eigvals_only=True)

    def gap(self) -> float:
        return float(np.min(np.abs(self.eigenvalues())))


def phonon_gap(x: np.ndarray, V: TrigSeries, alpha, eps: float, sizes, shift: float = 0.0) -> list[tuple[int, float]]:
    """Min |eigenvalue| of the Dirichlet sections x[:N] for each N in ``sizes``.

    ``shift`` adds a constant to the diagonal (pinned control case).
    """
    out = []
    for N in sizes:
        if N > len(x):
            raise ValueError(f"section size {N} exceeds configuration length {len(x)}")
        sec = PhononSection.build(x[:N], V, alpha, eps)
        if shift:
            sec = PhononSection(sec.diag + shift, sec.offdiag)
        out.append((int(N), sec.gap()))
    return out
