"""Integer lattice algebra for discrete resonances k.(omega*alpha) = m."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import (DegenerateDirection, DimensionMismatch, IntrinsicResonant, MediumResonant,
                     MultiplicityViolation, NotPrimitive)
from .fourier import integer_inverse

TOL_RES = 1e-9
K_CHECK = 20


def _box(dim: int, radius: int) -> np.ndarray:
    """All nonzero integer vectors with |k|_inf <= radius, shape (n, dim)."""
    pts = np.array(list(itertools.product(range(-radius, radius + 1), repeat=dim)), dtype=np.int64)
    return pts[np.any(pts != 0, axis=1)]


def _first_integer_hit(vectors: np.ndarray, freqs: np.ndarray, tol: float):
    """First row k with k.freqs within tol of an integer, or None."""
    if freqs.size == 0:
        return None
    vals = vectors @ freqs
    dist = np.abs(vals - np.rint(vals))
    bad = np.nonzero(dist <= tol)[0]
    return None if bad.size == 0 else vectors[bad[0]]


@dataclass(frozen=True)
class MediumFrequency:
    """Frequencies of the substratum.

    The medium must be rationally independent: k.alpha != 0 for every
    nonzero k in the check box.  Pass ``check=False`` to skip this (used
    only to build deliberately degenerate inputs).
    """

    alpha: np.ndarray
    check: bool = field(default=True, repr=False, compare=False)
    k_check: int = field(default=K_CHECK, repr=False, compare=False)
    tol: float = field(default=TOL_RES, repr=False, compare=False)

    def __post_init__(self):
        alpha = np.array(self.alpha, dtype=float).reshape(-1)
        alpha.setflags(write=False)
        object.__setattr__(self, "alpha", alpha)
        if alpha.size < 2:
            raise DimensionMismatch("the medium needs d >= 2 frequencies")
        if self.check:
            ks = _box(alpha.size, min(self.k_check, _default_box(alpha.size)))
            hits = np.nonzero(np.abs(ks @ alpha) <= self.tol)[0]
            if hits.size:
                raise MediumResonant(f"k={tuple(ks[hits[0]])} gives k.alpha = 0")

    @property
    def d(self) -> int:
        return self.alpha.size


def _default_box(d: int) -> int:
    # keep the exhaustive box below ~2e6 vectors in high dimension
    return max(1, int((2e6 ** (1.0 / d) - 1) // 2))


@dataclass(frozen=True)
class Resonance:
    k: tuple[int, ...]
    m: int
    omega: float

    def residual(self, alpha: MediumFrequency) -> float:
        return abs(float(np.dot(self.k, self.omega * alpha.alpha)) - self.m)


@dataclass(frozen=True)
class IntrinsicData:
    B: np.ndarray
    Omega: np.ndarray
    L: np.ndarray
    beta: np.ndarray

    @property
    def beta_psi(self) -> np.ndarray:
        return self.beta[:-1]

    @property
    def beta_eta(self) -> float:
        return float(self.beta[-1])

    @property
    def d(self) -> int:
        return len(self.beta)


def _as_medium(alpha) -> MediumFrequency:
    return alpha if isinstance(alpha, MediumFrequency) else MediumFrequency(alpha)


def omega_from_resonance(k: Sequence[int], m: int, alpha, tol: float = TOL_RES) -> float:
    """The frequency omega = m / (k.alpha) making (k, m) a discrete resonance."""
    alpha = _as_medium(alpha)
    k = np.asarray(k, dtype=np.int64)
    if k.shape != (alpha.d,):
        raise DimensionMismatch(f"k of length {k.size} for d={alpha.d}")
    if not k.any():
        raise DegenerateDirection("k must be nonzero")
    dot = float(k @ alpha.alpha)
    if abs(dot) < tol:
        raise DegenerateDirection(f"|k.alpha| = {abs(dot):.3e} below tolerance")
    return m / dot


def _gcd(values) -> int:
    g = 0
    for v in values:
        g = math.gcd(g, int(v))
    return g


def _canonical(k: np.ndarray, m: int) -> tuple[tuple[int, ...], int]:
    """Divide by the gcd and make the first nonzero entry of k positive."""
    g = _gcd(list(k) + [m])
    k, m = k // g, m // g
    first = k[np.nonzero(k)[0][0]]
    if first < 0:
        k, m = -k, -m
    return tuple(int(x) for x in k), int(m)


def find_resonance(alpha, omega: float, K_box: int = 3, M_box: int = 3,
                   tol: float = TOL_RES) -> Resonance | None:
    """Scan the box for resonances of omega*alpha and return the generator.

    All hits must be proportional (multiplicity one); anything else means the
    tolerance is too loose and raises MultiplicityViolation.
    """
    if K_box < 1 or M_box < 1:
        raise ValueError("box sizes must be >= 1")
    alpha = _as_medium(alpha)
    ks = _box(alpha.d, K_box)
    vals = ks @ (omega * alpha.alpha)
    ms = np.rint(vals).astype(np.int64)
    ok = (np.abs(vals - ms) <= tol) & (np.abs(ms) <= M_box) & (ms != 0)
    hits = [(ks[i], int(ms[i])) for i in np.nonzero(ok)[0]]
    if not hits:
        return None
    k1, m1 = hits[0]
    for k2, m2 in hits[1:]:
        if not np.array_equal(k1 * m2, k2 * m1):
            raise MultiplicityViolation(
                f"independent resonances {tuple(k1)},{m1} and {tuple(k2)},{m2}; tolerance too loose")
    gens = {_canonical(k, m) for k, m in hits}
    k, m = min(gens, key=lambda g: (max(abs(x) for x in g[0]), g[0], g[1]))
    return Resonance(k, m, m / float(np.dot(k, alpha.alpha)))


def _egcd(a: int, b: int) -> tuple[int, int, int]:
    """(g, x, y) with x*a + y*b = g = gcd(a, b) >= 0."""
    x0, y0, x1, y1 = 1, 0, 0, 1
    while b:
        q, a, b = a // b, b, a % b
        x0, x1 = x1, x0 - q * x1
        y0, y1 = y1, y0 - q * y1
    if a < 0:
        a, x0, y0 = -a, -x0, -y0
    return a, x0, y0


def _int_det(M: np.ndarray) -> int:
    """Exact determinant by fraction-free (Bareiss) elimination."""
    A = [[int(x) for x in row] for row in M]
    n = len(A)
    sign, prev = 1, 1
    for i in range(n - 1):
        if A[i][i] == 0:
            swap = next((r for r in range(i + 1, n) if A[r][i] != 0), None)
            if swap is None:
                return 0
            A[i], A[swap] = A[swap], A[i]
            sign = -sign
        for r in range(i + 1, n):
            for c in range(i + 1, n):
                A[r][c] = (A[r][c] * A[i][i] - A[r][i] * A[i][c]) // prev
        prev = A[i][i]
    return sign * A[n - 1][n - 1]


def unimodular_completion(k: Sequence[int]) -> np.ndarray:
    """Integer matrix with determinant +1 whose last row is k.

    Column reduction by extended gcd turns k into e_d; the inverse of the
    accumulated column operations has k as its last row.  The free rows are
    then size-reduced against k (ties go to the lexicographically larger
    row) so the output is deterministic and small.
    """
    k = np.asarray(k, dtype=np.int64).reshape(-1)
    d = k.size
    if d < 2:
        raise DimensionMismatch("need d >= 2")
    if _gcd(k) != 1:
        raise NotPrimitive(f"gcd of {tuple(int(x) for x in k)} is not 1")
    a = [int(x) for x in k]
    U = np.eye(d, dtype=np.int64)
    last = d - 1
    for j in range(d - 1):
        if a[j] == 0:
            continue
        g, x, y = _egcd(a[j], a[last])
        col_j = (a[last] // g) * U[:, j] - (a[j] // g) * U[:, last]
        col_last = x * U[:, j] + y * U[:, last]
        U[:, j], U[:, last] = col_j, col_last
        a[j], a[last] = 0, g
    if a[last] == -1:
        U[:, last] = -U[:, last]
    B = integer_inverse(U)
    assert np.array_equal(B[-1], k)
    if _int_det(B) < 0:
        B[0] = -B[0]
    kk = int(k @ k)
    for i in range(d - 1):
        row = B[i]
        t0 = math.floor(int(row @ k) / kk)
        candidates = [row - t * k for t in (t0, t0 + 1)]
        B[i] = min(candidates, key=lambda r: (int(r @ r), tuple(-int(x) for x in r)))
    if _int_det(B) != 1:
        raise AssertionError("completion lost unimodularity")
    return B


def intrinsic_data(res: Resonance, alpha, k_check: int = K_CHECK, tol: float = TOL_RES) -> IntrinsicData:
    """Unimodular reduction B, intrinsic frequencies Omega, integer shift L, beta = B alpha."""
    alpha = _as_medium(alpha)
    if res.residual(alpha) > tol:
        raise ValueError(f"resonance residual {res.residual(alpha):.3e} exceeds tolerance")
    B = unimodular_completion(res.k)
    shifted = B @ (res.omega * alpha.alpha)
    L = np.rint(shifted).astype(np.int64)
    L[-1] = res.m
    Omega = (shifted - L)[:-1]
    hit = _first_integer_hit(_box(len(Omega), min(k_check, _default_box(len(Omega)))), Omega, tol) \
        if len(Omega) else None
    if hit is not None:
        raise IntrinsicResonant(f"k'={tuple(int(x) for x in hit)} makes k'.Omega an integer")
    beta = B @ alpha.alpha
    for arr in (B, Omega, L, beta):
        arr.setflags(write=False)
    return IntrinsicData(B=B, Omega=Omega, L=L, beta=beta)


def subexponential_profile(Omega: Sequence[float], N_max: int) -> list[tuple[int, float]]:
    """(N, S(N)) with S(N) = max_{0<|k|_inf<=N} |ln dist(k.Omega, Z)| / N.

    N runs over powers of two up to N_max (N_max itself is appended).  An
    exact integer hit gives S(N) = inf.
    """
    if N_max < 2:
        raise ValueError("N_max must be >= 2")
    Omega = np.asarray(Omega, dtype=float).reshape(-1)
    grid = []
    n = 2
    while n <= N_max:
        grid.append(n)
        n *= 2
    if grid[-1] != N_max:
        grid.append(N_max)
    ks = _box(Omega.size, N_max)
    vals = ks @ Omega
    dist = np.abs(vals - np.rint(vals))
    with np.errstate(divide="ignore"):
        logs = np.abs(np.log(dist))
    radius = np.abs(ks).max(axis=1)
    return [(N, float(np.max(logs[radius <= N])) / N) for N in grid]
