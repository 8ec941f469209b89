"""Truncated Fourier series on the torus R^d / Z^d.

Modes are ``exp(2*pi*i*k.theta)``.  Coefficients live in a sparse map keyed
by integer multi-indices; dense arrays appear only inside grid conversions
and convolutions.  Every operation returns a new series and never grows the
cutoff on its own.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from types import MappingProxyType
from typing import Iterable, Mapping, Sequence

import numpy as np
from scipy import signal

from .errors import CutoffOverflow, DimensionMismatch

TWO_PI = 2.0 * math.pi

Index = tuple[int, ...]


def _as_cutoff(cutoff, dim: int | None = None) -> tuple[int, ...]:
    if np.isscalar(cutoff):
        if dim is None:
            raise ValueError("scalar cutoff needs an explicit dim")
        cutoff = (int(cutoff),) * dim
    cutoff = tuple(int(c) for c in cutoff)
    if any(c < 0 for c in cutoff):
        raise ValueError(f"negative cutoff {cutoff}")
    if dim is not None and len(cutoff) != dim:
        raise DimensionMismatch(f"cutoff {cutoff} for dim {dim}")
    return cutoff


class TrigSeries:
    """Real-valued trigonometric polynomial stored by its complex amplitudes.

    ``loss`` accumulates the l1 mass of coefficients dropped by truncation in
    the operations that produced this series.
    """

    __slots__ = ("dim", "cutoff", "rho", "loss", "_coeffs", "_arrays")

    def __init__(self, coeffs: Mapping[Sequence[int], complex], cutoff, dim: int | None = None,
                 rho: float | None = None, loss: float = 0.0):
        if dim is None:
            if np.isscalar(cutoff):
                raise ValueError("dim is required with a scalar cutoff")
            dim = len(cutoff)
        if dim < 1:
            raise ValueError("dim must be positive")
        self.dim = int(dim)
        self.cutoff = _as_cutoff(cutoff, self.dim)
        self.rho = rho
        self.loss = float(loss)
        store = {}
        for k, c in coeffs.items():
            k = tuple(int(x) for x in k)
            if len(k) != self.dim:
                raise DimensionMismatch(f"index {k} in a dim-{self.dim} series")
            if any(abs(ki) > ci for ki, ci in zip(k, self.cutoff)):
                raise CutoffOverflow(f"index {k} exceeds cutoff {self.cutoff}")
            c = complex(c)
            if c != 0:
                store[k] = store.get(k, 0j) + c
        self._coeffs = store
        self._arrays = None

    # -- constructors -----------------------------------------------------

    @classmethod
    def zero(cls, dim: int, cutoff) -> "TrigSeries":
        return cls({}, _as_cutoff(cutoff, dim), dim)

    @classmethod
    def constant(cls, value: float, dim: int, cutoff) -> "TrigSeries":
        return cls({(0,) * dim: value}, _as_cutoff(cutoff, dim), dim)

    @classmethod
    def cosine(cls, k: Sequence[int], amplitude: float, phase: float = 0.0, cutoff=None) -> "TrigSeries":
        """``amplitude * cos(2*pi*k.theta + phase)``."""
        k = tuple(int(x) for x in k)
        if cutoff is None:
            cutoff = tuple(abs(x) for x in k)
        cutoff = _as_cutoff(cutoff, len(k))
        if not any(k):
            return cls({k: amplitude * math.cos(phase)}, cutoff)
        half = 0.5 * amplitude * complex(math.cos(phase), math.sin(phase))
        return cls({k: half, tuple(-x for x in k): half.conjugate()}, cutoff)

    @classmethod
    def sine(cls, k: Sequence[int], amplitude: float, cutoff=None) -> "TrigSeries":
        """``amplitude * sin(2*pi*k.theta)``."""
        return cls.cosine(k, amplitude, -0.5 * math.pi, cutoff)

    @classmethod
    def from_records(cls, lines: Iterable[str] | str, cutoff=None) -> "TrigSeries":
        """Parse ``k1 ... kd amplitude phase`` records into a sum of cosines.

        Blank lines and ``#`` comments are ignored.  Without an explicit
        cutoff the smallest one holding every record is used.
        """
        if isinstance(lines, str):
            lines = lines.splitlines()
        records = []
        for raw in lines:
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            if len(parts) < 3:
                raise ValueError(f"malformed mode record {raw!r}")
            k = tuple(int(p) for p in parts[:-2])
            records.append((k, float(parts[-2]), float(parts[-1])))
        if not records:
            raise ValueError("no mode records")
        dim = len(records[0][0])
        if any(len(k) != dim for k, _, _ in records):
            raise DimensionMismatch("mode records of different lengths")
        if cutoff is None:
            cutoff = tuple(max(abs(k[i]) for k, _, _ in records) for i in range(dim))
        total = cls.zero(dim, cutoff)
        for k, amp, phase in records:
            total = total + cls.cosine(k, amp, phase, cutoff)
        return total

    @classmethod
    def from_dense(cls, array: np.ndarray, cutoff=None, drop_below: float = 0.0) -> "TrigSeries":
        """Inverse of :meth:`to_dense`; the array is centred on the zero mode."""
        array = np.asarray(array)
        if cutoff is None:
            cutoff = tuple((n - 1) // 2 for n in array.shape)
        cutoff = _as_cutoff(cutoff, array.ndim)
        offset = tuple((n - 1) // 2 for n in array.shape)
        store = {}
        for pos in zip(*np.nonzero(np.abs(array) > drop_below)):
            store[tuple(int(p) - o for p, o in zip(pos, offset))] = array[pos]
        return cls(store, cutoff)

    # -- views ------------------------------------------------------------

    @property
    def coeffs(self) -> Mapping[Index, complex]:
        return MappingProxyType(self._coeffs)

    def coeff(self, k: Sequence[int]) -> complex:
        return self._coeffs.get(tuple(int(x) for x in k), 0j)

    def modes(self) -> tuple[np.ndarray, np.ndarray]:
        """Index array of shape (n, dim) and matching complex amplitudes."""
        if self._arrays is None:
            keys = sorted(self._coeffs)
            ks = np.array(keys, dtype=np.int64).reshape(len(keys), self.dim)
            cs = np.array([self._coeffs[k] for k in keys], dtype=complex)
            self._arrays = (ks, cs)
        return self._arrays

    def __len__(self) -> int:
        return len(self._coeffs)

    def __repr__(self) -> str:
        return f"TrigSeries(dim={self.dim}, cutoff={self.cutoff}, modes={len(self)})"

    def support(self) -> tuple[int, ...]:
        """Largest |k_i| actually present, per axis."""
        if not self._coeffs:
            return (0,) * self.dim
        ks, _ = self.modes()
        return tuple(int(x) for x in np.abs(ks).max(axis=0))

    def to_dense(self, cutoff=None) -> np.ndarray:
        cutoff = self.cutoff if cutoff is None else _as_cutoff(cutoff, self.dim)
        out = np.zeros(tuple(2 * c + 1 for c in cutoff), dtype=complex)
        for k, c in self._coeffs.items():
            if any(abs(ki) > ci for ki, ci in zip(k, cutoff)):
                raise CutoffOverflow(f"index {k} exceeds cutoff {cutoff}")
            out[tuple(ki + ci for ki, ci in zip(k, cutoff))] = c
        return out

    def is_zero(self, tol: float = 0.0) -> bool:
        return all(abs(c) <= tol for c in self._coeffs.values())

    def hermitian_defect(self) -> float:
        """max |c(-k) - conj(c(k))|; zero for a real-valued series."""
        worst = 0.0
        for k, c in self._coeffs.items():
            mirror = self._coeffs.get(tuple(-x for x in k), 0j)
            worst = max(worst, abs(mirror - c.conjugate()))
        return worst

    def max_abs_coeff(self) -> float:
        return max((abs(c) for c in self._coeffs.values()), default=0.0)

    def l1(self) -> float:
        return float(sum(abs(c) for c in self._coeffs.values()))

    # -- arithmetic -------------------------------------------------------

    def _check_compatible(self, other: "TrigSeries"):
        if other.dim != self.dim:
            raise DimensionMismatch(f"dims {self.dim} and {other.dim}")

    def _joint_cutoff(self, other: "TrigSeries") -> tuple[int, ...]:
        return tuple(max(a, b) for a, b in zip(self.cutoff, other.cutoff))

    def __add__(self, other):
        if isinstance(other, TrigSeries):
            self._check_compatible(other)
            out = dict(self._coeffs)
            for k, c in other._coeffs.items():
                out[k] = out.get(k, 0j) + c
            return TrigSeries(out, self._joint_cutoff(other), self.dim, loss=self.loss + other.loss)
        zero = (0,) * self.dim
        out = dict(self._coeffs)
        out[zero] = out.get(zero, 0j) + other
        return TrigSeries(out, self.cutoff, self.dim, loss=self.loss)

    __radd__ = __add__

    def __neg__(self):
        return TrigSeries({k: -c for k, c in self._coeffs.items()}, self.cutoff, self.dim, loss=self.loss)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, TrigSeries):
            return multiply(self, other)
        return TrigSeries({k: c * other for k, c in self._coeffs.items()}, self.cutoff, self.dim,
                          loss=self.loss * abs(other))

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        return self * (1.0 / scalar)

    def __call__(self, theta):
        return evaluate(self, theta)

    def map_coeffs(self, fn) -> "TrigSeries":
        """Apply ``fn(k_array, c_array) -> new c_array`` to all stored modes."""
        ks, cs = self.modes()
        if len(cs) == 0:
            return self
        new = fn(ks, cs)
        return TrigSeries({tuple(k): c for k, c in zip(ks.tolist(), new)}, self.cutoff, self.dim, loss=self.loss)

    def shift(self, delta: Sequence[float]) -> "TrigSeries":
        """Translation: returns g with g(theta) = f(theta + delta)."""
        delta = np.asarray(delta, dtype=float)
        if delta.shape != (self.dim,):
            raise DimensionMismatch(f"shift of length {delta.size} on dim {self.dim}")
        return self.map_coeffs(lambda ks, cs: cs * np.exp(2j * np.pi * (ks @ delta)))

    def with_cutoff(self, cutoff) -> "TrigSeries":
        """Re-truncate; the l1 mass of dropped modes is added to ``loss``."""
        cutoff = _as_cutoff(cutoff, self.dim)
        kept, dropped = {}, 0.0
        for k, c in self._coeffs.items():
            if all(abs(ki) <= ci for ki, ci in zip(k, cutoff)):
                kept[k] = c
            else:
                dropped += abs(c)
        return TrigSeries(kept, cutoff, self.dim, rho=self.rho, loss=self.loss + dropped)

    def hermitize(self) -> "TrigSeries":
        """Project onto real-valued series (removes rounding asymmetry)."""
        out = {}
        for k, c in self._coeffs.items():
            mirror = self._coeffs.get(tuple(-x for x in k), 0j)
            out[k] = 0.5 * (c + mirror.conjugate())
        return TrigSeries(out, self.cutoff, self.dim, rho=self.rho, loss=self.loss)

    def chop(self, tol: float) -> "TrigSeries":
        return TrigSeries({k: c for k, c in self._coeffs.items() if abs(c) > tol}, self.cutoff, self.dim,
                          rho=self.rho, loss=self.loss)


def evaluate(f: TrigSeries, theta) -> float | np.ndarray:
    """Value of ``f`` at a point, or at an array of points of shape (..., dim)."""
    theta = np.asarray(theta, dtype=float)
    if theta.shape[-1:] != (f.dim,):
        raise DimensionMismatch(f"point of shape {theta.shape} for a dim-{f.dim} series")
    ks, cs = f.modes()
    if len(cs) == 0:
        return 0.0 if theta.ndim == 1 else np.zeros(theta.shape[:-1])
    flat = theta.reshape(-1, f.dim)
    phase = flat @ ks.T.astype(float)
    # reduce the phase mod 1 so large lifts keep full precision
    phase -= np.floor(phase)
    vals = np.exp(2j * np.pi * phase) @ cs
    scale = max(1.0, float(np.abs(cs).sum()))
    if np.max(np.abs(vals.imag), initial=0.0) > 1e-13 * scale:
        raise ValueError("series is not real-valued (Hermitian symmetry broken)")
    out = vals.real
    if theta.ndim == 1:
        return float(out[0])
    return out.reshape(theta.shape[:-1])


def multiply(f: TrigSeries, g: TrigSeries, cutoff=None) -> TrigSeries:
    """Product by coefficient convolution, truncated to ``cutoff``.

    The default cutoff is the per-axis max of the operands'.  Dropped mass
    is recorded in ``loss`` of the result.
    """
    f._check_compatible(g)
    cutoff = f._joint_cutoff(g) if cutoff is None else _as_cutoff(cutoff, f.dim)
    inherited = f.loss * g.l1() + g.loss * f.l1()
    if len(f) == 0 or len(g) == 0:
        return TrigSeries({}, cutoff, f.dim, loss=inherited)
    sf, sg = f.support(), g.support()
    a, b = f.to_dense(sf), g.to_dense(sg)
    method = "direct" if a.size * b.size <= 4_000_000 else "fft"
    prod = signal.convolve(a, b, mode="full", method=method)
    offset = tuple(x + y for x, y in zip(sf, sg))
    kept, dropped = {}, 0.0
    for pos in zip(*np.nonzero(prod)):
        k = tuple(int(p) - o for p, o in zip(pos, offset))
        c = prod[pos]
        if all(abs(ki) <= ci for ki, ci in zip(k, cutoff)):
            kept[k] = c
        else:
            dropped += abs(c)
    return TrigSeries(kept, cutoff, f.dim, loss=inherited + dropped).hermitize()


def directional_derivative(f: TrigSeries, u: Sequence[float], order: int = 1) -> TrigSeries:
    """``(u . grad)^order f``, i.e. each mode scaled by (2*pi*i*k.u)^order."""
    u = np.asarray(u, dtype=float)
    if u.shape != (f.dim,):
        raise DimensionMismatch(f"direction of length {u.size} for dim {f.dim}")
    if order < 0:
        raise ValueError("order must be nonnegative")
    out = f.map_coeffs(lambda ks, cs: cs * (2j * np.pi * (ks @ u)) ** order)
    return out.chop(0.0)


def integer_inverse(B) -> np.ndarray:
    """Exact inverse of a unimodular integer matrix."""
    B = np.asarray(B, dtype=np.int64)
    inv = np.rint(np.linalg.inv(B.astype(float))).astype(np.int64)
    if not np.array_equal(B @ inv, np.eye(len(B), dtype=np.int64)):
        raise ValueError("matrix is not unimodular")
    return inv


def pullback_by_unimodular(f: TrigSeries, B, cutoff=None) -> TrigSeries:
    """Return g with ``g(theta') = f(B^-1 theta')``.

    Mode k of f becomes mode ``B^-T k`` of g; the map is an exact integer
    relabelling.  Raises CutoffOverflow if a relabelled index leaves the
    target cutoff (default: the cutoff of f).
    """
    B = np.asarray(B, dtype=np.int64)
    if B.shape != (f.dim, f.dim):
        raise DimensionMismatch(f"matrix of shape {B.shape} for dim {f.dim}")
    inv_t = integer_inverse(B).T
    cutoff = f.cutoff if cutoff is None else _as_cutoff(cutoff, f.dim)
    out = {}
    for k, c in f.coeffs.items():
        new = tuple(int(x) for x in inv_t @ np.array(k, dtype=np.int64))
        if any(abs(ki) > ci for ki, ci in zip(new, cutoff)):
            raise CutoffOverflow(f"mode {k} maps to {new}, outside cutoff {cutoff}")
        out[new] = c
    return TrigSeries(out, cutoff, f.dim, loss=f.loss)


def partial_average(f: TrigSeries) -> TrigSeries:
    """Average over the first dim-1 axes; returns a dim-1 series in the last axis."""
    if f.dim < 2:
        raise DimensionMismatch("partial average needs dim >= 2")
    out = {(k[-1],): c for k, c in f.coeffs.items() if not any(k[:-1])}
    return TrigSeries(out, (f.cutoff[-1],), 1, loss=f.loss)


def lift_last_axis(g: TrigSeries, dim: int, cutoff=None) -> TrigSeries:
    """View a series in the last coordinate alone as a dim-d series."""
    if g.dim != 1:
        raise DimensionMismatch("lift_last_axis expects a dim-1 series")
    if cutoff is None:
        cutoff = (0,) * (dim - 1) + g.cutoff
    out = {(0,) * (dim - 1) + k: c for k, c in g.coeffs.items()}
    return TrigSeries(out, cutoff, dim, loss=g.loss)


def strip_norm_bound(f: TrigSeries, rho: float) -> float:
    """Upper bound sum |c_k| exp(2*pi*rho*|k|_1) for the sup norm on the strip."""
    if rho < 0:
        raise ValueError("rho must be nonnegative")
    ks, cs = f.modes()
    if len(cs) == 0:
        return 0.0
    return float(np.sum(np.abs(cs) * np.exp(TWO_PI * rho * np.abs(ks).sum(axis=1))))


# -- grid conversions -------------------------------------------------------

@dataclass(frozen=True)
class GridSampling:
    """Samples on the uniform grid ``theta_i = j / points_per_axis[i]``."""

    points_per_axis: tuple[int, ...]
    values: np.ndarray

    def __post_init__(self):
        if tuple(self.values.shape) != tuple(self.points_per_axis):
            raise DimensionMismatch(f"values of shape {self.values.shape} for grid {self.points_per_axis}")

    @staticmethod
    def nodes(points_per_axis: Sequence[int]) -> np.ndarray:
        """Grid points, shape (*points_per_axis, dim)."""
        axes = [np.arange(n) / n for n in points_per_axis]
        return np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)

    @classmethod
    def from_series(cls, f: TrigSeries, points_per_axis: Sequence[int]) -> "GridSampling":
        points = tuple(int(n) for n in points_per_axis)
        if len(points) != f.dim:
            raise DimensionMismatch("grid rank differs from series dim")
        if any(n < 2 * c + 1 for n, c in zip(points, f.support())):
            raise ValueError(f"grid {points} too coarse for modes up to {f.support()}")
        freq = np.zeros(points, dtype=complex)
        for k, c in f.coeffs.items():
            freq[tuple(ki % n for ki, n in zip(k, points))] += c
        vals = np.fft.ifftn(freq) * math.prod(points)
        return cls(points, vals.real.copy())

    def to_series(self, cutoff, drop_below: float = 0.0) -> TrigSeries:
        """Transform back, keeping |k_i| <= cutoff_i; the rest goes to ``loss``.

        Coefficients of modulus <= ``drop_below`` are also dropped and
        counted.  Requires ``points_per_axis >= 2*cutoff + 1`` for an
        alias-free round trip of series within the cutoff.
        """
        dim = len(self.points_per_axis)
        cutoff = _as_cutoff(cutoff, dim)
        if any(n < 2 * c + 1 for n, c in zip(self.points_per_axis, cutoff)):
            raise ValueError(f"grid {self.points_per_axis} too coarse for cutoff {cutoff}")
        freq = np.fft.fftn(self.values) / math.prod(self.points_per_axis)
        kept, dropped = {}, 0.0
        freqs = [np.rint(np.fft.fftfreq(n) * n).astype(int) for n in self.points_per_axis]
        for pos in itertools.product(*(range(n) for n in self.points_per_axis)):
            c = freq[pos]
            if c == 0:
                continue
            k = tuple(int(freqs[i][p]) for i, p in enumerate(pos))
            if abs(c) > drop_below and all(abs(ki) <= ci for ki, ci in zip(k, cutoff)):
                kept[k] = c
            else:
                dropped += abs(c)
        return TrigSeries(kept, cutoff, dim, loss=dropped).hermitize()
