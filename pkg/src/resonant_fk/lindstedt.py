"""Formal power series in eps for the resonant hull equation

    v(psi+Omega, eta) + v(psi-Omega, eta) - 2 v(psi, eta)
        + eps W((psi, eta) + beta v(psi, eta)) + lambda(eta) = 0,

normalised by a zero psi-average of v.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .cohomology import DIVISOR_FLOOR, solve_second_difference
from .errors import AliasingExcess, CutoffOverflow, DimensionMismatch, NoContraction
from .fourier import (GridSampling, TrigSeries, directional_derivative, evaluate, integer_inverse,
                      lift_last_axis, multiply, partial_average, pullback_by_unimodular)
from .model import FKModel
from .resonance import IntrinsicData, MediumFrequency, Resonance


@dataclass(frozen=True)
class EpsilonJet:
    """Truncated series sum_n eps^n terms[n] with TrigSeries coefficients."""

    terms: tuple[TrigSeries, ...]

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple(self.terms))
        if not self.terms:
            raise ValueError("a jet needs at least the order-0 term")
        dims = {t.dim for t in self.terms}
        cuts = {t.cutoff for t in self.terms}
        if len(dims) != 1 or len(cuts) != 1:
            raise DimensionMismatch("jet terms must share dim and cutoff")

    @property
    def order(self) -> int:
        return len(self.terms) - 1

    @property
    def dim(self) -> int:
        return self.terms[0].dim

    @property
    def cutoff(self) -> tuple[int, ...]:
        return self.terms[0].cutoff

    def __getitem__(self, n: int) -> TrigSeries:
        return self.terms[n]

    def partial_sum(self, eps: float, order: int | None = None) -> TrigSeries:
        order = self.order if order is None else order
        total = self.terms[order]
        for n in range(order - 1, -1, -1):
            total = total * eps + self.terms[n]
        return total


def build_W(V: TrigSeries, alpha, intr: IntrinsicData, cutoff=None) -> TrigSeries:
    """W with W(B theta) = (alpha . grad) V (theta)."""
    alpha = alpha.alpha if isinstance(alpha, MediumFrequency) else np.asarray(alpha, dtype=float)
    dV = directional_derivative(V, alpha, 1)
    if cutoff is None:
        inv_t = integer_inverse(intr.B).T
        ks, _ = dV.modes()
        cutoff = tuple(int(x) for x in np.abs(ks @ inv_t.T).max(axis=0)) if len(ks) else (0,) * V.dim
    return pullback_by_unimodular(dV, intr.B, cutoff)


class _Composer:
    """Incremental jet composition W(theta + beta u(eps)), u = sum_{j>=1} eps^j v^j.

    ``powers[m][s]`` holds the eps^s coefficient of u^m.
    """

    def __init__(self, W: TrigSeries, beta, max_order: int, cutoff):
        self.cutoff = tuple(cutoff)
        self.dim = W.dim
        W = W.with_cutoff(self.cutoff) if W.cutoff != self.cutoff else W
        self.derivs = [directional_derivative(W, beta, m) / math.factorial(m) for m in range(max_order)]
        one = TrigSeries.constant(1.0, self.dim, self.cutoff)
        self.v: list[TrigSeries] = [TrigSeries.zero(self.dim, self.cutoff)]
        self.powers: list[dict[int, TrigSeries]] = [{0: one}]

    def push(self, vn: TrigSeries):
        """Append the next coefficient v^s of u."""
        s = len(self.v)
        self.v.append(vn.with_cutoff(self.cutoff) if vn.cutoff != self.cutoff else vn)
        while len(self.powers) <= s:
            self.powers.append({})
        self.powers[1][s] = self.v[s]
        for m in range(2, s + 1):
            acc = TrigSeries.zero(self.dim, self.cutoff)
            for j in range(1, s - m + 2):
                prev = self.powers[m - 1].get(s - j)
                if prev is not None and len(prev) and len(self.v[j]):
                    acc = acc + multiply(self.v[j], prev, self.cutoff)
            self.powers[m][s] = acc

    def R(self, n: int) -> TrigSeries:
        """Coefficient of eps^(n-1) in W(theta + beta u)."""
        if len(self.v) < n:
            raise ValueError(f"R^{n} needs v up to order {n - 1}")
        total = TrigSeries.zero(self.dim, self.cutoff)
        for m in range(0, n):
            if m >= len(self.derivs):
                break
            p = self.powers[m].get(n - 1) if m < len(self.powers) else None
            if p is None or not len(p) or not len(self.derivs[m]):
                continue
            total = total + multiply(self.derivs[m], p, self.cutoff)
        return total


def jet_compose_W(W: TrigSeries, beta, v_jet: EpsilonJet, n: int) -> TrigSeries:
    """R^n = (1/(n-1)!) d^(n-1)/d eps^(n-1) W((psi, eta) + beta sum_j eps^j v^j) at eps = 0."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if v_jet.order < n - 1:
        raise ValueError(f"v_jet known to order {v_jet.order}, need {n - 1}")
    comp = _Composer(W, beta, n, v_jet.cutoff)
    for j in range(1, n):
        comp.push(v_jet[j])
    return comp.R(n)


def required_cutoff(W: TrigSeries, N: int) -> tuple[int, ...]:
    """Order-n terms use modes up to n times the extent of W."""
    return tuple(N * s for s in W.support())


@dataclass(frozen=True)
class LindstedtSolution:
    model: FKModel
    W: TrigSeries
    v_jet: EpsilonJet
    lambda_jet: EpsilonJet

    @property
    def order(self) -> int:
        return self.v_jet.order

    @property
    def cutoff(self) -> tuple[int, ...]:
        return self.v_jet.cutoff

    @property
    def Omega(self) -> np.ndarray:
        return self.model.Omega

    @property
    def beta(self) -> np.ndarray:
        return self.model.beta

    def v_at(self, eps: float, order: int | None = None) -> TrigSeries:
        return self.v_jet.partial_sum(eps, order)

    def lambda_at(self, eps: float, order: int | None = None) -> TrigSeries:
        return self.lambda_jet.partial_sum(eps, order)

    def lambda_value(self, eps: float, eta: float, order: int | None = None) -> float:
        return float(evaluate(self.lambda_at(eps, order), [eta]))


def expand(model: FKModel, N: int, divisor_floor: float = DIVISOR_FLOOR, cutoff=None) -> LindstedtSolution:
    """Lindstedt series (v, lambda) through order N.

    At each order lambda^n = -<R^n>_psi makes the equation solvable and
    v^n solves the second-difference equation with zero psi-average.
    """
    if N < 1:
        raise ValueError("N must be >= 1")
    W = build_W(model.V, model.alpha, model.intrinsic)
    need = required_cutoff(W, N)
    if cutoff is None:
        cutoff = need
    else:
        cutoff = tuple(int(c) for c in cutoff)
        if any(c < r for c, r in zip(cutoff, need)):
            raise CutoffOverflow(f"cutoff {cutoff} below the {need} needed at order {N}")
    d = model.d
    Omega, beta = model.Omega, model.beta
    comp = _Composer(W, beta, N, cutoff)
    v_terms = [TrigSeries.zero(d, cutoff)]
    lam_terms = [TrigSeries.zero(1, (cutoff[-1],))]
    for n in range(1, N + 1):
        Rn = comp.R(n)
        lam_n = -partial_average(Rn)
        phi = -(Rn + lift_last_axis(lam_n, d, cutoff))
        vn = solve_second_difference(phi, Omega, divisor_floor)
        v_terms.append(vn)
        lam_terms.append(lam_n.hermitize())
        if n < N:
            comp.push(vn)
    return LindstedtSolution(model, W.with_cutoff(cutoff), EpsilonJet(v_terms), EpsilonJet(lam_terms))


def residual_field(v: TrigSeries, lam: TrigSeries, W: TrigSeries, eps: float, Omega, beta,
                   grid: int) -> np.ndarray:
    """Hull-equation residual sampled on the uniform grid ``grid``^d."""
    d = v.dim
    shape = (grid,) * d
    if grid < 2 * max(v.support()) + 1:
        raise ValueError(f"grid {grid} too coarse for modes up to {v.support()}")
    points = GridSampling.nodes(shape)
    shift = np.zeros(d)
    shift[:-1] = Omega
    # v on a regular grid goes through the FFT; only W needs pointwise sums
    v0 = GridSampling.from_series(v, shape).values
    lap = GridSampling.from_series(v.shift(shift) + v.shift(-shift) - 2.0 * v, shape).values
    lam_vals = evaluate(lam, points[..., -1:])
    Wv = evaluate(W, points + v0[..., None] * np.asarray(beta, dtype=float))
    return lap + eps * Wv + lam_vals


def residual_of(v: TrigSeries, lam: TrigSeries, W: TrigSeries, eps: float, Omega, beta, grid: int) -> float:
    """Sup over a uniform grid of the hull-equation residual for an explicit pair."""
    return float(np.max(np.abs(residual_field(v, lam, W, eps, Omega, beta, grid))))


def residual(sol: LindstedtSolution, eps: float, grid: int | None = None, order: int | None = None) -> float:
    """Sup residual of the order-N partial sums on a ``grid``^d uniform grid."""
    if grid is None:
        grid = max(64, 4 * max(sol.cutoff) + 1)
    if grid < 2 * max(sol.cutoff) + 1:
        raise ValueError(f"grid {grid} below 2*cutoff+1")
    return residual_of(sol.v_at(eps, order), sol.lambda_at(eps, order), sol.W, eps, sol.Omega, sol.beta, grid)


# -- symmetries and normalisation ------------------------------------------

def apply_symmetry(v: TrigSeries, lam: TrigSeries, iota: TrigSeries, beta, cutoff=None,
                   grid: Sequence[int] | int | None = None, max_loss: float = 1e-8
                   ) -> tuple[TrigSeries, TrigSeries]:
    """Act with the phase symmetry generated by iota(eta).

        v~(psi, eta) = v((psi, eta) + iota(eta) beta) + iota(eta)
        lam~(eta)    = lam(eta + iota(eta) beta_eta)

    The composition is sampled and re-transformed at ``cutoff``.  The
    re-transform loss (dropped spectral mass plus the worst mismatch against
    the direct formula on a staggered grid) is stored in ``.loss`` of each
    returned series.
    """
    if iota.dim != 1 or lam.dim != 1:
        raise DimensionMismatch("iota and lambda must be functions of eta alone")
    d = v.dim
    beta = np.asarray(beta, dtype=float)
    cutoff = v.cutoff if cutoff is None else tuple(int(c) for c in cutoff)
    lam_cut = (cutoff[-1],)
    if grid is None:
        grid = tuple(max(8, 4 * c + 4) for c in cutoff)
    elif np.isscalar(grid):
        grid = (int(grid),) * d
    grid = tuple(grid)

    def v_tilde(pts):
        io = evaluate(iota, pts[..., -1:])
        return evaluate(v, pts + io[..., None] * beta) + io

    def lam_tilde(eta_pts):
        io = evaluate(iota, eta_pts)
        return evaluate(lam, eta_pts + io[..., None] * beta[-1])

    nodes = GridSampling.nodes(grid)
    samples = v_tilde(nodes)
    # modes at rounding level are counted in the loss rather than kept
    floor = np.finfo(float).eps * float(np.max(np.abs(samples)))
    v_new = GridSampling(grid, samples).to_series(cutoff, drop_below=floor)
    lam_nodes = GridSampling.nodes((grid[-1],))
    lam_samples = lam_tilde(lam_nodes)
    floor = np.finfo(float).eps * float(np.max(np.abs(lam_samples)))
    lam_new = GridSampling((grid[-1],), lam_samples).to_series(lam_cut, drop_below=floor)

    staggered = nodes + 0.5 / np.asarray(grid)
    v_err = float(np.max(np.abs(evaluate(v_new, staggered) - v_tilde(staggered))))
    lam_stag = lam_nodes + 0.5 / grid[-1]
    lam_err = float(np.max(np.abs(evaluate(lam_new, lam_stag) - lam_tilde(lam_stag))))
    v_loss = max(v_new.loss, v_err)
    lam_loss = max(lam_new.loss, lam_err)
    if max(v_loss, lam_loss) > max_loss:
        raise AliasingExcess(f"re-transform loss {max(v_loss, lam_loss):.3e} exceeds {max_loss:.1e}")
    return (TrigSeries(v_new.coeffs, cutoff, d, loss=v_loss),
            TrigSeries(lam_new.coeffs, lam_cut, 1, loss=lam_loss))


def normalize_phase(v: TrigSeries, beta_eta: float, cutoff: int | None = None, grid: int | None = None,
                    tol: float = 1e-12, max_iter: int = 500, damping: float = 1.0) -> TrigSeries:
    """iota(eta) solving I(eta + beta_eta iota(eta)) + iota(eta) = 0, I = psi-average of v.

    Damped fixed-point iteration on a grid in eta; the map is a contraction
    when |beta_eta| sup|I'| < 1, which is checked first.
    """
    I = partial_average(v) if v.dim > 1 else v
    dI = directional_derivative(I, [1.0], 1)
    lip = abs(beta_eta) * dI.l1()
    if lip >= 1.0:
        raise NoContraction(f"|beta_eta| sup|I'| <= {lip:.3g} is not below 1")
    if cutoff is None:
        cutoff = max(8, 4 * I.cutoff[0])
    if grid is None:
        grid = 4 * cutoff + 4
    eta = GridSampling.nodes((grid,))
    iota = np.zeros(grid)
    for _ in range(max_iter):
        target = -evaluate(I, eta + beta_eta * iota[:, None])
        step = target - iota
        iota = iota + damping * step
        if np.max(np.abs(step)) <= tol:
            break
    else:
        raise NoContraction(f"fixed-point iteration did not reach {tol:.1e} in {max_iter} steps")
    return GridSampling((grid,), iota).to_series((cutoff,))


# -- serialisation ----------------------------------------------------------

def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def _series_to_json(f: TrigSeries) -> dict:
    rows = [[*k, _fmt(c.real), _fmt(c.imag)] for k, c in sorted(f.coeffs.items())]
    return {"dim": f.dim, "cutoff": list(f.cutoff), "coeffs": rows}


def _series_from_json(obj: dict) -> TrigSeries:
    dim = obj["dim"]
    store = {tuple(int(x) for x in row[:dim]): complex(float(row[dim]), float(row[dim + 1]))
             for row in obj["coeffs"]}
    return TrigSeries(store, tuple(obj["cutoff"]), dim)


def solution_to_dict(sol: LindstedtSolution) -> dict:
    m = sol.model
    return {
        "format": "resonant_fk.lindstedt/1",
        "metadata": {
            "alpha": [_fmt(x) for x in m.alpha.alpha],
            "k": list(m.resonance.k),
            "m": m.resonance.m,
            "omega": _fmt(m.omega),
            "Omega": [_fmt(x) for x in m.Omega],
            "B": m.intrinsic.B.tolist(),
            "L": m.intrinsic.L.tolist(),
            "beta": [_fmt(x) for x in m.beta],
            "N": sol.order,
            "cutoff": list(sol.cutoff),
            "spacing": _fmt(m.spacing),
        },
        "V": _series_to_json(m.V),
        "W": _series_to_json(sol.W),
        "v": [_series_to_json(t) for t in sol.v_jet.terms],
        "lambda": [_series_to_json(t) for t in sol.lambda_jet.terms],
    }


def solution_from_dict(obj: dict) -> LindstedtSolution:
    meta = obj["metadata"]
    alpha = MediumFrequency(np.array([float(x) for x in meta["alpha"]]), check=False)
    res = Resonance(tuple(meta["k"]), int(meta["m"]), float(meta["omega"]))
    B = np.array(meta["B"], dtype=np.int64)
    intr = IntrinsicData(B=B, Omega=np.array([float(x) for x in meta["Omega"]]),
                         L=np.array(meta["L"], dtype=np.int64), beta=np.array([float(x) for x in meta["beta"]]))
    model = FKModel(_series_from_json(obj["V"]), alpha, res, intr, float(meta["spacing"]))
    return LindstedtSolution(model, _series_from_json(obj["W"]),
                             EpsilonJet([_series_from_json(t) for t in obj["v"]]),
                             EpsilonJet([_series_from_json(t) for t in obj["lambda"]]))


def dumps(sol: LindstedtSolution) -> str:
    return json.dumps(solution_to_dict(sol), indent=1, sort_keys=True)


def loads(text: str) -> LindstedtSolution:
    return solution_from_dict(json.loads(text))
