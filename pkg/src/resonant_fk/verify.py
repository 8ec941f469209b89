"""Independent check of the Lindstedt series: Newton collocation at fixed eta.

For fixed eta the hull equation is an equation for v on T^{d-1} and the
scalar lambda.  Unknowns are the grid values of v plus lambda; the zero
average of v closes the system.  The second difference is diagonal in
Fourier space and is assembled exactly.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import NoConvergence
from .fourier import GridSampling, TrigSeries, directional_derivative, evaluate
from .lindstedt import LindstedtSolution


@dataclass
class NewtonResult:
    v: TrigSeries
    lam: float
    residual: float
    history: list = field(default_factory=list)
    grid_values: np.ndarray | None = None

    @property
    def iterations(self) -> int:
        return len(self.history) - 1


def _second_difference_matrix(Omega: np.ndarray, M: int) -> np.ndarray:
    """Real matrix of v -> v(.+Omega) + v(.-Omega) - 2v on an M^(d-1) grid."""
    n = len(Omega)
    shape = (M,) * n
    P = M ** n
    freqs = np.meshgrid(*[np.fft.fftfreq(M) * M for _ in range(n)], indexing="ij")
    phase = sum(f * om for f, om in zip(freqs, Omega))
    symbol = 2.0 * (np.cos(2.0 * np.pi * phase) - 1.0)
    basis = np.eye(P).reshape((P,) + shape)
    axes = tuple(range(1, n + 1))
    cols = np.fft.ifftn(np.fft.fftn(basis, axes=axes) * symbol, axes=axes)
    return cols.real.reshape(P, P).T


def grid_newton_solve(W: TrigSeries, Omega, beta, eps: float, eta: float, M: int = 64,
                      init: np.ndarray | TrigSeries | None = None, lam0: float = 0.0,
                      max_iter: int = 30, tol: float = 1e-12, min_iter: int = 1) -> NewtonResult:
    """Solve v(psi+Omega) + v(psi-Omega) - 2 v + eps W((psi, eta) + beta v) + lam = 0.

    ``init`` is a grid array (shape M^(d-1)) or a series in psi.  At least
    ``min_iter`` steps are taken even from an accurate start, so the result
    is a Newton iterate rather than the initial guess.  Raises NoConvergence
    if the sup residual does not fall below ``tol``.
    """
    Omega = np.asarray(Omega, dtype=float).reshape(-1)
    beta = np.asarray(beta, dtype=float)
    n = len(Omega)
    shape = (M,) * n
    P = M ** n
    psi = GridSampling.nodes(shape).reshape(P, n)
    base = np.concatenate([psi, np.full((P, 1), float(eta))], axis=1)
    D = _second_difference_matrix(Omega, M)
    dW = directional_derivative(W, beta, 1)

    if init is None:
        v = np.zeros(P)
    elif isinstance(init, TrigSeries):
        v = evaluate(init, psi) if init.dim == n else evaluate(init, base)
    else:
        v = np.asarray(init, dtype=float).reshape(P).copy()
    v = v - v.mean()
    lam = float(lam0)

    def F(v, lam):
        pts = base + v[:, None] * beta
        return D @ v + eps * evaluate(W, pts) + lam

    r = F(v, lam)
    history = [float(np.max(np.abs(r)))]
    J = np.zeros((P + 1, P + 1))
    J[:P, P] = 1.0
    J[P, :P] = 1.0 / P
    for it in range(max_iter):
        if history[-1] <= tol and it >= min_iter:
            break
        pts = base + v[:, None] * beta
        J[:P, :P] = D
        J[np.arange(P), np.arange(P)] += eps * evaluate(dW, pts)
        rhs = np.concatenate([r, [v.mean()]])
        delta = np.linalg.solve(J, -rhs)
        v = v + delta[:P]
        lam += delta[P]
        r = F(v, lam)
        history.append(float(np.max(np.abs(r))))
        if not np.isfinite(history[-1]):
            break
    if not history[-1] <= tol:
        raise NoConvergence(f"residual {history[-1]:.3e} after {len(history) - 1} Newton steps at eps={eps}")
    series = GridSampling(shape, v.reshape(shape)).to_series((M - 1) // 2)
    return NewtonResult(series, lam, history[-1], history, v.reshape(shape))


def solve_for_solution(sol: LindstedtSolution, eps: float, eta: float, M: int = 64, use_lindstedt_init: bool = True,
                       **kw) -> NewtonResult:
    """Newton solve for the model of ``sol``, started from its partial sum."""
    init, lam0 = None, 0.0
    if use_lindstedt_init:
        n = len(sol.Omega)
        psi = GridSampling.nodes((M,) * n).reshape(-1, n)
        pts = np.concatenate([psi, np.full((len(psi), 1), float(eta))], axis=1)
        init = evaluate(sol.v_at(eps), pts)
        lam0 = sol.lambda_value(eps, eta)
    return grid_newton_solve(sol.W, sol.Omega, sol.beta, eps, eta, M, init, lam0, **kw)


def lindstedt_gap(sol: LindstedtSolution, newton: NewtonResult, eps: float, eta: float,
                  order: int | None = None) -> tuple[float, float]:
    """(sup |v_newton - v_N|, |lam_newton - lam_N|) on the Newton grid."""
    shape = newton.grid_values.shape
    n = len(shape)
    psi = GridSampling.nodes(shape).reshape(-1, n)
    pts = np.concatenate([psi, np.full((len(psi), 1), float(eta))], axis=1)
    v_lin = evaluate(sol.v_at(eps, order), pts)
    dv = float(np.max(np.abs(newton.grid_values.reshape(-1) - v_lin)))
    dl = abs(newton.lam - sol.lambda_value(eps, eta, order))
    return dv, dl


def loglog_slope(xs, ys) -> float:
    """Least-squares slope of log y against log x over positive entries."""
    pairs = [(math.log(x), math.log(y)) for x, y in zip(xs, ys) if x > 0 and y > 0 and math.isfinite(y)]
    if len(pairs) < 2:
        return float("nan")
    lx, ly = np.array(pairs).T
    return float(np.polyfit(lx, ly, 1)[0])


def cross_validate(sol: LindstedtSolution, eps_list, eta: float, M: int = 64, order: int | None = None) -> dict:
    """Compare Newton and Lindstedt per eps and fit the log-log slope of the v gap."""
    rows = []
    for eps in eps_list:
        row = {"eps": float(eps)}
        try:
            res = solve_for_solution(sol, eps, eta, M)
        except NoConvergence as exc:
            row.update(status="no_convergence", message=str(exc), v_diff=float("nan"), lambda_diff=float("nan"),
                       iterations=-1, residual=float("nan"))
        else:
            dv, dl = lindstedt_gap(sol, res, eps, eta, order)
            row.update(status="ok", v_diff=dv, lambda_diff=dl, iterations=res.iterations, residual=res.residual)
        rows.append(row)
    ok = [r for r in rows if r["status"] == "ok"]
    return {
        "order": sol.order if order is None else order,
        "eta": float(eta),
        "rows": rows,
        "slope_v": loglog_slope([r["eps"] for r in ok], [r["v_diff"] for r in ok]),
        "slope_lambda": loglog_slope([r["eps"] for r in ok], [r["lambda_diff"] for r in ok]),
    }


def newton_family(W: TrigSeries, Omega, beta, eps: float, M: int = 64, n_eta: int = 64,
                  cutoff: int | None = None) -> tuple[TrigSeries, TrigSeries]:
    """Per-eta Newton solves assembled into v(psi, eta) and lambda(eta) series."""
    Omega = np.asarray(Omega, dtype=float).reshape(-1)
    n = len(Omega)
    cutoff = (M - 1) // 2 if cutoff is None else cutoff
    etas = np.arange(n_eta) / n_eta
    vals = np.empty((M,) * n + (n_eta,))
    lams = np.empty(n_eta)
    prev, lam_prev = None, 0.0
    for j, eta in enumerate(etas):
        res = grid_newton_solve(W, Omega, beta, eps, eta, M, prev, lam_prev)
        vals[..., j] = res.grid_values
        lams[j] = res.lam
        prev, lam_prev = res.grid_values, res.lam
    cut = (min(cutoff, (M - 1) // 2),) * n + (min(cutoff, (n_eta - 1) // 2),)
    v = GridSampling(vals.shape, vals).to_series(cut)
    lam = GridSampling((n_eta,), lams).to_series((cut[-1],))
    return v, lam
