"""Command-line front end.

Every subcommand reads one YAML config, writes its results into ``--out``
and finishes with ``manifest.json``.  Payload files carry no timestamps, so
identical inputs give byte-identical payloads; only the manifest's
``created`` field changes between runs.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import math
import platform
import sys
from datetime import datetime, timezone
from pathlib import Path

import numpy as np
import scipy
import yaml

from . import __version__
from .auxiliary import NONDEG_FLOOR, ZERO_COEFF, depinning_range, lambda_zeros, phase_series
from .cohomology import DIVISOR_FLOOR
from .dynamics import (OrbitState, SkewMap, hull_configuration, hull_phases, lyapunov_spectrum, phonon_gap,
                       structure_checks)
from .errors import ConfigError, FKError
from .fourier import TrigSeries
from .lindstedt import dumps, expand, residual
from .model import EXAMPLE_AMPLITUDE, FKModel, example_potential
from .resonance import TOL_RES, subexponential_profile
from .verify import cross_validate

COMMANDS = ("resonance", "lindstedt", "auxiliary", "simulate", "phonon", "verify")

DEFAULTS = {
    "order": 3,
    "cutoff": None,
    "eps": [1e-3, 2e-3, 4e-3, 8e-3],
    "tolerances": {"divisor_floor": DIVISOR_FLOOR, "nondeg_floor": NONDEG_FLOOR, "resonance": TOL_RES},
    "resonance_scan": {"K_box": 3, "M_box": 3, "N_max": 64},
    "auxiliary": {"mu": 0.0, "samples": 4096},
    "simulate": {"steps": 10000, "orbits": 1, "reortho": 20, "lambda": 0.0, "structure_steps": 1000},
    "phonon": {"sizes": [50, 100, 200, 400], "eta": 0.25},
    "verify": {"eta": 0.0, "grid": 64},
}


# -- config -----------------------------------------------------------------

def _merge(base: dict, over: dict) -> dict:
    out = dict(base)
    for key, val in over.items():
        if isinstance(val, dict) and isinstance(out.get(key), dict):
            out[key] = _merge(out[key], val)
        else:
            out[key] = val
    return out


def load_config(path: str | Path) -> dict:
    path = Path(path)
    try:
        raw = yaml.safe_load(path.read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc
    except yaml.YAMLError as exc:
        raise ConfigError(f"config is not valid YAML: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError("config must be a mapping")
    for key in ("alpha", "potential", "resonance"):
        if key not in raw:
            raise ConfigError(f"config lacks '{key}'")
    cfg = _merge(DEFAULTS, raw)
    cfg["_base_dir"] = str(path.resolve().parent)
    return cfg


def _potential(entry, base_dir: str, d: int) -> TrigSeries:
    if not isinstance(entry, dict):
        raise ConfigError("'potential' must be a mapping with 'modes', 'file' or 'example'")
    if "example" in entry:
        ex = entry["example"] or {}
        V = example_potential(float(ex.get("A", EXAMPLE_AMPLITUDE)), float(ex.get("C", EXAMPLE_AMPLITUDE)))
    elif "modes" in entry:
        V = TrigSeries.from_records([str(r) for r in entry["modes"]])
    elif "file" in entry:
        V = TrigSeries.from_records(Path(base_dir, entry["file"]).read_text())
    else:
        raise ConfigError("'potential' needs 'modes', 'file' or 'example'")
    if V.dim != d:
        raise ConfigError(f"potential has dimension {V.dim} but alpha has {d} entries")
    return V


def build_model(cfg: dict) -> FKModel:
    alpha = [float(a) for a in cfg["alpha"]]
    V = _potential(cfg["potential"], cfg["_base_dir"], len(alpha))
    res = cfg["resonance"]
    tol = float(cfg["tolerances"]["resonance"])
    scan = cfg["resonance_scan"]
    try:
        return FKModel.build(V, alpha, k=res.get("k"), m=res.get("m"), omega=res.get("omega"),
                             K_box=int(scan["K_box"]), M_box=int(scan["M_box"]), tol=tol)
    except AttributeError as exc:
        raise ConfigError("'resonance' must be a mapping with (k, m) or omega") from exc


# -- output -----------------------------------------------------------------

def _fmt(x) -> str:
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return format(float(x) + 0.0, ".17g")  # + 0.0 folds -0.0
    return str(x)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj) + 0.0
        return x if math.isfinite(x) else str(x)
    return obj


class Writer:
    def __init__(self, out: Path):
        self.out = out
        self.files: dict[str, str] = {}
        out.mkdir(parents=True, exist_ok=True)

    def _put(self, name: str, text: str):
        (self.out / name).write_text(text)
        self.files[name] = hashlib.sha256(text.encode()).hexdigest()

    def json(self, name: str, obj):
        self._put(name, json.dumps(_jsonable(obj), indent=1, sort_keys=True) + "\n")

    def text(self, name: str, text: str):
        self._put(name, text)

    def csv(self, name: str, header: list[str], rows):
        lines = [",".join(header)]
        lines += [",".join(_fmt(x) for x in row) for row in rows]
        self._put(name, "\n".join(lines) + "\n")


# -- subcommands -------------------------------------------------------------

def _eps_list(cfg) -> list[float]:
    eps = cfg["eps"]
    eps = [eps] if np.isscalar(eps) else eps
    return [float(e) for e in eps]


def _expand(cfg, model):
    cut = cfg["cutoff"]
    return expand(model, int(cfg["order"]), float(cfg["tolerances"]["divisor_floor"]),
                  cutoff=None if cut is None else [int(c) for c in np.broadcast_to(cut, (model.d,))])


def cmd_resonance(cfg, model, w: Writer, args):
    intr = model.intrinsic
    res = model.resonance
    profile = subexponential_profile(intr.Omega, int(cfg["resonance_scan"]["N_max"]))
    w.json("resonance.json", {
        "alpha": model.alpha.alpha, "omega": model.omega, "k": list(res.k), "m": res.m,
        "B": intr.B, "Omega": intr.Omega, "L": intr.L, "beta": intr.beta,
    })
    w.csv("subexponential.csv", ["N", "max_log_divisor_over_N"], profile)


def cmd_lindstedt(cfg, model, w: Writer, args):
    sol = _expand(cfg, model)
    w.text("solution.json", dumps(sol) + "\n")
    rows = [[eps] + [residual(sol, eps, order=n) for n in range(1, sol.order + 1)] for eps in _eps_list(cfg)]
    w.csv("residuals.csv", ["eps"] + [f"order_{n}" for n in range(1, sol.order + 1)], rows)


def cmd_auxiliary(cfg, model, w: Writer, args):
    sol = _expand(cfg, model)
    aux = cfg["auxiliary"]
    mu = float(aux["mu"])
    n0 = next((j for j in range(1, sol.order + 1) if not sol.lambda_jet[j].is_zero(ZERO_COEFF)), None)
    if n0 is None:
        w.json("auxiliary.json", {"n0": None, "zeros": [], "phase_series": [],
                                  "note": f"lambda^1..lambda^{sol.order} vanish identically"})
        return
    zeros = lambda_zeros(sol.lambda_jet[n0], level=mu, samples=int(aux["samples"]))
    series = []
    for eta_star, slope in zeros:
        try:
            ps = phase_series(sol, eta_star, mu=mu, nondeg_floor=float(cfg["tolerances"]["nondeg_floor"]))
        except FKError as exc:
            series.append({"eta_star": eta_star, "error": exc.to_dict()})
        else:
            series.append({"eta_star": eta_star, "slope": slope, "n0": ps.n0, "coeffs": list(ps.coeffs)})
    ranges = [[eps, *depinning_range(sol, eps, samples=int(aux["samples"]))] for eps in _eps_list(cfg)]
    w.json("auxiliary.json", {"n0": n0, "mu": mu, "zeros": [{"eta": z, "slope": s} for z, s in zeros],
                              "phase_series": series})
    w.csv("depinning.csv", ["eps", "lambda_min", "lambda_max"], ranges)


def cmd_simulate(cfg, model, w: Writer, args):
    sim = cfg["simulate"]
    rng = np.random.default_rng(args.seed)
    d = model.d
    alpha = model.alpha.alpha
    starts = [(float(rng.random()), rng.random(d)) for _ in range(int(sim["orbits"]))]
    rows, structure = [], []
    for eps in _eps_list(cfg):
        fmap = SkewMap(model.V, alpha, eps, float(sim["lambda"]))
        for j, (p, q) in enumerate(starts):
            s0 = OrbitState(p, q)
            chi = lyapunov_spectrum(s0, int(sim["steps"]), fmap, int(sim["reortho"]))
            rows.append([eps, j, *chi, float(np.sum(chi))])
            rep = structure_checks(s0, fmap, int(sim["structure_steps"]))
            structure.append({"eps": eps, "orbit": j, "leaf_deviation": rep.leaf_deviation,
                              "det_deviation": rep.det_deviation,
                              "factorization_deviation": rep.factorization_deviation, "exact": rep.exact})
    w.csv("lyapunov.csv", ["eps", "orbit"] + [f"chi_{i}" for i in range(1, d + 2)] + ["sum"], rows)
    w.json("structure.json", {"steps": int(sim["steps"]), "checks": structure})


def cmd_phonon(cfg, model, w: Writer, args):
    sol = _expand(cfg, model)
    ph = cfg["phonon"]
    sizes = [int(n) for n in ph["sizes"]]
    eta = float(ph["eta"])
    xi1, xi2 = hull_phases(sol.beta, eta)
    rows = []
    for eps in _eps_list(cfg):
        x = hull_configuration(sol, eps, eta, xi1, xi2, np.arange(max(sizes)))
        for N, gap in phonon_gap(x, model.V, model.alpha.alpha, eps, sizes):
            rows.append([eps, N, gap, 2.0 - 2.0 * math.cos(math.pi / (N + 1))])
    w.csv("phonon.csv", ["eps", "size", "gap", "free_laplacian_gap"], rows)


def cmd_verify(cfg, model, w: Writer, args):
    sol = _expand(cfg, model)
    ver = cfg["verify"]
    table = cross_validate(sol, _eps_list(cfg), float(ver["eta"]), int(ver["grid"]))
    rows = [[r["eps"], r["status"], r["v_diff"], r["lambda_diff"], r["iterations"], r["residual"]]
            for r in table["rows"]]
    w.csv("verify.csv", ["eps", "status", "v_diff", "lambda_diff", "iterations", "residual"], rows)
    w.json("verify.json", {k: table[k] for k in ("order", "eta", "slope_v", "slope_lambda")})


HANDLERS = {name: globals()[f"cmd_{name}"] for name in COMMANDS}


# -- entry point ---------------------------------------------------------------

def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="resonant-fk", description=__doc__.splitlines()[0])
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--config", required=True, metavar="PATH")
    p.add_argument("--out", default="out", metavar="DIR")
    p.add_argument("--order", type=int, metavar="N", help="override the config order")
    p.add_argument("--eps", metavar="LIST", help="comma-separated eps values overriding the config")
    p.add_argument("--seed", type=int, default=0, metavar="INT")
    return p


def _versions() -> dict:
    return {"resonant_fk": __version__, "python": platform.python_version(), "numpy": np.__version__,
            "scipy": scipy.__version__, "pyyaml": yaml.__version__}


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    out = Path(args.out)
    writer = Writer(out)
    status = 0
    cfg = None
    try:
        cfg = load_config(args.config)
        if args.order is not None:
            cfg["order"] = args.order
        if args.eps is not None:
            try:
                cfg["eps"] = [float(x) for x in args.eps.split(",") if x.strip()]
            except ValueError as exc:
                raise ConfigError(f"bad --eps list {args.eps!r}") from exc
        if int(cfg["order"]) < 1:
            raise ConfigError("order must be >= 1")
        model = build_model(cfg)
        HANDLERS[args.command](cfg, model, writer, args)
    except FKError as exc:
        status = 2
        writer.json("error.json", exc.to_dict())
    except (ValueError, KeyError, TypeError) as exc:
        status = 2
        writer.json("error.json", {"error": "invalid_input", "type": type(exc).__name__, "message": str(exc)})
    if status:
        print((out / "error.json").read_text(), file=sys.stderr, end="")
    inputs = {k: v for k, v in (cfg or {}).items() if not k.startswith("_")}
    manifest = {
        "command": args.command,
        "config_path": str(args.config),
        "inputs": inputs,
        "seed": args.seed,
        "versions": _versions(),
        "outputs": dict(sorted(writer.files.items())),
        "exit_code": status,
        "created": datetime.now(timezone.utc).isoformat(timespec="seconds"),
    }
    (out / "manifest.json").write_text(json.dumps(_jsonable(manifest), indent=1, sort_keys=True) + "\n")
    return status


if __name__ == "__main__":
    sys.exit(main())
