"""Command-line front end.

Every subcommand reads an optional YAML config, applies flag overrides,
prints a JSON report on stdout and, with ``--out DIR``, writes
``report.json`` (and ``replications.csv`` where applicable). Exit codes:
0 success, 1 infeasible configuration, 2 usage or config error.
"""
from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import math
import sys
from fractions import Fraction
from pathlib import Path

import mpmath as mp
import numpy as np
import yaml

from . import fuzzy
from .estimators import GaussianDensity, risk_mc
from .family import Constants, Functional, SelectionInputs, select_parameters
from .measures import MomentMeasure, build_pair_prop1, build_pair_prop2, parse_target
from .rates import ClassParams, rate_noninteger, rate_integer, rates_summary
from .schemas import CSV_HEADERS

COMMANDS = ("rates", "priors", "family-check", "lb-experiment", "plugin-risk")


class ConfigError(ValueError):
    def __init__(self, field: str | None, msg: str):
        super().__init__(f"{field}: {msg}" if field else msg)
        self.field = field


# ----------------------------------------------------------------------------
# serialisation


def to_jsonable(obj):
    """Plain JSON types; non-finite floats become ``"inf"``, ``"-inf"``, ``"nan"``."""
    if obj is None or isinstance(obj, (bool, str)):
        return obj
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x
    if isinstance(obj, Fraction):
        return str(obj)
    if isinstance(obj, mp.mpf):
        return mp.nstr(obj, 30, strip_zeros=False)
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items() if not callable(v)}
    if isinstance(obj, (list, tuple, np.ndarray)):
        return [to_jsonable(v) for v in obj]
    if hasattr(obj, "value") and isinstance(getattr(obj, "value"), str):
        return obj.value
    if callable(obj):
        return None
    return str(obj)


def dumps(obj) -> str:
    return json.dumps(to_jsonable(obj), indent=2, sort_keys=True, allow_nan=False) + "\n"


def fmt_float(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return str(int(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return "%.17g" % float(x)


def csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt_float(v) for v in row])
    return buf.getvalue()


def config_hash(cfg: dict) -> str:
    return hashlib.sha256(json.dumps(to_jsonable(cfg), sort_keys=True).encode()).hexdigest()


# ----------------------------------------------------------------------------
# config parsing


def _num(value, field: str, allow_inf: bool = True) -> float:
    if isinstance(value, str) and value.strip().lower() in ("inf", "+inf", "infinity"):
        if not allow_inf:
            raise ConfigError(field, "must be finite")
        return math.inf
    try:
        x = float(value)
    except (TypeError, ValueError):
        raise ConfigError(field, f"expected a number or 'inf', got {value!r}") from None
    if math.isnan(x):
        raise ConfigError(field, "must not be nan")
    return x


def _int(value, field: str, minimum: int | None = None) -> int:
    try:
        x = int(value)
    except (TypeError, ValueError):
        raise ConfigError(field, f"expected an integer, got {value!r}") from None
    if isinstance(value, float) and not value.is_integer():
        raise ConfigError(field, f"expected an integer, got {value!r}")
    if minimum is not None and x < minimum:
        raise ConfigError(field, f"must be >= {minimum}")
    return x


def _vec(value, field: str, d: int, default=None) -> tuple:
    if value is None:
        if default is None:
            raise ConfigError(field, "missing")
        value = default
    if not isinstance(value, (list, tuple)):
        value = [value] * d
    if len(value) != d:
        raise ConfigError(field, f"expected {d} entries, got {len(value)}")
    return tuple(_num(v, f"{field}[{i}]") for i, v in enumerate(value))


def parse_class(cfg: dict) -> ClassParams:
    c = cfg.get("class")
    if not isinstance(c, dict):
        raise ConfigError("class", "missing mapping with d, beta, r, L, p, q")
    d = _int(c.get("d"), "class.d", 1)
    beta = _vec(c.get("beta"), "class.beta", d)
    r = _vec(c.get("r"), "class.r", d)
    L = _vec(c.get("L"), "class.L", d, default=[1.0] * d)
    p = _num(c.get("p"), "class.p", allow_inf=False)
    q = _num(c.get("q", "inf"), "class.q")
    try:
        return ClassParams(d, beta, r, L, p, q)
    except ValueError as exc:
        raise ConfigError("class", str(exc)) from None


def parse_constants(cfg: dict) -> Constants:
    c = cfg.get("constants") or {}
    if not isinstance(c, dict):
        raise ConfigError("constants", "expected a mapping")
    known = set(Constants.__dataclass_fields__)
    extra = set(c) - known
    if extra:
        raise ConfigError("constants", f"unknown keys {sorted(extra)}")
    vals = {}
    for k, v in c.items():
        x = _num(v, f"constants.{k}", allow_inf=False)
        if x <= 0:
            raise ConfigError(f"constants.{k}", "must be positive")
        vals[k] = x
    return Constants(**vals)


def parse_pair(cfg: dict) -> fuzzy.PairSpec:
    c = cfg.get("prior") or {}
    mode = c.get("mode", "prop1")
    if mode not in ("prop1", "prop2", "identical"):
        raise ConfigError("prior.mode", "must be prop1, prop2 or identical")
    s = _int(c.get("s", 2), "prior.s", 1)
    t = _int(c.get("t", 2), "prior.t", 2)
    if mode != "prop2" and t > s:
        raise ConfigError("prior.t", "must satisfy 1 < t <= s")
    target = str(c.get("target", "power:2.5"))
    try:
        parse_target(target)
    except ValueError as exc:
        raise ConfigError("prior.target", str(exc)) from None
    return fuzzy.PairSpec(mode, s, t, target)


def parse_functional(value, field: str = "functional") -> Functional:
    if isinstance(value, str):
        kind, _, p = value.partition(":")
        value = {"kind": kind, "p": p or None}
    if not isinstance(value, dict):
        raise ConfigError(field, "expected {kind, p} or 'Kind:p'")
    kind = value.get("kind", "LpNorm")
    p = value.get("p")
    try:
        return Functional(kind, None if p is None else _num(p, f"{field}.p", allow_inf=False))
    except ValueError as exc:
        raise ConfigError(field, str(exc)) from None


# ----------------------------------------------------------------------------
# subcommands


def measure_json(m: MomentMeasure) -> dict:
    pieces = []
    for pc in m.pieces:
        pieces.append({
            "interval": [to_jsonable(_dec(pc.lo)), to_jsonable(_dec(pc.hi))],
            "coefficients": [_dec(c) for c in pc.poly.coeffs],
            "extra_terms": [{"coef": _dec(t.coef), "power": _dec(t.power), "log_power": t.log_power}
                            for t in pc.extra],
        })
    return {"atoms": [[_dec(a), _dec(w)] for a, w in m.atoms], "pieces": pieces}


def _dec(x) -> str:
    if isinstance(x, Fraction):
        return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"
    if isinstance(x, int):
        return str(x)
    with mp.workdps(40):
        return mp.nstr(mp.mpf(x), 30, strip_zeros=False)


def cmd_rates(cfg: dict, args) -> tuple[dict, list | None, int]:
    params = parse_class(cfg)
    return rates_summary(params), None, 0


def cmd_priors(cfg: dict, args) -> tuple[dict, list | None, int]:
    pc = dict(cfg.get("prior") or {})
    for key in ("mode", "s", "t"):
        if getattr(args, key, None) is not None:
            pc[key] = getattr(args, key)
    if args.functional is not None:
        pc["target"] = args.functional
    mode = pc.get("mode", "prop1")
    if mode not in ("prop1", "prop2"):
        raise ConfigError("mode", "must be prop1 or prop2")
    s = _int(pc.get("s", 2), "s", 1)
    if mode == "prop1":
        t = _int(pc.get("t", 2), "t", 2)
        if t > s:
            raise ConfigError("t", "must satisfy 1 < t <= s")
        pair = build_pair_prop1(s, t)
    else:
        try:
            target = parse_target(str(pc.get("target", "power:2.5")))
        except ValueError as exc:
            raise ConfigError("functional", str(exc)) from None
        pair = build_pair_prop2(target, s)
    moments = []
    for k in range(2 * s + 1):
        if pair.mu.is_rational and pair.nu.is_rational:
            a, b = pair.mu.moment_exact(k), pair.nu.moment_exact(k)
            moments.append({"k": k, "mu": _dec(a), "nu": _dec(b), "difference": _dec(a - b)})
        else:
            with mp.workdps(60):
                a, b = pair.mu.moment_mp(k), pair.nu.moment_mp(k)
                moments.append({"k": k, "mu": _dec(a), "nu": _dec(b), "difference": _dec(a - b)})
    cert = {k: v for k, v in pair.certificate.items() if k not in ("K", "remez")}
    if "remez" in pair.certificate:
        cert["remez"] = pair.certificate["remez"]
    report = {"mode": mode, "s": s, "matched_upto": pair.matched_upto,
              "mismatch_index": pair.mismatch_index, "mu": measure_json(pair.mu),
              "nu": measure_json(pair.nu), "moments": moments, "gap": float(pair.gap),
              "certificate": cert}
    return report, None, 0


def _selection_inputs(cfg: dict, args) -> tuple[SelectionInputs, fuzzy.PairSpec]:
    params = parse_class(cfg)
    n = _int(args.n if args.n is not None else cfg.get("n"), "n", 2)
    r = _int(args.r if args.r is not None else cfg.get("r", 2), "r", 1)
    spec = parse_pair(cfg)
    return SelectionInputs(params, n, r, spec.build(), parse_constants(cfg)), spec


def cmd_family_check(cfg: dict, args) -> tuple[dict, list | None, int]:
    si, _ = _selection_inputs(cfg, args)
    res = select_parameters(si)
    return res.as_dict(), None, 0 if res.feasible else 1


def cmd_lb(cfg: dict, args) -> tuple[dict, list | None, int]:
    si, spec = _selection_inputs(cfg, args)
    F = parse_functional(args.functional if args.functional is not None
                         else cfg.get("functional", {"kind": "LpNorm", "p": si.params.p}))
    reps = _int(args.reps if args.reps is not None else cfg.get("reps", 100), "reps", 1)
    lb = fuzzy.LBConfig(si.params, si.n, si.r, spec, F, reps, args.seed, si.constants,
                        args.threads)
    rep = fuzzy.run_lb_experiment(lb)
    return rep.as_dict(), rep.rows, 0 if rep.feasible else 1


def cmd_plugin_risk(cfg: dict, args) -> tuple[dict, list | None, int]:
    dens = cfg.get("density") or {"kind": "gaussian"}
    if dens.get("kind", "gaussian") != "gaussian":
        raise ConfigError("density.kind", "only 'gaussian' has a closed-form norm")
    d = _int(dens.get("d", 1), "density.d", 1)
    if d > 2:
        raise ConfigError("density.d", "grid KDE supports d <= 2")
    sigma = _num(dens.get("sigma", 1.0), "density.sigma", allow_inf=False)
    p = _num(cfg.get("p", 2.5), "p", allow_inf=False)
    if p < 1:
        raise ConfigError("p", "must be >= 1")
    beta = _vec(cfg.get("beta", 2.0), "beta", d)
    n_grid = cfg.get("n_grid", [2 ** k for k in range(10, 15)])
    if args.n is not None:
        n_grid = [args.n]
    n_grid = [_int(v, "n_grid", 2) for v in n_grid]
    reps = _int(args.reps if args.reps is not None else cfg.get("reps", 200), "reps", 2)
    scale = _num(cfg.get("bandwidth_scale", 2.0), "bandwidth_scale", allow_inf=False)
    predicted = None
    if "class" in cfg:
        params = parse_class(cfg)
        predicted = (rate_integer(params) if params.p_is_integer else rate_noninteger(params)).exponent
    rep = risk_mc(GaussianDensity(d, sigma), n_grid, reps, p, beta, seed=args.seed,
                  bandwidth_scale=scale, predicted=predicted, threads=args.threads)
    rows = [(n, r, s, h[0]) for n, r, s, h in zip(rep.n_grid, rep.risks, rep.stderrs, rep.bandwidths)]
    return rep.as_dict(), rows, 0


HANDLERS = {
    "rates": cmd_rates,
    "priors": cmd_priors,
    "family-check": cmd_family_check,
    "lb-experiment": cmd_lb,
    "plugin-risk": cmd_plugin_risk,
}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="lpnorm-minimax", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", type=Path, help="YAML config file")
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--out", type=Path, help="directory for report.json / replications.csv")
        sp.add_argument("--reps", type=int)
        sp.add_argument("--threads", type=int, default=1)
        if name == "priors":
            sp.add_argument("--mode", choices=["prop1", "prop2"])
            sp.add_argument("--s", type=int)
            sp.add_argument("--t", type=int)
            sp.add_argument("--functional", help="power:<p> or entropy")
        if name in ("family-check", "lb-experiment", "plugin-risk"):
            sp.add_argument("--n", type=int)
            sp.add_argument("--r", type=int)
        if name == "lb-experiment":
            sp.add_argument("--functional", help="Kind:p, e.g. LpNorm:2")
    return ap


def load_config(path: Path | None) -> dict:
    if path is None:
        return {}
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError("--config", f"cannot read {path}: {exc.strerror}") from None
    try:
        cfg = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError("--config", f"malformed YAML: {exc}") from None
    if cfg is None:
        return {}
    if not isinstance(cfg, dict):
        raise ConfigError("--config", "top level must be a mapping")
    return cfg


def run(argv=None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if args.seed < 0 or args.threads < 1 or (args.reps is not None and args.reps < 1):
        stderr.write("error: --seed must be >= 0, --threads and --reps >= 1\n")
        return 2
    try:
        cfg = load_config(args.config)
        effective = {"config": cfg, "command": args.command,
                     "overrides": {k: v for k, v in vars(args).items()
                                   if k not in ("config", "out", "command", "threads") and v is not None}}
        report, rows, code = HANDLERS[args.command](cfg, args)
    except ConfigError as exc:
        stderr.write(dumps({"error": str(exc), "field": exc.field}))
        return 2
    except ValueError as exc:
        stderr.write(dumps({"error": str(exc), "field": None}))
        return 2
    report = {**report, "config_hash": config_hash(effective), "seed": args.seed,
              "command": args.command}
    text = dumps(report)
    stdout.write(text)
    if args.out is not None:
        args.out.mkdir(parents=True, exist_ok=True)
        (args.out / "report.json").write_text(text)
        if rows is not None:
            (args.out / "replications.csv").write_text(csv_text(CSV_HEADERS[args.command], rows))
    return code


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
