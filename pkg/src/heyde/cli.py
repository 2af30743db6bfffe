"""Command-line runner: certificates, symmetry checks and sweeps as JSON.

Exit codes: 0 success, 1 a check failed, 2 invalid configuration.
Every flag can also be set through an environment variable ``HEYDE_<FLAG>``
(e.g. ``HEYDE_SEED=3``); explicit flags win over the environment. Command
parameters live in the JSON ``--config`` file.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from .endomorphism import Endo
from .engine import (
    _jsonable,
    brute_force_conditional_symmetry,
    check_symmetry_charfn,
    decompose_A,
    derive_A_B,
    test_membership_gamma_G,
    verify_eq9_eq10,
)
from .groups import GroupSpec
from .measures import FiniteMeasure, TorusCharFn
from .scenarios import FAMILIES, run_sweep
from .torus import CounterexampleConfig, build_counterexample, certify

ENV_PREFIX = "HEYDE_"
EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2


class ConfigError(ValueError):
    pass


def _dump(obj) -> str:
    return json.dumps(_deep_jsonable(obj), sort_keys=True, indent=2) + "\n"


def _deep_jsonable(v):
    if isinstance(v, dict):
        return {str(k): _deep_jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_deep_jsonable(x) for x in v]
    if isinstance(v, (np.bool_,)):
        return bool(v)
    if isinstance(v, complex):
        return [v.real, v.imag]
    return _jsonable(v)


def _emit(payload, out: str | None) -> None:
    text = _dump(payload)
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _take(cfg: dict, key: str, default=None):
    return cfg.pop(key, default)


def _reject_extra(cfg: dict, command: str) -> None:
    if cfg:
        raise ConfigError(f"unknown keys for {command}: {sorted(cfg)}")


def _measure(data, spec: GroupSpec):
    if not isinstance(data, dict):
        raise ConfigError("a measure must be a JSON object")
    if spec.is_finite:
        return FiniteMeasure.from_dict(data, spec)
    return TorusCharFn.from_dict(data)


def _pair_source(cfg: dict):
    """Measures and automorphism from either explicit blocks or the torus construction."""
    if "counterexample" in cfg:
        cc = CounterexampleConfig.from_dict(_take(cfg, "counterexample") or {})
        c = build_counterexample(cc)
        return c.alpha, c.damped.g1, c.damped.g2
    missing = [k for k in ("group", "alpha", "mu1", "mu2") if k not in cfg]
    if missing:
        raise ConfigError(f"missing {missing}; give group, alpha, mu1, mu2 (or counterexample)")
    spec = GroupSpec.from_dict(_take(cfg, "group"))
    alpha = Endo(spec, tuple(map(tuple, _take(cfg, "alpha"))))
    return alpha, _measure(_take(cfg, "mu1"), spec), _measure(_take(cfg, "mu2"), spec)


# -- commands --------------------------------------------------------------------------


def cmd_counterexample(cfg: dict, args) -> int:
    sym_radius = _take(cfg, "sym_radius")
    cc = CounterexampleConfig.from_dict(cfg)
    try:
        c = build_counterexample(cc)
    except ValueError as exc:
        _emit({"config": cc.to_dict(), "valid": False, "failed_stage": "build", "error": str(exc)}, args.out)
        return EXIT_FAIL
    cert = certify(c, sym_radius=sym_radius)
    _emit(cert.to_dict(), args.out)
    print(cert.summary(), file=sys.stderr)
    return EXIT_OK if cert.valid else EXIT_FAIL


def cmd_check_symmetry(cfg: dict, args) -> int:
    radius = _take(cfg, "radius")
    alpha, mu1, mu2 = _pair_source(cfg)
    _reject_extra(cfg, "check-symmetry")
    cf = check_symmetry_charfn(mu1, mu2, alpha, radius=radius, tol=args.tolerance, seed=args.seed)
    payload = {"charfn": cf.to_dict(), "verdict": cf.verdict}
    agree = True
    if alpha.spec.is_finite:
        bf = brute_force_conditional_symmetry(mu1, mu2, alpha, tol=args.tolerance)
        agree = bf.verdict == cf.verdict
        payload["brute_force"] = bf.to_dict()
    payload["methods_agree"] = agree
    _emit(payload, args.out)
    return EXIT_OK if agree else EXIT_FAIL


def cmd_decompose(cfg: dict, args) -> int:
    radius = _take(cfg, "radius", 4)
    fd_radius = _take(cfg, "fd_radius", 2)
    alpha, mu1, mu2 = _pair_source(cfg)
    _reject_extra(cfg, "decompose")
    psi = derive_A_B(mu1, mu2, alpha)
    fd = verify_eq9_eq10(psi.A, alpha, radius=fd_radius, tol=args.tolerance, seed=args.seed)
    dec = decompose_A(psi.A, alpha.spec, radius=radius, tol=args.tolerance)
    ok = fd.verdict and dec.verdict
    _emit({"finite_differences": fd.to_dict(), "decomposition": dec.to_dict(), "ok": ok}, args.out)
    return EXIT_OK if ok else EXIT_FAIL


def cmd_membership(cfg: dict, args) -> int:
    radius = _take(cfg, "radius")
    if "counterexample" in cfg:
        which = _take(cfg, "which", "g1")
        c = build_counterexample(CounterexampleConfig.from_dict(_take(cfg, "counterexample") or {}))
        if which not in ("g1", "g2"):
            raise ConfigError("which must be g1 or g2")
        mu = getattr(c.damped, which)
    else:
        if "measure" not in cfg or "group" not in cfg:
            raise ConfigError("need group and measure (or counterexample)")
        spec = GroupSpec.from_dict(_take(cfg, "group"))
        mu = _measure(_take(cfg, "measure"), spec)
    _reject_extra(cfg, "membership")
    rep = test_membership_gamma_G(mu, radius=radius, tol=args.tolerance)
    _emit(rep.to_dict(), args.out)
    return EXIT_OK if rep.verdict else EXIT_FAIL


def cmd_sweep(cfg: dict, args) -> int:
    csv_path = _take(cfg, "csv")
    csv_path = args.csv or csv_path
    families = tuple(_take(cfg, "families", FAMILIES))
    bad = set(families) - set(FAMILIES)
    if bad:
        raise ConfigError(f"unknown families {sorted(bad)}; choose from {FAMILIES}")
    kw = {
        "max_order": int(_take(cfg, "max_order", 12)),
        "pairs": int(_take(cfg, "pairs", 200)),
        "max_automorphisms": _take(cfg, "max_automorphisms"),
        "deep": bool(_take(cfg, "deep", True)),
        "fault": _take(cfg, "fault"),
    }
    _reject_extra(cfg, "sweep")
    tol = 1e-12 if args.tolerance is None else args.tolerance
    res = run_sweep(seed=args.seed, tol=tol, families=families, **kw)
    if csv_path:
        Path(csv_path).write_text(res.to_csv())
    _emit(res.to_dict(), args.out)
    return EXIT_OK if res.ok else EXIT_FAIL


COMMANDS = {
    "counterexample": cmd_counterexample,
    "check-symmetry": cmd_check_symmetry,
    "sweep": cmd_sweep,
    "decompose": cmd_decompose,
    "membership": cmd_membership,
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="heyde", description=__doc__.splitlines()[0])
    p.add_argument("command", choices=sorted(COMMANDS))
    p.add_argument("--config", help="JSON file with the command's parameters")
    p.add_argument("--seed", type=int, help="random seed (default 0)")
    p.add_argument("--tolerance", type=float, help="residual tolerance override")
    p.add_argument("--out", help="write the JSON report here instead of stdout")
    p.add_argument("--csv", help="sweep only: write per-case rows as CSV")
    return p


def _apply_env(args) -> None:
    for name, conv in (("config", str), ("seed", int), ("tolerance", float), ("out", str), ("csv", str)):
        env = os.environ.get(ENV_PREFIX + name.upper())
        if getattr(args, name) is None and env is not None:
            try:
                setattr(args, name, conv(env))
            except ValueError as exc:
                raise ConfigError(f"{ENV_PREFIX}{name.upper()}={env!r}: {exc}") from exc
    if args.seed is None:
        args.seed = 0


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse usage errors are configuration errors
        return EXIT_CONFIG if exc.code else EXIT_OK
    try:
        _apply_env(args)
        cfg = {}
        if args.config:
            cfg = json.loads(Path(args.config).read_text())
            if not isinstance(cfg, dict):
                raise ConfigError("config file must hold a JSON object")
        return COMMANDS[args.command](cfg, args)
    except (ValueError, KeyError, TypeError, AttributeError, OSError) as exc:
        # json.JSONDecodeError and ConfigError are ValueErrors
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
