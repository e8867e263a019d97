"""Command-line front end.

Subcommands: ``point``, ``scan``, ``ratio``, ``subdivision``,
``phase-boundary`` and ``verify``. Run ``xyqfi <command> --help`` for flags.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, replace
from typing import Optional, Sequence

import numpy as np

from .errors import XyqfiError
from .model import ChainParams
from .polaron import BathParams, decay_factor, renormalized_couplings
from .qfi import (
    DEFAULT_N_LIST,
    microscopic_subdivision,
    phase_boundary_h,
    qfi_total,
    ratio_ppa,
    subdivision_regression,
)
from .thermo import free_entropy_jet

THREADS_ENV = "XYQFI_THREADS"
DEFAULT_SEED = 20240
CSV_COLUMNS = ("beta", "h", "qfi_psi_dd", "qfi_tilde", "qfi_curvature", "qfi_quantum", "qfi_total")

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class ConfigError(ValueError):
    """Invalid sweep configuration."""


def _fmt(x: float) -> str:
    return f"{x:.17g}"


# --- sweep configuration ------------------------------------------------------


@dataclass(frozen=True)
class Axis:
    lo: float
    hi: float
    count: int

    def values(self) -> np.ndarray:
        return np.linspace(self.lo, self.hi, self.count)


def _parse_axis(name: str, raw) -> float | Axis:
    if isinstance(raw, (int, float)) and not isinstance(raw, bool):
        return float(raw)
    if isinstance(raw, str):
        parts = raw.split(":")
        if len(parts) == 1:
            return float(parts[0])
        if len(parts) != 3:
            raise ConfigError(f"{name}: expected a number or 'min:max:count', got {raw!r}")
        raw = [float(parts[0]), float(parts[1]), parts[2]]
    if isinstance(raw, (list, tuple)) and len(raw) == 3:
        lo, hi, count = raw
        try:
            count_int = int(count)
        except (TypeError, ValueError):
            raise ConfigError(f"{name}: range count must be an integer") from None
        if count_int != float(count):
            raise ConfigError(f"{name}: range count must be an integer")
        if count_int < 2:
            raise ConfigError(f"{name}: range count must be at least 2, got {count_int}")
        return Axis(float(lo), float(hi), count_int)
    raise ConfigError(f"{name}: expected a number or [min, max, count], got {raw!r}")


@dataclass(frozen=True)
class SweepConfig:
    n: int = 8
    j: float = 1.0
    gamma: float = 0.25
    h: float | Axis = 1.0
    g: float = 0.2
    omega_c: float = 1.0
    beta: float | Axis = 1.0
    regime: str = "weak"
    parameter: str = "h"
    finite_size: bool = True
    ppa_ratio: bool = False
    output: Optional[str] = None

    def grid(self) -> list[tuple[float, float]]:
        betas = self.beta.values() if isinstance(self.beta, Axis) else [self.beta]
        hs = self.h.values() if isinstance(self.h, Axis) else [self.h]
        return [(float(b), float(h)) for b in betas for h in hs]


_TOP_KEYS = {"chain", "bath", "beta", "regime", "parameter", "finite_size", "ppa_ratio", "output"}
_CHAIN_KEYS = {"n", "j", "gamma", "h"}
_BATH_KEYS = {"g", "omega_c"}


def _strict(block: dict, allowed: set, where: str):
    if not isinstance(block, dict):
        raise ConfigError(f"{where} must be an object")
    unknown = set(block) - allowed
    if unknown:
        raise ConfigError(f"unknown key(s) in {where}: {', '.join(sorted(unknown))}")


def config_from_dict(data: dict) -> SweepConfig:
    _strict(data, _TOP_KEYS, "config")
    chain = data.get("chain", {})
    bath = data.get("bath", {})
    _strict(chain, _CHAIN_KEYS, "chain")
    _strict(bath, _BATH_KEYS, "bath")
    kw = {}
    for key in ("n", "j", "gamma"):
        if key in chain:
            kw[key] = chain[key]
    if "h" in chain:
        kw["h"] = _parse_axis("h", chain["h"])
    for key in ("g", "omega_c"):
        if key in bath:
            kw[key] = bath[key]
    if "beta" in data:
        kw["beta"] = _parse_axis("beta", data["beta"])
    for key in ("regime", "parameter", "finite_size", "ppa_ratio", "output"):
        if key in data:
            kw[key] = data[key]
    return _validated(SweepConfig(**kw))


def _validated(cfg: SweepConfig) -> SweepConfig:
    if isinstance(cfg.n, bool) or not isinstance(cfg.n, int):
        raise ConfigError("n must be an integer")
    if cfg.regime not in ("weak", "strong"):
        raise ConfigError("regime must be 'weak' or 'strong'")
    if cfg.parameter not in ("h", "beta"):
        raise ConfigError("parameter must be 'h' or 'beta'")
    for name in ("finite_size", "ppa_ratio"):
        if not isinstance(getattr(cfg, name), bool):
            raise ConfigError(f"{name} must be true or false")
    hs = (cfg.h.lo, cfg.h.hi) if isinstance(cfg.h, Axis) else (cfg.h,)
    for h in hs:
        _chain(cfg, h)
    betas = (cfg.beta.lo, cfg.beta.hi) if isinstance(cfg.beta, Axis) else (cfg.beta,)
    if not all(b > 0 for b in betas):
        raise ConfigError("beta must be positive")
    BathParams(float(cfg.g), float(cfg.omega_c))
    return cfg


def _chain(cfg: SweepConfig, h: float) -> ChainParams:
    return ChainParams(cfg.n, float(cfg.j), float(cfg.gamma), float(h))


def _bath(cfg: SweepConfig) -> BathParams:
    return BathParams(float(cfg.g), float(cfg.omega_c))


def compute_row(cfg: SweepConfig, beta: float, h: float) -> list[float]:
    """One CSV row; a pure function of the recorded inputs."""
    chain = _chain(cfg, h)
    res = qfi_total(chain, beta, cfg.parameter, _bath(cfg), cfg.regime, cfg.finite_size)
    row = [beta, h, res.psi_dd, res.tilde_c, res.curvature, res.quantum, res.total]
    if cfg.ppa_ratio:
        try:
            row.append(ratio_ppa(chain, beta, cfg.parameter, _bath(cfg), cfg.regime))
        except ZeroDivisionError:
            row.append(math.nan)
    return row


def thread_count(flag: Optional[int]) -> int:
    if flag is not None:
        return max(1, flag)
    env = os.environ.get(THREADS_ENV)
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return os.cpu_count() or 1


def run_scan(cfg: SweepConfig, threads: int = 1) -> str:
    grid = cfg.grid()
    with ThreadPoolExecutor(max_workers=threads) as pool:
        rows = list(pool.map(lambda p: compute_row(cfg, *p), grid))
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    header = list(CSV_COLUMNS) + (["ratio_ppa"] if cfg.ppa_ratio else [])
    writer.writerow(header)
    for row in rows:
        writer.writerow([_fmt(v) for v in row])
    return buf.getvalue()


# --- commands -----------------------------------------------------------------


def _point_record(chain: ChainParams, beta: float, bath: BathParams, regime: str, parameter: str,
                  finite_size: bool) -> dict:
    res = qfi_total(chain, beta, parameter, bath, regime, finite_size)
    strong = regime == "strong"
    c_avg = float(decay_factor(bath, beta).v) if strong else 1.0
    coup = renormalized_couplings(chain, c_avg)
    log_z = float(free_entropy_jet(chain, beta, parameter, bath, regime, finite_size).v)
    return {
        "psi_dd": res.psi_dd,
        "tilde_c": res.tilde_c,
        "curvature": res.curvature,
        "quantum": res.quantum,
        "total": res.total,
        "classical": res.classical,
        "c_avg": c_avg,
        "h_flat": float(coup.h),
        "gamma_flat": float(coup.gamma),
        "j_flat": float(coup.j),
        "log_z": log_z,
    }


def cmd_point(args) -> int:
    chain = ChainParams(args.n, args.j, args.gamma, args.h)
    bath = BathParams(args.g, args.omega_c)
    record = {
        "inputs": {"n": args.n, "j": args.j, "gamma": args.gamma, "h": args.h, "beta": args.beta,
                   "g": args.g, "omega_c": args.omega_c, "regime": args.regime, "parameter": args.parameter,
                   "finite_size": not args.ppa},
        "result": _point_record(chain, args.beta, bath, args.regime, args.parameter, not args.ppa),
    }
    print(json.dumps(record, indent=2))
    return EXIT_OK


def _load_config(path: Optional[str]) -> dict:
    if path is None:
        return {}
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def _scan_config(args) -> SweepConfig:
    data = _load_config(args.config)
    cfg = config_from_dict(data)
    overrides = {}
    for key in ("n", "j", "gamma", "g", "omega_c", "regime", "parameter", "output"):
        val = getattr(args, key)
        if val is not None:
            overrides[key] = val
    if args.h is not None:
        overrides["h"] = _parse_axis("h", args.h)
    if args.beta is not None:
        overrides["beta"] = _parse_axis("beta", args.beta)
    if args.ppa:
        overrides["finite_size"] = False
    if args.ppa_ratio:
        overrides["ppa_ratio"] = True
    return _validated(replace(cfg, **overrides))


def cmd_scan(args) -> int:
    cfg = _scan_config(args)
    text = run_scan(cfg, thread_count(args.threads))
    if cfg.output in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(cfg.output, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    return EXIT_OK


def cmd_ratio(args) -> int:
    bath = BathParams(args.g, args.omega_c)
    records = []
    for n in args.n:
        chain = ChainParams(n, args.j, args.gamma, args.h)
        full = qfi_total(chain, args.beta, args.parameter, bath, args.regime, True).total
        ppa = qfi_total(chain, args.beta, args.parameter, bath, args.regime, False).total
        records.append({"n": n, "qfi_finite": full, "qfi_ppa": ppa,
                        "ratio": ratio_ppa(chain, args.beta, args.parameter, bath, args.regime)})
    print(json.dumps(records, indent=2))
    return EXIT_OK


def cmd_subdivision(args) -> int:
    chain = ChainParams(args.n, args.j, args.gamma, args.h)
    bath = BathParams(args.g, args.omega_c)
    if args.source == "microscopic":
        e_sub = microscopic_subdivision(chain, bath, args.beta)
        record = {"source": "microscopic", "e_sub": e_sub, "f_bulk": None, "a_ratio": None, "residual": None}
    else:
        record = asdict(subdivision_regression(chain, args.beta, tuple(args.n_list), args.source, bath))
    print(json.dumps(record, indent=2))
    return EXIT_OK


def cmd_phase_boundary(args) -> int:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["g", "beta", "h_star"])
    chain = ChainParams(2, args.j, args.gamma, 0.0)
    for beta in args.beta:
        for g in args.g:
            writer.writerow([_fmt(g), _fmt(beta), _fmt(phase_boundary_h(chain, BathParams(g, args.omega_c), beta))])
    if args.output in (None, "-"):
        sys.stdout.write(buf.getvalue())
    else:
        with open(args.output, "w", encoding="utf-8", newline="") as fh:
            fh.write(buf.getvalue())
    return EXIT_OK


def cmd_verify(args) -> int:
    from .verify import format_table, timed_suite

    results, elapsed = timed_suite(args.level, args.seed, args.perturb_energy)
    print(format_table(results, elapsed))
    return EXIT_OK if all(r.passed for r in results) else EXIT_FAIL


# --- parser -------------------------------------------------------------------


def _even_int(text: str) -> int:
    try:
        n = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid integer {text!r}") from None
    if n < 2 or n % 2:
        raise argparse.ArgumentTypeError("N must be even and at least 2")
    return n


def _physics_flags(p: argparse.ArgumentParser, defaults: bool = True, multi_n: bool = False):
    d = (lambda v: v) if defaults else (lambda v: None)
    if multi_n:
        p.add_argument("--n", type=_even_int, nargs="+", default=[8], help="chain length(s)")
    else:
        p.add_argument("--n", type=_even_int, default=d(8), help="chain length N (even)")
    p.add_argument("--j", type=float, default=d(1.0), help="exchange coupling J")
    p.add_argument("--gamma", type=float, default=d(0.25), help="anisotropy in [0, 1]")
    p.add_argument("--g", type=float, default=d(0.2), help="site-bath coupling")
    p.add_argument("--omega-c", dest="omega_c", type=float, default=d(1.0), help="bath cutoff frequency")
    p.add_argument("--regime", choices=("weak", "strong"), default=d("weak"))
    p.add_argument("--parameter", choices=("h", "beta"), default=d("h"), help="estimated parameter")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="xyqfi", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("point", help="QFI breakdown at a single point (JSON)")
    _physics_flags(p)
    p.add_argument("--h", type=float, default=1.0)
    p.add_argument("--beta", type=float, default=1.0)
    p.add_argument("--ppa", action="store_true", help="use the positive-parity approximation")
    p.set_defaults(func=cmd_point)

    p = sub.add_parser("scan", help="QFI over a grid of (beta, h), written as CSV")
    p.add_argument("--config", help="JSON sweep configuration")
    _physics_flags(p, defaults=False)
    p.add_argument("--h", help="value or min:max:count")
    p.add_argument("--beta", help="value or min:max:count")
    p.add_argument("--ppa", action="store_true", help="use the positive-parity approximation")
    p.add_argument("--ppa-ratio", dest="ppa_ratio", action="store_true", help="append the PPA ratio column")
    p.add_argument("--output", help="CSV path ('-' for stdout)")
    p.add_argument("--threads", type=int, help=f"worker threads (default: ${THREADS_ENV} or CPU count)")
    p.set_defaults(func=cmd_scan)

    p = sub.add_parser("ratio", help="PPA-to-finite-size QFI ratio for one or more N")
    _physics_flags(p, multi_n=True)
    p.add_argument("--h", type=float, default=2.0)
    p.add_argument("--beta", type=float, default=5.0)
    p.set_defaults(func=cmd_ratio)

    p = sub.add_parser("subdivision", help="subdivision potential of the finite chain")
    _physics_flags(p)
    p.add_argument("--h", type=float, default=1.0)
    p.add_argument("--beta", type=float, default=1.0)
    p.add_argument("--source", choices=("bare", "effective", "microscopic"), default="bare")
    p.add_argument("--n-list", dest="n_list", type=_even_int, nargs="+", default=list(DEFAULT_N_LIST))
    p.set_defaults(func=cmd_subdivision)

    p = sub.add_parser("phase-boundary", help="critical field of the dressed chain (CSV)")
    p.add_argument("--j", type=float, default=1.0)
    p.add_argument("--gamma", type=float, default=0.25)
    p.add_argument("--omega-c", dest="omega_c", type=float, default=1.0)
    p.add_argument("--g", type=float, nargs="+", default=[0.0, 0.1, 0.2, 0.3])
    p.add_argument("--beta", type=float, nargs="+", default=[1.0, 5.0])
    p.add_argument("--output", help="CSV path ('-' for stdout)")
    p.set_defaults(func=cmd_phase_boundary)

    p = sub.add_parser("verify", help="compare the analytic pipeline against exact diagonalization")
    p.add_argument("--level", choices=("fast", "full"), default="fast")
    p.add_argument("--seed", type=int, default=DEFAULT_SEED, help=f"random seed (default {DEFAULT_SEED})")
    p.add_argument("--perturb-energy", dest="perturb_energy", type=float, default=0.0,
                   help=argparse.SUPPRESS)
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, XyqfiError, json.JSONDecodeError) as exc:
        if isinstance(exc, (ConfigError, json.JSONDecodeError)) or isinstance(exc, ValueError):
            parser.error(str(exc))
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
