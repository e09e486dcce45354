"""Command-line front end.

Value precedence, lowest to highest: built-in defaults (the base case below),
keys from ``--config FILE``, explicit command-line flags.  The subcommand
fixes the run mode, except for ``run`` which takes it from the config file.

Every command writes a CSV (one header row, values printed with 10
significant digits) to ``--out`` or, without ``--out``, to standard output
after the headline lines.
"""
from __future__ import annotations

import argparse
import io
import sys
from pathlib import Path

import numpy as np

from . import reproduce as rp
from .analytic import vanilla_price
from .config import ConfigError, RunConfig, build_config, parse_values
from .engine import NoFairFee, fair_fee, price_deterministic_rate, price_dynamic, price_static, price_vanilla
from .mc import MCConfig, mc_price_static, mc_vanilla
from .model import bond_price

DEFAULTS = {
    "sigma_S": 0.2,
    "rho": 0.0,
    "kappa": 0.0349,
    "theta": 0.05,
    "sigma_r": 0.02,
    "S0": 1.0,
    "r0": 0.05,
    "premium": 1.0,
    "T": 10.0,
    "Nw": 4,
    "beta": 0.1,
}

# flag dest -> config key, for flags that simply override one key
_OVERRIDES = {
    "sigma_s": "sigma_S",
    "rho": "rho",
    "kappa": "kappa",
    "theta": "theta",
    "sigma_r": "sigma_r",
    "s0": "S0",
    "r0": "r0",
    "alpha_bp": "alpha_bp",
    "T": "T",
    "Nw": "Nw",
    "beta": "beta",
    "mesh": "mesh",
    "quad": "quad",
    "transform": "transform",
    "J": "J",
    "threads": "threads",
    "seed": "seed",
    "n_paths": "n_paths",
    "antithetic": "antithetic",
    "strategy": "strategy",
    "strike": "strike",
    "kind": "kind",
    "maturity": "maturity",
    "yield_rate": "yield_rate",
    "rate": "rate",
    "out": "out",
}


def _quad(text: str):
    try:
        q1, q2 = (int(p) for p in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError("expected q1,q2 (two integers)") from None
    return q1, q2


def _common(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("inputs")
    g.add_argument("--config", type=Path, help="key=value file; flags override its keys")
    g.add_argument("--out", help="CSV output path (default: standard output)")
    g.add_argument("--threads", type=int)
    g.add_argument("--seed", type=int, help="Monte Carlo master seed")
    g.add_argument("--rho", type=float)
    g.add_argument("--alpha-bp", dest="alpha_bp", type=float, help="annual fee in basis points")
    g.add_argument("--sigma-r", dest="sigma_r", type=float)
    g.add_argument("--sigma-s", dest="sigma_s", type=float)
    g.add_argument("--kappa", type=float)
    g.add_argument("--theta", type=float)
    g.add_argument("--r0", type=float)
    g.add_argument("--s0", type=float)
    g.add_argument("--T", dest="T", type=float, help="contract maturity in years")
    g.add_argument("--Nw", dest="Nw", type=int, help="withdrawals per year")
    g.add_argument("--beta", type=float, help="penalty on excess withdrawals")
    g.add_argument("--mesh", choices=("coarse", "fine", "vanilla"))
    g.add_argument("--quad", type=_quad, help="quadrature orders q1,q2")
    g.add_argument("--transform", choices=("rotation", "cholesky"))
    g.add_argument("--J", dest="J", type=int, help="guarantee-account levels for optimal withdrawals")
    g.add_argument("--n-paths", dest="n_paths", type=int)
    g.add_argument("--antithetic", action="store_const", const=True)


def _mode_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--mode", choices=("static", "dynamic", "deterministic"), default=None)
    p.add_argument(
        "--strategy",
        choices=("static", "dynamic"),
        help="withdrawal strategy used with --mode deterministic (default static)",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gmwb", description="Variable annuity GMWB pricing under stochastic rates.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("vanilla", help="European option: closed form and quadrature engine")
    _common(p)
    p.add_argument("--strike", type=float)
    p.add_argument("--kind", choices=("call", "put"))
    p.add_argument("--maturity", type=float)
    p.add_argument("--yield-rate", dest="yield_rate", type=float)

    p = sub.add_parser("bond", help="zero-coupon bond price")
    _common(p)
    p.add_argument("--maturity", type=float)
    p.add_argument("--rate", type=float, help="short rate (default r0)")

    p = sub.add_parser("price", help="GMWB contract value")
    _common(p)
    _mode_flags(p)

    p = sub.add_parser("fair-fee", help="fee at which the contract is worth the premium")
    _common(p)
    _mode_flags(p)

    p = sub.add_parser("mc", help="Monte Carlo value of the static contract, or of a European option with --kind")
    _common(p)
    p.add_argument("--kind", choices=("call", "put"))
    p.add_argument("--strike", type=float)
    p.add_argument("--maturity", type=float)
    p.add_argument("--yield-rate", dest="yield_rate", type=float)

    p = sub.add_parser("reproduce", help="published tables and figure data")
    _common(p)
    what = p.add_mutually_exclusive_group(required=True)
    what.add_argument("--table", type=int, choices=range(1, 7))
    what.add_argument("--figure", type=int, choices=(2,))
    p.add_argument("--mc-paths", dest="mc_paths", type=int, default=1_000_000, help="0 skips simulation columns")

    p = sub.add_parser("run", help="run the job described by --config")
    _common(p)
    return parser


def resolve_config(args: argparse.Namespace) -> RunConfig:
    """Merge defaults, config file and flags, then validate."""
    values = dict(DEFAULTS)
    lines: dict = {}
    if args.config is not None:
        try:
            text = args.config.read_text(encoding="utf-8")
        except OSError as e:
            raise ConfigError([f"cannot read config: {e}"]) from None
        file_values, lines = parse_values(text)
        if "alpha" in file_values or "alpha_bp" in file_values:
            values.pop("alpha", None)
        values.update(file_values)
    for dest, key in _OVERRIDES.items():
        v = getattr(args, dest, None)
        if v is not None:
            values[key] = v
            lines.pop(key, None)
    if getattr(args, "alpha_bp", None) is not None:
        values.pop("alpha", None)
    if args.command == "run":
        values.setdefault("mode", None)
        if values["mode"] is None:
            raise ConfigError(["missing required key 'mode'"])
    elif args.command in ("price", "fair-fee"):
        mode = args.mode or ("static" if values.get("mode") not in ("static", "dynamic", "deterministic") else values["mode"])
        if args.command == "fair-fee":
            values["strategy"] = _fee_mode(mode, values.get("strategy"))
            values["mode"] = "fair-fee"
        else:
            values["mode"] = mode
    elif args.command == "reproduce":
        values["mode"] = "static"
    else:
        values["mode"] = args.command
    if "quad" in values and not isinstance(values["quad"], tuple):
        values["quad"] = tuple(values["quad"])
    return build_config(values, lines)


def _fee_mode(mode: str, strategy: str | None) -> str:
    if mode == "deterministic":
        strategy = (strategy or "static").removeprefix("deterministic-")
        return f"deterministic-{strategy}"
    return mode


def _strategy(cfg: RunConfig) -> str:
    return cfg.strategy.removeprefix("deterministic-")


def execute(cfg: RunConfig):
    """Run one job; returns ``(columns, rows, headline lines)``."""
    p, c, spec, thr = cfg.params, cfg.contract, cfg.spec, cfg.threads
    if cfg.mode == "vanilla":
        kind = cfg.kind or "call"
        cf = vanilla_price(p, cfg.strike, cfg.maturity, kind, yield_rate=cfg.yield_rate)
        res = price_vanilla(p, cfg.strike, cfg.maturity, kind, spec, yield_rate=cfg.yield_rate)
        rel = res.price / cf - 1.0
        return (
            ["kind", "strike", "maturity", "closed_form", "ghqc", "rel_err"],
            [[kind, cfg.strike, cfg.maturity, cf, res.price, rel]],
            [f"{kind} closed form {cf:.6f}  ghqc {res.price:.6f}  rel err {rel:.2e}"],
        )
    if cfg.mode == "bond":
        r = p.r0 if cfg.rate is None else cfg.rate
        b = float(bond_price(p, r, 0.0, cfg.maturity))
        return ["rate", "maturity", "bond_price"], [[r, cfg.maturity, b]], [f"bond price {b:.8f}"]
    if cfg.mode in ("static", "dynamic", "deterministic"):
        if cfg.mode == "static":
            res = price_static(p, c, spec, thr)
        elif cfg.mode == "dynamic":
            res = price_dynamic(p, c, spec, cfg.J, thr)
        else:
            res = price_deterministic_rate(p, c, spec, _strategy(cfg), cfg.J, thr)
        label = cfg.mode if cfg.mode != "deterministic" else f"deterministic {_strategy(cfg)}"
        return (
            ["mode", "rho", "alpha_bp", "price"],
            [[label.replace(" ", "-"), p.rho, c.alpha * 1e4, res.price]],
            [f"{label} price {res.price:.6f} ({res.elapsed:.2f} s)"],
        )
    if cfg.mode == "fair-fee":
        res = fair_fee(p, c, spec, cfg.strategy, cfg.J, threads=thr)
        return (
            ["strategy", "rho", "fair_fee_bp", "price_at_zero_fee", "evaluations"],
            [[cfg.strategy, p.rho, res.bp, res.price_at_zero, res.evaluations]],
            [f"fair fee ({cfg.strategy}) {res.bp:.1f} bp"],
        )
    if cfg.mode == "mc":
        if cfg.kind is not None:
            m = mc_vanilla(p, cfg.strike, cfg.maturity, cfg.kind, cfg.mc, cfg.yield_rate)
            label = cfg.kind
        else:
            m = mc_price_static(p, c, cfg.mc)
            label = "static"
        return (
            ["target", "n_paths", "seed", "price", "stderr"],
            [[label, m.n_paths, cfg.mc.seed, m.price, m.stderr]],
            [f"mc {label} price {m.price:.6f} +/- {m.stderr:.2e}"],
        )
    raise ConfigError([f"mode '{cfg.mode}' is not runnable here"])


def reproduce(args: argparse.Namespace, cfg: RunConfig):
    """Rows for ``reproduce --table N`` or ``--figure 2``."""
    thr = cfg.threads
    mc = MCConfig(args.mc_paths, cfg.mc.seed, cfg.mc.antithetic, thr) if args.mc_paths else None
    J = cfg.J
    if args.figure == 2:
        cols, rows = rp.figure_price_vs_fee(J, thr)
        return cols, rows, [f"figure 2 data: {len(rows)} fees"]
    t = args.table
    if t in (1, 2):
        cols, rows = rp.table_vanilla("call" if t == 1 else "put")
        head = [f"mean |rel err| {rp.mean_abs([r[4] for r in rows]):.2e}"]
    elif t == 3:
        cols, rows = rp.table_static_rho(mc, thr)
        head = [f"rho={r[0]:+.1f}  ghqc {r[2]:.6f}" for r in rows]
    elif t in (4, 5):
        cols, rows = rp.table_static_fee(0.3 if t == 4 else -0.3, mc, thr)
        head = [f"{r[0]:g} bp  ghqc {r[1]:.6f}" for r in rows]
    else:
        cols, rows = rp.table_dynamic(J, thr)
        head = [f"{r[0]:g} bp  rho=-0.3 {r[1]:.6f}  rho=0.3 {r[2]:.6f}" for r in rows]
    cols, rows = rp.with_references(t, cols, rows)
    return cols, rows, [f"table {t}"] + head


def format_value(v) -> str:
    if isinstance(v, str):
        return v
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return "%.10g" % float(v)


def to_csv(cols, rows) -> str:
    buf = io.StringIO()
    buf.write(",".join(cols) + "\n")
    for r in rows:
        buf.write(",".join(format_value(v) for v in r) + "\n")
    return buf.getvalue()


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = resolve_config(args)
        if args.command == "reproduce":
            cols, rows, head = reproduce(args, cfg)
        else:
            cols, rows, head = execute(cfg)
    except ConfigError as e:
        for msg in e.errors:
            print(f"config error: {msg}", file=sys.stderr)
        return 2
    except (ValueError, FloatingPointError, ArithmeticError, np.linalg.LinAlgError, NoFairFee) as e:
        print(f"pricing failed: {e}", file=sys.stderr)
        return 1
    for line in head:
        print(line)
    text = to_csv(cols, rows)
    if cfg.out:
        Path(cfg.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return 0
