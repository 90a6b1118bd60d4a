"""Command line front end.

Exit codes: 0 success, 1 usage or configuration problems, 2 numerical or
validation failures, 3 inversion targets outside the reachable range.
"""
from __future__ import annotations

import argparse
import os
import sys
from dataclasses import replace

from . import acceptance
from .analytics import GaussianScenario, invert_delta_to_gamma3, invert_gamma3_to_G
from .config import (
    atomic_write_json,
    default_config,
    load_config,
    make_manifest,
)
from .errors import ConfigError, DegenerateChannel, IITError, OutOfRange
from .gridplan import resolve_profile
from .protocol import ProtocolConfig, nonlocality_scan, run_full, sweep
from .reporting import (
    nonlocality_summary_text,
    render_nonlocality_figure,
    render_run_figure,
    render_sweep_figure,
    run_summary_text,
    sweep_summary_text,
    write_nonlocality_csv,
    write_run_report,
    write_sweep_csv,
)
from .states import tensor_to_json


class _Parser(argparse.ArgumentParser):
    # usage mistakes exit 1, leaving 2 for numerical failures
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _load(args) -> ProtocolConfig:
    cfg = load_config(args.config) if args.config else default_config()
    if getattr(args, "profile", None):
        cfg = replace(cfg, profile=args.profile)
    if getattr(args, "gamma_convention", None):
        cfg = replace(cfg, gamma_convention=args.gamma_convention)
    return cfg


def _float_list(text: str, what: str) -> list[float]:
    try:
        return [float(piece) for piece in text.split(",") if piece.strip()]
    except ValueError as exc:
        raise ConfigError(f"could not parse {what} list {text!r}: {exc}") from None


def _wrote(path: str) -> None:
    print(f"wrote {path}")


def cmd_run(args) -> int:
    cfg = _load(args)
    report, artifacts = run_full(cfg)
    os.makedirs(args.out, exist_ok=True)
    path = write_run_report(
        os.path.join(args.out, "report.json"), cfg, report, seed=args.seed
    )
    print(run_summary_text(report))
    _wrote(path)
    if args.dump_state:
        state_path = os.path.join(args.out, "final_state.json")
        atomic_write_json(
            state_path,
            {
                "manifest": make_manifest(report.profile, args.seed),
                "state": tensor_to_json(artifacts.final_state),
            },
        )
        _wrote(state_path)
    if not args.no_plots:
        _wrote(render_run_figure(args.out, report, artifacts))
    return 0


def cmd_sweep(args) -> int:
    cfg = _load(args)
    values = _float_list(args.values, "value")
    rows = sweep(cfg, args.param, values)
    os.makedirs(args.out, exist_ok=True)
    print(sweep_summary_text(args.param, rows))
    _wrote(write_sweep_csv(os.path.join(args.out, "sweep.csv"), rows))
    if not args.no_plots:
        _wrote(render_sweep_figure(args.out, args.param, rows))
    return 0


def cmd_invert(args) -> int:
    gamma3 = invert_delta_to_gamma3(
        args.delta, complex(args.a), complex(args.b), complex(args.gamma2),
        complex(args.alpha),
    )
    print(f"gamma3 = {gamma3:.12g}")
    if args.to_G:
        missing = [
            name
            for name in ("sigma2", "beta2", "m_plus", "m_minus")
            if getattr(args, name) is None
        ]
        if missing:
            raise ConfigError(
                "--to-G needs --" + ", --".join(m.replace("_", "-") for m in missing)
            )
        scenario = GaussianScenario(
            m_plus=args.m_plus,
            m_minus=args.m_minus,
            sigma2=args.sigma2,
            beta2=args.beta2,
            g23=1.0,
            T=1.0,
            convention=args.gaussian_convention,
        )
        big_g = invert_gamma3_to_G(gamma3, scenario, mode=args.mode)
        print(f"G = {big_g:.12g} ({args.mode} mode)")
    return 0


def cmd_verify(args) -> int:
    results = acceptance.run_all(resolve_profile(args.profile))
    print(acceptance.format_results(results))
    return 0 if acceptance.all_passed(results) else 2


def cmd_nonlocality(args) -> int:
    cfg = _load(args)
    betas = _float_list(args.betas, "beta2")
    result = nonlocality_scan(cfg, betas)
    os.makedirs(args.out, exist_ok=True)
    print(nonlocality_summary_text(result))
    _wrote(write_nonlocality_csv(os.path.join(args.out, "nonlocality.csv"), result))
    if not args.no_plots:
        _wrote(render_nonlocality_figure(args.out, result))
    return 0


def _add_io_flags(sub, with_config: bool = True) -> None:
    if with_config:
        sub.add_argument("--config", help="JSON config path (built-in defaults otherwise)")
    sub.add_argument("--out", default="out", help="output directory (default: out)")
    sub.add_argument("--no-plots", action="store_true", help="skip figure rendering")
    sub.add_argument("--profile", help="grid profile override (compact or full)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="iit", description=__doc__)
    subs = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p_run = subs.add_parser("run", help="run the protocol once and write a report")
    _add_io_flags(p_run)
    p_run.add_argument(
        "--gamma-convention",
        choices=("normalized", "raw"),
        help="which overlap convention feeds the reported expectations",
    )
    p_run.add_argument("--seed", type=int, help="seed recorded in the manifest")
    p_run.add_argument(
        "--dump-state",
        action="store_true",
        help="also write the final tensor state as JSON",
    )
    p_run.set_defaults(handler=cmd_run)

    p_sweep = subs.add_parser("sweep", help="rerun the protocol over one parameter")
    _add_io_flags(p_sweep)
    p_sweep.add_argument("--param", required=True, help="parameter to vary")
    p_sweep.add_argument(
        "--values", required=True, help="comma-separated parameter values"
    )
    p_sweep.set_defaults(handler=cmd_sweep)

    p_inv = subs.add_parser(
        "invert", help="recover gamma3 from a measured signal, optionally G"
    )
    p_inv.add_argument("--delta", type=float, required=True)
    p_inv.add_argument("--a", type=float, required=True)
    p_inv.add_argument("--b", type=float, required=True)
    p_inv.add_argument("--gamma2", type=float, required=True)
    p_inv.add_argument("--alpha", type=float, required=True)
    p_inv.add_argument(
        "--to-G", action="store_true", help="also invert gamma3 to the coupling G"
    )
    p_inv.add_argument("--sigma2", type=float, help="carrier variance (for --to-G)")
    p_inv.add_argument("--beta2", type=float, help="far carrier variance (for --to-G)")
    p_inv.add_argument("--m-plus", type=float, help="plus-branch center (for --to-G)")
    p_inv.add_argument("--m-minus", type=float, help="minus-branch center (for --to-G)")
    p_inv.add_argument(
        "--mode",
        choices=("closed_form", "oracle"),
        default="closed_form",
        help="forward map to invert (default: closed_form)",
    )
    p_inv.add_argument(
        "--gaussian-convention",
        choices=("density", "amplitude"),
        default="density",
        help="what sigma2 and beta2 describe (default: density)",
    )
    p_inv.set_defaults(handler=cmd_invert)

    p_ver = subs.add_parser("verify", help="run the acceptance battery")
    p_ver.add_argument("--profile", help="grid profile (compact or full)")
    p_ver.set_defaults(handler=cmd_verify)

    p_non = subs.add_parser(
        "nonlocality", help="scan the far carrier width at a fixed preparation"
    )
    _add_io_flags(p_non)
    p_non.add_argument(
        "--betas", required=True, help="comma-separated beta2 values to scan"
    )
    p_non.set_defaults(handler=cmd_nonlocality)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.handler(args)
    except (OutOfRange, DegenerateChannel) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (IITError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
