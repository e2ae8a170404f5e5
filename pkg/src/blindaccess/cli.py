"""Command line front end.

Subcommands:
  solve     recover one planted instance and print the success report
  sweep     run a (mu, sigma, s) grid from a JSON config and write CSV
  protocol  run the two-phase secure access simulation, emit JSON
  paper     preset sweep at the large reference configuration
            (N=1024, N_d=E=128, N_r=10)

``--seed``, ``--out`` and ``--config`` are accepted by every subcommand.
Exit codes: 0 on success, 1 on configuration or runtime failures, 2 on
usage errors.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
import time
import warnings

from .experiments import SweepGrid, emit_csv, sweep
from .measurement import ModelDims
from .protocol import KeyQuantizer, ProtocolConfig, make_instance, run_protocol
from .solver import evaluate_success, hihtp

PAPER_DIMS = dict(N=1024, N_d=128, E=128, N_r=10)


class CliError(Exception):
    """Configuration or runtime failure with a user-facing message."""


def _load_config(path) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise CliError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise CliError(f"config {path} is not valid JSON: {exc}") from exc


def _write_or_print(text: str, out_path) -> None:
    if out_path:
        with open(out_path, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--seed", type=int, default=None, help="master seed override")
    parser.add_argument("--out", default=None, help="output file path")
    parser.add_argument("--config", default=None, help="JSON config file")


def _add_dims(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--N", type=int, default=256, help="slot length")
    parser.add_argument("--Nd", type=int, default=32, help="delay spread")
    parser.add_argument("--E", type=int, default=32, help="code length")
    parser.add_argument("--Nr", type=int, default=6, help="number of users")
    parser.add_argument("--mu", type=int, default=2, help="active users")
    parser.add_argument("--sigma", type=int, default=2, help="channel sparsity")
    parser.add_argument("--s", type=int, default=2, help="signal sparsity")
    parser.add_argument("--snr-db", type=float, default=None, help="SNR in dB (omit for noiseless)")
    parser.add_argument("--field", choices=("real", "complex"), default="real")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="blindaccess",
        description="Blind deconvolution / demixing simulations for uncoordinated access",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_solve = sub.add_parser("solve", help="single planted instance")
    _add_common(p_solve)
    _add_dims(p_solve)

    p_sweep = sub.add_parser("sweep", help="grid sweep to CSV")
    _add_common(p_sweep)
    p_sweep.add_argument(
        "--stable-timing",
        action="store_true",
        help="report 0.0 runtimes so repeated runs are byte-identical",
    )

    p_proto = sub.add_parser("protocol", help="end-to-end secure access run")
    _add_common(p_proto)
    _add_dims(p_proto)
    p_proto.add_argument("--perturbation", type=float, default=0.0,
                         help="reciprocity perturbation level")
    p_proto.add_argument("--key-bits", type=int, default=2, help="quantizer bits per component")
    p_proto.add_argument("--key-clip", type=float, default=3.0, help="quantizer clipping range")

    p_paper = sub.add_parser("paper", help="reference configuration sweep")
    _add_common(p_paper)
    p_paper.add_argument("--cell", default=None, help="single cell, e.g. mu=2,sigma=2,s=2")
    p_paper.add_argument("--trials", type=int, default=20)
    p_paper.add_argument("--mu-min", type=int, default=2)
    p_paper.add_argument("--mu-max", type=int, default=5)
    p_paper.add_argument("--sparsity-min", type=int, default=2)
    p_paper.add_argument("--sparsity-max", type=int, default=15)
    p_paper.add_argument("--sparsity-step", type=int, default=1)
    p_paper.add_argument("--stable-timing", action="store_true")

    return parser


def _cmd_solve(args) -> int:
    cfg = _load_config(args.config) if args.config else {}
    dims = ModelDims(
        N=int(cfg.get("N", args.N)),
        N_d=int(cfg.get("N_d", args.Nd)),
        E=int(cfg.get("E", args.E)),
        N_r=int(cfg.get("N_r", args.Nr)),
    )
    seed = args.seed if args.seed is not None else int(cfg.get("seed", 0))
    snr = cfg.get("snr_db", args.snr_db)
    instance = make_instance(
        dims,
        s=int(cfg.get("s", args.s)),
        sigma=int(cfg.get("sigma", args.sigma)),
        mu=int(cfg.get("mu", args.mu)),
        seed=seed,
        field=cfg.get("field", args.field),
        snr_db=None if snr is None else float(snr),
    )
    start = time.perf_counter()
    result = hihtp(instance.op, instance.y, instance.profile)
    elapsed = time.perf_counter() - start
    report = evaluate_success(result, instance)
    print(f"dims: {dims}")
    print(f"profile: mu={instance.profile.mu} sigma={instance.profile.sigma} s={instance.profile.s}")
    print(f"converged by: {result.converged_by} after {result.iterations} iterations "
          f"({elapsed * 1e3:.1f} ms)")
    print(f"residual: {result.residual_norm:.3e}")
    print(f"support exact: {report.support_exact}")
    print(f"success: {report.success}")
    for user in report.per_user:
        print(f"  user {user.user}: message_ok={user.message_ok} "
              f"bit_errors={user.bit_errors} channel_rel_error={user.channel_rel_error:.3e}")
    if args.out:
        _write_or_print(json.dumps(report.to_dict(), indent=2), args.out)
    return 0


def _grid_from_args(args) -> SweepGrid:
    if not args.config:
        raise CliError("sweep requires --config (JSON grid specification)")
    cfg = _load_config(args.config)
    try:
        grid = SweepGrid.from_mapping(cfg)
    except (KeyError, TypeError, ValueError) as exc:
        raise CliError(f"bad sweep config {args.config}: {exc}") from exc
    if args.seed is not None:
        grid = dataclasses.replace(grid, seed=args.seed)
    return grid


def _cmd_sweep(args) -> int:
    grid = _grid_from_args(args)
    records = sweep(grid, measure_runtime=not args.stable_timing)
    out = args.out or "sweep.csv"
    emit_csv(records, out)
    print(f"wrote {len(records)} records to {out}")
    return 0


def _parse_cell(spec: str) -> dict:
    cell = {}
    for part in spec.split(","):
        key, _, value = part.partition("=")
        if key.strip() not in ("mu", "sigma", "s") or not value:
            raise CliError(f"bad --cell entry {part!r}; expected mu=..,sigma=..,s=..")
        cell[key.strip()] = int(value)
    if sorted(cell) != ["mu", "s", "sigma"]:
        raise CliError(f"--cell must set mu, sigma and s, got {spec!r}")
    return cell


def _cmd_paper(args) -> int:
    dims = ModelDims(**PAPER_DIMS)
    if args.cell:
        cell = _parse_cell(args.cell)
        mu_range = (cell["mu"],)
        sigma_range = (cell["sigma"],)
        s_range = (cell["s"],)
    else:
        mu_range = tuple(range(args.mu_min, args.mu_max + 1))
        sigma_range = tuple(range(args.sparsity_min, args.sparsity_max + 1, args.sparsity_step))
        s_range = sigma_range
        cells = len(mu_range) * len(sigma_range) * len(s_range)
        warnings.warn(
            f"full reference grid: {cells} cells x {args.trials} trials at "
            f"N={dims.N}; expect a multi-hour run"
        )
    grid = SweepGrid(
        dims=dims,
        mu_range=mu_range,
        sigma_range=sigma_range,
        s_range=s_range,
        trials=args.trials,
        seed=args.seed if args.seed is not None else 0,
    )
    records = sweep(grid, measure_runtime=not args.stable_timing)
    out = args.out or "paper_sweep.csv"
    emit_csv(records, out)
    print(f"wrote {len(records)} records to {out}")
    return 0


def _cmd_protocol(args) -> int:
    if args.config:
        cfg = _load_config(args.config)
        try:
            config = ProtocolConfig.from_mapping(cfg)
        except (KeyError, TypeError, ValueError) as exc:
            raise CliError(f"bad protocol config {args.config}: {exc}") from exc
        if args.seed is not None:
            config = dataclasses.replace(config, seed=args.seed)
    else:
        config = ProtocolConfig(
            dims=ModelDims(N=args.N, N_d=args.Nd, E=args.E, N_r=args.Nr),
            s=args.s,
            sigma=args.sigma,
            mu=args.mu,
            seed=args.seed if args.seed is not None else 0,
            field=args.field,
            snr_db=args.snr_db,
            perturbation=args.perturbation,
            quantizer=KeyQuantizer(bits=args.key_bits, clip=args.key_clip),
        )
    outcome = run_protocol(config)
    _write_or_print(json.dumps(outcome.to_dict(), indent=2), args.out)
    return 0


def cli_main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    handlers = {
        "solve": _cmd_solve,
        "sweep": _cmd_sweep,
        "protocol": _cmd_protocol,
        "paper": _cmd_paper,
    }
    try:
        return handlers[args.command](args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(cli_main())


if __name__ == "__main__":
    main()
