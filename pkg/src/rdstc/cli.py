"""Command line entry point ``rdstc-sim``.

Exit codes: 0 success, 2 configuration error, 3 numerical failure
(singular matrix or ARMO divergence), 4 file I/O error.
"""

import argparse
import logging
import sys

from rdstc.config import SimConfig, load_config, snr_range
from rdstc.errors import ConfigError, DivergenceError, SingularMatrixError
from rdstc.records import BerRecord, BoundRecord, ConvergenceRecord, OutputError, write_csv
from rdstc.sim import run_bound_curves, run_convergence_trace, run_sweep

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_IO = 0, 2, 3, 4

log = logging.getLogger("rdstc")


def _bool(text):
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise argparse.ArgumentTypeError(f"not a boolean: {text!r}")


def _schemes(text):
    return tuple(x.strip() for x in text.split(",") if x.strip())


def build_parser():
    p = argparse.ArgumentParser(prog="rdstc-sim", description="Randomized distributed STC link simulator")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key = value config file")
    common.add_argument("--seed", type=int)
    common.add_argument("--out", help="output CSV path")
    common.add_argument("--workers", type=int)

    run = sub.add_parser("run", parents=[common], help="BER sweep over an SNR grid")
    run.add_argument("--snr-start", type=float)
    run.add_argument("--snr-stop", type=float)
    run.add_argument("--snr-step", type=float)
    run.add_argument("--scheme", type=_schemes, help="comma separated scheme names")
    run.add_argument("--relays", type=int)
    run.add_argument("--antennas", type=int)
    run.add_argument("--packets", type=int)
    run.add_argument("--direct-link", type=_bool)

    sub.add_parser("bounds", parents=[common], help="averaged PEP union bounds with simulated overlay")

    conv = sub.add_parser("converge", parents=[common], help="running BER while ARMO adapts")
    conv.add_argument("--snr", type=float, required=True)
    return p


def config_from_args(args):
    cfg = load_config(args.config) if args.config else SimConfig()
    over = {
        "master_seed": args.seed,
        "output_path": args.out,
        "workers": args.workers,
    }
    if args.command == "run":
        snr = (args.snr_start, args.snr_stop, args.snr_step)
        if any(v is not None for v in snr):
            if any(v is None for v in snr):
                raise ConfigError("--snr-start, --snr-stop and --snr-step must be given together")
            over["snr_grid_db"] = snr_range(*snr)
        over.update(
            scheme=args.scheme,
            n_relays=args.relays,
            n_antennas=args.antennas,
            packets_per_point=args.packets,
            direct_link=args.direct_link,
        )
    return cfg.with_overrides(**over)


def _with_suffix(path, suffix):
    stem, dot, ext = path.rpartition(".")
    return f"{stem}{suffix}.{ext}" if dot else f"{path}{suffix}"


def _execute(args):
    cfg = config_from_args(args)
    if args.command == "run":
        records = run_sweep(cfg, out_path=cfg.output_path)
        for r in records:
            print(f"{r.snr_db:g}\t{r.scheme}\t{r.ber:.6g}")
    elif args.command == "bounds":
        bounds, overlay = run_bound_curves(cfg)
        write_csv(bounds, cfg.output_path, BoundRecord)
        sim_path = _with_suffix(cfg.output_path, "_sim")
        write_csv(overlay, sim_path, BerRecord)
        print(f"wrote {cfg.output_path} and {sim_path}")
    else:
        trace = run_convergence_trace(cfg, args.snr)
        write_csv(trace, cfg.output_path, ConvergenceRecord)
        print(f"wrote {cfg.output_path}")


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        _execute(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (SingularMatrixError, DivergenceError) as exc:
        where = "" if getattr(exc, "packet", None) is None else f" (packet {exc.packet})"
        print(f"numerical error{where}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OutputError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
