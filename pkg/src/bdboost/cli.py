"""Command line entry point: ``bdboost simulate`` and ``bdboost trace``."""

import argparse
import json
import sys

from .experiment import ConfigError, parse_config, run_convergence_trace, run_sweep


def _parser():
    p = argparse.ArgumentParser(prog="bdboost", description="BD vs boosted precoding sweeps")
    sub = p.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="Monte Carlo sum-rate sweep over SNR")
    sim.add_argument("--config")
    sim.add_argument("--snr-list", dest="snr_list_db", help="comma-separated SNRs in dB")
    sim.add_argument("--trials")
    sim.add_argument("--seed")
    sim.add_argument("--schemes", help="comma-separated subset of bd,proposed")
    sim.add_argument("--jobs")
    sim.add_argument("--dims", help="K_t,N_t,K_r,N_r")
    sim.add_argument("--out")
    sim.add_argument("--aggregate")
    sim.add_argument("--timing", action="store_const", const=True,
                     help="fill wall_ms (makes output non-reproducible)")

    tr = sub.add_parser("trace", help="per-iteration convergence trace of one draw")
    tr.add_argument("--config")
    tr.add_argument("--snr-db", dest="trace_snr_db")
    tr.add_argument("--seed", dest="trace_seed")
    tr.add_argument("--dims")
    tr.add_argument("--out", dest="trace_out")
    return p


def _fail(kind, message, field=None):
    err = {"error": kind, "message": message}
    if field is not None:
        err["field"] = field
    print(json.dumps(err), file=sys.stderr)
    return 2


def main(argv=None):
    args = _parser().parse_args(argv)
    overrides = {k: v for k, v in vars(args).items() if k not in ("command", "config")}
    if overrides.get("trace_snr_db") is not None:
        try:
            overrides["trace_snr_db"] = float(overrides["trace_snr_db"])
        except ValueError:
            return _fail("config", f"invalid --snr-db {overrides['trace_snr_db']!r}", "trace_snr_db")
    try:
        spec = parse_config(args.config, **overrides)
    except ConfigError as exc:
        return _fail("config", str(exc), exc.field)
    except OSError as exc:
        return _fail("io", str(exc), "config")
    try:
        if args.command == "simulate":
            rows, _ = run_sweep(spec)
            failed = sum(r.status != "ok" for r in rows)
            print(json.dumps({"rows": len(rows), "failed": failed, "out": spec.out,
                              "aggregate": spec.aggregate}))
        else:
            sol, bd = run_convergence_trace(spec)
            print(json.dumps({"iterations": sol.iterations, "rho": sol.rho,
                              "sum_rate_nats": sol.sum_rate, "bd_sum_rate_nats": bd.sum_rate,
                              "out": spec.trace_out}))
    except ConfigError as exc:
        return _fail("config", str(exc), exc.field)
    except OSError as exc:
        return _fail("io", str(exc))
    except Exception as exc:  # noqa: BLE001 - reported as a machine-readable line
        return _fail(type(exc).__name__, str(exc))
    return 0
