"""Command-line interface.

Exit codes: 0 success, 1 validation error (bad arguments, malformed
JSON), 2 numerical failure (inadmissible reference, non-CP input,
self-check violation).
"""

from __future__ import annotations

import argparse
import json
import sys

from . import harness, metrics, serialize
from .channel import NotCompletelyPositiveError, random_channel
from .identify import NotAdmissibleError, reconstruct
from .linalg import SingularOperatorError


class _Parser(argparse.ArgumentParser):
    # argparse exits with status 2 on bad arguments; remap to 1 (validation)
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(1)


def _load_json(path: str):
    try:
        with open(path) as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise ValueError(f"{path}: malformed JSON: {exc}") from exc


def _emit(obj, out: str | None):
    text = json.dumps(obj, indent=2)
    if out:
        with open(out, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def _cmd_randchannel(args) -> int:
    t = random_channel(args.d1, args.d2, args.rank, args.seed)
    _emit(serialize.channel_to_json(t), args.out)
    return 0


def _cmd_reconstruct(args) -> int:
    w = serialize.density_from_json(_load_json(args.w))
    ref = serialize.reference_from_json(_load_json(args.ref))
    if w.dim % ref.dim != 0:
        raise ValueError(f"state dim {w.dim} is not a multiple of reference dim {ref.dim}")
    result = reconstruct(w, ref, w.dim // ref.dim)
    report = {
        "tp_residual": result.tp_residual,
        "consistency_residual": result.consistency_residual,
        "clip_magnitude": result.clip_magnitude,
    }
    if args.out:
        _emit(serialize.channel_to_json(result.cp_map), args.out)
        _emit(report, args.report or args.out + ".report.json")
    else:
        _emit(serialize.reconstruction_to_json(result), None)
    return 0


def _cmd_fidelity(args) -> int:
    t1 = serialize.channel_from_json(_load_json(args.t1))
    t2 = serialize.channel_from_json(_load_json(args.t2))
    lhs, rhs = metrics.fvdg_gap(t1, t2)
    _emit(
        {"fidelity": metrics.channel_fidelity(t1, t2), "fvdg_lhs": lhs, "fvdg_rhs": rhs},
        args.out,
    )
    return 0


def _cmd_cbdist(args) -> int:
    t1 = serialize.channel_from_json(_load_json(args.t1))
    t2 = serialize.channel_from_json(_load_json(args.t2))
    interval = metrics.cb_distance_interval(
        t1, t2, starts=args.starts, max_iters=args.max_iters, tol=args.tol, seed=args.seed
    )
    _emit(serialize.norm_interval_to_json(interval), args.out)
    return 0


def _cmd_roundtrip(args) -> int:
    cfg = harness.config_from_json(_load_json(args.config))
    records = harness.run_roundtrip(cfg)
    harness.write_records_csv(records, args.out)
    print(f"wrote {len(records)} records to {args.out}", file=sys.stderr)
    return 0


def _cmd_sweep(args) -> int:
    raw = _load_json(args.config)
    cfg = harness.config_from_json(raw)
    if args.grid:
        grid = [float(x) for x in args.grid.split(",")]
    elif "min_eig_grid" in raw:
        grid = [float(x) for x in raw["min_eig_grid"]]
    else:
        raise ValueError("sweep needs --grid or a min_eig_grid entry in the config")
    records = harness.run_spectrum_sweep(cfg, grid)
    harness.write_records_csv(records, args.out)
    print(f"wrote {len(records)} records to {args.out}", file=sys.stderr)
    return 0


def _build_parser() -> _Parser:
    parser = _Parser(prog="chanid", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("randchannel", help="emit a random trace-preserving channel as JSON")
    p.add_argument("--d1", type=int, required=True)
    p.add_argument("--d2", type=int, required=True)
    p.add_argument("--rank", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_randchannel)

    p = sub.add_parser("reconstruct", help="recover a channel from a probe-output state")
    p.add_argument("--w", required=True, help="bipartite state JSON (complex matrix)")
    p.add_argument("--ref", required=True, help="reference state JSON")
    p.add_argument("--out", help="channel JSON destination (report goes to a sidecar)")
    p.add_argument("--report", help="sidecar report destination")
    p.set_defaults(func=_cmd_reconstruct)

    p = sub.add_parser("fidelity", help="channel fidelity between two channel JSONs")
    p.add_argument("--t1", required=True)
    p.add_argument("--t2", required=True)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_fidelity)

    p = sub.add_parser("cbdist", help="CB-norm distance interval between two channels")
    p.add_argument("--t1", required=True)
    p.add_argument("--t2", required=True)
    p.add_argument("--starts", type=int, default=32)
    p.add_argument("--max-iters", type=int, default=500)
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_cbdist)

    p = sub.add_parser("roundtrip", help="noise-robustness round-trip batch to CSV")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_roundtrip)

    p = sub.add_parser("sweep", help="reconstruction quality versus reference spectrum")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--grid", help="comma-separated min-eigenvalue grid (overrides config)")
    p.set_defaults(func=_cmd_sweep)

    return parser


def cli_main(argv: list[str]) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else 1
    try:
        return args.func(args)
    except (
        NotAdmissibleError,
        NotCompletelyPositiveError,
        SingularOperatorError,
        harness.SelfCheckError,
    ) as exc:
        print(f"chanid: numerical failure: {exc}", file=sys.stderr)
        return 2
    except (ValueError, KeyError, OSError) as exc:
        print(f"chanid: error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    raise SystemExit(cli_main(sys.argv[1:]))


if __name__ == "__main__":
    main()
