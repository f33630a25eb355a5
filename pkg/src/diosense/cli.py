"""Command-line front end.

Exit codes: 0 success, 2 domain or parameter error, 3 resource limit.
Errors are reported on stderr as a single JSON object.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Sequence

from . import coarray, experiments, geometry
from .errors import DomainError, ResourceLimitError
from .sampling import coprime_plan, n_sampler_plan, three_sampler_plan
from .serialize import dumps, load_config, write_json


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise DomainError(f"{self.prog}: {message}")


def _emit(text: str, path: str | None) -> None:
    if path:
        Path(path).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _geometry_from(args) -> coarray.ArrayGeometry:
    if getattr(args, "geometry", None):
        try:
            data = json.loads(Path(args.geometry).read_text(encoding="utf-8"))
        except (OSError, ValueError) as exc:
            raise DomainError(f"cannot read geometry {args.geometry}: {exc}") from None
        return coarray.ArrayGeometry.from_dict(data)
    if not args.family:
        raise DomainError("give a family with parameters or --geometry FILE")
    return geometry.build(args.family, args.params)


def cmd_array(args) -> int:
    geo = _geometry_from(args)
    tau = coarray.weight_tau(geo.positions)
    if args.csv:
        Path(args.csv).write_text(tau.to_csv(), encoding="utf-8")
    if args.action == "gen":
        out = geo.to_dict(translate=args.translate)
        out["min_spacing"] = tau.min_spacing
        _emit(dumps(out), args.json)
        return 0
    order = args.order or int(geo.claims.get("order", 2))
    lags = geometry.lag_set(geo, order)
    out = {"label": geo.label, "sensors": geo.size,
           **lags.to_dict(tau=tau, holes=not args.no_holes)}
    _emit(dumps(out), args.json)
    return 0


def _plan(kind: str, args):
    if kind == "three":
        return three_sampler_plan(args.gamma, args.k, args.l)
    if kind == "n":
        return n_sampler_plan(args.n, args.gamma, args.k, args.l)
    m1 = args.m1 if args.m1 is not None else 2 + args.gamma
    m2 = args.m2 if args.m2 is not None else 3 + args.gamma
    return coprime_plan(m1, m2, args.k, args.l)


def _delay_report(plan, ts: float | None) -> dict:
    out = {"delay_ticks": plan.delay_ticks}
    if hasattr(plan, "delay_bound"):
        out["bound_ticks"] = plan.delay_bound()
    if ts is not None:
        out["delay_seconds"] = plan.delay_seconds(ts)
    return out


def cmd_sample(args) -> int:
    if args.kind == "compare":
        dio = three_sampler_plan(args.gamma, args.k, args.l)
        cop = _plan("coprime", args)
        out = {
            "three": {**dio.summary(), **_delay_report(dio, args.ts)},
            "coprime": {**cop.summary(), **_delay_report(cop, args.ts)},
            "delay_ratio": cop.delay_ticks / dio.delay_ticks,
        }
    else:
        plan = _plan(args.kind, args)
        if args.full:
            out = plan.to_dict(include_lag_map=args.lag_map)
        else:
            out = plan.summary()
            if args.lag_map:
                out["lag_map"] = {str(k): v for k, v in plan.lag_map().items()}
        out.update(_delay_report(plan, args.ts))
        if args.kind == "n":
            out["triples"] = len(plan.groups)
            out["snapshot_floor"] = plan.snapshot_floor()
    _emit(dumps(out), args.json)
    return 0


def cmd_sim(args) -> int:
    cfg = load_config(args.config, args.set or [])
    result = experiments.run_freq(cfg) if args.kind == "freq" else experiments.run_doa(cfg)
    _emit(experiments.sweep_csv(result), args.csv)
    if args.json:
        write_json(result, args.json)
    return 0


def cmd_repro(args) -> int:
    if args.what == "table1":
        _emit(dumps(experiments.table1(args.gamma, args.k, args.l, args.n)), args.json)
        return 0
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    index = {}
    for name, (geo, tau) in experiments.fig_histograms().items():
        (out_dir / f"{name}_tau.csv").write_text(tau.to_csv(), encoding="utf-8")
        write_json(geo.to_dict(translate=True), out_dir / f"{name}_geometry.json")
        index[name] = {"label": geo.label, "sensors": geo.size, "min_spacing": tau.min_spacing}
    write_json(index, out_dir / "index.json")
    _emit(dumps(index), None)
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="diosense", description="Diophantine sampling and sparse-array toolkit")
    sub = p.add_subparsers(dest="verb", required=True, parser_class=_Parser)

    a = sub.add_parser("array", help="generate or analyze an array geometry")
    a.add_argument("action", choices=["gen", "analyze"])
    a.add_argument("family", nargs="?", choices=geometry.FAMILIES)
    a.add_argument("params", nargs="*", type=int)
    a.add_argument("--geometry", help="geometry JSON file instead of a family")
    a.add_argument("--order", type=int, help="co-array order (default: the family's)")
    a.add_argument("--json", help="write JSON here instead of stdout")
    a.add_argument("--csv", help="write the spacing histogram CSV here")
    a.add_argument("--translate", action="store_true", help="shift positions to start at 0")
    a.add_argument("--no-holes", action="store_true", help="omit the hole list")
    a.set_defaults(func=cmd_array)

    s = sub.add_parser("sample", help="temporal sampling plans")
    s.add_argument("kind", choices=["three", "n", "coprime", "compare"])
    s.add_argument("--gamma", type=int, default=0)
    s.add_argument("--k", type=int, default=10)
    s.add_argument("--l", type=int, default=10)
    s.add_argument("--n", type=int, default=10)
    s.add_argument("--m1", type=int)
    s.add_argument("--m2", type=int)
    s.add_argument("--ts", type=float, help="Nyquist interval in seconds")
    s.add_argument("--lag-map", action="store_true", help="include the lag-to-index map")
    s.add_argument("--full", action="store_true", help="include per-sampler instants")
    s.add_argument("--json")
    s.set_defaults(func=cmd_sample)

    m = sub.add_parser("sim", help="RMSE-versus-SNR Monte Carlo sweeps")
    m.add_argument("kind", choices=["freq", "doa"])
    m.add_argument("--config", help="key=value config file")
    m.add_argument("--set", action="append", metavar="KEY=VALUE", help="override a config key")
    m.add_argument("--csv", help="RMSE table (default stdout)")
    m.add_argument("--json", help="summary with per-trial seeds")
    m.set_defaults(func=cmd_sim)

    r = sub.add_parser("repro", help="reproduction recipes")
    r.add_argument("what", choices=["table1", "fig-histograms"])
    r.add_argument("--gamma", type=int, default=1_000_000)
    r.add_argument("--k", type=int, default=50)
    r.add_argument("--l", type=int, default=50)
    r.add_argument("--n", type=int, default=10)
    r.add_argument("--json")
    r.add_argument("--out-dir", default="histograms")
    r.set_defaults(func=cmd_repro)
    return p


def _fail(exc: Exception, code: int) -> int:
    err = {"error": getattr(exc, "code", type(exc).__name__), "message": str(exc)}
    advisory = getattr(exc, "advisory", None)
    if advisory:
        err["advisory"] = advisory
    sys.stderr.write(json.dumps(err, sort_keys=True) + "\n")
    return code


def main(argv: Sequence[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        return args.func(args)
    except DomainError as exc:
        return _fail(exc, 2)
    except ResourceLimitError as exc:
        return _fail(exc, 3)


if __name__ == "__main__":
    sys.exit(main())
