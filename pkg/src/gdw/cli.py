"""Command line entry point ``gdw``.

Exit codes: 0 on success (for ``certify``: certified irreducible), 1 on any
error, 2 when ``certify`` does not certify.
"""

from __future__ import annotations

import argparse
import json
import math
import secrets
import sys
from datetime import datetime, timezone
from pathlib import Path

import gdw
from gdw.certify import certify, certify_estimate, ingest_click_log
from gdw.errors import GDWError
from gdw.mub import build_mub, write_basis
from gdw.oracles import (
    classical_rac_report,
    grid_bound_report,
    tradeoff_grid_check,
)
from gdw.simulate import SimConfig, expected_d1, fom_closed_form, simulate
from gdw.solver import BoundResult, SolverConfig, Status, bound_table, solve_bound
from gdw.structures import Filter, parse_structure
from gdw.tradeoff import tradeoff, tradeoff_curve

EXIT_OK, EXIT_ERROR, EXIT_NOT_CERTIFIED = 0, 1, 2

# Per-command defaults for options that a --config file may also set.
DEFAULTS = {
    "bounds": {
        "dim": None,
        "quantum_only": False,
        "structures": None,
        "tol": 1e-10,
        "seed": None,
        "random_starts": 64,
        "multistart_grid": 3,
        "out": "table",
        "precision": 6,
    },
    "tradeoff": {"dim": None, "kind": "q", "z": None, "curve": None, "precision": 6},
    "mub": {"k": None, "basis": 1, "out": None, "format": "pm1"},
    "simulate": {
        "k": 1,
        "mu": 0.4,
        "nu": 0.13,
        "visibility": 1.0,
        "rounds": 1_000_000,
        "seed": None,
        "log": None,
        "out": "table",
        "photon_sampling": False,
    },
    "certify": {
        "counts": None,
        "log": None,
        "dim": None,
        "sigma": 3.0,
        "bounds_file": None,
        "quantum_only": False,
        "seed": None,
        "out": "table",
        "precision": 6,
    },
    "classical-rac": {"dim": None, "out": "table"},
    "oracle-tradeoff": {"dim": None, "resolution": 10_000, "out": "table"},
    "grid-bound": {"structure": None, "resolution": 10_000, "seed": None, "out": "table"},
}


class UsageError(GDWError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_ERROR, f"{self.prog}: error: {message}\n")


def _add(p: argparse.ArgumentParser, *flags, **kw) -> None:
    # SUPPRESS keeps unset flags out of the namespace so config values survive.
    p.add_argument(*flags, default=argparse.SUPPRESS, **kw)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="gdw", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"gdw {gdw.__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def command(subparsers, name, help, key=None):
        p = subparsers.add_parser(name, help=help)
        p.set_defaults(key=key or name)
        p.add_argument("--config", metavar="PATH", help="JSON object of option values")
        p.add_argument("-o", "--output", metavar="PATH", help="write results here instead of stdout")
        return p

    p = command(sub, "bounds", "optimal success probability for each product structure")
    _add(p, "--dim", type=int, required=False)
    _add(p, "--quantum-only", action="store_true")
    _add(p, "--structures", help='comma-separated list, e.g. "Q512*Q2,Q32*Q32"')
    _add(p, "--tol", type=float, help="compass-search step tolerance")
    _add(p, "--seed", type=int)
    _add(p, "--random-starts", type=int)
    _add(p, "--multistart-grid", type=int)
    _add(p, "--out", choices=["table", "json", "csv"])
    _add(p, "--precision", type=int)

    p = command(sub, "tradeoff", "evaluate a trade-off function")
    _add(p, "--dim", type=int)
    _add(p, "--kind", choices=["q", "c"])
    _add(p, "--z", type=float)
    _add(p, "--curve", type=int, metavar="N")
    _add(p, "--precision", type=int)

    p = command(sub, "mub", "write one of the +/-1 mutually unbiased bases")
    _add(p, "--k", type=int)
    _add(p, "--basis", type=int, choices=[1, 2])
    _add(p, "--out", metavar="PATH")
    _add(p, "--format", choices=["pm1", "csv"])

    p = command(sub, "simulate", "Monte Carlo single-detector experiment")
    _add(p, "--k", type=int)
    _add(p, "--mu", type=float)
    _add(p, "--nu", type=float)
    _add(p, "--visibility", type=float)
    _add(p, "--rounds", type=int)
    _add(p, "--seed", type=int)
    _add(p, "--log", metavar="PATH", help="write one CSV row per round")
    _add(p, "--out", choices=["table", "json"])
    _add(p, "--photon-sampling", action="store_true", help="sample photon numbers explicitly")

    p = command(sub, "certify", "certify irreducibility from click counts")
    _add(p, "--counts", metavar="D1,D2")
    _add(p, "--log", metavar="PATH")
    _add(p, "--dim", type=int)
    _add(p, "--sigma", type=float, help="violation threshold in standard errors")
    _add(p, "--bounds-file", metavar="PATH")
    _add(p, "--quantum-only", action="store_true", help="compute only fully quantum bounds")
    _add(p, "--seed", type=int)
    _add(p, "--out", choices=["table", "json"])
    _add(p, "--precision", type=int)

    oracle = sub.add_parser("oracle", help="brute-force cross-checks")
    osub = oracle.add_subparsers(dest="oracle", required=True, parser_class=_Parser)
    p = command(osub, "classical-rac", "exhaustive classical strategy search")
    _add(p, "--dim", type=int, choices=[2, 3])
    _add(p, "--out", choices=["table", "json"])
    p = command(osub, "tradeoff", "sweep the trade-off achieving states", "oracle-tradeoff")
    _add(p, "--dim", type=int)
    _add(p, "--resolution", type=int)
    _add(p, "--out", choices=["table", "json"])
    p = command(osub, "grid-bound", "grid maximum of a two-factor objective")
    _add(p, "--structure")
    _add(p, "--resolution", type=int)
    _add(p, "--seed", type=int)
    _add(p, "--out", choices=["table", "json"])
    return parser


def load_config(path, key: str, explicit: dict | None = None) -> dict:
    """Merge defaults, a JSON config file and explicit flags, in that order of priority.

    Keys may use dashes or underscores. Unknown keys are an error.
    """
    defaults = DEFAULTS[key]
    values = dict(defaults)
    if path is not None:
        text = Path(path).read_text()
        data = json.loads(text) if text.strip() else {}
        if not isinstance(data, dict):
            raise UsageError(f"config {path} must hold a JSON object")
        data = {k.replace("-", "_"): v for k, v in data.items()}
        unknown = sorted(set(data) - set(defaults))
        if unknown:
            raise UsageError(f"unknown config keys for {key}: {', '.join(unknown)}")
        values.update(data)
    values.update(explicit or {})
    return values


def _manifest(command: str, params: dict, seed: int | None) -> dict:
    return {
        "command": command,
        "parameters": {k: v for k, v in params.items() if not k.startswith("_")},
        "tool_version": gdw.__version__,
        "seed": seed,
        "timestamp": datetime.now(timezone.utc).isoformat(timespec="seconds"),
    }


def _resolve_seed(params: dict) -> int:
    if params.get("seed") is None:
        params["seed"] = secrets.randbits(63)
    return params["seed"]


def _require(params: dict, *names: str) -> None:
    missing = [n for n in names if params.get(n) is None]
    if missing:
        raise UsageError("missing required option(s): " + ", ".join("--" + n.replace("_", "-") for n in missing))


def _dumps(obj) -> str:
    return json.dumps(obj, indent=2)


def _solver_config(params: dict) -> SolverConfig:
    return SolverConfig(
        box_tolerance=params.get("tol", 1e-10),
        multistart_grid=params.get("multistart_grid", 3),
        random_starts=params.get("random_starts", 64),
        seed=params["seed"],
    )


def _bounds_for(params: dict) -> tuple[list[BoundResult], bool]:
    filt = Filter.QUANTUM_ONLY if params.get("quantum_only") else Filter.ALL
    structures = None
    if params.get("structures"):
        structures = [parse_structure(s) for s in params["structures"].split(",")]
        for s in structures:
            if s.total_dim != params["dim"]:
                raise UsageError(f"structure {s} has dimension {s.total_dim}, not {params['dim']}")
    rows = bound_table(params["dim"], filt, _solver_config(params), structures=structures)
    return rows, structures is None and filt is Filter.ALL


def bounds_to_json(dim: int, rows: list[BoundResult]) -> dict:
    return {"dim": dim, "results": [r.to_dict() for r in rows]}


def bounds_from_json(data: dict) -> tuple[int, list[BoundResult]]:
    rows = []
    for item in data["results"]:
        s = parse_structure(item["structure"])
        rows.append(
            BoundResult(
                s,
                float(item["asp"]),
                tuple(item.get("argmax", ())),
                int(item.get("starts_used", 0)),
                Status(item.get("status", Status.CONVERGED.value)),
            )
        )
    return int(data["dim"]), rows


def cmd_bounds(params: dict, out) -> int:
    _require(params, "dim")
    _resolve_seed(params)
    rows, _ = _bounds_for(params)
    prec = params["precision"]
    if params["out"] == "json":
        doc = bounds_to_json(params["dim"], rows)
        doc["manifest"] = _manifest("bounds", params, params["seed"])
        out.write(_dumps(doc) + "\n")
    elif params["out"] == "csv":
        out.write("structure,asp\n")
        for r in rows:
            out.write(f"{r.structure},{r.asp:.{prec}f}\n")
    else:
        width = max(len(str(r.structure)) for r in rows)
        for r in rows:
            flag = "" if r.status is Status.CONVERGED else "  (max iterations)"
            out.write(f"{str(r.structure):<{width}}  {r.asp:.{prec}f}{flag}\n")
    return EXIT_OK


def cmd_tradeoff(params: dict, out) -> int:
    _require(params, "dim")
    d, kind, prec = params["dim"], params["kind"].upper(), params["precision"]
    if (params.get("z") is None) == (params.get("curve") is None):
        raise UsageError("give exactly one of --z or --curve")
    if params.get("z") is not None:
        out.write(f"{tradeoff(d, kind, params['z']):.{prec}f}\n")
    else:
        out.write("z,m\n")
        for z, m in tradeoff_curve(d, kind, params["curve"]):
            out.write(f"{z!r},{m!r}\n")
    return EXIT_OK


def cmd_mub(params: dict, out) -> int:
    _require(params, "k")
    mubs = build_mub(params["k"])
    target = params.get("out")
    if target is None:
        raise UsageError("missing required option: --out PATH")
    write_basis(mubs, params["basis"], target, params["format"])
    return EXIT_OK


def cmd_simulate(params: dict, out) -> int:
    seed = _resolve_seed(params)
    config = SimConfig(
        k=params["k"],
        mu=params["mu"],
        nu=params["nu"],
        visibility=params["visibility"],
        rounds=params["rounds"],
        seed=seed,
        photon_sampling=params["photon_sampling"],
    )
    expected = expected_d1(config)
    if expected < 100:
        print(
            f"warning: only ~{expected:.1f} correct-index clicks expected; "
            "increase --rounds for a usable estimate",
            file=sys.stderr,
        )
    tally = simulate(config, log_path=params.get("log"))
    q = 0.5 * (1.0 + 1.0 / math.sqrt(config.dim))
    q_eff = config.visibility * q + (1.0 - config.visibility) / config.dim
    closed = fom_closed_form(q_eff, config.dim, config.nu_mu)
    fom = tally.fom() if tally.D1 + tally.D2 else None
    if params["out"] == "json":
        doc = {
            "config": config.to_dict(),
            "tally": tally.to_dict(),
            "fom": fom,
            "fom_closed_form": closed,
            "visibility_model": "white noise V*q + (1-V)/d (tool convention)",
            "manifest": _manifest("simulate", params, seed),
        }
        out.write(_dumps(doc) + "\n")
    else:
        out.write(
            f"d={config.dim} rounds={config.rounds} seed={seed}\n"
            f"X1={tally.X1} X2={tally.X2} D1={tally.D1} D2={tally.D2}\n"
            f"fom={'n/a' if fom is None else f'{fom:.6f}'} closed_form={closed:.6f}\n"
        )
        if config.visibility < 1:
            out.write("note: visibility uses a white-noise model (tool convention)\n")
    return EXIT_OK


def cmd_certify(params: dict, out) -> int:
    _require(params, "dim")
    if (params.get("counts") is None) == (params.get("log") is None):
        raise UsageError("give exactly one of --counts or --log")
    d, prec = params["dim"], params["precision"]
    if params.get("bounds_file"):
        file_dim, rows = bounds_from_json(json.loads(Path(params["bounds_file"]).read_text()))
        if file_dim != d:
            raise UsageError(f"bounds file is for d={file_dim}, not {d}")
        complete = len(rows) == len(gdw.enumerate_structures(d))
    else:
        _resolve_seed(params)
        rows, complete = _bounds_for(params)
    if params.get("counts") is not None:
        try:
            d1, d2 = (int(v) for v in params["counts"].split(","))
        except ValueError:
            raise UsageError(f"--counts expects D1,D2, got {params['counts']!r}") from None
        if d1 < 0 or d2 < 0:
            raise UsageError("counts must be non-negative")
        p_hat, sigma = gdw.estimate_asp(gdw.ClickTally(d1, d2, d1, d2))
        report = certify_estimate(p_hat, sigma, d, rows, params["sigma"], complete)
    else:
        tally = ingest_click_log(params["log"], dim=d)
        report = certify(tally, d, rows, params["sigma"], complete)
    if params["out"] == "json":
        doc = report.to_dict()
        doc["manifest"] = _manifest("certify", params, params.get("seed"))
        out.write(_dumps(doc) + "\n")
    else:
        out.write(f"p_hat = {report.p_hat:.{prec}f} +/- {report.sigma:.{prec}f}\n")
        width = max(len(str(b.structure)) for b in report.bounds)
        for b in report.bounds:
            mark = "violated" if b.violated else "-"
            out.write(f"{str(b.structure):<{width}}  {b.asp:.{prec}f}  z={b.z_score:8.3f}  {mark}\n")
        out.write(f"verdict: {report.verdict_label()} at {report.sigma_threshold:g} sigma\n")
    return EXIT_OK if report.certified else EXIT_NOT_CERTIFIED


def _write_report(report, params, out) -> int:
    if params["out"] == "json":
        doc = dict(report.__dict__)
        doc["manifest"] = _manifest(params["_key"], params, params.get("seed"))
        out.write(_dumps(doc) + "\n")
    else:
        out.write(
            f"{report.name} {report.instance}: oracle={report.oracle_value!r} "
            f"analytic={report.analytic_value!r} abs_diff={report.abs_diff:.3e}"
        )
        if report.name == "tradeoff":
            out.write(f" max_deviation={report.max_deviation:.3e}")
        out.write("\n")
    return EXIT_OK


def cmd_classical_rac(params: dict, out) -> int:
    _require(params, "dim")
    return _write_report(classical_rac_report(params["dim"]), params, out)


def cmd_oracle_tradeoff(params: dict, out) -> int:
    _require(params, "dim")
    return _write_report(tradeoff_grid_check(params["dim"], params["resolution"]), params, out)


def cmd_grid_bound(params: dict, out) -> int:
    _require(params, "structure")
    structure = parse_structure(params["structure"])
    seed = _resolve_seed(params)
    solved = solve_bound(structure, SolverConfig(seed=seed))
    return _write_report(grid_bound_report(structure, params["resolution"], solved.asp), params, out)


COMMANDS = {
    "bounds": cmd_bounds,
    "tradeoff": cmd_tradeoff,
    "mub": cmd_mub,
    "simulate": cmd_simulate,
    "certify": cmd_certify,
    "classical-rac": cmd_classical_rac,
    "oracle-tradeoff": cmd_oracle_tradeoff,
    "grid-bound": cmd_grid_bound,
}


def dispatch(argv: list[str] | None = None) -> int:
    parser = build_parser()
    ns = parser.parse_args(argv)
    key = ns.key
    explicit = {
        k: v for k, v in vars(ns).items() if k not in ("command", "oracle", "key", "config", "output")
    }
    try:
        params = load_config(ns.config, key, explicit)
        params["_key"] = key
        if ns.output:
            with open(ns.output, "w") as fh:
                code = COMMANDS[key](params, fh)
        else:
            code = COMMANDS[key](params, sys.stdout)
    except (GDWError, OSError, ValueError, KeyError) as exc:
        print(f"gdw {ns.command}: error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    return code


def main() -> None:
    sys.exit(dispatch())

