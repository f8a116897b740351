"""Command-line front end.

Four subcommands: `validate` (system ingestion and geometry checks),
`render` (SVG patches), `deviation` (log-log deviation sweep with an
exponent fit and a regime verdict), and `limitlaw` (distribution sampling
with KS matrix, variance table, and tightness constant).

Outputs are reproducible: every file embeds the tool version, the
configuration echo, the rng seed, and the spectral summary, and contains
no timestamps. The `--threads` flag changes scheduling only, never
results, so it is deliberately left out of the config echo; equal seeds
give byte-identical files at any worker count.

Exit codes: 0 success, 2 validation rejection, 64 usage, 3 everything
else (budget, hypothesis, precondition failures).

CSV columns, fixed:
  deviation:  R, deviation, residual, phi2_abs
  limitlaw:   n, sample_id, r, value
Floats are written with 17 significant digits so they round-trip.
"""

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .catalog import load as load_builtin
from .errors import DegenerateFitError, TilingError, UnknownNameError
from .experiments import (
    deviation_curve,
    exponent_fit,
    limitlaw_matrix,
    tightness_check,
)
from .geometry import Domain
from .render import patch_svg
from .spectral import spectral_data
from .systems import SubstitutionSystem, validate_system
from .view import TilingView


class _Parser(argparse.ArgumentParser):
    """argparse defaults to exit status 2 on bad flags; the error taxonomy
    reserves 2 for validation rejections, so usage problems exit 64."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(64, f"{self.prog}: error: {message}\n")


def _float_list(text):
    try:
        return tuple(float(x) for x in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated float list: {text!r}")


def _int_list(text):
    try:
        return tuple(int(x) for x in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated int list: {text!r}")


def _n_range(text):
    try:
        a, b = text.split(":")
        a, b = int(a), int(b)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected A:B, got {text!r}")
    if b < a:
        raise argparse.ArgumentTypeError(f"empty range {text!r}")
    return range(a, b + 1)


def build_parser():
    parser = _Parser(
        prog="subtiling",
        description=__doc__,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument("--version", action="version", version=f"subtiling {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_source(p):
        p.add_argument("--system", help="builtin system name")
        p.add_argument("--json", help="path to a system JSON file")
        p.add_argument("--out", default=".", help="output directory (default: .)")

    p_val = sub.add_parser("validate", help="ingest a system and run geometry checks")
    add_source(p_val)
    p_val.add_argument("--tol", type=float, default=1e-9, help="cover/overlap tolerance")

    p_ren = sub.add_parser("render", help="render a supertile patch to SVG")
    add_source(p_ren)
    p_ren.add_argument("--type", default="0", help="prototile name or index (default: 0)")
    p_ren.add_argument("--order", type=int, default=3, help="supertile order (default: 3)")
    p_ren.add_argument(
        "--outline", type=_int_list, default=(), help="comma list of orders to outline"
    )

    p_dev = sub.add_parser("deviation", help="deviation sweep and exponent fit")
    add_source(p_dev)
    p_dev.add_argument("--f", type=_float_list, required=True, help="per-type densities")
    p_dev.add_argument("--domain", choices=("cube", "ball"), default="cube")
    p_dev.add_argument("--rmin", type=float, default=None, help="smallest dilation")
    p_dev.add_argument("--rmax", type=float, default=None, help="largest dilation")
    p_dev.add_argument("--rpoints", type=int, default=96, help="grid size (default: 96)")
    p_dev.add_argument("--depth", type=int, default=None, help="view depth override")

    p_law = sub.add_parser("limitlaw", help="sample the normalized deviation law")
    add_source(p_law)
    p_law.add_argument("--f", type=_float_list, required=True, help="per-type densities")
    p_law.add_argument("--n-range", type=_n_range, default=range(2, 6), help="A:B inclusive")
    p_law.add_argument("--samples", type=int, default=10_000)
    p_law.add_argument("--r-grid", type=_float_list, default=(0.25, 0.5, 1.0))
    p_law.add_argument("--seed", type=int, default=0, help="rng seed (default: 0)")
    p_law.add_argument("--threads", type=int, default=None, help="worker processes")
    return parser


# ---------------------------------------------------------------------------
# output plumbing


def _config_echo(args):
    skip = {"command", "threads", "out"}
    echo = {}
    for k, v in sorted(vars(args).items()):
        if k in skip or v is None:
            continue
        echo[k.replace("_", "-")] = list(v) if isinstance(v, (tuple, range)) else v
    return echo


def _header(args, system=None, spec=None, seed=None):
    head = {
        "tool": "subtiling",
        "version": __version__,
        "command": args.command,
        "config": _config_echo(args),
    }
    if seed is not None:
        head["rng_seed"] = int(seed)
    if system is not None:
        head["system"] = system.name
    if spec is not None:
        head["spectral"] = spec.summary()
    return head


def _write_json(path, payload):
    path.write_text(json.dumps(payload, sort_keys=True, indent=2) + "\n")


def _write_csv(path, header, columns, rows):
    lines = [f"# {json.dumps(header, sort_keys=True)}", ",".join(columns)]
    for row in rows:
        lines.append(
            ",".join(f"{v:.17g}" if isinstance(v, float) else str(v) for v in row)
        )
    path.write_text("\n".join(lines) + "\n")


def _load_system(args):
    if bool(args.system) == bool(args.json):
        raise UnknownNameError("give exactly one of --system or --json")
    if args.system:
        return load_builtin(args.system)
    text = Path(args.json).read_text()
    return SubstitutionSystem.from_json(text)


def _outdir(args):
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


# ---------------------------------------------------------------------------
# subcommands


def cmd_validate(args):
    if bool(args.system) == bool(args.json):
        raise UnknownNameError("give exactly one of --system or --json")
    out = _outdir(args)
    name = args.system or Path(args.json).stem
    path = out / f"validate_{name}.json"
    try:
        system = _load_system(args)
        report = validate_system(system, tol=args.tol)
    except TilingError as err:
        _write_json(path, {**_header(args), "valid": False, "error": err.as_dict()})
        print(f"FAIL {name}: [{err.code}] {err}")
        print(f"wrote {path}")
        return err.exit_code
    try:
        spec = spectral_data(system)
    except TilingError:
        spec = None
    payload = {
        **_header(args, system, spec),
        "valid": True,
        "report": report.as_dict(),
    }
    _write_json(path, payload)
    print(f"PASS {name}: {system.m} prototiles, d={system.d}, lambda={system.lam:.12g}")
    print(f"wrote {path}")
    return 0


def cmd_render(args):
    system = _load_system(args)
    out = _outdir(args)
    try:
        type_index = int(args.type)
    except ValueError:
        type_index = system.type_index(args.type)
    svg = patch_svg(system, type_index, args.order, outline_orders=args.outline)
    path = out / f"render_{system.name}_t{type_index}_o{args.order}.svg"
    path.write_text(svg)
    print(f"wrote {path}")
    return 0


def _regime_verdict(spec, slope):
    """Nearest-prediction classification of a measured deviation slope."""
    d = spec.d
    predictions = {"bounded": 0.0, "boundary": float(d - 1), "log-corrected": float(d - 1)}
    if spec.ell >= 2:
        predictions["power"] = spec.alpha
    measured = min(predictions, key=lambda k: abs(slope - predictions[k]))
    return {
        "expected_regime": spec.regime,
        "measured_regime": measured,
        "predicted_slope": predictions.get(spec.regime),
        "consistent": measured == spec.regime,
    }


def cmd_deviation(args):
    system = _load_system(args)
    spec = spectral_data(system)
    out = _outdir(args)
    rmin = args.rmin if args.rmin is not None else 10.0 * system.metrics().d_max
    rmax = args.rmax if args.rmax is not None else rmin * 1000.0
    if args.rpoints < 2 or rmax <= rmin:
        raise DegenerateFitError(
            "need rmin < rmax and at least 2 grid points",
            rmin=rmin,
            rmax=rmax,
            rpoints=args.rpoints,
        )
    grid = np.geomspace(rmin, rmax, args.rpoints)
    extent = rmax * math.sqrt(system.d) * 0.55
    if args.depth is not None:
        view = TilingView.create(system, args.depth)
        view.ensure_contains(Domain.cube(rmax, d=system.d))
    else:
        view = TilingView.for_extent(system, extent)
    base = Domain.cube(1.0, d=system.d) if args.domain == "cube" else Domain.ball(0.5, system.d)
    table = deviation_curve(view, spec, args.f, grid, dom=base)
    fit = exponent_fit(table, "deviation")
    resid_fit = exponent_fit(table, "residual") if spec.ell >= 2 else None
    header = _header(args, system, spec)
    csv_path = out / f"deviation_{system.name}.csv"
    _write_csv(
        csv_path,
        header,
        ("R", "deviation", "residual", "phi2_abs"),
        zip(
            table.R.tolist(),
            table.deviation.tolist(),
            table.residual.tolist(),
            table.phi2_abs.tolist(),
        ),
    )
    summary = {
        **header,
        "fit": {
            "slope": fit.slope,
            "intercept": fit.intercept,
            "r2": fit.r2,
            "n_used": fit.n_used,
            "n_dropped": fit.n_dropped,
        },
        "residual_fit": None
        if resid_fit is None
        else {"slope": resid_fit.slope, "r2": resid_fit.r2},
        "verdict": _regime_verdict(spec, fit.slope),
    }
    json_path = out / f"deviation_{system.name}.json"
    _write_json(json_path, summary)
    verdict = summary["verdict"]
    print(
        f"{system.name}: slope={fit.slope:.4f} over R in [{rmin:.6g}, {rmax:.6g}]"
        f" -> measured {verdict['measured_regime']},"
        f" expected {verdict['expected_regime']}"
        f" ({'consistent' if verdict['consistent'] else 'INCONSISTENT'})"
    )
    print(f"wrote {csv_path}")
    print(f"wrote {json_path}")
    return 0


def cmd_limitlaw(args):
    system = _load_system(args)
    spec = spectral_data(system)
    out = _outdir(args)
    dists, ks = limitlaw_matrix(
        system,
        args.f,
        args.n_range,
        args.samples,
        args.r_grid,
        rng_seed=args.seed,
        workers=args.threads,
    )
    n_list = sorted(dists)
    header = _header(args, system, spec, seed=args.seed)
    rows = []
    for n in n_list:
        emp = dists[n]
        for i in range(emp.samples.shape[0]):
            for j, r in enumerate(emp.r_grid):
                rows.append((n, i, float(r), float(emp.samples[i, j])))
    csv_path = out / f"limitlaw_{system.name}.csv"
    _write_csv(csv_path, header, ("n", "sample_id", "r", "value"), rows)
    any_emp = dists[n_list[0]]
    summary = {
        **header,
        "beta": any_emp.beta,
        "n_values": n_list,
        "r_grid": list(any_emp.r_grid),
        "window_side": {str(n): dists[n].meta["window_side"] for n in n_list},
        "ks_matrix": {
            f"{r:.17g}": {f"{na},{nb}": v for (na, nb), v in sorted(mat.items())}
            for r, mat in ks.items()
        },
        "variance": {
            str(n): {f"{r:.17g}": float(dists[n].column(r).var()) for r in any_emp.r_grid}
            for n in n_list
        },
        "tightness": {str(n): tightness_check(dists[n]) for n in n_list},
    }
    json_path = out / f"limitlaw_{system.name}.json"
    _write_json(json_path, summary)
    last = (n_list[-2], n_list[-1])
    r_last = any_emp.r_grid[-1]
    print(
        f"{system.name}: {args.samples} samples x n={n_list},"
        f" KS({last[0]},{last[1]}) at r={r_last:g}: {ks[r_last][last]:.4f}"
    )
    print(f"wrote {csv_path}")
    print(f"wrote {json_path}")
    return 0


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    handlers = {
        "validate": cmd_validate,
        "render": cmd_render,
        "deviation": cmd_deviation,
        "limitlaw": cmd_limitlaw,
    }
    try:
        return handlers[args.command](args)
    except TilingError as err:
        print(f"error [{err.code}]: {err}", file=sys.stderr)
        return err.exit_code


if __name__ == "__main__":
    sys.exit(main())
