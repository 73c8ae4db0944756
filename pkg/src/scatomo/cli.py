"""Command-line interface.

Output formats
--------------
coeffs     CSV ``kappa,a,a_prime,b,c``
fig4-grid  CSV ``kappa1,kappa2,value`` (+ ``shown`` with --threshold); pole cells are ``inf``
optimize   JSON optimum report
reconstruct  JSON reconstruction result
simulate   JSON error report; per-replica CSV ``replica,error,trace_distance,was_clipped``;
           sweep table CSV ``kappa,mean_error,std_error,clip_rate`` (or JSON)

Exit status: 0 on success, 1 when the minimizer finds no interior minimum, 2 for invalid
input, 3 for a degenerate scheme. Errors are written to stderr as one JSON line
``{"error": ..., "message": ...}``.
"""

from __future__ import annotations

import csv
import io
import json
import sys

import click
import numpy as np

from . import optimize as opt
from .montecarlo import ExperimentPlan, error_vs_kappa_sweep, estimate_and_reconstruct
from .scattering import coefficients
from .spin_algebra import bloch_vector, density_to_bloch
from .tomography import STRATEGIES, DegenerateSchemeError, build_scheme, reconstruct

EXIT_CONFIG = 2
EXIT_DEGENERATE = 3

SCHEME_FIGURES = {
    "frame_t": "detMt",
    "frame_r": "detMr",
    "parallel_t": "lambda_t",
    "parallel_r": "lambda_r",
    "strategy2": "absDetN_cuberoot",
}


def fmt(x) -> str:
    x = float(x)
    if np.isinf(x):
        return "inf" if x > 0 else "-inf"
    return f"{x:.17g}"


def _floats(text: str, n: int | None = None, name: str = "value") -> list[float]:
    try:
        values = [float(t) for t in str(text).replace(";", ",").split(",") if t.strip()]
    except ValueError:
        raise click.BadParameter(f"{name}: expected comma-separated numbers, got {text!r}")
    if n is not None and len(values) != n:
        raise click.BadParameter(f"{name}: expected {n} numbers, got {len(values)}")
    return values


def _emit(text: str, out: str | None) -> None:
    if out is None or out == "-":
        click.echo(text, nl=False)
        return
    try:
        with open(out, "w", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise click.UsageError(f"cannot write {out!r}: {exc.strerror}")


def _csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(x) if isinstance(x, (float, np.floating)) else x for x in row])
    return buf.getvalue()


def _json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, allow_nan=True) + "\n"


def _load_config(path: str | None) -> dict:
    if path is None:
        return {}
    try:
        with open(path) as fh:
            cfg = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise click.UsageError(f"cannot read config {path!r}: {exc}")
    if not isinstance(cfg, dict):
        raise click.UsageError("config must be a JSON object")
    return cfg


@click.group()
@click.option("--config", "config_path", type=click.Path(dir_okay=False),
              help="JSON file with option values for the subcommand; flags override it.")
@click.pass_context
def cli(ctx, config_path):
    """Qubit tomography from spin-dependent 1D scattering of a probe qubit."""
    cfg = _load_config(config_path)
    sub = ctx.invoked_subcommand
    if sub is None:
        return
    name = cfg.pop("subcommand", sub)
    if name != sub:
        raise click.UsageError(f"config is for subcommand {name!r}, not {sub!r}")
    command = cli.commands[sub]
    known = {p.name for p in command.params}
    unknown = sorted(set(cfg) - known)
    if unknown:
        raise click.UsageError(f"unknown config keys for {sub}: {unknown}")
    ctx.default_map = {sub: {k: (",".join(map(str, v)) if isinstance(v, list) else v)
                             for k, v in cfg.items()}}


@cli.command("coeffs")
@click.option("--channel", type=click.Choice(["t", "r"]), default="t", show_default=True)
@click.option("--grid", default="0.05,20,256", show_default=True,
              help="kmin,kmax,points; log-spaced kappa grid.")
@click.option("--out", default=None, help="Output path (default stdout).")
def cmd_coeffs(channel, grid, out):
    """Probability coefficients vs kappa. CSV columns: kappa,a,a_prime,b,c."""
    kmin, kmax, n = _floats(grid, 3, "--grid")
    if not (0 < kmin < kmax < np.inf) or n < 2 or n != int(n):
        raise click.BadParameter("--grid needs 0 < kmin < kmax and an integer count >= 2")
    kappa = np.geomspace(kmin, kmax, int(n))
    co = coefficients(1.0 / kappa, channel)
    _emit(_csv(["kappa", "a", "a_prime", "b", "c"], zip(kappa, co.a, co.a_prime, co.b, co.c)), out)


@cli.command("optimize")
@click.option("--scheme", type=click.Choice(sorted(SCHEME_FIGURES)), required=True)
@click.option("--grid", default="0.1,100,128", show_default=True,
              help="1D schemes: kmin,kmax,points of the log scan.")
@click.option("--box", default="0.2,10,0.2,10", show_default=True,
              help="strategy2: k1min,k1max,k2min,k2max.")
@click.option("--resolution", type=click.IntRange(min=16), default=96, show_default=True)
@click.option("--out", default=None)
def cmd_optimize(scheme, grid, box, resolution, out):
    """Minimize a scheme's sensitivity figure over the probe momentum. JSON output."""
    kind = SCHEME_FIGURES[scheme]
    f = opt.figure_of_merit(kind)
    report = {"scheme": scheme, "figure": kind}
    if f.dim == 1:
        kmin, kmax, n = _floats(grid, 3, "--grid")
        if not (0 < kmin < kmax < np.inf) or n < 3 or n != int(n):
            raise click.BadParameter("--grid needs 0 < kmin < kmax and an integer count >= 3")
        res = opt.minimize_1d(f, (kmin, kmax), int(n))
        k_star, expr = opt.ANALYTIC_OPTIMA[kind]
        report.update(
            argmin=res.argmin,
            value=res.value,
            analytic_value_at_argmin=float(f(res.argmin)),
            analytic_argmin=k_star,
            analytic_argmin_expr=expr,
            analytic_value=float(f(k_star)),
            bracket=list(res.bracket),
            iterations=res.iterations,
        )
    else:
        a1, b1, a2, b2 = _floats(box, 4, "--box")
        res = opt.minimize_2d(f, ((a1, b1), (a2, b2)), resolution)
        report.update(
            argmin=list(res.argmin),
            value=res.value,
            analytic_value_at_argmin=float(f(*res.argmin)),
            det_N=float(opt.det_N(1 / res.argmin[0], 1 / res.argmin[1])),
            box=[a1, b1, a2, b2],
            iterations=res.iterations,
        )
    _emit(_json(report), out)


def _axes(n_i, n_f):
    return _floats(n_i, 3, "--n-i"), _floats(n_f, 3, "--n-f")


scheme_options = [
    click.option("--strategy", type=click.Choice(STRATEGIES), default="frame", show_default=True),
    click.option("--kappa", type=float, default=float(np.sqrt(3)), show_default=True),
    click.option("--kappa2", type=float, default=None, help="Second momentum (momentum strategy)."),
    click.option("--channel", type=click.Choice(["t", "r"]), default="t", show_default=True),
    click.option("--n-i", "n_i", default="0,0,1", show_default=True, help="Incident spin axis."),
    click.option("--n-f", "n_f", default="1,0,0", show_default=True,
                 help="Detector axis (n_1 of the frame scheme), perpendicular to n_i."),
]


def with_scheme_options(func):
    for option in reversed(scheme_options):
        func = option(func)
    return func


@cli.command("reconstruct")
@with_scheme_options
@click.option("--probs", required=True, help="Three measured probabilities p1,p2,p3.")
@click.option("--out", default=None)
def cmd_reconstruct(strategy, kappa, kappa2, channel, n_i, n_f, probs, out):
    """Reconstruct the target Bloch vector from three measured probabilities."""
    p = np.array(_floats(probs, 3, "--probs"))
    if np.any(p < 0) or np.any(p > 1):
        raise click.BadParameter("--probs must lie in [0, 1]")
    scheme = build_scheme(strategy, kappa, kappa2, channel, *_axes(n_i, n_f))
    _emit(_json(reconstruct(scheme, p).to_dict()), out)


def _target_state(bloch, density):
    if (bloch is None) == (density is None):
        raise click.UsageError("give exactly one of --bloch or --density")
    if bloch is not None:
        return bloch_vector(_floats(bloch, 3, "--bloch"))
    try:
        entries = [complex(t.replace(" ", "")) for t in density.split(",")]
    except ValueError:
        raise click.BadParameter("--density: expected 4 complex numbers like 0.5,0.1-0.2j,...")
    if len(entries) != 4:
        raise click.BadParameter("--density: expected 4 complex entries (row-major)")
    return density_to_bloch(np.array(entries).reshape(2, 2))


@cli.command("simulate")
@with_scheme_options
@click.option("--bloch", default=None, help="Target Bloch vector x,y,z.")
@click.option("--density", default=None, help="Target density matrix, 4 complex entries row-major.")
@click.option("--shots", type=int, default=10_000, show_default=True)
@click.option("--replicas", type=int, default=200, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--sweep", default=None,
              help="Comma-separated kappa values: run an error-vs-kappa sweep instead.")
@click.option("--states", type=int, default=16, show_default=True,
              help="Sweep only: number of random target states (uniform in the ball).")
@click.option("--format", "fmt_", type=click.Choice(["csv", "json"]), default="json",
              show_default=True, help="Sweep only: table format.")
@click.option("--replica-csv", default=None, help="Write per-replica errors as CSV here.")
@click.option("--out", default=None)
def cmd_simulate(strategy, kappa, kappa2, channel, n_i, n_f, bloch, density, shots, replicas,
                 seed, sweep, states, fmt_, replica_csv, out):
    """Finite-shot Monte Carlo of a tomography scheme."""
    if shots < 1:
        raise click.BadParameter("--shots must be >= 1")
    if replicas < 1:
        raise click.BadParameter("--replicas must be >= 1")
    n_i, n_f = _axes(n_i, n_f)
    if sweep is not None:
        kappas = _floats(sweep, None, "--sweep")
        if states < 1:
            raise click.BadParameter("--states must be >= 1")
        if bloch is not None or density is not None:
            states_arg = np.atleast_2d(_target_state(bloch, density))
        else:
            states_arg = states
        build_scheme(strategy, kappas[0], kappa2, channel, n_i, n_f)
        rows = error_vs_kappa_sweep(strategy, kappas, shots, replicas, states_arg, seed,
                                    channel, kappa2)
        if fmt_ == "csv":
            text = _csv(["kappa", "mean_error", "std_error", "clip_rate"],
                        [(r.kappa, r.mean_error, r.std_error, r.clip_rate) for r in rows])
        else:
            best = min(rows, key=lambda r: r.mean_error)
            text = _json({"strategy": strategy, "channel": channel, "shots": shots,
                          "replicas": replicas, "seed": seed, "argmin_kappa": best.kappa,
                          "rows": [r.__dict__ for r in rows]})
        _emit(text, out)
        return
    v_true = _target_state(bloch, density)
    plan = ExperimentPlan(strategy, kappa, kappa2, channel, tuple(n_i), tuple(n_f),
                          shots=shots, replicas=replicas, seed=seed)
    result = estimate_and_reconstruct(plan, v_true)
    mean_v = np.mean([r.v_clipped for r in result.reconstructions], axis=0)
    report = {"plan": {k: (list(v) if isinstance(v, tuple) else v) for k, v in plan.__dict__.items()},
              "v_true": v_true.tolist(), "mean_v_estimate": mean_v.tolist(),
              "report": result.report.to_dict()}
    if replica_csv is not None:
        _emit(_csv(["replica", "error", "trace_distance", "was_clipped"],
                   [(i, float(e), float(e) / 2, int(r.was_clipped))
                    for i, (e, r) in enumerate(zip(result.errors, result.reconstructions))]),
              replica_csv)
    _emit(_json(report), out)


@cli.command("fig4-grid")
@click.option("--box", default="0.2,10,0.2,10", show_default=True, help="k1min,k1max,k2min,k2max.")
@click.option("--grid", "resolution", type=click.IntRange(min=16), default=256, show_default=True,
              help="Points per axis (linear spacing).")
@click.option("--threshold", type=float, default=None,
              help="Add a 'shown' column: 1 where value <= threshold (e.g. 20).")
@click.option("--out", default=None)
def cmd_fig4_grid(box, resolution, threshold, out):
    """|det N|^(1/3) of the momentum scheme on a (kappa1, kappa2) grid, long-format CSV."""
    a1, b1, a2, b2 = _floats(box, 4, "--box")
    if not (0 < a1 < b1 < np.inf and 0 < a2 < b2 < np.inf):
        raise click.BadParameter("--box must satisfy 0 < min < max < inf on both axes")
    f = opt.figure_of_merit("absDetN_cuberoot")
    k1, k2, values = opt.scan_2d(f, ((a1, b1), (a2, b2)), resolution, min_gap=1e-9, spacing="lin")
    header = ["kappa1", "kappa2", "value"] + (["shown"] if threshold is not None else [])
    rows = []
    for i, x in enumerate(k1):
        for j, y in enumerate(k2):
            row = [float(x), float(y), float(values[i, j])]
            if threshold is not None:
                row.append(int(values[i, j] <= threshold))
            rows.append(row)
    _emit(_csv(header, rows), out)


def _fail(kind: str, message: str, code: int) -> None:
    click.echo(json.dumps({"error": kind, "message": " ".join(str(message).split())}), err=True)
    sys.exit(code)


def main(argv=None) -> None:
    try:
        cli.main(args=argv, prog_name="scatomo", standalone_mode=False)
    except DegenerateSchemeError as exc:
        _fail("degenerate_scheme", exc, EXIT_DEGENERATE)
    except click.exceptions.Exit as exc:
        sys.exit(exc.exit_code)
    except click.Abort:
        _fail("aborted", "aborted", 1)
    except click.ClickException as exc:
        _fail("config", exc.format_message(), EXIT_CONFIG)
    except (ValueError, TypeError) as exc:
        _fail("config", exc, EXIT_CONFIG)
    except opt.NoInteriorMinimumError as exc:
        _fail("minimizer", exc, 1)
    sys.exit(0)


if __name__ == "__main__":
    main()
