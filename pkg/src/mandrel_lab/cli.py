"""Command-line front end.

Subcommands cover the whole laboratory: construct patterns, evaluate
energies, minimize, sweep parameters, fit exponents, run the certificate
and interpolation suites, and query the scaling oracle.  Outputs are
versioned ("mlab/1") CSV or JSON files under --out-dir; exit codes are
0 success, 2 precondition failure, 3 numerical failure, 4 certificate
failure.
"""

from __future__ import annotations

import csv
import json
import math
import sys
from pathlib import Path

import click

from . import certificates as cert_mod
from . import oracle as oracle_mod
from . import patterns as pat_mod
from . import sweep as sweep_mod
from .energy import NL, VKD, Configuration, energy_report
from .errors import CertificateError, LabError, PreconditionError
from .grid import Domain, ModelParams, read_gfld, write_gfld
from .minimize import FS, MinimizeOptions
from .minimize import minimize as minimize_op

FORMAT_VERSION = "mlab/1"
MODELS = (VKD, NL, FS)

FIELD_NAMES = ("rho", "theta", "z")


def _load_config(path: str | None) -> dict:
    """Flat key=value file; blank lines and # comments ignored."""
    if path is None:
        return {}
    out = {}
    for raw in Path(path).read_text().splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise PreconditionError(f"config line is not key=value: {raw!r}")
        key, _, value = line.partition("=")
        out[key.strip().replace("-", "_")] = value.strip()
    return out


@click.group()
@click.option("--config", "config_path", type=click.Path(exists=True),
              default=None, help="key=value file of option defaults")
@click.option("--out-dir", default=None, type=click.Path())
@click.option("--format", "fmt", default=None,
              type=click.Choice(["csv", "json"]))
@click.option("--threads", default=None, type=int)
@click.option("--seed", default=None, type=int)
@click.pass_context
def cli(ctx, config_path, out_dir, fmt, threads, seed):
    """Numerical laboratory for compressed cylinder energies."""
    config = _load_config(config_path)
    global_defaults = {
        "out_dir": out_dir if out_dir is not None
        else config.get("out_dir", "."),
        "fmt": fmt if fmt is not None else config.get("format", "json"),
        "threads": threads if threads is not None
        else int(config.get("threads", 1)),
        "seed": seed if seed is not None else int(config.get("seed", 0)),
    }
    ctx.obj = global_defaults
    # config keys become per-subcommand defaults; explicit flags override
    sub_defaults = {k: v for k, v in config.items()
                    if k not in ("out_dir", "format", "threads", "seed")}
    ctx.default_map = {name: dict(sub_defaults)
                       for name in cli.commands}


def main():
    try:
        cli.main(standalone_mode=False)
    except click.exceptions.Abort:
        sys.exit(1)
    except click.ClickException as exc:
        exc.show()
        sys.exit(2)
    except LabError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(exc.exit_code)
    sys.exit(0)


def _model_params(h, lam, rho, m) -> ModelParams:
    return ModelParams(h=h, lam=lam, rho=rho, m=m)


def model_option(f):
    return click.option("--model", type=click.Choice(MODELS),
                        required=True)(f)


def params_options(f):
    for deco in (
        click.option("--h", type=float, required=True),
        click.option("--lam", "--lambda", "lam", type=float, required=True),
        click.option("--rho", type=float, default=1.0, show_default=True),
        click.option("--m", type=float, default=math.inf,
                     help="slope bound (inf allowed)"),
    ):
        f = deco(f)
    return f


def _out_dir(ctx) -> Path:
    out = Path(ctx.obj["out_dir"])
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write_record(ctx, name: str, record: dict) -> Path:
    """One flat record, as versioned JSON or a one-row CSV."""
    out = _out_dir(ctx)
    if ctx.obj["fmt"] == "json":
        path = out / f"{name}.json"
        path.write_text(json.dumps(
            {"format": FORMAT_VERSION, **record}, indent=2, default=str)
            + "\n")
    else:
        path = out / f"{name}.csv"
        flat = _flatten(record)
        with open(path, "w", newline="") as fh:
            fh.write(f"# {FORMAT_VERSION}\n")
            writer = csv.DictWriter(fh, fieldnames=list(flat))
            writer.writeheader()
            writer.writerow(flat)
    click.echo(str(path))
    return path


def _write_table(ctx, name: str, rows: list[dict]) -> Path:
    out = _out_dir(ctx)
    if ctx.obj["fmt"] == "json":
        path = out / f"{name}.json"
        path.write_text(json.dumps(
            {"format": FORMAT_VERSION, "rows": rows}, indent=2, default=str)
            + "\n")
    else:
        path = out / f"{name}.csv"
        with open(path, "w", newline="") as fh:
            fh.write(f"# {FORMAT_VERSION}\n")
            writer = csv.DictWriter(fh, fieldnames=list(rows[0]))
            writer.writeheader()
            writer.writerows(rows)
    click.echo(str(path))
    return path


def _flatten(record: dict, prefix: str = "") -> dict:
    flat = {}
    for key, value in record.items():
        name = f"{prefix}{key}"
        if isinstance(value, dict):
            flat.update(_flatten(value, f"{name}."))
        else:
            flat[name] = value
    return flat


def _read_table(path: str) -> list[dict]:
    text = Path(path).read_text()
    if path.endswith(".json"):
        data = json.loads(text)
        return data["rows"] if isinstance(data, dict) else data
    lines = [ln for ln in text.splitlines() if not ln.startswith("#")]
    rows = []
    for row in csv.DictReader(lines):
        parsed = {}
        for key, value in row.items():
            try:
                parsed[key] = float(value)
            except (TypeError, ValueError):
                parsed[key] = value
        rows.append(parsed)
    return rows


def _write_fields(out: Path, stem: str, c: Configuration) -> list[str]:
    paths = []
    for name, f in zip(FIELD_NAMES,
                       (c.comp_rho, c.comp_theta, c.comp_z)):
        path = out / f"{stem}_{name}.gfld"
        write_gfld(path, f)
        paths.append(str(path))
    return paths


def _read_fields(in_dir: str, stem: str, model: str,
                 mp: ModelParams) -> Configuration:
    fields = [read_gfld(Path(in_dir) / f"{stem}_{name}.gfld")
              for name in FIELD_NAMES]
    config_model = NL if model == NL else VKD
    return Configuration(config_model, *fields, mp)


@cli.command()
@model_option
@params_options
@click.option("--regime", default=None,
              help="force a construction regime instead of dispatching")
@click.option("--oversample", type=float, default=1.0, show_default=True)
@click.option("--stem", default="pattern", show_default=True)
@click.pass_context
def pattern(ctx, model, h, lam, rho, m, regime, oversample, stem):
    """Construct the test pattern at the given parameters and write the
    three component fields plus a JSON sidecar."""
    mp = _model_params(h, lam, rho, m)
    if regime is None:
        pp = pat_mod.select_regime_params(model, mp)
    else:
        pp = pat_mod.regime_params(model, regime, mp)
    dom = pat_mod.suggested_domain(pp, oversample=oversample)
    c = sweep_mod.build_pattern(model, mp, pp, dom)
    report = energy_report(c, functional=FS if model == FS else None)
    out = _out_dir(ctx)
    paths = _write_fields(out, stem, c)
    slope_bound = (pat_mod.m2_bound(lam, pp.delta, pp.n, pp.k)
                   if pp.regime in pat_mod.TILTED_REGIMES
                   else pat_mod.m1_bound(lam, pp.delta))
    sidecar = {
        "format": FORMAT_VERSION, "model": model,
        "params": {"h": h, "lambda": lam, "rho": rho, "m": m},
        "regime": pp.regime, "n": pp.n, "k": pp.k, "delta": pp.delta,
        "n_theta": dom.n_theta, "n_z": dom.n_z,
        "slope_bound": slope_bound, "fields": paths,
        "report": report.to_dict(),
    }
    path = out / f"{stem}.json"
    path.write_text(json.dumps(sidecar, indent=2, default=str) + "\n")
    click.echo(str(path))


@cli.command()
@model_option
@params_options
@click.option("--in-dir", default=".", show_default=True)
@click.option("--stem", default="pattern", show_default=True)
@click.pass_context
def evaluate(ctx, model, h, lam, rho, m, in_dir, stem):
    """Evaluate the energy of stored component fields."""
    mp = _model_params(h, lam, rho, m)
    c = _read_fields(in_dir, stem, model, mp)
    report = energy_report(c, functional=FS if model == FS else None)
    _write_record(ctx, f"{stem}_energy", report.to_dict())


@cli.command()
@model_option
@params_options
@click.option("--n-theta", type=int, default=None,
              help="grid size (default: from the regime selector)")
@click.option("--n-z", type=int, default=None)
@click.option("--max-iterations", type=int, default=2000, show_default=True)
@click.option("--gradient-tolerance", type=float, default=1e-8,
              show_default=True)
@click.option("--obstacle-mode", default="PROJECTION",
              type=click.Choice(["PROJECTION", "PENALTY"]), show_default=True)
@click.option("--noise-amplitude", type=float, default=1e-2,
              show_default=True)
@click.option("--seed-stem", default=None,
              help="stem of stored fields to start from (in --out-dir)")
@click.option("--stem", default="minimized", show_default=True)
@click.pass_context
def minimize(ctx, model, h, lam, rho, m, n_theta, n_z, max_iterations,
             gradient_tolerance, obstacle_mode, noise_amplitude, seed_stem,
             stem):
    """Minimize the energy over the admissible set and write the final
    fields plus a result record."""
    mp = _model_params(h, lam, rho, m)
    if n_theta is None or n_z is None:
        pp = pat_mod.select_regime_params(model, mp)
        dom = pat_mod.suggested_domain(pp)
        dom = Domain(n_theta or dom.n_theta, n_z or dom.n_z)
    else:
        dom = Domain(n_theta, n_z)
    opts = MinimizeOptions(
        max_iterations=max_iterations,
        gradient_tolerance=gradient_tolerance,
        obstacle_mode=obstacle_mode, noise_amplitude=noise_amplitude,
        seed=ctx.obj["seed"])
    initial = None
    if seed_stem is not None:
        initial = _read_fields(ctx.obj["out_dir"], seed_stem, model, mp)
    result = minimize_op(model, mp, dom, opts, initial=initial)
    out = _out_dir(ctx)
    _write_fields(out, stem, result.final)
    _write_record(ctx, stem, result.to_dict())


@cli.command()
@model_option
@click.option("--varying", required=True,
              type=click.Choice(sweep_mod.VARYING_NAMES))
@click.option("--count", type=int, required=True)
@click.option("--lo", type=float, required=True)
@click.option("--hi", type=float, required=True)
@params_options
@click.option("--mode", default=sweep_mod.CONSTRUCT, show_default=True,
              type=click.Choice([sweep_mod.CONSTRUCT, sweep_mod.MINIMIZE]))
@click.option("--oversample", type=float, default=1.0, show_default=True)
@click.option("--max-iterations", type=int, default=2000, show_default=True)
@click.option("--skip-failures", is_flag=True, default=False)
@click.option("--stem", default="sweep", show_default=True)
@click.pass_context
def sweep(ctx, model, varying, count, lo, hi, h, lam, rho, m, mode,
          oversample, max_iterations, skip_failures, stem):
    """Sweep one parameter over a log-spaced grid and tabulate excess,
    slope, oracle prediction, and certificate status per point."""
    spec = sweep_mod.SweepSpec(
        model=model, varying=varying, count=count, lo=lo, hi=hi,
        fixed=_model_params(h, lam, rho, m), mode=mode,
        seed=ctx.obj["seed"], oversample=oversample,
        minimize_options=MinimizeOptions(max_iterations=max_iterations))
    rows = sweep_mod.run_sweep(spec, skip_failures=skip_failures,
                               threads=ctx.obj["threads"])
    _write_table(ctx, stem, [r.to_dict() for r in rows])


@cli.command()
@click.option("--input", "input_path", required=True,
              type=click.Path(exists=True), help="sweep table (csv or json)")
@click.option("--x", required=True, help="abscissa column")
@click.option("--y", required=True, help="ordinate column")
@click.option("--stem", default="fit", show_default=True)
@click.pass_context
def fit(ctx, input_path, x, y, stem):
    """Least-squares power-law fit of one table column against another."""
    table = _read_table(input_path)
    result = sweep_mod.fit_exponent(table, x, y)
    _write_record(ctx, stem, result.to_dict())


@cli.command()
@model_option
@params_options
@click.option("--in-dir", default=".", show_default=True)
@click.option("--stem", default="pattern", show_default=True)
@click.pass_context
def certify(ctx, model, h, lam, rho, m, in_dir, stem):
    """Run every applicable lower-bound certificate on stored fields;
    exits 4 if a hard-asserted certificate fails."""
    mp = _model_params(h, lam, rho, m)
    c = _read_fields(in_dir, stem, model, mp)
    reports = cert_mod.certificates_for(c)
    _write_table(ctx, f"{stem}_certificates",
                 [r.to_dict() for r in reports])
    cert_mod.ensure_passed(reports)


@cli.command()
@click.option("--family", default=None,
              type=click.Choice(cert_mod.INTERP_FAMILIES),
              help="default: all families")
@click.option("--samples", type=int, default=500, show_default=True)
@click.pass_context
def interp(ctx, family, samples):
    """Check the interpolation inequalities on seeded random fields."""
    families = [family] if family else list(cert_mod.INTERP_FAMILIES)
    reports = [cert_mod.check_interpolation(fam, samples, ctx.obj["seed"])
               for fam in families]
    _write_table(ctx, "interp", [r.to_dict() for r in reports])
    failed = [r.family for r in reports if not r.passed]
    if failed:
        raise CertificateError(
            f"interpolation families failed: {', '.join(failed)}")


@cli.command()
@model_option
@params_options
@click.pass_context
def oracle(ctx, model, h, lam, rho, m):
    """Report the predicted excess-energy scaling at the parameters."""
    mp = _model_params(h, lam, rho, m)
    pred = oracle_mod.predict(model, mp)
    record = pred.to_dict()
    if model in (VKD, NL):
        record["regime_boundary_consistent"] = \
            oracle_mod.regime_boundary(model, mp).agree
        if mp.rho == 1.0:
            record["neutral_bounds"] = oracle_mod.neutral_bounds(model, mp)
    _write_record(ctx, "oracle", record)


if __name__ == "__main__":
    main()
