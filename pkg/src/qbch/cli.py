"""Command-line front end.

Subcommands: build-code, synth, verify-ft, search-perms, simulate,
threshold.  Exit codes: 0 success/pass, 1 verdict-fail, 2 usage or
configuration error.  Every command echoes its resolved configuration
and writes it next to its outputs so a rerun reproduces results
bit-exactly.  Option precedence: command-line flags, then --config file
entries, then defaults; QBCH_OUTPUT_DIR sets the default output
directory.
"""

from __future__ import annotations

import json
import os
import sys
from fractions import Fraction
from pathlib import Path

import click

from qbch.analysis import (
    THRESHOLD_CSV_HEADER,
    binomial_logical_diff,
    dual_containing_bch_parameters,
    threshold_rows_for_code,
)
from qbch.codes import (
    CodeConstructionError,
    CssCode,
    ENUMERATION_DIM_LIMIT,
    bch_code,
    css_from_dual_containing,
)
from qbch.circuit import CircuitError, parse_circuit, serialize_circuit, synth_css_prep
from qbch.distill import ProtocolError, assemble, protocol_from_json
from qbch.gf2poly import BitPoly, FieldSpec
from qbch.simulate import sweep, sweep_sidecar, sweep_to_csv
from qbch.symmetry import AutomorphismElement, all_elements
from qbch.verifier import VerifierBudgetError, check_strict_ft, search_permutations

EXIT_PASS = 0
EXIT_VERDICT_FAIL = 1
EXIT_USAGE = 2


def _resolve(ctx: click.Context, **values) -> dict:
    """flags > config file > defaults."""
    config = {}
    config_path = values.pop("config", None)
    if config_path:
        try:
            config = json.loads(Path(config_path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise click.UsageError(f"cannot read config file: {exc}")
    resolved = {}
    for name, value in values.items():
        source = ctx.get_parameter_source(name)
        if source is not None and source.name == "COMMANDLINE":
            resolved[name] = value
        elif name in config:
            resolved[name] = config[name]
        else:
            resolved[name] = value
    return resolved


def _out_dir(value: str | None) -> Path:
    if value:
        return Path(value)
    return Path(os.environ.get("QBCH_OUTPUT_DIR", "."))


def _echo_config(command: str, resolved: dict) -> None:
    click.echo(json.dumps({"command": command, "config": resolved}, default=str))


def _write_sidecar(path: Path, command: str, resolved: dict) -> None:
    path.write_text(json.dumps({"command": command, "config": resolved}, default=str, indent=2) + "\n")


def _load_code(path: str) -> CssCode:
    try:
        return CssCode.from_json(json.loads(Path(path).read_text()))
    except (OSError, json.JSONDecodeError, KeyError, ValueError) as exc:
        raise click.UsageError(f"cannot load code descriptor {path}: {exc}")


def _load_circuit(path: str, n_qubits: int):
    try:
        return parse_circuit(Path(path).read_text(), n_qubits=n_qubits)
    except OSError as exc:
        raise click.UsageError(f"cannot read circuit file: {exc}")
    except CircuitError as exc:
        raise click.UsageError(f"bad circuit file {path}: {exc}")


def _load_protocol(path: str, code: CssCode, circuit):
    try:
        data = json.loads(Path(path).read_text())
        return protocol_from_json(data, code, block_circuit=circuit)
    except (OSError, json.JSONDecodeError, KeyError) as exc:
        raise click.UsageError(f"cannot load protocol descriptor {path}: {exc}")
    except ProtocolError as exc:
        raise click.UsageError(f"bad protocol: {exc}")


@click.group()
def main() -> None:
    """Quantum BCH distillation toolkit."""


@main.command("build-code")
@click.option("--n", type=int, required=True, help="code length 2^m - 1")
@click.option("--delta", type=int, required=True, help="designed distance")
@click.option("--primitive-poly", type=str, default=None, help="hex coefficient string, little-endian")
@click.option("--out", type=str, default=None, help="descriptor path (default <outdir>/code_n<k>_d<delta>.json)")
@click.option("--out-dir", type=str, default=None)
@click.option("--config", type=str, default=None)
@click.pass_context
def cmd_build_code(ctx, **kwargs):
    """Build a quantum BCH code and write its descriptor JSON."""
    cfg = _resolve(ctx, **kwargs)
    n = cfg["n"]
    m = n.bit_length()
    if (1 << m) - 1 != n:
        raise click.UsageError(f"n must have the form 2^m - 1, got {n}")
    try:
        if cfg["primitive_poly"]:
            spec = FieldSpec(m, BitPoly.from_hex(cfg["primitive_poly"]))
        else:
            spec = FieldSpec.default(m)
        classical = bch_code(spec, cfg["delta"])
        css = css_from_dual_containing(classical, cfg["delta"], spec)
    except (ValueError, CodeConstructionError) as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_USAGE)
    out = Path(cfg["out"]) if cfg["out"] else _out_dir(cfg["out_dir"]) / f"code_n{n}_d{cfg['delta']}.json"
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(json.dumps(css.to_json(), indent=2) + "\n")
    _echo_config("build-code", cfg)
    click.echo(
        f"[[{css.n},{css.k},{css.d_design}]] rate {css.k}/{css.n} = {css.k / css.n:.4f} -> {out}"
    )


@main.command("synth")
@click.option("--code", "code_path", type=str, required=True)
@click.option("--out", type=str, default=None)
@click.option("--stats-out", type=str, default=None)
@click.option("--out-dir", type=str, default=None)
@click.option("--config", type=str, default=None)
@click.pass_context
def cmd_synth(ctx, **kwargs):
    """Synthesize the baseline non-FT preparation circuit for a code."""
    cfg = _resolve(ctx, **kwargs)
    css = _load_code(cfg["code_path"])
    circuit = synth_css_prep(css)
    out = Path(cfg["out"]) if cfg["out"] else _out_dir(cfg["out_dir"]) / f"prep_n{css.n}.txt"
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(serialize_circuit(circuit))
    stats = circuit.stats()
    if cfg["stats_out"]:
        Path(cfg["stats_out"]).write_text(json.dumps(stats) + "\n")
    _echo_config("synth", cfg)
    click.echo(json.dumps(stats))


@main.command("verify-ft")
@click.option("--code", "code_path", type=str, required=True)
@click.option("--circuit", "circuit_path", type=str, default=None, help="block circuit (default: synthesize)")
@click.option("--protocol", "protocol_path", type=str, required=True)
@click.option("--budget-gb", type=float, default=8.0)
@click.option("--out", type=str, default=None)
@click.option("--out-dir", type=str, default=None)
@click.option("--config", type=str, default=None)
@click.pass_context
def cmd_verify_ft(ctx, **kwargs):
    """Check strict fault tolerance; exit 0 iff the protocol passes."""
    cfg = _resolve(ctx, **kwargs)
    css = _load_code(cfg["code_path"])
    circuit = _load_circuit(cfg["circuit_path"], css.n) if cfg["circuit_path"] else synth_css_prep(css)
    protocol = _load_protocol(cfg["protocol_path"], css, circuit)
    try:
        verdict = check_strict_ft(protocol, memory_budget_bytes=int(cfg["budget_gb"] * (1 << 30)))
    except VerifierBudgetError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_USAGE)
    out = Path(cfg["out"]) if cfg["out"] else _out_dir(cfg["out_dir"]) / "verdict.json"
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(json.dumps(verdict.to_json(), indent=2) + "\n")
    _echo_config("verify-ft", cfg)
    click.echo(f"strict-FT: {'PASS' if verdict.passed else 'FAIL'} "
               f"({verdict.cases} cases, {len(verdict.malignant_patterns)} malignant) -> {out}")
    sys.exit(EXIT_PASS if verdict.passed else EXIT_VERDICT_FAIL)


@main.command("search-perms")
@click.option("--code", "code_path", type=str, required=True)
@click.option("--circuit", "circuit_path", type=str, default=None)
@click.option("--shape", type=str, required=True, help="m1,m2")
@click.option("--generators", type=str, default="I", help="'I', 'all', or comma-separated labels like 'I,R^6,F'")
@click.option("--budget", type=int, default=1000, help="max assignments to check")
@click.option("--target", type=str, default="zero")
@click.option("--out", type=str, default=None)
@click.option("--out-dir", type=str, default=None)
@click.option("--config", type=str, default=None)
@click.pass_context
def cmd_search_perms(ctx, **kwargs):
    """Search permutation assignments that pass strict FT."""
    cfg = _resolve(ctx, **kwargs)
    css = _load_code(cfg["code_path"])
    circuit = _load_circuit(cfg["circuit_path"], css.n) if cfg["circuit_path"] else synth_css_prep(css)
    try:
        m1, m2 = (int(tok) for tok in cfg["shape"].split(","))
    except ValueError:
        raise click.UsageError("--shape must look like '2,2'")
    gen_text = cfg["generators"]
    if gen_text == "all":
        if css.field_spec is None:
            raise click.UsageError("'all' generators need a descriptor with field data")
        gens = all_elements(css.n, css.field_spec.m)
    elif gen_text.strip() == "":
        gens = []
    else:
        gens = [AutomorphismElement.parse(tok, css.n) for tok in gen_text.split(",")]
    results = search_permutations(
        css, (m1, m2), gens, cfg["budget"], target_state=cfg["target"], block_circuit=circuit
    )
    out = Path(cfg["out"]) if cfg["out"] else _out_dir(cfg["out_dir"]) / "passing_assignments.json"
    out.parent.mkdir(parents=True, exist_ok=True)
    payload = [
        {"perms": list(labels), "cases": v.cases, "elapsed_s": v.elapsed_s}
        for labels, v in results
    ]
    out.write_text(json.dumps(payload, indent=2) + "\n")
    _echo_config("search-perms", cfg)
    click.echo(f"{len(results)} passing assignment(s) -> {out}")


@main.command("simulate")
@click.option("--code", "code_path", type=str, required=True)
@click.option("--circuit", "circuit_path", type=str, default=None)
@click.option("--protocol", "protocol_path", type=str, required=True)
@click.option("--p-grid", type=str, default="1e-4,3e-4,1e-3,3e-3,1e-2")
@click.option("--shots", type=int, default=1_000_000)
@click.option("--seed", type=int, default=2024)
@click.option("--threads", type=int, default=1)
@click.option("--w-max", type=int, default=3)
@click.option("--gnuplot/--no-gnuplot", default=False)
@click.option("--out-dir", type=str, default=None)
@click.option("--config", type=str, default=None)
@click.pass_context
def cmd_simulate(ctx, **kwargs):
    """Monte Carlo sweep: acceptance and residual-weight CSV."""
    cfg = _resolve(ctx, **kwargs)
    css = _load_code(cfg["code_path"])
    circuit = _load_circuit(cfg["circuit_path"], css.n) if cfg["circuit_path"] else synth_css_prep(css)
    protocol = _load_protocol(cfg["protocol_path"], css, circuit)
    try:
        grid = [float(tok) for tok in str(cfg["p_grid"]).split(",") if tok]
    except ValueError:
        raise click.UsageError("--p-grid must be comma-separated floats")
    if any(not 0.0 <= p < 1.0 for p in grid):
        raise click.UsageError("grid values must lie in [0, 1)")
    assembled = assemble(protocol)
    batches = sweep(assembled, grid, cfg["shots"], cfg["seed"], w_max=cfg["w_max"], threads=cfg["threads"])
    out_dir = _out_dir(cfg["out_dir"])
    out_dir.mkdir(parents=True, exist_ok=True)
    csv_path = out_dir / "simulation.csv"
    csv_path.write_text(sweep_to_csv(batches))
    sidecar = sweep_sidecar(assembled, grid, cfg["shots"], cfg["seed"], w_max=cfg["w_max"])
    sidecar["resolved_config"] = cfg
    (out_dir / "simulation.json").write_text(json.dumps(sidecar, indent=2, default=str) + "\n")
    if cfg["gnuplot"]:
        (out_dir / "simulation.gp").write_text(_gnuplot_script("simulation.csv"))
    _echo_config("simulate", cfg)
    click.echo(f"{len(batches)} grid points -> {csv_path}")


def _gnuplot_script(csv_name: str) -> str:
    return (
        "set datafile separator ','\n"
        "set logscale xy\n"
        "set xlabel 'physical error rate p'\n"
        "set ylabel 'rate'\n"
        f"plot '{csv_name}' using 1:7 with linespoints title 'X w=1', \\\n"
        f"     '{csv_name}' using 1:8 with linespoints title 'X w=2', \\\n"
        f"     '{csv_name}' using 1:9 with linespoints title 'X w>=3'\n"
    )


@main.command("threshold")
@click.option("--n-max", type=int, default=127)
@click.option("--out-dir", type=str, default=None)
@click.option("--gnuplot/--no-gnuplot", default=False)
@click.option("--config", type=str, default=None)
@click.pass_context
def cmd_threshold(ctx, **kwargs):
    """Scaling-threshold table over all dual-containing BCH codes."""
    cfg = _resolve(ctx, **kwargs)
    rows = []
    for m, delta in dual_containing_bch_parameters(cfg["n_max"]):
        spec = FieldSpec.default(m)
        classical = bch_code(spec, delta)
        css = css_from_dual_containing(classical, delta, spec)
        dual_dim = css.n - classical.k_c
        if min(classical.k_c, dual_dim) <= ENUMERATION_DIM_LIMIT:
            from qbch.codes import code_enumerator, logical_weight_difference, min_distance

            enum_c, enum_dual = code_enumerator(classical)
            diff = logical_weight_difference(enum_c, enum_dual)
            css.d_true = next(w for w in range(1, css.n + 1) if diff[w] > 0)
            rows.extend(threshold_rows_for_code(css, diff, enum_source="exact"))
        else:
            t = (delta - 1) // 2
            approx = binomial_logical_diff(css.n, classical.k_c, (2 * t + 1, 2 * t + 2))
            rows.extend(threshold_rows_for_code(css, approx, enum_source="binomial-approx"))
    out_dir = _out_dir(cfg["out_dir"])
    out_dir.mkdir(parents=True, exist_ok=True)
    csv_path = out_dir / "thresholds.csv"
    lines = [THRESHOLD_CSV_HEADER] + [",".join(r.csv_fields()) for r in rows]
    csv_path.write_text("\n".join(lines) + "\n")
    _write_sidecar(out_dir / "thresholds.config.json", "threshold", cfg)
    if cfg["gnuplot"]:
        (out_dir / "thresholds.gp").write_text(
            "set datafile separator ','\nset logscale y\n"
            "set xlabel 'rate k/n'\nset ylabel 'p0 (circuit level)'\n"
            "plot 'thresholds.csv' using 5:9 with points title 'quantum BCH codes'\n"
        )
    _echo_config("threshold", cfg)
    click.echo(f"{len(rows)} rows -> {csv_path}")


if __name__ == "__main__":
    main()
