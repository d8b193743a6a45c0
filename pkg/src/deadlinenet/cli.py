"""Command-line front end: scenario files in, tables/CSV/JSON out.

Every command is deterministic given (config file, flags): rerunning an
identical invocation produces byte-identical output. Exit codes: 0 on
success, 3 invalid scenario or network, 4 network not open, 5 numerical
failure (2 is reserved by the argument parser for usage errors).
"""

from __future__ import annotations

import json
import math
import sys
from pathlib import Path
from typing import Optional

import click
import numpy as np

from .analytic import (
    baseline_full_insensitivity,
    baseline_service_time_insensitivity,
    expand_network,
    product_form,
    solve_expanded,
    solve_traffic,
)
from .config import (
    OUTPUT_FORMATS,
    ScenarioConfig,
    bundled_scenario_path,
    load_scenario,
)
from .distributions import compute_min_stats
from .errors import (
    ConfigError,
    InfiniteMeanError,
    InvalidNetworkError,
    OpennessError,
    QuadratureError,
)
from .model import NOT_OPEN
from .simulate import SimConfig, replicate, simulate
from .stats import compare as stats_compare

__all__ = [
    "main",
    "parse_csv_tables",
    "EXIT_VALIDATION",
    "EXIT_OPENNESS",
    "EXIT_NUMERICAL",
]

EXIT_VALIDATION = 3
EXIT_OPENNESS = 4
EXIT_NUMERICAL = 5

_CSV_HEADER = "# deadlinenet-csv v1"


# ---------------------------------------------------------------------------
# document model: every command produces named tables, note lines, and a
# JSON-able payload, then one of three renderers serializes the lot.

class _Doc:
    def __init__(self, kind: str):
        self.kind = kind
        self.tables: list[tuple[str, list[str], list[list[object]]]] = []
        self.notes: list[str] = []
        self.payload: dict = {"kind": kind}

    def table(self, name: str, header: list[str], rows: list[list[object]]):
        self.tables.append((name, header, rows))

    def note(self, text: str):
        self.notes.append(text)


def _text_cell(value: object) -> str:
    if value is None:
        return "-"
    if isinstance(value, float):
        if math.isinf(value):
            return "inf"
        return f"{value:.6f}"
    return str(value)


def _csv_cell(value: object) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _jsonable(value):
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return [_jsonable(v) for v in value.tolist()]
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (np.floating,)):
        value = float(value)
    if isinstance(value, float) and math.isinf(value):
        return None
    return value


def _render(doc: _Doc, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(_jsonable(doc.payload), indent=2) + "\n"
    if fmt == "csv":
        lines = [f"{_CSV_HEADER} {doc.kind}"]
        for name, header, rows in doc.tables:
            lines.append(f"## {name}")
            lines.append(",".join(header))
            for row in rows:
                lines.append(",".join(_csv_cell(v) for v in row))
        for note in doc.notes:
            lines.append(f"# {note}")
        return "\n".join(lines) + "\n"
    blocks = []
    for name, header, rows in doc.tables:
        cells = [header] + [[_text_cell(v) for v in row] for row in rows]
        widths = [max(len(r[i]) for r in cells) for i in range(len(header))]
        lines = [f"== {name} =="]
        for r in cells:
            lines.append("  ".join(c.ljust(w)
                                   for c, w in zip(r, widths)).rstrip())
        blocks.append("\n".join(lines))
    body = "\n\n".join(blocks)
    if doc.notes:
        body += ("\n\n" if body else "") + "\n".join(doc.notes)
    return body + "\n"


def parse_csv_tables(text: str) -> tuple[str, dict[str, tuple[list[str], list[list[str]]]]]:
    """Read the versioned CSV format back: (kind, {table: (header, rows)})."""
    lines = text.splitlines()
    if not lines or not lines[0].startswith(_CSV_HEADER + " "):
        raise ValueError("not a recognized deadlinenet CSV document")
    kind = lines[0][len(_CSV_HEADER) + 1:]
    tables: dict[str, tuple[list[str], list[list[str]]]] = {}
    name = None
    for line in lines[1:]:
        if line.startswith("## "):
            name = line[3:]
            tables[name] = ([], [])
        elif line.startswith("#") or not line:
            continue
        elif name is None:
            raise ValueError(f"data before first table marker: {line!r}")
        elif not tables[name][0]:
            tables[name][0].extend(line.split(","))
        else:
            tables[name][1].append(line.split(","))
    return kind, tables


def _emit(text: str, out_path: Optional[str]) -> None:
    if out_path:
        Path(out_path).write_text(text)
    else:
        click.echo(text, nl=False)


# ---------------------------------------------------------------------------
# shared option plumbing

def _scenario_options(fn):
    for option in reversed([
        click.option("--config", "config_path",
                     type=click.Path(exists=True, dir_okay=False),
                     default=None,
                     help="Scenario file (default: bundled two-node example)."),
        click.option("--format", "fmt", type=click.Choice(OUTPUT_FORMATS),
                     default=None, help="Override the [outputs] format."),
        click.option("--out", "out_path",
                     type=click.Path(dir_okay=False, writable=True),
                     default=None, help="Write to a file instead of stdout."),
    ]):
        fn = option(fn)
    return fn


def _sim_options(fn):
    for option in reversed([
        click.option("--seed", type=int, default=None,
                     help="Override the [sim] seed."),
        click.option("--horizon", type=float, default=None,
                     help="Override the simulated time horizon."),
        click.option("--warmup", type=float, default=None,
                     help="Override the discarded warmup period."),
        click.option("--no-joint", is_flag=True, default=False,
                     help="Skip the joint occupancy histogram."),
    ]):
        fn = option(fn)
    return fn


def _load(config_path: Optional[str]) -> ScenarioConfig:
    return load_scenario(config_path or bundled_scenario_path())


def _effective_sim(scenario: ScenarioConfig, seed, horizon, warmup,
                   no_joint) -> SimConfig:
    base = scenario.sim
    kwargs = {
        "seed": base.seed if seed is None else seed,
        "generator_name": base.generator_name,
        "horizon": base.horizon if horizon is None else horizon,
        "warmup": base.warmup if warmup is None else warmup,
        "record_joint": base.record_joint and not no_joint,
    }
    try:
        return SimConfig(**kwargs)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def _fail(message: str, code: int):
    click.echo(message, err=True)
    sys.exit(code)


def _guarded(body):
    try:
        body()
    except ConfigError as exc:
        _fail(f"config error: {exc}", EXIT_VALIDATION)
    except InvalidNetworkError as exc:
        click.echo("invalid network:", err=True)
        for violation in exc.report:
            click.echo(f"  {violation}", err=True)
        openness_only = all(v.kind == NOT_OPEN for v in exc.report)
        sys.exit(EXIT_OPENNESS if openness_only else EXIT_VALIDATION)
    except InfiniteMeanError as exc:
        _fail(f"contract violation: {exc}", EXIT_VALIDATION)
    except OpennessError as exc:
        _fail(f"openness error: {exc}", EXIT_OPENNESS)
    except QuadratureError as exc:
        _fail(f"numerical failure: {exc}", EXIT_NUMERICAL)


# ---------------------------------------------------------------------------
# commands

@click.group()
@click.version_option(package_name="deadlinenet")
def main():
    """Equilibrium analysis and simulation of infinite-server networks
    with competing service times and outcome-dependent routing."""


@main.command("solve")
@_scenario_options
def cmd_solve(config_path, fmt, out_path):
    """Exact equilibrium occupancies and Poisson marginals."""
    def body():
        scenario = _load(config_path)
        spec = scenario.network
        stats = compute_min_stats(spec)
        traffic = solve_traffic(spec, stats)
        pf = product_form(spec, stats)
        doc = _Doc("solve")
        doc.table("rho", ["node", "rho"],
                  [[n + 1, float(pf.rho[n])] for n in range(spec.n_nodes)])
        doc.table("traffic", ["node", "component", "flow"],
                  [[n + 1, k + 1, float(traffic.alpha[n, k])]
                   for n in range(spec.n_nodes)
                   for k in range(spec.n_components)])
        limit = scenario.outputs.marginals_upto
        marginal_rows = []
        pmf_payload = []
        for n in range(spec.n_nodes):
            upto = pf.truncation(n) if limit is None else limit
            pmf = [float(pf.marginal(n, x)) for x in range(upto + 1)]
            pmf_payload.append({"node": n + 1, "pmf": pmf})
            marginal_rows.extend([[n + 1, x, p] for x, p in enumerate(pmf)])
        doc.table("marginal", ["node", "state", "probability"], marginal_rows)
        doc.payload.update({
            "rho": pf.rho,
            "traffic": traffic.alpha,
            "residual": traffic.residual,
            "marginals": pmf_payload,
        })
        _emit(_render(doc, fmt or scenario.outputs.format), out_path)
    _guarded(body)


def _sim_doc(doc: _Doc, scenario: ScenarioConfig, result) -> None:
    spec = scenario.network
    n_nodes = spec.n_nodes
    doc.table("means", ["node", "mean"],
              [[n + 1, float(result.means[n])] for n in range(n_nodes)])
    counts = result.event_counts
    doc.table("events", ["node", "external", "arrivals", "departures"],
              [[n + 1, int(counts.external[n]), int(counts.arrivals[n]),
                int(counts.departures[n].sum())] for n in range(n_nodes)])
    doc.table("component_use", ["node", "component", "departures"],
              [[n + 1, k + 1, int(counts.departures[n, k])]
               for n in range(n_nodes) for k in range(spec.n_components)])
    doc.table("marginal_weights", ["node", "state", "weight"],
              [[n + 1, x, w] for n in range(n_nodes)
               for x, w in result.marginal_weights[n].items()])
    if result.joint_weights is not None and scenario.outputs.joint:
        header = [f"state{n + 1}" for n in range(n_nodes)] + ["weight"]
        doc.table("joint_weights", header,
                  [[*state, w] for state, w in result.joint_weights.items()])
    doc.note(f"effective_duration = {result.effective_duration!r}")
    doc.note(f"ties = {result.ties}")
    doc.payload.update({
        "config": {
            "seed": result.config.seed,
            "generator": result.config.generator_name,
            "horizon": result.config.horizon,
            "warmup": result.config.warmup,
            "record_joint": result.config.record_joint,
        },
        "means": result.means,
        "effective_duration": result.effective_duration,
        "ties": result.ties,
        "final_occupancy": list(result.final_occupancy),
        "event_counts": {
            "external": counts.external,
            "arrivals": counts.arrivals,
            "departures": counts.departures,
        },
        "marginal_weights": [
            [[x, w] for x, w in result.marginal_weights[n].items()]
            for n in range(n_nodes)
        ],
        "joint_weights": (
            [[list(state), w] for state, w in result.joint_weights.items()]
            if result.joint_weights is not None and scenario.outputs.joint
            else None),
    })


@main.command("simulate")
@_scenario_options
@_sim_options
@click.option("--runs", type=int, default=1,
              help="Independent replications (pooled summary when > 1).")
def cmd_simulate(config_path, fmt, out_path, seed, horizon, warmup,
                 no_joint, runs):
    """Event-driven simulation of the scenario."""
    def body():
        scenario = _load(config_path)
        sim_cfg = _effective_sim(scenario, seed, horizon, warmup, no_joint)
        if runs < 1:
            raise ConfigError(f"--runs must be >= 1, got {runs}")
        doc = _Doc("simulate")
        if runs == 1:
            result = simulate(scenario.network, sim_cfg)
            _sim_doc(doc, scenario, result)
        else:
            summary = replicate(scenario.network, sim_cfg, runs)
            doc.table("pooled_means", ["node", "mean", "standard_error"],
                      [[n + 1, float(summary.means[n]),
                        float(summary.standard_errors[n])]
                       for n in range(scenario.network.n_nodes)])
            doc.table("run_means", ["run", "node", "mean"],
                      [[r + 1, n + 1, float(res.means[n])]
                       for r, res in enumerate(summary.results)
                       for n in range(scenario.network.n_nodes)])
            doc.note(f"runs = {runs}")
            doc.payload.update({
                "runs": runs,
                "pooled_means": summary.means,
                "standard_errors": summary.standard_errors,
                "run_means": summary.per_run_means,
                "config": {
                    "seed": sim_cfg.seed,
                    "generator": sim_cfg.generator_name,
                    "horizon": sim_cfg.horizon,
                    "warmup": sim_cfg.warmup,
                    "record_joint": sim_cfg.record_joint,
                },
            })
        _emit(_render(doc, fmt or scenario.outputs.format), out_path)
    _guarded(body)


@main.command("compare")
@_scenario_options
@_sim_options
def cmd_compare(config_path, fmt, out_path, seed, horizon, warmup, no_joint):
    """Simulated vs exact vs baseline occupancies."""
    def body():
        scenario = _load(config_path)
        sim_cfg = _effective_sim(scenario, seed, horizon, warmup, no_joint)
        result = simulate(scenario.network, sim_cfg)
        report = stats_compare(scenario.network, result)
        doc = _Doc("compare")
        doc.table("means",
                  ["node", "simulated", "exact", "full_insensitivity",
                   "service_time_insensitivity"],
                  [[n + 1, row["simulated"], row["exact"],
                    row["full_insensitivity"],
                    row["service_time_insensitivity"]]
                   for n, row in enumerate(report.mean_table)])
        doc.table("marginal_tv", ["node", "tv_distance"],
                  [[n + 1, float(report.marginal_distance[n])]
                   for n in range(scenario.network.n_nodes)])
        if report.product_form_sup is not None:
            doc.note(f"product_form_sup = {report.product_form_sup!r}")
        doc.payload.update({
            "mean_table": list(report.mean_table),
            "marginal_distance": report.marginal_distance,
            "product_form_sup": report.product_form_sup,
            "sample_info": report.sample_info,
        })
        _emit(_render(doc, fmt or scenario.outputs.format), out_path)
    _guarded(body)


@main.command("expand")
@_scenario_options
def cmd_expand(config_path, fmt, out_path):
    """Equivalent Markovian network, solved both ways as a cross-check."""
    def body():
        scenario = _load(config_path)
        spec = scenario.network
        stats = compute_min_stats(spec)
        expanded = expand_network(spec, stats)
        solution = solve_expanded(expanded)
        pf = product_form(spec, stats)
        doc = _Doc("expand")
        doc.table(
            "expanded_nodes",
            ["index", "node", "component", "external_rate", "achievement",
             "mean_service", "flow", "rho"],
            [[i + 1, n + 1, k + 1,
              float(expanded.external_rates[i]),
              float(expanded.achievement[i]),
              float(expanded.cond_means[i]),
              float(solution.alpha[i]),
              float(solution.rho[i])]
             for i, (n, k) in enumerate(expanded.node_ids)])
        doc.table("expanded_routing", ["from", "to", "probability"],
                  [[i + 1, j + 1, float(expanded.routing[i, j])]
                   for i in range(expanded.n_expanded)
                   for j in range(expanded.n_expanded)
                   if expanded.routing[i, j] > 0.0])
        diff = np.abs(solution.supernode_rho - pf.rho)
        doc.table("supernode_rho", ["node", "direct", "aggregated", "abs_diff"],
                  [[n + 1, float(pf.rho[n]), float(solution.supernode_rho[n]),
                    float(diff[n])] for n in range(spec.n_nodes)])
        worst = float(diff.max()) if diff.size else 0.0
        ok = worst <= 1e-9
        doc.note(f"expansion check: max |direct - aggregated| = {worst:.3e} "
                 f"({'OK' if ok else 'MISMATCH'})")
        doc.payload.update({
            "expanded_nodes": [
                {"index": i + 1, "node": n + 1, "component": k + 1,
                 "external_rate": float(expanded.external_rates[i]),
                 "achievement": float(expanded.achievement[i]),
                 "mean_service": float(expanded.cond_means[i]),
                 "flow": float(solution.alpha[i]),
                 "rho": float(solution.rho[i])}
                for i, (n, k) in enumerate(expanded.node_ids)],
            "routing": expanded.routing,
            "supernode_rho": solution.supernode_rho,
            "direct_rho": pf.rho,
            "check": {"max_abs_diff": worst, "ok": ok},
        })
        _emit(_render(doc, fmt or scenario.outputs.format), out_path)
        if not ok:
            _fail("expansion check failed", EXIT_NUMERICAL)
    _guarded(body)


@main.command("baselines")
@_scenario_options
def cmd_baselines(config_path, fmt, out_path):
    """Both naive single-rate approximations."""
    def body():
        scenario = _load(config_path)
        spec = scenario.network
        doc = _Doc("baselines")
        payload = []
        for solver in (baseline_full_insensitivity,
                       baseline_service_time_insensitivity):
            res = solver(spec)
            doc.table(res.method, ["node", "rho", "service_rate", "flow"],
                      [[n + 1, float(res.rho[n]), float(res.rates_used[n]),
                        float(res.node_flows[n])]
                       for n in range(spec.n_nodes)])
            payload.append({
                "method": res.method,
                "rho": res.rho,
                "service_rate": res.rates_used,
                "flow": res.node_flows,
            })
        doc.payload["baselines"] = payload
        _emit(_render(doc, fmt or scenario.outputs.format), out_path)
    _guarded(body)


if __name__ == "__main__":
    main()
