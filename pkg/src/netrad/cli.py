"""Batch command-line front-end.

Subcommands compose the library stages over a scenario file:

    coverage     tile/hull CSV + predicted-resolution JSON
    simulate     per-channel raw record CSV dumps
    image        per-pair back-projected images (CSV + PGM)
    fuse         fused image (CSV + PGM) + metrics JSON
    orchestrate  tessellated plan JSON + end-to-end fused image + metrics
    report       one summary JSON + CSV table across a directory of runs

Every stage recomputes from the scenario (noise is seeded per channel),
so re-running a subcommand with the same inputs produces byte-identical
artifacts. Exit codes: 0 ok, 2 validation failure, 3 runtime failure;
failures also emit a one-line error JSON on stderr.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

from . import fusion, imaging, metrics, orchestrate, scene, synth, wavenumber

OUT_DIR_ENV = "NETRAD_OUT"

_EXIT_OK = 0
_EXIT_VALIDATION = 2
_EXIT_RUNTIME = 3

_OVERRIDABLE_KEYS = ("f0_hz", "bandwidth_hz", "noise_power", "seed")


class _ValidationFailure(Exception):
    def __init__(self, message: str, violations: list[str] | None = None):
        super().__init__(message)
        self.violations = violations or []


@dataclass
class RunConfig:
    """One resolved CLI invocation."""

    subcommand: str
    scenario_path: str | None
    out_dir: str
    overrides: list[tuple[str, float]] = field(default_factory=list)
    dynamic_range_db: float = 40.0
    seed: int | None = None
    workers: int = 1
    n_freq: int = 64
    grid_spacing: float | None = None
    grid_margin_cells: int = 24
    baseband: bool = False
    fs: float | None = None
    mode: str = "coherent"
    pair_scope: str = "all"
    plan_count: int | None = None
    plan_bandwidth: float | None = None
    psi0_deg: float = 90.0


def _round9(value):
    """Clamp numeric artifact output to 9 significant digits."""
    if isinstance(value, float):
        if math.isinf(value) or math.isnan(value):
            return None
        return float(f"{value:.9g}")
    if isinstance(value, dict):
        return {k: _round9(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_round9(v) for v in value]
    return value


def _write_json(doc, path: Path) -> None:
    path.write_text(json.dumps(_round9(doc), indent=2, sort_keys=True) + "\n")


def _load_scenario(config: RunConfig) -> scene.Scenario:
    if config.scenario_path is None:
        raise _ValidationFailure("this subcommand requires --scenario")
    path = Path(config.scenario_path)
    if not path.exists():
        raise _ValidationFailure(f"scenario file not found: {path}")
    try:
        doc = json.loads(path.read_text())
    except json.JSONDecodeError as err:
        raise _ValidationFailure(f"{path}: invalid JSON at line {err.lineno}: {err.msg}") from err
    if not isinstance(doc, dict):
        raise _ValidationFailure(f"{path}: top-level document must be an object")
    for key, value in config.overrides:
        if key not in _OVERRIDABLE_KEYS:
            raise _ValidationFailure(
                f"--set key {key!r} not overridable (choose from {', '.join(_OVERRIDABLE_KEYS)})"
            )
        doc[key] = int(value) if key == "seed" else value
    if config.seed is not None:
        doc["seed"] = config.seed
    try:
        scenario = scene.load_scenario(json.dumps(doc))
    except scene.SchemaError as err:
        raise _ValidationFailure(f"{path}: {err}") from err
    violations = scene.validate(scenario)
    if violations:
        raise _ValidationFailure(f"{path}: scenario is invalid", violations)
    return scenario


def _reference_target(scenario: scene.Scenario) -> scene.Vec2:
    if not scenario.targets:
        raise _ValidationFailure("scenario has no targets to analyze")
    return scenario.targets[0].position


def _make_grid(config: RunConfig, scenario: scene.Scenario) -> scene.ImageGrid:
    if config.grid_spacing is not None:
        s = config.grid_spacing
        ref = _reference_target(scenario)
        half = config.grid_margin_cells
        n = 2 * half + 1
        origin = scene.Vec2(ref.x - half * s, ref.y - half * s)
        return scene.ImageGrid(origin=origin, spacing=(s, s), size=(n, n))
    return imaging.default_grid(scenario, margin_cells=config.grid_margin_cells)


def _pair_filter(config: RunConfig, scenario: scene.Scenario) -> list[tuple[int, int]]:
    pairs = scenario.pairing.active_pairs()
    if config.mode == "incoherent" or config.pair_scope == "mono":
        pairs = [(l, k) for l, k in pairs if l == k]
    if not pairs:
        raise _ValidationFailure("no active pairs left after pair selection")
    return pairs


def _imaging_pipeline(config: RunConfig, scenario: scene.Scenario,
                      pairs: list[tuple[int, int]]) -> list[imaging.ComplexImage]:
    grid = _make_grid(config, scenario)
    window = synth.suggest_window(scenario, grid)
    records = synth.synthesize(scenario, window, fs=config.fs, pairs=pairs)
    return imaging.pair_images(records, scenario, grid, workers=config.workers)


def _cmd_coverage(config: RunConfig, out: Path) -> None:
    scenario = _load_scenario(config)
    target = _reference_target(scenario)
    region = wavenumber.coverage_region(
        scenario, target, n_freq=config.n_freq, baseband=config.baseband
    )
    est = wavenumber.predicted_resolution(region)
    wavenumber.export_coverage_csv(region, out / "coverage.csv")
    wavenumber.export_hull_csv(est, out / "hull.csv")
    doc = est.to_dict()
    doc["label"] = region.label
    doc["n_tiles"] = len(region.tiles)
    _write_json(doc, out / "resolution.json")


def _cmd_simulate(config: RunConfig, out: Path) -> None:
    scenario = _load_scenario(config)
    window = synth.suggest_window(scenario)
    records = synth.synthesize(scenario, window, fs=config.fs)
    rec_dir = out / "records"
    rec_dir.mkdir(exist_ok=True)
    for rec in records:
        name = "ch_" + "-".join(str(i) for i in rec.channel) + ".csv"
        synth.export_record_csv(rec, rec_dir / name)
    meta = {
        "n_records": len(records),
        "window_s": list(records[0].times[[0, -1]]) if records else None,
        "fs_hz": records[0].fs if records else None,
        "channels": [list(r.channel) for r in records],
    }
    _write_json(meta, out / "records_meta.json")


def _cmd_image(config: RunConfig, out: Path) -> None:
    scenario = _load_scenario(config)
    pairs = _pair_filter(config, scenario)
    images = _imaging_pipeline(config, scenario, pairs)
    for im in images:
        stem = "image_{}-{}".format(*im.provenance)
        imaging.export_image_csv(im, out / f"{stem}.csv")
        imaging.export_image_pgm(im, out / f"{stem}.pgm", config.dynamic_range_db)


def _fuse_and_report(config: RunConfig, scenario: scene.Scenario,
                     images: list[imaging.ComplexImage], out: Path) -> None:
    if config.mode == "incoherent":
        fused = fusion.fuse_incoherent(images)
    else:
        fused = fusion.fuse_coherent(images)
    imaging.export_image_csv(fused, out / "fused.csv")
    imaging.export_image_pgm(fused, out / "fused.pgm", config.dynamic_range_db)
    truth = scenario.targets[0].position if scenario.targets else None
    try:
        m = metrics.compute_metrics(fused, truth_pos=truth if scenario.noise_power > 0 else None)
        doc = m.to_dict()
    except ValueError as err:
        # metrics need a resolved interior peak; report what failed instead
        doc = {"error": str(err)}
    doc["provenance"] = fused.provenance
    doc["n_images_fused"] = len(images)
    _write_json(doc, out / "metrics.json")


def _cmd_fuse(config: RunConfig, out: Path) -> None:
    scenario = _load_scenario(config)
    pairs = _pair_filter(config, scenario)
    images = _imaging_pipeline(config, scenario, pairs)
    _fuse_and_report(config, scenario, images, out)


def _cmd_orchestrate(config: RunConfig, out: Path) -> None:
    scenario = _load_scenario(config)
    target = _reference_target(scenario)
    count = config.plan_count if config.plan_count is not None else scenario.n_terminals
    bandwidth = (
        config.plan_bandwidth if config.plan_bandwidth is not None else scenario.bandwidth
    )
    plan = orchestrate.tessellated_plan(
        scenario.f0,
        bandwidth,
        count,
        target,
        orchestrate.default_stand_off(scenario, target),
        psi_0=math.radians(config.psi0_deg),
    )
    (out / "plan.json").write_text(json.dumps(_round9(plan.to_dict()), indent=2) + "\n")
    planned = orchestrate.scenario_from_plan(scenario, plan, bandwidth=bandwidth)
    images = _imaging_pipeline(config, planned, planned.pairing.active_pairs())
    _fuse_and_report(config, planned, images, out)


def _cmd_report(config: RunConfig, out: Path) -> None:
    rows = []
    for path in sorted(out.rglob("metrics.json")):
        try:
            doc = json.loads(path.read_text())
        except json.JSONDecodeError:
            continue
        rows.append((str(path.relative_to(out)), doc))
    if not rows:
        raise _ValidationFailure(f"no metrics.json found under {out}")
    fields = ["rho_x_m", "rho_y_m", "pslr_db", "islr_db", "peak_snr_db"]
    with open(out / "metrics_table.csv", "w") as fh:
        fh.write("run," + ",".join(fields) + "\n")
        for name, doc in rows:
            cells = [("" if doc.get(f) is None else f"{doc[f]:.9g}") for f in fields]
            fh.write(f"{name}," + ",".join(cells) + "\n")
    _write_json(
        {"n_runs": len(rows), "runs": [{"run": n, "metrics": d} for n, d in rows]},
        out / "summary.json",
    )


_COMMANDS = {
    "coverage": _cmd_coverage,
    "simulate": _cmd_simulate,
    "image": _cmd_image,
    "fuse": _cmd_fuse,
    "orchestrate": _cmd_orchestrate,
    "report": _cmd_report,
}


def run(config: RunConfig) -> int:
    """Execute one configured subcommand, writing artifacts under the
    output directory. Returns the process exit code."""
    try:
        out = Path(config.out_dir)
        out.mkdir(parents=True, exist_ok=True)
        _COMMANDS[config.subcommand](config, out)
        return _EXIT_OK
    except _ValidationFailure as err:
        payload = {"error": {"kind": "validation", "message": str(err)}}
        if err.violations:
            payload["error"]["violations"] = err.violations
        print(json.dumps(payload), file=sys.stderr)
        return _EXIT_VALIDATION
    except Exception as err:  # pipeline failure: report, do not traceback
        print(
            json.dumps({"error": {"kind": "runtime", "message": str(err)}}),
            file=sys.stderr,
        )
        return _EXIT_RUNTIME


def _parse_set(value: str) -> tuple[str, float]:
    if "=" not in value:
        raise argparse.ArgumentTypeError(f"--set expects key=value, got {value!r}")
    key, _, raw = value.partition("=")
    try:
        return key.strip(), float(raw)
    except ValueError:
        raise argparse.ArgumentTypeError(f"--set {key}: {raw!r} is not a number") from None


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="netrad",
        description="Networked radio sensing: coverage analysis, simulation, imaging, fusion and orchestration.",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--scenario", help="scenario JSON file")
    common.add_argument(
        "--out",
        default=os.environ.get(OUT_DIR_ENV),
        help=f"output directory (default from ${OUT_DIR_ENV})",
    )
    common.add_argument("--set", dest="overrides", metavar="KEY=VALUE",
                        type=_parse_set, action="append", default=[],
                        help="override a scenario key (f0_hz, bandwidth_hz, noise_power, seed)")
    common.add_argument("--seed", type=int, help="override the scenario RNG seed")
    common.add_argument("--dyn-range", type=float, default=40.0,
                        help="raster dynamic range in dB (default 40)")
    common.add_argument("--workers", type=int, default=1,
                        help="pixel-block workers for back-projection")

    grid = argparse.ArgumentParser(add_help=False)
    grid.add_argument("--grid-spacing", type=float,
                      help="pixel spacing in m (default: finest predicted rho / 4)")
    grid.add_argument("--grid-margin-cells", type=int, default=24,
                      help="pixels beyond the target bounding box per side")
    grid.add_argument("--fs", type=float, help="complex sampling rate in Hz (default 4B)")

    p = sub.add_parser("coverage", parents=[common], help="wavenumber coverage and predicted resolution")
    p.add_argument("--n-freq", type=int, default=64, help="frequency samples per tile")
    p.add_argument("--baseband", action="store_true", help="emit base-band tiles")

    p = sub.add_parser("simulate", parents=[common], help="raw channel records")
    p.add_argument("--fs", type=float, help="complex sampling rate in Hz (default 4B)")

    sub.add_parser("image", parents=[common, grid], help="per-pair back-projected images")

    p = sub.add_parser("fuse", parents=[common, grid], help="fused image and metrics")
    p.add_argument("--mode", choices=("incoherent", "coherent"), default="coherent")
    p.add_argument("--pairs", dest="pair_scope", choices=("mono", "all"), default="all",
                   help="fuse monostatic pairs only, or every active pair")

    p = sub.add_parser("orchestrate", parents=[common, grid],
                       help="tessellated plan plus end-to-end fused image")
    p.add_argument("--L", dest="plan_count", type=int, help="acquisitions to plan (default L)")
    p.add_argument("--B", dest="plan_bandwidth", type=float,
                   help="per-terminal bandwidth in Hz (default: scenario bandwidth)")
    p.add_argument("--psi0-deg", type=float, default=90.0,
                   help="first observation angle in degrees (default broadside)")

    sub.add_parser("report", parents=[common], help="aggregate metrics across a directory of runs")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    if args.out is None:
        print(
            json.dumps({"error": {"kind": "validation",
                                  "message": f"--out is required (or set ${OUT_DIR_ENV})"}}),
            file=sys.stderr,
        )
        return _EXIT_VALIDATION
    config = RunConfig(
        subcommand=args.subcommand,
        scenario_path=args.scenario,
        out_dir=args.out,
        overrides=args.overrides,
        dynamic_range_db=args.dyn_range,
        seed=args.seed,
        workers=args.workers,
        n_freq=getattr(args, "n_freq", 64),
        grid_spacing=getattr(args, "grid_spacing", None),
        grid_margin_cells=getattr(args, "grid_margin_cells", 24),
        baseband=getattr(args, "baseband", False),
        fs=getattr(args, "fs", None),
        mode=getattr(args, "mode", "coherent"),
        pair_scope=getattr(args, "pair_scope", "all"),
        plan_count=getattr(args, "plan_count", None),
        plan_bandwidth=getattr(args, "plan_bandwidth", None),
        psi0_deg=getattr(args, "psi0_deg", 90.0),
    )
    return run(config)


if __name__ == "__main__":
    sys.exit(main())
