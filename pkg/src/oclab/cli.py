"""Command-line entry point.

Exit codes: 0 success, 1 internal error, 2 configuration error, 3 I/O error,
4 missing data.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Sequence

from . import csvio, experiments as ex, figures
from .config import FIGURES, AppConfig, load_config, sweep_from_config
from .csvio import MissingDataError
from .engine import run
from .experiments import population_mix
from .metrics import MetricsFrame
from .model import ConfigError, PopulationMix

log = logging.getLogger("oclab")

EXIT_OK, EXIT_INTERNAL, EXIT_CONFIG, EXIT_IO, EXIT_MISSING = 0, 1, 2, 3, 4

# sweeps feeding each figure
FIGURE_SWEEPS = {"fig1": ("fig1", "fig1_callout"), "fig2": ("fig2",), "fig3": ("fig3",)}


def _parse_set(items: Sequence[str] | None) -> dict:
    out = {}
    for item in items or ():
        key, sep, raw = item.partition("=")
        if not sep:
            raise ConfigError(f"--set expects KEY=VALUE, got {item!r}")
        try:
            out[key.strip()] = json.loads(raw)
        except json.JSONDecodeError:
            raise ConfigError(f"{key.strip()}: cannot parse value {raw!r}") from None
    return out


def _config(args: argparse.Namespace) -> AppConfig:
    overrides = _parse_set(args.set)
    overrides.update(reps=args.reps, seed=args.seed, out=args.out, parallelism=args.parallelism)
    return load_config(args.config, overrides)


def _parse_mix(text: str) -> PopulationMix:
    if "," in text:
        try:
            return PopulationMix(*(float(v) for v in text.split(",")))
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"mix: {exc}") from None
    return population_mix(text)


def _write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8", newline="")


def render_figure(figure: str, out: Path) -> Path:
    """Rebuild summaries and the SVG of ``figure`` from the runs files in ``out``."""
    tables = {}
    for name in FIGURE_SWEEPS[figure]:
        table = csvio.read_runs_csv(out / f"{name}_runs.csv")
        csvio.write_csv(table, out)
        tables[name] = table
    if figure == "fig1":
        svg = figures.render_fig1(tables["fig1"], tables["fig1_callout"])
    elif figure == "fig2":
        svg = figures.render_fig2(tables["fig2"])
    else:
        figures._require(tables["fig3"], "fig3")
        tukey = ex.corner_tukey(tables["fig3"])
        _write(out / "fig3_tukey.csv", csvio._render(
            ("group_a", "group_b", "mean_diff", "q", "p", "significant"),
            ([r.labels[0], r.labels[1], csvio.fmt_metric(r.mean_diff), csvio.fmt_metric(r.q),
              csvio.fmt_metric(r.p), str(int(r.significant))] for r in tukey)))
        svg = figures.render_fig3(tables["fig3"], tukey)
    path = out / f"{figure}.svg"
    _write(path, svg)
    log.info("wrote %s", path)
    return path


def cmd_run(args, cfg: AppConfig) -> int:
    mix = _parse_mix(args.mix)
    res = run(cfg.params, mix, cfg.seed)
    frame = MetricsFrame(res.performance, res.efficiency, res.gini, res.top20_share)
    payload = {"seed": res.seed, "mix": list(mix.as_tuple()), **frame.as_dict(),
               "window_needs_total": res.window_needs_total,
               "window_needs_met_commons": res.window_needs_met_commons,
               "window_needs_met_self": res.window_needs_met_self}
    if payload["efficiency"] == float("inf"):
        payload["efficiency"] = None
    print(json.dumps(payload, sort_keys=True))
    return EXIT_OK


def cmd_figure(args, cfg: AppConfig) -> int:
    out = Path(cfg.out)
    params = cfg.figure_params(args.command)
    for name in FIGURE_SWEEPS[args.command]:
        spec = ex.SWEEPS[name](params, reps=cfg.reps, seed=cfg.seed)
        table = ex.run_sweep(spec, cfg.parallelism)
        csvio.write_csv(table, out)
    render_figure(args.command, out)
    return EXIT_OK


def cmd_sweep(args, cfg: AppConfig) -> int:
    spec = sweep_from_config(cfg)
    table = ex.run_sweep(spec, cfg.parallelism)
    for path in csvio.write_csv(table, cfg.out):
        log.info("wrote %s", path)
    return EXIT_OK


def cmd_report(args, cfg: AppConfig) -> int:
    out = Path(cfg.out)
    bad = [f for f in args.figures if f not in FIGURES]
    if bad:
        raise ConfigError(f"unknown figure {bad[0]!r}")
    wanted = args.figures or [f for f in FIGURES if (out / f"{FIGURE_SWEEPS[f][0]}_runs.csv").exists()]
    if not wanted:
        raise MissingDataError(f"no runs files found in {out}")
    for figure in wanted:
        render_figure(figure, out)
    for name in args.tables or ():
        csvio.write_csv(csvio.read_runs_csv(out / f"{name}_runs.csv"), out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON configuration file")
    common.add_argument("--seed", type=int, help="base seed")
    common.add_argument("--reps", type=int, help="replications per cell")
    common.add_argument("--out", help="output directory (default: $OC_LAB_OUT or ./oclab_out)")
    common.add_argument("--parallelism", type=int, help="worker processes")
    common.add_argument("--set", action="append", metavar="KEY=VALUE",
                        help="model parameter override, e.g. --set rivalry=0.5")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="oclab", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("run", parents=[common], help="single run, metrics to stdout")
    p.add_argument("--mix", default="general",
                   help="general | cooperators | reciprocators | free_riders | pC,pR,pF")
    for fig in FIGURES:
        sub.add_parser(fig, parents=[common], help=f"sweep, CSV and SVG for {fig}")
    sub.add_parser("sweep", parents=[common], help="custom sweep from the config 'sweep' section")
    p = sub.add_parser("report", parents=[common], help="re-render summaries and figures from runs CSVs")
    p.add_argument("figures", nargs="*", default=[], metavar="FIGURE",
                   help="fig1 | fig2 | fig3 (default: every figure with data)")
    p.add_argument("--table", dest="tables", action="append",
                   help="also re-summarize <name>_runs.csv of a custom sweep")
    return parser


COMMANDS = {"run": cmd_run, "fig1": cmd_figure, "fig2": cmd_figure, "fig3": cmd_figure,
            "sweep": cmd_sweep, "report": cmd_report}


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s")
    log.setLevel(logging.INFO if args.verbose else logging.WARNING)
    try:
        cfg = _config(args)
        return COMMANDS[args.command](args, cfg)
    except ConfigError as exc:
        log.error("configuration error: %s", exc)
        return EXIT_CONFIG
    except MissingDataError as exc:
        log.error("missing data: %s", exc)
        return EXIT_MISSING
    except OSError as exc:
        log.error("I/O error: %s", exc)
        return EXIT_IO
    except Exception as exc:  # noqa: BLE001
        log.exception("internal error: %s", exc)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
