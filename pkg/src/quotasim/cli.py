"""Command-line front end.

    quotasim simulate      --config run.json --output report.json
    quotasim sweep         --config grid.json --output grid.csv --format csv
    quotasim quality-sweep --config q.json --output q.csv --format csv
    quotasim boundary      --config b.json
    quotasim dataset       --config d.json --output d.json

Every command reads a single JSON document (``-`` for stdin). Reports are
written to a temporary file next to the target and renamed into place, so
a failed run never leaves a partial file behind.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile
from pathlib import Path
from typing import Optional

from pydantic import ValidationError

from . import analysis, datasets
from .analysis import dumps, rows_to_csv
from .config import COMMANDS, SEED_FIELDS, DatasetRunConfig, describe_validation_error
from .errors import QuotaSimError
from .fixtures import fixture_spec
from .population import GROUPS


class UsageError(Exception):
    pass


def atomic_write(path: Path, text: str) -> None:
    path = Path(path)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", suffix=".tmp", dir=path.parent or ".")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def load_config(command: str, source: str, seed_override: Optional[int] = None):
    if source == "-":
        raw = sys.stdin.read()
    else:
        raw = Path(source).read_text(encoding="utf-8")
    try:
        doc = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise UsageError(f"cannot parse config JSON: {exc}") from None
    if not isinstance(doc, dict):
        raise UsageError("config must be a JSON object")
    if seed_override is not None:
        if command not in SEED_FIELDS:
            raise UsageError(f"--seed-override does not apply to {command}")
        doc[SEED_FIELDS[command]] = seed_override
    try:
        return COMMANDS[command].model_validate(doc)
    except ValidationError as exc:
        raise UsageError(f"invalid config: {describe_validation_error(exc)}") from None


def simulate_report(cfg) -> analysis.ExperimentResult:
    return analysis.run_single_experiment(cfg.population_config(), cfg.k)


def simulate_rows(cfg, res: analysis.ExperimentResult) -> list[dict]:
    db = res.delta_b
    return [{
        "group": g, "group_size": res.blind.groups[g].size,
        "selected_blind": res.blind.groups[g].selected, "selected_quota": res.quota.groups[g].selected,
        "b_blind": res.blind.bias(g), "b_quota": res.quota.bias(g), "delta_b": db[g],
        "fk_blind": res.blind_fairness.f_k, "fk_quota": res.quota_fairness.f_k,
    } for g in GROUPS]


def run_simulate(cfg, fmt: str) -> str:
    res = simulate_report(cfg)
    if fmt == "csv":
        return rows_to_csv(simulate_rows(cfg, res))
    return dumps({"config": cfg.model_dump(), **res.to_dict()})


def run_sweep(cfg, fmt: str) -> str:
    result = analysis.sweep(cfg.sweep_spec())
    return result.to_csv() if fmt == "csv" else result.to_json()


def run_quality_sweep(cfg, fmt: str) -> str:
    result = analysis.quality_sweep(cfg.f, cfg.k, cfg.d_color.to_values("d_color"), cfg.d_shape_values,
                                    cfg.n, cfg.reps, cfg.seed)
    return result.to_csv() if fmt == "csv" else result.to_json()


def run_boundary(cfg, fmt: str) -> str:
    value = analysis.paradox_boundary(cfg.d_color, cfg.f)
    if fmt == "csv":
        return rows_to_csv([{"d_color": cfg.d_color, "f": cfg.f, "d_shape_threshold": value}])
    return dumps({"d_color": cfg.d_color, "f": cfg.f, "d_shape_threshold": value})


def dataset_spec(cfg: DatasetRunConfig, config_dir: Path) -> datasets.DatasetSpec:
    if cfg.fixture is not None:
        return fixture_spec(cfg.fixture)
    if isinstance(cfg.spec, dict):
        return datasets.DatasetSpec.from_dict(cfg.spec, base_dir=config_dir)
    path = Path(cfg.spec)
    return datasets.DatasetSpec.from_json(path if path.is_absolute() else config_dir / path)


def run_dataset(cfg, fmt: str, config_dir: Path = Path(".")) -> str:
    report = datasets.analyze_dataset(dataset_spec(cfg, config_dir), k=cfg.k, reps=cfg.reps, seed=cfg.seed)
    return rows_to_csv(report.csv_rows()) if fmt == "csv" else report.to_json()


RUNNERS = {
    "simulate": run_simulate,
    "sweep": run_sweep,
    "quality-sweep": run_quality_sweep,
    "boundary": run_boundary,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="quotasim", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="JSON run document, or - for stdin")
        p.add_argument("--output", required=name != "boundary", type=Path,
                       help="report path" + (" (optional; value is printed)" if name == "boundary" else ""))
        p.add_argument("--format", choices=("csv", "json"), default="json")
        p.add_argument("--seed-override", type=int, default=None, metavar="UINT64")
    return parser


def main(argv: Optional[list[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.command, args.config, args.seed_override)
        if args.command == "dataset":
            config_dir = Path(".") if args.config == "-" else Path(args.config).parent
            text = run_dataset(cfg, args.format, config_dir)
        else:
            text = RUNNERS[args.command](cfg, args.format)
        if args.command == "boundary":
            print(repr(analysis.paradox_boundary(cfg.d_color, cfg.f)))
        if args.output is not None:
            atomic_write(args.output, text)
    except UsageError as exc:
        print(f"quotasim {args.command}: {exc}", file=sys.stderr)
        return 2
    except (QuotaSimError, OSError) as exc:
        print(f"quotasim {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
