"""Benchmark matrix runner with CSV and JSON output.

Config (JSON)::

    {
      "instances": [
        {"id": "cube", "generator": {"kind": "uniform-cube", "n": 8, "k": 2}, "seeds": [0, 1, 2]},
        {"id": "cube50", "generator": {"kind": "uniform-cube"}, "seeds": {"start": 0, "count": 50}},
        {"id": "fixture", "path": "fixture.txt", "seeds": [0]}
      ],
      "algorithms": [
        {"name": "local-search", "rho": [1, 2], "acceptance": "strict"},
        {"name": "lloyd", "max_iters": 100},
        {"name": "dsampling"},
        {"name": "oracle", "limit": 10000000}
      ],
      "output": {"csv": "bench.csv", "json": "bench.json"}
    }

Relative paths resolve against the config file. For generator entries the
seed replaces ``generator.seed``; every algorithm takes its randomness from
the row seed. Oracle costs fill ``oracle_cost`` and ``ratio`` whenever an
``oracle`` entry is present, even for rows of other algorithms.
"""

from __future__ import annotations

import csv
import json
import math
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

from ..core import Instance, load_instance
from ..oracle import DEFAULT_LIMIT, exact
from ..objective import assign_all
from ..search import SearchConfig, local_search
from ..seeding import dsampling_seed
from .baselines import lloyd_baseline
from .generators import GeneratorSpec, generate

SCHEMA_VERSION = 1
COLUMNS = ("schema_version", "instance", "algorithm", "seed", "cost", "oracle_cost", "ratio", "iterations",
           "wall_time", "unsnapped_cost", "error")
ALGORITHMS = ("local-search", "lloyd", "dsampling", "oracle")


class BenchConfigError(ValueError):
    pass


@dataclass
class BenchRow:
    instance: str
    algorithm: str
    seed: int
    cost: float | None = None
    oracle_cost: float | None = None
    ratio: float | None = None
    iterations: int | None = None
    wall_time: float | None = None
    unsnapped_cost: float | None = None
    error: str | None = None
    schema_version: int = SCHEMA_VERSION

    def as_record(self) -> dict:
        rec = asdict(self)
        return {c: rec[c] for c in COLUMNS}


@dataclass
class BenchReport:
    rows: list[BenchRow] = field(default_factory=list)

    def records(self) -> list[dict]:
        return [r.as_record() for r in self.rows]

    def to_json(self) -> dict:
        return {"schema_version": SCHEMA_VERSION, "columns": list(COLUMNS), "rows": self.records()}

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            out = csv.DictWriter(fh, fieldnames=COLUMNS)
            out.writeheader()
            for rec in self.records():
                out.writerow({k: "" if v is None else (repr(v) if isinstance(v, float) else v) for k, v in rec.items()})

    def write_json(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_json(), indent=2) + "\n")


def _seeds(entry: dict) -> list[int]:
    raw = entry.get("seeds", [0])
    if isinstance(raw, dict):
        return list(range(int(raw.get("start", 0)), int(raw.get("start", 0)) + int(raw["count"])))
    if isinstance(raw, int):
        return list(range(raw))
    return [int(s) for s in raw]


def _expand_algorithms(entries: list[dict]) -> list[tuple[str, dict]]:
    out = []
    for entry in entries:
        name = entry.get("name")
        if name not in ALGORITHMS:
            raise BenchConfigError(f"unknown algorithm {name!r}")
        if name == "local-search":
            rhos = entry.get("rho", [1])
            for rho in rhos if isinstance(rhos, list) else [rhos]:
                out.append((f"local-search[rho={rho}]", dict(entry, rho=int(rho))))
        else:
            out.append((name, entry))
    return out


def _instance(entry: dict, seed: int, base: Path) -> Instance:
    if "generator" in entry:
        return generate(GeneratorSpec.from_dict(dict(entry["generator"], seed=seed)))
    if "path" in entry:
        return load_instance(base / entry["path"], rng_seed=seed)
    raise BenchConfigError(f"instance {entry.get('id')!r} needs 'generator' or 'path'")


def _run_algorithm(name: str, opts: dict, inst: Instance, seed: int) -> dict:
    if name == "dsampling":
        return {"cost": assign_all(inst, dsampling_seed(inst)).total_cost}
    if name == "lloyd":
        res = lloyd_baseline(inst, int(opts.get("max_iters", 100)))
        return {"cost": res.solution.total_cost, "iterations": res.iterations, "unsnapped_cost": res.unsnapped_cost}
    keys = ("acceptance", "epsilon", "max_iterations", "improvement", "init")
    cfg = SearchConfig(rho=opts["rho"], seed=seed, **{k: opts[k] for k in keys if k in opts})
    trace = local_search(inst, cfg)
    return {"cost": trace.final.total_cost, "iterations": trace.iterations}


def load_config(path) -> dict:
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"bench config not found: {path}")
    try:
        cfg = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise BenchConfigError(f"{path}: {exc}") from exc
    if not isinstance(cfg.get("instances"), list) or not isinstance(cfg.get("algorithms"), list):
        raise BenchConfigError("config needs 'instances' and 'algorithms' lists")
    return cfg


def run_config(cfg: dict, base: Path = Path("."), timing: bool = True) -> BenchReport:
    algos = _expand_algorithms(cfg["algorithms"])
    want_oracle = any(name == "oracle" for name, _ in algos)
    oracle_opts = next((o for name, o in algos if name == "oracle"), {})
    report = BenchReport()
    for entry in cfg["instances"]:
        ident = str(entry.get("id", entry.get("path", "instance")))
        rows: dict[tuple[str, int], BenchRow] = {}
        for seed in _seeds(entry):
            try:
                inst = _instance(entry, seed, base)
            except Exception as exc:
                for name, _ in algos:
                    rows[name, seed] = BenchRow(ident, name, seed, error=f"{type(exc).__name__}: {exc}")
                continue
            opt, opt_error, opt_time = None, None, 0.0
            if want_oracle:
                start = time.perf_counter()
                try:
                    opt = exact(inst, int(oracle_opts.get("limit", DEFAULT_LIMIT))).best_cost
                except Exception as exc:
                    opt_error = f"{type(exc).__name__}: {exc}"
                opt_time = time.perf_counter() - start
            for name, opts in algos:
                row = BenchRow(ident, name, seed, oracle_cost=opt)
                start = time.perf_counter()
                if name == "oracle":
                    row.cost, row.error = opt, opt_error
                else:
                    try:
                        for key, val in _run_algorithm(name, opts, inst, seed).items():
                            setattr(row, key, val)
                    except Exception as exc:
                        row.error = f"{type(exc).__name__}: {exc}"
                if timing:
                    row.wall_time = opt_time if name == "oracle" else time.perf_counter() - start
                if row.cost is not None and opt is not None:
                    if opt > 0:
                        row.ratio = row.cost / opt
                    elif row.cost == 0:
                        row.ratio = 1.0
                    elif math.isfinite(row.cost):
                        row.error = row.error or "oracle cost is 0; ratio undefined"
                rows[name, seed] = row
        order = {name: i for i, (name, _) in enumerate(algos)}
        report.rows.extend(rows[key] for key in sorted(rows, key=lambda k: (order[k[0]], k[1])))
    return report


def run_bench(config_path, csv_path=None, json_path=None, timing: bool = True) -> BenchReport:
    """Run the algorithm matrix described by a JSON config and write the requested outputs."""
    path = Path(config_path)
    cfg = load_config(path)
    report = run_config(cfg, path.parent, timing)
    output = cfg.get("output", {})
    csv_path = csv_path or (output.get("csv") and path.parent / output["csv"])
    json_path = json_path or (output.get("json") and path.parent / output["json"])
    if csv_path:
        report.write_csv(csv_path)
    if json_path:
        report.write_json(json_path)
    return report
