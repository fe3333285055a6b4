"""Parameter sweeps: expand a manifest into runs, execute, summarize.

A manifest is an ordinary run configuration plus one extra [sweep]
section whose keys are physical-constant names and whose values are
comma-separated lists.  The cartesian product is taken in the order
the keys appear; each combination becomes an independent run.  Workers
share nothing, and the summary CSV is written in manifest order after
all runs finish, so the output is identical whatever the job count.
"""

from __future__ import annotations

import configparser
import dataclasses
import io
import itertools
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .config import RunConfig, init_state, parse_config
from .constitutive import PhysParams
from .driver import run_simulation
from .mesh import ConfigurationError, width
from .output import fmt

_SWEEPABLE = tuple(
    f.name for f in dataclasses.fields(PhysParams) if f.name != "cond_model"
)


@dataclass
class SweepRow:
    index: int
    values: dict
    rate_exponent_supported: bool
    classification: str
    final_t: float
    width: float
    min_v: float
    min_theta: float
    min_z: float
    max_z: float
    error: str = ""


def load_manifest(path):
    """Returns (base RunConfig, ordered list of (param, values) pairs)."""
    cp = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    try:
        with open(path, "r", encoding="utf-8") as fh:
            cp.read_file(fh)
    except configparser.Error as exc:
        raise ConfigurationError(f"manifest parse error: {exc}") from exc

    items = []
    if cp.has_section("sweep"):
        for key, raw in cp.items("sweep"):
            if key not in _SWEEPABLE:
                raise ConfigurationError(f"cannot sweep over {key!r}")
            try:
                values = [float(part) for part in raw.split(",")]
            except ValueError as exc:
                raise ConfigurationError(f"[sweep] {key} must be comma-separated numbers") from exc
            if not values:
                raise ConfigurationError(f"[sweep] {key} lists no values")
            items.append((key, values))
        cp.remove_section("sweep")

    buf = io.StringIO()
    cp.write(buf)
    base = parse_config(buf.getvalue())
    return base, items


def expand(base: RunConfig, items):
    """All combinations as (values dict, RunConfig), in manifest order."""
    if not items:
        return [({}, base)]
    keys = [key for key, _ in items]
    combos = itertools.product(*(values for _, values in items))
    out = []
    for combo in combos:
        overrides = dict(zip(keys, combo))
        params = dataclasses.replace(base.params, **overrides)
        out.append((overrides, dataclasses.replace(base, params=params)))
    return out


def run_one(index: int, values: dict, config: RunConfig) -> SweepRow:
    supported = config.params.rate_exponent_supported
    try:
        first = init_state(config)
        z_initial = float(np.sum(first.z)) * first.grid.dx
        result = run_simulation(config)
    except Exception as exc:  # a sweep never dies on one bad run
        return SweepRow(index, values, supported, "failed",
                        0.0, 0.0, 0.0, 0.0, 0.0, 0.0, error=str(exc))

    state = result.state
    last = result.records[-1]
    if not result.completed:
        classification = "failed"
    else:
        z_final = float(np.sum(state.z)) * state.grid.dx
        burned = z_initial > 0.0 and z_final <= 0.5 * z_initial
        classification = "burned" if burned else "quiescent"
    return SweepRow(
        index,
        values,
        supported,
        classification,
        final_t=state.t,
        width=width(state),
        min_v=last.min_v,
        min_theta=last.min_theta,
        min_z=last.min_z,
        max_z=last.max_z,
        error="" if result.completed else (result.error or ""),
    )


def _worker(args):
    return run_one(*args)


def run_sweep(manifest_path, out_dir, jobs: int = 1):
    """Execute every combination; write out_dir/summary.csv; return rows."""
    base, items = load_manifest(manifest_path)
    combos = expand(base, items)
    tasks = [(i, values, cfg) for i, (values, cfg) in enumerate(combos)]

    if jobs <= 1:
        rows = [run_one(*task) for task in tasks]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_worker, tasks))
    rows.sort(key=lambda row: row.index)

    keys = [key for key, _ in items]
    path = out_dir / "summary.csv"
    with open(path, "w", encoding="utf-8", newline="") as fh:
        header = (
            ["index"]
            + keys
            + [
                "rate_exponent_supported",
                "classification",
                "final_t",
                "width",
                "min_v",
                "min_theta",
                "min_z",
                "max_z",
                "error",
            ]
        )
        fh.write(",".join(header) + "\n")
        for row in rows:
            cells = [str(row.index)]
            cells += [fmt(row.values[k]) for k in keys]
            cells += [
                str(row.rate_exponent_supported),
                row.classification,
                fmt(row.final_t),
                fmt(row.width),
                fmt(row.min_v),
                fmt(row.min_theta),
                fmt(row.min_z),
                fmt(row.max_z),
                row.error.replace(",", ";"),
            ]
            fh.write(",".join(cells) + "\n")
    return rows, path
