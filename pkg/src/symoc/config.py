"""Key=value configuration files and run manifests.

Configuration files are plain text, one ``key = value`` per line, ``#``
comments, repeated keys allowed (they accumulate in order).  Values are
whitespace-separated tokens; ``inf`` is accepted.  Angles are radians
unless a key ends in ``_deg``.  The same format configures plain grid
abstractions and the firefighting scenario; :func:`scenario_from_config`
interprets the keys listed in the repository README.

A run manifest is a small JSON file written atomically next to the
artifacts; it records the sha256 of the config byte stream, grid
parameters, solver options, and outcome figures, so downstream commands
can verify that artifacts and configs belong together.
"""

from __future__ import annotations

import hashlib
import json
import os
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from .aircraft import DEG, AircraftParams
from .scenario import MissionPlan, ScenarioRegions, desk_plan, desk_regions


class ConfigError(ValueError):
    """Malformed configuration; message names the line and key."""


def parse_config(text: str):
    """Ordered multimap of config keys to token lists."""
    entries: dict[str, list] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {line!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        toks = value.split()
        if not key or not toks:
            raise ConfigError(f"line {lineno}: empty key or value")
        entries.setdefault(key, []).append((lineno, toks))
    return entries


def load_config(path):
    return parse_config(Path(path).read_text())


def _floats(key, lineno, toks):
    try:
        return [float(t) for t in toks]
    except ValueError:
        raise ConfigError(f"line {lineno}: key {key!r} needs numbers, got {toks}")


def _single(entries, key, default=None):
    if key not in entries:
        if default is None:
            raise ConfigError(f"missing required key {key!r}")
        return default
    lineno, toks = entries[key][-1]
    return _floats(key, lineno, toks)


def _boxes(entries, key):
    out = []
    for lineno, toks in entries.get(key, []):
        vals = _floats(key, lineno, toks)
        if len(vals) != 4:
            raise ConfigError(
                f"line {lineno}: key {key!r} needs 'x1lo x2lo x1hi x2hi'"
            )
        out.append(((vals[0], vals[1]), (vals[2], vals[3])))
    return tuple(out)


def scenario_from_config(entries) -> tuple:
    """(ScenarioRegions, MissionPlan) from a parsed config multimap.

    Every key is optional and defaults to the desk-scale mission.
    """
    base_r, base_p = desk_regions(), desk_plan()

    arena = _single(entries, "arena", [  # x1lo x2lo x1hi x2hi
        base_r.arena[0][0], base_r.arena[0][1],
        base_r.arena[1][0], base_r.arena[1][1],
    ])
    speed = _single(entries, "speed_range", list(base_r.speed_range))
    runway = _single(entries, "runway", [
        base_r.runway[0][0], base_r.runway[0][1],
        base_r.runway[1][0], base_r.runway[1][1],
    ])
    fire = _boxes(entries, "region.fire") or base_r.fire_boxes
    hills = _boxes(entries, "region.hill") or base_r.hill_boxes
    regions = ScenarioRegions(
        arena=((arena[0], arena[1]), (arena[2], arena[3])),
        speed_range=tuple(speed),
        runway=((runway[0], runway[1]), (runway[2], runway[3])),
        fire_boxes=tuple(fire),
        hill_boxes=tuple(hills),
    )

    cells = _single(entries, "cells", list(base_p.cells_per_dim))
    thrusts = _single(entries, "thrusts", list(base_p.thrusts))
    banks_deg = _single(
        entries, "banks_deg", [b / DEG for b in base_p.banks]
    )
    start = _single(entries, "start", list(base_p.start))
    plan = MissionPlan(
        tau=_single(entries, "tau", [base_p.tau])[0],
        substeps=int(_single(entries, "substeps", [base_p.substeps])[0]),
        reward_rate=_single(entries, "reward_rate", [base_p.reward_rate])[0],
        cells_per_dim=tuple(int(c) for c in cells),
        thrusts=tuple(thrusts),
        banks=tuple(b * DEG for b in banks_deg),
        start=tuple(start),
        max_samples=int(_single(entries, "max_samples", [base_p.max_samples])[0]),
        max_sweeps=int(_single(entries, "max_sweeps", [base_p.max_sweeps])[0]),
    )
    return regions, plan


def config_hash(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


@dataclass
class RunManifest:
    config_sha256: str
    grid_cells: list
    n_states: int
    n_inputs: int
    worker_count: int
    cache_policy: str
    memory_budget_bytes: Optional[int]
    converged: bool
    sweeps: int
    relaxations: int
    wall_seconds: float
    peak_cache_bytes: int
    artifacts: dict

    def write(self, path) -> None:
        """Atomic write: the manifest appears only after a successful run."""
        path = Path(path)
        tmp = path.with_suffix(path.suffix + ".tmp")
        tmp.write_text(json.dumps(asdict(self), indent=2) + "\n")
        os.replace(tmp, path)

    @staticmethod
    def read(path) -> "RunManifest":
        data = json.loads(Path(path).read_text())
        return RunManifest(**data)
