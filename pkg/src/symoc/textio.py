"""Serialization for problems, value maps, and controllers.

Problem files are flat text::

    # comments and blank lines are ignored
    states <n> inputs <m>
    <x> <u> <y1> [<y2> ...] : <c>            # one line per hyperarc
    <x> <u> <y1> [<y2> ...] : <c1> ... <ck>  # or one cost per head
    terminal <x> <value>

A single cost after the colon broadcasts over all heads.  The literal
``inf`` is accepted wherever a value may appear.  States without a
``terminal`` line default to +inf.  Every (state, input) pair must carry
exactly one arc line: the transition map is strict.

Value/controller artifacts have a text form (one ``<state> <value>`` or
``<state> full|<input>`` line each) and a combined little-endian binary
form: magic ``SOCB``, a version byte, u64 state and input counts, one f64
per state, then one i32 per state (-1 meaning the full input set).
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from .problem import FULL_SET, INF, DiscreteProblem, ProblemFormatError

BINARY_MAGIC = b"SOCB"
BINARY_VERSION = 1


class ParseError(ValueError):
    """Malformed input file; message names the offending line."""


def _parse_value(tok: str, lineno: int) -> float:
    try:
        return float(tok)
    except ValueError:
        raise ParseError(f"line {lineno}: expected a number or 'inf', got {tok!r}")


def load_problem(path) -> DiscreteProblem:
    return parse_problem(Path(path).read_text(), source=str(path))


def parse_problem(text: str, source: str = "<string>") -> DiscreteProblem:
    n = m = None
    transitions = {}
    running = {}
    terminal = None

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        toks = line.split()
        if toks[0] == "states":
            if len(toks) != 4 or toks[2] != "inputs":
                raise ParseError(
                    f"line {lineno}: header must read 'states <n> inputs <m>'"
                )
            n, m = int(toks[1]), int(toks[3])
            terminal = np.full(n, INF)
        elif toks[0] == "terminal":
            if terminal is None:
                raise ParseError(f"line {lineno}: 'terminal' before header")
            if len(toks) != 3:
                raise ParseError(f"line {lineno}: expected 'terminal <x> <value>'")
            terminal[int(toks[1])] = _parse_value(toks[2], lineno)
        else:
            if n is None:
                raise ParseError(f"line {lineno}: arc line before header")
            if ":" not in toks:
                raise ParseError(f"line {lineno}: arc line is missing ':'")
            sep = toks.index(":")
            left, right = toks[:sep], toks[sep + 1 :]
            if len(left) < 3:
                raise ParseError(
                    f"line {lineno}: need '<x> <u> <heads...> : <costs...>'"
                )
            x, u = int(left[0]), int(left[1])
            heads = [int(t) for t in left[2:]]
            costs = [_parse_value(t, lineno) for t in right]
            if len(costs) not in (1, len(heads)):
                raise ParseError(
                    f"line {lineno}: expected 1 or {len(heads)} costs, got {len(costs)}"
                )
            if (x, u) in transitions:
                raise ParseError(f"line {lineno}: duplicate arc ({x},{u})")
            transitions[(x, u)] = heads
            running[(x, u)] = costs if len(costs) == len(heads) else costs[0]

    if n is None:
        raise ParseError(f"{source}: no 'states ... inputs ...' header found")
    try:
        return DiscreteProblem(n, m, transitions, terminal, running)
    except ProblemFormatError as exc:
        raise ParseError(f"{source}: {exc}") from exc


def dump_problem(problem: DiscreteProblem, path) -> None:
    lines = [f"states {problem.n_states} inputs {problem.n_inputs}"]
    for x in range(problem.n_states):
        for u in range(problem.n_inputs):
            heads = " ".join(str(int(y)) for y in problem.successors(x, u))
            costs = " ".join(_fmt(c) for c in problem.arc_costs(x, u))
            lines.append(f"{x} {u} {heads} : {costs}")
    for x in range(problem.n_states):
        if problem.terminal[x] < INF:
            lines.append(f"terminal {x} {_fmt(problem.terminal[x])}")
    Path(path).write_text("\n".join(lines) + "\n")


def _fmt(v: float) -> str:
    if v == INF:
        return "inf"
    return repr(float(v))


# -- value / controller artifacts --------------------------------------------


def dump_values(values: np.ndarray, path) -> None:
    lines = [f"{x} {_fmt(v)}" for x, v in enumerate(values)]
    Path(path).write_text("\n".join(lines) + "\n")


def load_values(path) -> np.ndarray:
    out = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        toks = line.split()
        if len(toks) != 2:
            raise ParseError(f"line {lineno}: expected '<state> <value>'")
        out[int(toks[0])] = _parse_value(toks[1], lineno)
    values = np.full(max(out) + 1, INF)
    for x, v in out.items():
        values[x] = v
    return values


def dump_controller(controller: np.ndarray, path) -> None:
    lines = []
    for x, u in enumerate(controller):
        lines.append(f"{x} full" if u == FULL_SET else f"{x} {int(u)}")
    Path(path).write_text("\n".join(lines) + "\n")


def load_controller(path) -> np.ndarray:
    out = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        toks = line.split()
        if len(toks) != 2:
            raise ParseError(f"line {lineno}: expected '<state> full|<input>'")
        out[int(toks[0])] = FULL_SET if toks[1] == "full" else int(toks[1])
    mu = np.full(max(out) + 1, FULL_SET, dtype=np.int64)
    for x, u in out.items():
        mu[x] = u
    return mu


def dump_solution_binary(values: np.ndarray, controller: np.ndarray, path) -> None:
    n = len(values)
    if len(controller) != n:
        raise ValueError("values and controller must have equal length")
    n_inputs = int(max(int(np.max(controller)) + 1, 1))
    blob = bytearray()
    blob += BINARY_MAGIC
    blob += struct.pack("<B", BINARY_VERSION)
    blob += struct.pack("<QQ", n, n_inputs)
    blob += np.asarray(values, dtype="<f8").tobytes()
    blob += np.asarray(controller, dtype="<i4").tobytes()
    Path(path).write_bytes(bytes(blob))


def load_solution_binary(path):
    raw = Path(path).read_bytes()
    if raw[:4] != BINARY_MAGIC:
        raise ParseError(f"{path}: bad magic {raw[:4]!r}")
    version = raw[4]
    if version != BINARY_VERSION:
        raise ParseError(f"{path}: unsupported version {version}")
    n, n_inputs = struct.unpack_from("<QQ", raw, 5)
    off = 5 + 16
    values = np.frombuffer(raw, dtype="<f8", count=n, offset=off).copy()
    off += 8 * n
    controller = np.frombuffer(raw, dtype="<i4", count=n, offset=off).astype(np.int64)
    return values, controller, n_inputs
