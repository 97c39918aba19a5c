"""Text output formats: manifest headers, CSV series, edge lists, DOT.

Every file starts with a manifest written as an INI section behind ``# ``
so that the header can be fed back to ``--config``.
"""
from __future__ import annotations

import math
from typing import IO, Mapping, Sequence

import numpy as np

from .graph import ColoredGraphState

MANIFEST_SECTION = "bpagame"
_COLOR_LETTER = {0: "R", 1: "B"}
_DOT_FILL = {0: "red", 1: "blue"}


def format_value(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_manifest(fh: IO[str], manifest: Mapping[str, object]) -> None:
    fh.write(f"# [{MANIFEST_SECTION}]\n")
    for key, value in manifest.items():
        if value is None:
            continue
        fh.write(f"# {key} = {format_value(value)}\n")


def read_manifest_lines(lines: Sequence[str]) -> str | None:
    """Recover the INI text of a manifest header, or None if absent.

    The header is the leading run of ``# [bpagame]`` / ``# key = value``
    lines (``//`` instead of ``#`` in DOT files).
    """
    if not lines:
        return None
    for prefix in ("# ", "// "):
        if lines[0].strip() == f"{prefix}[{MANIFEST_SECTION}]".strip():
            break
    else:
        return None
    out = [f"[{MANIFEST_SECTION}]\n"]
    for line in lines[1:]:
        if not line.startswith(prefix) or "=" not in line:
            break
        out.append(line[len(prefix):])
    return "".join(out)


def write_series_csv(fh: IO[str], manifest: Mapping[str, object],
                     columns: Sequence[str], series: Sequence[np.ndarray]) -> None:
    """One row per time step; column ``t`` is the row index."""
    write_manifest(fh, manifest)
    fh.write(",".join(["t", *columns]) + "\n")
    for t, row in enumerate(zip(*series)):
        fh.write(",".join([str(t), *(repr(float(v)) for v in row)]) + "\n")


def write_rows_csv(fh: IO[str], manifest: Mapping[str, object],
                   columns: Sequence[str], rows: Sequence[Sequence]) -> None:
    write_manifest(fh, manifest)
    fh.write(",".join(columns) + "\n")
    for row in rows:
        fh.write(",".join(format_value(v) for v in row) + "\n")


def write_edge_list(fh: IO[str], state: ColoredGraphState,
                    manifest: Mapping[str, object]) -> None:
    """Rows ``u v color_u color_v`` with colors written as R/B."""
    write_manifest(fh, manifest)
    fh.write("# u v color_u color_v\n")
    colors = state.vertex_colors
    for u, v in state.edges:
        fh.write(f"{u} {v} {_COLOR_LETTER[int(colors[u])]} {_COLOR_LETTER[int(colors[v])]}\n")


def write_dot(fh: IO[str], state: ColoredGraphState, manifest: Mapping[str, object]) -> None:
    """Undirected DOT graph: fill = vertex color, diameter proportional to degree."""
    fh.write("// " + f"[{MANIFEST_SECTION}]\n")
    for key, value in manifest.items():
        if value is not None:
            fh.write(f"// {key} = {format_value(value)}\n")
    fh.write("graph bpa {\n")
    fh.write('  graph [overlap=false, outputorder=edgesfirst];\n')
    fh.write('  node [shape=circle, style=filled, fixedsize=true, label="", penwidth=0.3];\n')
    fh.write("  edge [color=gray60, penwidth=0.4];\n")
    degree = state.degrees()
    colors = state.vertex_colors
    for v in range(state.n_vertices):
        width = 0.03 * degree[v]
        fh.write(f"  {v} [fillcolor={_DOT_FILL[int(colors[v])]}, width={width:.3f}];\n")
    for u, v in state.edges:
        fh.write(f"  {u} -- {v};\n")
    fh.write("}\n")


def json_safe(value):
    """Replace non-finite floats so the output stays strict JSON."""
    if isinstance(value, float) and not math.isfinite(value):
        return None
    if isinstance(value, dict):
        return {k: json_safe(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [json_safe(v) for v in value]
    return value
