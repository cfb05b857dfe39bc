"""
Text and SVG drawings of a layout JSON document
"""
import logging
from typing import Dict, List

from models.layout_models import Position, Shape
from storage.json_store import term_labels

logger = logging.getLogger(__name__)

FREE_MARK = "·"
FIXED_MARK = "+"
# A triangle is drawn as the box corner at its right angle
SHAPE_MARKS = {
    Shape.SQUARE.value: "╋",
    Shape.TRI_MISSING_UL.value: "┘",
    Shape.TRI_MISSING_LR.value: "┌",
    Shape.TRI_MISSING_LL.value: "┐",
}
GAP = 3

PALETTE = [
    "#4e79a7", "#f28e2b", "#e15759", "#76b7b2", "#59a14f",
    "#edc948", "#b07aa1", "#ff9da7", "#9c755f", "#bab0ac",
]
FILLER_COLOR = "#d9d9d9"
SCALE = 60
MARGIN = 30

SVG_HEADER = """\
<?xml version="1.0" encoding="UTF-8"?>
<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="%(width)d" height="%(height)d" viewBox="0 0 %(width)d %(height)d">
<rect x="0" y="0" width="%(width)d" height="%(height)d" style="fill:#ffffff"/>
"""
SVG_FOOTER = "</svg>\n"


def _qubit_marks(data: Dict) -> Dict[tuple, str]:
    labels = term_labels(data)
    marks = {}
    for q in data.get("qubits", []):
        if q["kind"] == "parity":
            mark = labels.get(q["id"], "?")
        elif q["kind"] == "fixed":
            mark = FIXED_MARK
        else:
            mark = FREE_MARK
        marks[(q["col"], q["row"])] = mark
    return marks


def render_ascii(data: Dict) -> str:
    """One text line per lattice row, top row first, plaquette marks between rows"""
    marks = _qubit_marks(data)
    if not marks:
        return ""
    width = 1 + max(col for col, _ in marks)
    height = 1 + max(row for _, row in marks)
    slot = max(len(m) for m in marks.values())
    shapes = {tuple(p["cell"]): SHAPE_MARKS.get(p["shape"], "?") for p in data.get("plaquettes", [])}

    lines: List[str] = []
    for row in range(height - 1, -1, -1):
        cells = [marks.get((col, row), "").center(slot) for col in range(width)]
        lines.append((" " * GAP).join(cells).rstrip())
        if row == 0:
            break
        between = []
        for col in range(width):
            between.append(" " * slot)
            if col < width - 1:
                between.append(shapes.get((col, row - 1), " ").center(GAP))
        lines.append("".join(between).rstrip())
    return "\n".join(lines) + "\n"


def render_svg(data: Dict) -> str:
    """One polygon per plaquette, coloured by group, qubit labels centred on their sites"""
    marks = _qubit_marks(data)
    cols = 1 + max((col for col, _ in marks), default=-1)
    rows = 1 + max((row for _, row in marks), default=-1)
    width = 2 * MARGIN + max(cols - 1, 0) * SCALE
    height = 2 * MARGIN + max(rows - 1, 0) * SCALE

    def xy(pos: Position):
        return MARGIN + pos.col * SCALE, MARGIN + (rows - 1 - pos.row) * SCALE

    parts = [SVG_HEADER % {"width": width, "height": height}]
    for p in sorted(data.get("plaquettes", []), key=lambda p: (p["cell"][1], p["cell"][0])):
        group = p.get("group", "filler")
        color = FILLER_COLOR if group == "filler" else PALETTE[int(group) % len(PALETTE)]
        cell = Position(*p["cell"])
        corners = set(Shape(p["shape"]).corners(cell))
        # Walk the cell anticlockwise so the polygon never self-intersects
        ring = [cell, cell.shifted(1, 0), cell.shifted(1, 1), cell.shifted(0, 1)]
        order = [c for c in ring if c in corners]
        points = " ".join("%d,%d" % xy(c) for c in order)
        parts.append(
            '<polygon points="%s" style="fill:%s;fill-opacity:0.6;stroke:#333333;stroke-width:1"/>\n'
            % (points, color)
        )
    for (col, row), mark in sorted(marks.items()):
        x, y = xy(Position(col, row))
        parts.append('<circle cx="%d" cy="%d" r="14" style="fill:#ffffff;stroke:#333333"/>\n' % (x, y))
        parts.append(
            '<text x="%d" y="%d" text-anchor="middle" dominant-baseline="central" '
            'font-family="monospace" font-size="12">%s</text>\n' % (x, y, mark)
        )
    parts.append(SVG_FOOTER)
    return "".join(parts)


RENDERERS = {"ascii": render_ascii, "svg": render_svg}
