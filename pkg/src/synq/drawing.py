"""Deterministic SVG rendering of string diagrams.

Layout is a plain grid: one row per layer, one column per wire slot at each
boundary. Words draw as labelled rectangles, cups and caps as arcs, spiders
as dots, swaps as crossing segments. Output is a pure function of the
diagram, so equal diagrams render byte-identically.
"""
from __future__ import annotations

from .diagram import Cap, Cup, Diagram, Spider, Swap, Word

_COL = 60.0
_ROW = 60.0
_MARGIN = 40.0
_BOX_H = 26.0


def _x(position: int) -> float:
    return _MARGIN + position * _COL


def _y(level: float) -> float:
    return _MARGIN + level * _ROW


def _fmt(v: float) -> str:
    return f"{v:.1f}"


def _esc(text: str) -> str:
    return (text.replace("&", "&amp;").replace("<", "&lt;")
            .replace(">", "&gt;").replace('"', "&quot;"))


def render_svg(d: Diagram) -> str:
    boundaries = d.wire_layers()
    n_rows = len(d.layers)
    width = _MARGIN * 2 + _COL * max(
        [len(b) for b in boundaries] + [len(b.cod) + o for (b, o) in d.layers] + [1]
    )
    height = _MARGIN * 2 + _ROW * (n_rows + 1)

    wires: list[str] = []
    elems: list[str] = []

    # identity wire segments between consecutive boundaries
    for k, (box, offset) in enumerate(d.layers):
        nd, nc = len(box.dom), len(box.cod)
        for pos in range(len(boundaries[k])):
            if offset <= pos < offset + nd:
                continue
            below = pos if pos < offset else pos - nd + nc
            wires.append(_wire_segment(boundaries[k][pos], pos, k, below, k + 1))
    # wires from the last boundary to the bottom edge
    for pos, t in enumerate(boundaries[-1]):
        wires.append(_wire_segment(t, pos, n_rows, pos, n_rows + 1))

    for k, (box, offset) in enumerate(d.layers):
        elems.append(_box_svg(box, offset, k, boundaries[k]))

    body = "\n".join(wires + elems)
    return (
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_fmt(width)}" '
        f'height="{_fmt(height)}" viewBox="0 0 {_fmt(width)} {_fmt(height)}">\n'
        f'<style>.wire{{stroke:#222;fill:none}}.word rect{{fill:#fff;stroke:#222}}'
        f'.cup,.cap{{stroke:#222;fill:none}}.spider{{fill:#222}}'
        f'text{{font-family:sans-serif;font-size:11px}}</style>\n'
        f"{body}\n</svg>\n"
    )


def _wire_segment(ptype, pos_top: int, row_top: int | float,
                  pos_bot: int, row_bot: int | float) -> str:
    x1, y1 = _x(pos_top), _y(row_top)
    x2, y2 = _x(pos_bot), _y(row_bot)
    label = (f'<text x="{_fmt(x1 + 4)}" y="{_fmt(y1 + 14)}">{_esc(str(ptype))}</text>'
             if row_top == 0 or pos_top != pos_bot else "")
    return (f'<path class="wire" d="M {_fmt(x1)} {_fmt(y1)} L {_fmt(x2)} {_fmt(y2)}"/>'
            + label)


def _box_svg(box, offset: int, k: int, wires_above) -> str:
    y_mid = _y(k + 0.5)
    if isinstance(box, Word):
        n = max(len(box.cod), len(box.dom), 1)
        x0 = _x(offset) - _COL * 0.35
        w = _COL * (n - 1) + _COL * 0.7
        parts = [f'<g class="word"><rect x="{_fmt(x0)}" y="{_fmt(y_mid - _BOX_H / 2)}" '
                 f'width="{_fmt(w)}" height="{_fmt(_BOX_H)}" rx="4"/>'
                 f'<text x="{_fmt(x0 + w / 2)}" y="{_fmt(y_mid + 4)}" '
                 f'text-anchor="middle">{_esc(box.token)}</text></g>']
        for i, t in enumerate(box.dom):
            parts.append(_wire_segment(t, offset + i, k, offset + i, k + 0.5 - _BOX_H / 2 / _ROW))
        for i, t in enumerate(box.cod):
            x = _x(offset + i)
            parts.append(
                f'<path class="wire" d="M {_fmt(x)} {_fmt(y_mid + _BOX_H / 2)} '
                f'L {_fmt(x)} {_fmt(_y(k + 1))}"/>'
                f'<text x="{_fmt(x + 4)}" y="{_fmt(_y(k + 1) - 6)}">{_esc(str(t))}</text>')
        return "".join(parts)
    if isinstance(box, Cup):
        x1, x2 = _x(offset), _x(offset + 1)
        top = _y(k)
        return (f'<path class="cup" d="M {_fmt(x1)} {_fmt(top)} '
                f'C {_fmt(x1)} {_fmt(top + _ROW * 0.8)}, {_fmt(x2)} {_fmt(top + _ROW * 0.8)}, '
                f'{_fmt(x2)} {_fmt(top)}"/>')
    if isinstance(box, Cap):
        x1, x2 = _x(offset), _x(offset + 1)
        bot = _y(k + 1)
        return (f'<path class="cap" d="M {_fmt(x1)} {_fmt(bot)} '
                f'C {_fmt(x1)} {_fmt(bot - _ROW * 0.8)}, {_fmt(x2)} {_fmt(bot - _ROW * 0.8)}, '
                f'{_fmt(x2)} {_fmt(bot)}"/>'
                f'<text x="{_fmt(x1 + 4)}" y="{_fmt(bot - 6)}">{_esc(str(box.cod[0]))}</text>')
    if isinstance(box, Spider):
        xc = _x(offset) + _COL * (max(box.n_in, box.n_out, 1) - 1) / 2
        parts = [f'<circle class="spider" cx="{_fmt(xc)}" cy="{_fmt(y_mid)}" r="5"/>']
        for i in range(box.n_in):
            parts.append(f'<path class="wire" d="M {_fmt(_x(offset + i))} {_fmt(_y(k))} '
                         f'L {_fmt(xc)} {_fmt(y_mid)}"/>')
        for i in range(box.n_out):
            parts.append(f'<path class="wire" d="M {_fmt(xc)} {_fmt(y_mid)} '
                         f'L {_fmt(_x(offset + i))} {_fmt(_y(k + 1))}"/>')
        return "".join(parts)
    if isinstance(box, Swap):
        x1, x2 = _x(offset), _x(offset + 1)
        y1, y2 = _y(k), _y(k + 1)
        return (f'<path class="wire" d="M {_fmt(x1)} {_fmt(y1)} L {_fmt(x2)} {_fmt(y2)}"/>'
                f'<path class="wire" d="M {_fmt(x2)} {_fmt(y1)} L {_fmt(x1)} {_fmt(y2)}"/>')
    raise TypeError(f"unknown box {box!r}")
