"""Base polyline skeletons for printable ASCII [32, 126].

Glyph space: x grows right, y grows up, baseline at y=0, cap height 1.0,
authored x-height 0.62, descender depth -0.35.  Each glyph is a list of
polylines (lists of (x, y) points) plus an advance width in glyph units.
Fonts perturb these skeletons; see :mod:`eruku.fontsynth.fonts`.
"""

from __future__ import annotations

import math

XH = 0.62  # authored x-height, rescaled per font
ASC = 0.95
DESC = -0.35

Point = tuple[float, float]
Polyline = list[Point]


def _arc(cx: float, cy: float, rx: float, ry: float, a0: float, a1: float, n: int = 8) -> Polyline:
    """Elliptical arc from angle a0 to a1 (degrees, CCW positive)."""
    pts = []
    for i in range(n + 1):
        t = math.radians(a0 + (a1 - a0) * i / n)
        pts.append((cx + rx * math.cos(t), cy + ry * math.sin(t)))
    return pts


def _circle(cx: float, cy: float, rx: float, ry: float, n: int = 12) -> Polyline:
    return _arc(cx, cy, rx, ry, 0.0, 360.0, n)


def _bowl(ytop: float, ybot: float, x0: float, rx: float) -> Polyline:
    """D-shaped bowl attached to a stem at x=0, bulging right to x0+rx."""
    mid = (ytop + ybot) / 2
    ry = (ytop - ybot) / 2
    return [(0.0, ytop)] + _arc(x0, mid, rx, ry, 90.0, -90.0) + [(0.0, ybot)]


def _glyphs() -> dict[str, tuple[list[Polyline], float]]:
    g: dict[str, tuple[list[Polyline], float]] = {}

    g[" "] = ([], 0.45)
    g["!"] = ([[(0.08, 1.0), (0.08, 0.3)], [(0.08, 0.02), (0.08, 0.06)]], 0.3)
    g['"'] = ([[(0.06, 1.0), (0.06, 0.8)], [(0.2, 1.0), (0.2, 0.8)]], 0.36)
    g["#"] = (
        [
            [(0.18, 0.9), (0.1, 0.1)],
            [(0.44, 0.9), (0.36, 0.1)],
            [(0.04, 0.62), (0.52, 0.62)],
            [(0.0, 0.34), (0.48, 0.34)],
        ],
        0.64,
    )
    g["$"] = (
        [
            _arc(0.28, 0.72, 0.22, 0.2, 45, 225) + _arc(0.26, 0.28, 0.22, 0.2, 135, -45),
            [(0.26, 1.06), (0.26, -0.08)],
        ],
        0.62,
    )
    g["%"] = (
        [
            _circle(0.12, 0.78, 0.11, 0.13, 8),
            _circle(0.44, 0.2, 0.11, 0.13, 8),
            [(0.52, 0.95), (0.04, 0.03)],
        ],
        0.68,
    )
    g["&"] = (
        [
            _circle(0.25, 0.73, 0.15, 0.2, 10),
            [(0.33, 0.57), (0.06, 0.2)] + _arc(0.2, 0.16, 0.17, 0.16, 210, -30) + [(0.52, 0.3)],
            [(0.38, 0.32), (0.54, 0.0)],
        ],
        0.66,
    )
    g["'"] = ([[(0.08, 1.0), (0.08, 0.8)]], 0.22)
    g["("] = ([_arc(0.42, 0.5, 0.3, 0.6, 120, 240)], 0.4)
    g[")"] = ([_arc(0.02, 0.5, 0.3, 0.6, 60, -60)], 0.4)
    g["*"] = (
        [
            [(0.25, 0.95), (0.25, 0.5)],
            [(0.06, 0.84), (0.44, 0.6)],
            [(0.06, 0.6), (0.44, 0.84)],
        ],
        0.6,
    )
    g["+"] = ([[(0.27, 0.72), (0.27, 0.16)], [(0.0, 0.44), (0.54, 0.44)]], 0.66)
    g[","] = ([[(0.1, 0.08), (0.04, -0.18)]], 0.26)
    g["-"] = ([[(0.0, 0.4), (0.4, 0.4)]], 0.52)
    g["."] = ([[(0.07, 0.0), (0.07, 0.05)]], 0.22)
    g["/"] = ([[(0.0, -0.1), (0.42, 1.0)]], 0.54)

    g["0"] = ([_circle(0.27, 0.5, 0.27, 0.5)], 0.68)
    g["1"] = ([[(0.08, 0.75), (0.26, 1.0), (0.26, 0.0)], [(0.06, 0.0), (0.44, 0.0)]], 0.58)
    g["2"] = ([_arc(0.27, 0.73, 0.25, 0.25, 170, -10) + [(0.0, 0.0), (0.54, 0.0)]], 0.68)
    g["3"] = (
        [_arc(0.27, 0.75, 0.23, 0.24, 150, -90) + _arc(0.28, 0.26, 0.26, 0.26, 90, -150)],
        0.68,
    )
    g["4"] = ([[(0.38, 0.0), (0.38, 1.0), (0.0, 0.3), (0.54, 0.3)]], 0.68)
    g["5"] = (
        [[(0.5, 1.0), (0.08, 1.0), (0.08, 0.6)] + _arc(0.27, 0.32, 0.27, 0.3, 115, -115)],
        0.68,
    )
    g["6"] = (
        [
            _arc(0.34, 0.64, 0.3, 0.34, 70, 180) + [(0.04, 0.28)],
            _circle(0.28, 0.28, 0.24, 0.28, 10),
        ],
        0.68,
    )
    g["7"] = ([[(0.0, 1.0), (0.54, 1.0), (0.18, 0.0)]], 0.68)
    g["8"] = ([_circle(0.28, 0.72, 0.21, 0.24, 10), _circle(0.28, 0.26, 0.25, 0.26, 10)], 0.68)
    g["9"] = (
        [
            _circle(0.28, 0.7, 0.24, 0.28, 10),
            [(0.52, 0.7), (0.52, 0.34)] + _arc(0.26, 0.34, 0.26, 0.34, 0, -100),
        ],
        0.68,
    )

    g[":"] = ([[(0.07, 0.5), (0.07, 0.55)], [(0.07, 0.0), (0.07, 0.05)]], 0.22)
    g[";"] = ([[(0.08, 0.5), (0.08, 0.55)], [(0.1, 0.08), (0.04, -0.18)]], 0.26)
    g["<"] = ([[(0.5, 0.8), (0.0, 0.44), (0.5, 0.08)]], 0.62)
    g["="] = ([[(0.0, 0.56), (0.5, 0.56)], [(0.0, 0.3), (0.5, 0.3)]], 0.62)
    g[">"] = ([[(0.0, 0.8), (0.5, 0.44), (0.0, 0.08)]], 0.62)
    g["?"] = (
        [
            _arc(0.25, 0.76, 0.22, 0.22, 180, -40) + [(0.26, 0.42), (0.26, 0.28)],
            [(0.26, 0.0), (0.26, 0.05)],
        ],
        0.6,
    )
    g["@"] = (
        [
            _arc(0.3, 0.45, 0.3, 0.38, -45, 225, 12),
            _circle(0.3, 0.45, 0.12, 0.15, 8),
            [(0.42, 0.6), (0.42, 0.3)],
        ],
        0.76,
    )

    g["A"] = ([[(0.0, 0.0), (0.3, 1.0), (0.6, 0.0)], [(0.12, 0.4), (0.48, 0.4)]], 0.74)
    g["B"] = (
        [
            [(0.0, 0.0), (0.0, 1.0)],
            _bowl(1.0, 0.54, 0.34, 0.24),
            _bowl(0.54, 0.0, 0.36, 0.26),
        ],
        0.72,
    )
    g["C"] = ([_arc(0.32, 0.5, 0.3, 0.5, 60, 300)], 0.74)
    g["D"] = ([[(0.0, 0.0), (0.0, 1.0)], _bowl(1.0, 0.0, 0.1, 0.5)], 0.76)
    g["E"] = ([[(0.55, 1.0), (0.0, 1.0), (0.0, 0.0), (0.55, 0.0)], [(0.0, 0.54), (0.42, 0.54)]], 0.7)
    g["F"] = ([[(0.55, 1.0), (0.0, 1.0), (0.0, 0.0)], [(0.0, 0.54), (0.4, 0.54)]], 0.66)
    g["G"] = (
        [_arc(0.32, 0.5, 0.3, 0.5, 55, 320), [(0.55, 0.18), (0.55, 0.42), (0.34, 0.42)]],
        0.76,
    )
    g["H"] = (
        [[(0.0, 0.0), (0.0, 1.0)], [(0.6, 0.0), (0.6, 1.0)], [(0.0, 0.5), (0.6, 0.5)]],
        0.74,
    )
    g["I"] = ([[(0.0, 1.0), (0.2, 1.0)], [(0.0, 0.0), (0.2, 0.0)], [(0.1, 0.0), (0.1, 1.0)]], 0.34)
    g["J"] = ([[(0.5, 1.0)] + _arc(0.28, 0.18, 0.22, 0.18, 0, -180)], 0.64)
    g["K"] = (
        [[(0.0, 0.0), (0.0, 1.0)], [(0.55, 1.0), (0.0, 0.45)], [(0.18, 0.58), (0.58, 0.0)]],
        0.7,
    )
    g["L"] = ([[(0.0, 1.0), (0.0, 0.0), (0.52, 0.0)]], 0.64)
    g["M"] = ([[(0.0, 0.0), (0.0, 1.0), (0.3, 0.35), (0.6, 1.0), (0.6, 0.0)]], 0.76)
    g["N"] = ([[(0.0, 0.0), (0.0, 1.0), (0.6, 0.0), (0.6, 1.0)]], 0.74)
    g["O"] = ([_circle(0.3, 0.5, 0.3, 0.5)], 0.76)
    g["P"] = ([[(0.0, 0.0), (0.0, 1.0)], _bowl(1.0, 0.52, 0.34, 0.26)], 0.68)
    g["Q"] = ([_circle(0.3, 0.5, 0.3, 0.5), [(0.38, 0.22), (0.62, -0.05)]], 0.78)
    g["R"] = (
        [[(0.0, 0.0), (0.0, 1.0)], _bowl(1.0, 0.52, 0.34, 0.26), [(0.22, 0.52), (0.58, 0.0)]],
        0.72,
    )
    g["S"] = (
        [_arc(0.32, 0.76, 0.26, 0.24, 45, 225) + _arc(0.3, 0.28, 0.28, 0.28, 135, -45)],
        0.72,
    )
    g["T"] = ([[(0.0, 1.0), (0.6, 1.0)], [(0.3, 1.0), (0.3, 0.0)]], 0.7)
    g["U"] = ([[(0.0, 1.0), (0.0, 0.22)] + _arc(0.3, 0.22, 0.3, 0.22, 180, 360) + [(0.6, 1.0)]], 0.74)
    g["V"] = ([[(0.0, 1.0), (0.3, 0.0), (0.6, 1.0)]], 0.72)
    g["W"] = ([[(0.0, 1.0), (0.15, 0.0), (0.3, 0.6), (0.45, 0.0), (0.6, 1.0)]], 0.78)
    g["X"] = ([[(0.0, 0.0), (0.6, 1.0)], [(0.0, 1.0), (0.6, 0.0)]], 0.72)
    g["Y"] = ([[(0.0, 1.0), (0.3, 0.5), (0.6, 1.0)], [(0.3, 0.5), (0.3, 0.0)]], 0.72)
    g["Z"] = ([[(0.0, 1.0), (0.6, 1.0), (0.0, 0.0), (0.6, 0.0)]], 0.72)

    g["["] = ([[(0.26, 1.02), (0.06, 1.02), (0.06, -0.05), (0.26, -0.05)]], 0.38)
    g["\\"] = ([[(0.0, 1.0), (0.42, -0.1)]], 0.54)
    g["]"] = ([[(0.0, 1.02), (0.2, 1.02), (0.2, -0.05), (0.0, -0.05)]], 0.38)
    g["^"] = ([[(0.04, 0.62), (0.26, 1.0), (0.48, 0.62)]], 0.6)
    g["_"] = ([[(0.0, -0.08), (0.54, -0.08)]], 0.62)
    g["`"] = ([[(0.06, 1.0), (0.2, 0.8)]], 0.32)

    g["a"] = ([_circle(0.25, 0.31, 0.25, 0.31), [(0.5, 0.62), (0.5, 0.0)]], 0.64)
    g["b"] = ([[(0.0, 0.95), (0.0, 0.0)], _bowl(0.62, 0.0, 0.25, 0.25)], 0.64)
    g["c"] = ([_arc(0.27, 0.31, 0.25, 0.31, 50, 310)], 0.6)
    g["d"] = (
        [
            [(0.5, 0.95), (0.5, 0.0)],
            [(0.5, 0.62)] + _arc(0.25, 0.31, 0.25, 0.31, 90, 270) + [(0.5, 0.0)],
        ],
        0.64,
    )
    g["e"] = ([[(0.01, 0.36), (0.49, 0.36)] + _arc(0.25, 0.31, 0.24, 0.31, 12, 300)], 0.62)
    g["f"] = (
        [_arc(0.3, 0.74, 0.16, 0.18, 60, 180) + [(0.14, 0.0)], [(0.0, 0.62), (0.34, 0.62)]],
        0.5,
    )
    g["g"] = (
        [
            _circle(0.25, 0.31, 0.25, 0.31),
            [(0.5, 0.62), (0.5, -0.13)] + _arc(0.27, -0.13, 0.23, 0.2, 0, -180),
        ],
        0.64,
    )
    g["h"] = (
        [[(0.0, 0.95), (0.0, 0.0)], [(0.0, 0.42)] + _arc(0.25, 0.42, 0.25, 0.2, 180, 360) + [(0.5, 0.0)]],
        0.64,
    )
    g["i"] = ([[(0.08, 0.62), (0.08, 0.0)], [(0.08, 0.8), (0.08, 0.84)]], 0.3)
    g["j"] = (
        [[(0.3, 0.62), (0.3, -0.2)] + _arc(0.1, -0.2, 0.2, 0.15, 0, -120), [(0.3, 0.8), (0.3, 0.84)]],
        0.42,
    )
    g["k"] = (
        [[(0.0, 0.95), (0.0, 0.0)], [(0.42, 0.62), (0.0, 0.25)], [(0.14, 0.35), (0.46, 0.0)]],
        0.58,
    )
    g["l"] = ([[(0.08, 0.95), (0.08, 0.0)]], 0.3)
    g["m"] = (
        [
            [(0.0, 0.62), (0.0, 0.0)],
            [(0.0, 0.44)] + _arc(0.19, 0.44, 0.19, 0.18, 180, 360) + [(0.38, 0.0)],
            [(0.38, 0.44)] + _arc(0.57, 0.44, 0.19, 0.18, 180, 360) + [(0.76, 0.0)],
        ],
        0.88,
    )
    g["n"] = (
        [[(0.0, 0.62), (0.0, 0.0)], [(0.0, 0.42)] + _arc(0.25, 0.42, 0.25, 0.2, 180, 360) + [(0.5, 0.0)]],
        0.64,
    )
    g["o"] = ([_circle(0.25, 0.31, 0.25, 0.31)], 0.64)
    g["p"] = ([[(0.0, 0.62), (0.0, -0.35)], _bowl(0.62, 0.0, 0.25, 0.25)], 0.64)
    g["q"] = (
        [
            [(0.5, 0.62), (0.5, -0.35)],
            [(0.5, 0.62)] + _arc(0.25, 0.31, 0.25, 0.31, 90, 270) + [(0.5, 0.0)],
        ],
        0.64,
    )
    g["r"] = ([[(0.0, 0.62), (0.0, 0.0)], [(0.0, 0.42)] + _arc(0.2, 0.42, 0.2, 0.2, 180, 60)], 0.46)
    g["s"] = (
        [_arc(0.26, 0.47, 0.2, 0.15, 45, 225) + _arc(0.24, 0.17, 0.2, 0.15, 135, -45)],
        0.58,
    )
    g["t"] = (
        [[(0.14, 0.88), (0.14, 0.14)] + _arc(0.28, 0.14, 0.14, 0.14, 180, 300), [(0.0, 0.62), (0.34, 0.62)]],
        0.46,
    )
    g["u"] = (
        [[(0.0, 0.62), (0.0, 0.18)] + _arc(0.25, 0.18, 0.25, 0.18, 180, 360), [(0.5, 0.62), (0.5, 0.0)]],
        0.64,
    )
    g["v"] = ([[(0.0, 0.62), (0.25, 0.0), (0.5, 0.62)]], 0.6)
    g["w"] = ([[(0.0, 0.62), (0.16, 0.0), (0.32, 0.45), (0.48, 0.0), (0.64, 0.62)]], 0.76)
    g["x"] = ([[(0.0, 0.62), (0.5, 0.0)], [(0.0, 0.0), (0.5, 0.62)]], 0.6)
    g["y"] = ([[(0.0, 0.62), (0.25, 0.0)], [(0.5, 0.62), (0.12, -0.3)]], 0.6)
    g["z"] = ([[(0.0, 0.62), (0.5, 0.62), (0.0, 0.0), (0.5, 0.0)]], 0.6)

    g["{"] = (
        [[(0.34, 1.02), (0.2, 0.94), (0.2, 0.56), (0.06, 0.47), (0.2, 0.38), (0.2, 0.0), (0.34, -0.08)]],
        0.46,
    )
    g["|"] = ([[(0.08, 1.05), (0.08, -0.2)]], 0.24)
    g["}"] = (
        [[(0.0, 1.02), (0.14, 0.94), (0.14, 0.56), (0.28, 0.47), (0.14, 0.38), (0.14, 0.0), (0.0, -0.08)]],
        0.46,
    )
    g["~"] = (
        [[(0.02, 0.42), (0.09, 0.5), (0.17, 0.52), (0.25, 0.46), (0.33, 0.4), (0.41, 0.42), (0.48, 0.5)]],
        0.6,
    )
    return g


GLYPHS: dict[str, tuple[list[Polyline], float]] = _glyphs()

assert all(chr(c) in GLYPHS for c in range(32, 127))
