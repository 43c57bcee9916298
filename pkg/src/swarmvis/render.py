"""Static SVG snapshots of a configuration.

Robots are drawn as unit circles with the camera disk inside, filled by
light color; when a leader exists the horizontal guide lines L0..L10 of the
chain-construction ladder are drawn in its frame.  Output is plain text so
snapshot tests can diff it.
"""

from __future__ import annotations

from .engine import FORMAT_VERSION, Configuration
from .protocol import Color

COLOR_FILL = {
    Color.OFF: "#9e9e9e",
    Color.DEFEATED: "#b71c1c",
    Color.LEADER: "#f9a825",
    Color.SUBORDINATE: "#1565c0",
    Color.NO_SPACE: "#ef6c00",
    Color.EXPAND: "#6a1b9a",
    Color.FINAL: "#2e7d32",
}

GUIDE_LINES = (0.0, 2.0, 4.0, 6.0, 8.0, 10.0)


def _fmt(v: float) -> str:
    return f"{v:.3f}"


def render_svg(config: Configuration, round_idx: int = 0,
               scale: float = 12.0) -> str:
    """Render one configuration; deterministic text for a given input."""
    xs = [r.position.x for r in config.robots]
    ys = [r.position.y for r in config.robots]
    pad = 3.0
    x0, x1 = min(xs) - pad, max(xs) + pad
    y0, y1 = min(ys) - pad, max(ys) + pad
    width = (x1 - x0) * scale
    height = (y1 - y0) * scale

    def sx(x: float) -> float:
        return (x - x0) * scale

    def sy(y: float) -> float:
        return (y1 - y) * scale  # flip: north is up

    out = []
    out.append(
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_fmt(width)}" '
        f'height="{_fmt(height + 70)}" viewBox="0 0 {_fmt(width)} '
        f'{_fmt(height + 70)}" data-format-version="{FORMAT_VERSION}" '
        f'data-round="{round_idx}">')
    out.append(f"<!-- format_version: {FORMAT_VERSION}; round {round_idx} -->")
    out.append(f'<rect width="{_fmt(width)}" height="{_fmt(height + 70)}" '
               f'fill="white"/>')

    leader = next((r for r in config.robots
                   if r.color in (Color.LEADER, Color.EXPAND)), None)
    if leader is not None:
        for k in GUIDE_LINES:
            gy = leader.position.y + k
            if y0 <= gy <= y1:
                out.append(
                    f'<line x1="0" y1="{_fmt(sy(gy))}" x2="{_fmt(width)}" '
                    f'y2="{_fmt(sy(gy))}" stroke="#e0e0e0" stroke-width="1"/>')
                out.append(
                    f'<text x="2" y="{_fmt(sy(gy) - 2)}" font-size="9" '
                    f'fill="#9e9e9e">L{int(k)}</text>')

    for i, robot in enumerate(config.robots):
        cx, cy = sx(robot.position.x), sy(robot.position.y)
        fill = COLOR_FILL[robot.color]
        out.append(
            f'<circle cx="{_fmt(cx)}" cy="{_fmt(cy)}" r="{_fmt(scale)}" '
            f'fill="{fill}" fill-opacity="0.55" stroke="{fill}" '
            f'stroke-width="1.5"/>')
        out.append(
            f'<circle cx="{_fmt(cx)}" cy="{_fmt(cy)}" '
            f'r="{_fmt(scale * config.model.camera_radius)}" fill="none" '
            f'stroke="#212121" stroke-width="0.8" stroke-dasharray="2,2"/>')
        out.append(
            f'<text x="{_fmt(cx)}" y="{_fmt(cy + 3)}" font-size="8" '
            f'text-anchor="middle" fill="#212121">{i}</text>')

    ly = height + 14
    lx = 4.0
    for color in Color:
        out.append(f'<circle cx="{_fmt(lx + 5)}" cy="{_fmt(ly)}" r="5" '
                   f'fill="{COLOR_FILL[color]}" fill-opacity="0.55" '
                   f'stroke="{COLOR_FILL[color]}"/>')
        out.append(f'<text x="{_fmt(lx + 13)}" y="{_fmt(ly + 3)}" '
                   f'font-size="9" fill="#212121">{color.value}</text>')
        lx += 14 + 7 * len(color.value)
    out.append("</svg>")
    return "\n".join(out) + "\n"
