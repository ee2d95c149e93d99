"""Deterministic SVG figures (time series, field profiles, phase portraits).

Figures are drawn with matplotlib's SVG backend on a bare
``Figure``, with the date stamp dropped and the element-id salt fixed, so a
given input always produces the same bytes.
"""
from __future__ import annotations

import io

import matplotlib

matplotlib.use("Agg")
from matplotlib.figure import Figure  # noqa: E402
import numpy as np  # noqa: E402

from .star.fields import eta  # noqa: E402
from .star.geometry import FlowGeometry  # noqa: E402

SALT = "dioecious"
PLACEHOLDER_LABEL = "no data"


def _render(fig: Figure) -> str:
    buf = io.StringIO()
    with matplotlib.rc_context({"svg.hashsalt": SALT, "svg.fonttype": "path"}):
        fig.savefig(buf, format="svg", metadata={"Date": None})
    return buf.getvalue()


def placeholder_svg(title: str = "") -> str:
    fig = Figure(figsize=(4, 3))
    ax = fig.add_subplot()
    ax.set_axis_off()
    ax.text(0.5, 0.5, PLACEHOLDER_LABEL, ha="center", va="center", fontsize=14)
    if title:
        ax.set_title(title)
    return _render(fig)


def series_svg(series: dict, title: str = "", xlabel: str = "t", ylabel: str = "") -> str:
    """Line plot of ``{label: (x, y)}``; an empty mapping gives the placeholder."""
    series = {k: v for k, v in series.items() if len(v[0]) > 0}
    if not series:
        return placeholder_svg(title)
    fig = Figure(figsize=(6, 4))
    ax = fig.add_subplot()
    for label, (x, y) in series.items():
        ax.plot(np.asarray(x, float), np.asarray(y, float), label=str(label), lw=1.2)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    if title:
        ax.set_title(title)
    ax.legend(fontsize=8)
    fig.tight_layout()
    return _render(fig)


def field_svg(x, fields: dict, title: str = "", xlabel: str = "x") -> str:
    """Profiles ``{name: values}`` sampled on the common grid ``x``."""
    x = np.asarray(x, float)
    if x.size == 0 or not fields:
        return placeholder_svg(title)
    return series_svg({k: (x, v) for k, v in fields.items()}, title, xlabel, "density")


def eta_nullclines(c: float, n: int = 400) -> dict[str, np.ndarray]:
    """Curves where each component of ``eta`` vanishes inside the triangle.

    ``eta1 = 0`` on ``v = u / (2 c (1 - u) + 1)``; ``eta2 = 0`` on ``v = 0``
    and on ``v = u - 2/c``.
    """
    u = np.linspace(0.0, 1.0, n)
    g1 = np.column_stack([u, u / (2.0 * c * (1.0 - u) + 1.0)])
    u2 = np.linspace(2.0 / c, 1.0, n)
    g2 = np.column_stack([u2, u2 - 2.0 / c])
    return {"gamma1": g1, "gamma2": g2}


def phase_portrait_svg(c: float, geom: FlowGeometry = FlowGeometry(), thetas=(-0.54, 0.0, 0.2),
                       arrows: int = 15) -> str:
    """Direction field of ``eta`` with its nullclines, the curves ``gamma_theta``
    and the lines bounding the linear pieces of ``xi``."""
    fig = Figure(figsize=(6, 6))
    ax = fig.add_subplot()
    g = np.linspace(0.02, 0.98, arrows)
    U, V = np.meshgrid(g, g)
    keep = V <= U
    a, b = eta(U[keep], V[keep], c)
    norm = np.hypot(a, b)
    norm[norm == 0] = 1.0
    ax.quiver(U[keep], V[keep], a / norm, b / norm, color="0.6", scale=30, width=0.003)
    for name, curve in eta_nullclines(c).items():
        ax.plot(curve[:, 0], curve[:, 1], lw=1.5, label=f"{name} (eta nullcline)")
    for th in thetas:
        poly = geom.gamma_theta(th)
        ax.plot(poly[:, 0], poly[:, 1], "--", lw=1.2, label=f"gamma_theta, theta={th:g}")
    lo, top, k, wall = geom.eps_prime, geom.v_top, geom.slope, geom.u_wall
    ax.plot([k * lo, k * top], [lo, top], ":", color="k", lw=1, label="xi pieces")
    ax.plot([lo, wall], [lo, lo], ":", color="k", lw=1)
    ax.plot([wall, wall], [lo, top], ":", color="k", lw=1)
    ax.plot([k * top, 1.0], [top, top], ":", color="k", lw=1)
    ax.plot([0, 1], [0, 1], color="k", lw=0.8)
    ax.set_xlim(0, 1)
    ax.set_ylim(0, 1)
    ax.set_xlabel("u")
    ax.set_ylabel("v")
    ax.set_title(f"eta and xi, c = {c:g}")
    ax.legend(fontsize=7, loc="upper left")
    fig.tight_layout()
    return _render(fig)


def emit_svg(kind: str, **kw) -> str:
    """Dispatch to ``series``, ``field`` or ``phase`` figures."""
    table = {"series": series_svg, "field": field_svg, "phase": phase_portrait_svg}
    if kind not in table:
        raise ValueError(f"kind must be one of {sorted(table)}")
    return table[kind](**kw)
