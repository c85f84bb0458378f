"""
write-only SVG figures of networks, partitions and calibration fields
"""
import io

import matplotlib
from matplotlib.figure import Figure
from matplotlib.patches import PathPatch
from matplotlib.path import Path
from matplotlib.collections import LineCollection

from .geometry import Polygon


REGION_COLORS = {1: '#9ecae1', 2: '#fdae6b', 3: '#a1d99b'}
FIELD_COLORS = {'12': '#08519c', '23': '#a63603', '31': '#006d2c'}

SVG_PARAMS = {
    'svg.hashsalt': 'calibrationlab',
    'svg.fonttype': 'none',
    'path.simplify': False,
}


def new_figure(size=(6, 6)):
    fig = Figure(figsize=size)
    ax = fig.add_subplot(1, 1, 1)
    ax.set_aspect('equal')
    ax.set_axis_off()
    return fig, ax


def _ring_path(ring):
    pts = [p.as_tuple() for p in ring]
    return Path(pts + [pts[0]], [Path.MOVETO] + [Path.LINETO] * (len(pts) - 1) + [Path.CLOSEPOLY])


def draw_polygon(ax, polygon: Polygon, **style):
    path = Path.make_compound_path(*[_ring_path(r) for r in polygon.rings()])
    ax.add_patch(PathPatch(path, **style))


def draw_segments(ax, segments, **style):
    lines = [[s.a.as_tuple(), s.b.as_tuple()] for s in segments]
    ax.add_collection(LineCollection(lines, **style))


def draw_arrows(ax, anchors, vectors, color, scale=1.):
    if not anchors:
        return
    xs, ys = zip(*[p.as_tuple() for p in anchors])
    us, vs = zip(*[v.as_tuple() for v in vectors])
    ax.quiver(xs, ys, us, vs, color=color, angles='xy', scale_units='xy', scale=1. / scale, width=0.004)


def to_svg(fig) -> str:
    buf = io.StringIO()
    with matplotlib.rc_context(SVG_PARAMS):
        fig.savefig(buf, format='svg', metadata={'Date': None, 'Creator': 'calibrationlab'})
    return buf.getvalue()


def save_svg(fig, path):
    text = to_svg(fig)
    with open(path, 'w') as f:
        f.write(text)
    return path


def plot_network(net, ax=None, **style):
    """
    draw the polylines of a network, junctions as dots
    """
    fig = None
    if ax is None:
        fig, ax = new_figure()
    draw_segments(ax, list(net.segments()), colors=style.get('color', 'k'), linewidths=style.get('linewidth', 1.5))
    xs, ys = [], []
    for vid in net.junction_ids():
        x, y = net.positions[vid].as_tuple()
        xs.append(x)
        ys.append(y)
    ax.plot(xs, ys, 'o', color=style.get('color', 'k'), markersize=3)
    ax.autoscale_view()
    return fig


def plot_partition(spec, fields=None, arrow_scale=0.1):
    """
    region fills of a three-set partition, its interfaces and optionally one
    arrow triple per field cell
    """
    fig, ax = new_figure()
    draw_polygon(ax, spec.omega, facecolor='none', edgecolor='0.3', linewidth=0.8)
    for label, polys in zip((1, 2, 3), spec.regions):
        for poly in polys:
            draw_polygon(ax, poly, facecolor=REGION_COLORS[label], edgecolor='none', alpha=0.8)
    draw_segments(ax, [i.segment for i in spec.interfaces], colors='k', linewidths=1.2)
    if fields is not None:
        for name in ('12', '23', '31'):
            anchors, vectors = [], []
            for cell in fields.cells:
                vec = cell.field(name)
                if vec.x or vec.y:
                    anchors.append(cell.anchor())
                    vectors.append(vec)
            draw_arrows(ax, anchors, vectors, FIELD_COLORS[name], arrow_scale)
    ax.autoscale_view()
    return fig


def plot_side_by_side(left_spec, right_spec):
    fig = Figure(figsize=(12, 6))
    for k, spec in enumerate((left_spec, right_spec)):
        ax = fig.add_subplot(1, 2, k + 1)
        ax.set_aspect('equal')
        ax.set_axis_off()
        draw_polygon(ax, spec.omega, facecolor='none', edgecolor='0.3', linewidth=0.8)
        for label, polys in zip((1, 2, 3), spec.regions):
            for poly in polys:
                draw_polygon(ax, poly, facecolor=REGION_COLORS[label], edgecolor='none', alpha=0.8)
        draw_segments(ax, [i.segment for i in spec.interfaces], colors='k', linewidths=1.2)
        ax.autoscale_view()
    return fig
