"""
Text formats written and read by the command line: CSV tables, grid files, PGM heatmaps, SVG
line charts and waveform dumps.  Every written file starts with `# config=<hash> seed=<seed>`.
"""

import logging
import math
import os

import numpy as np

from tdzsim.models.common.exceptions import ConfigurationError
from tdzsim.models.crossbar.grid import SensorGrid
from tdzsim.utils.helper_func import format_value

logger = logging.getLogger('tdzsim')

PGM_MAXVAL = 255


def provenance(config_hash, seed):
    return f"# config={config_hash} seed={seed}"


def write_csv(path, header, rows, config_hash, seed):
    lines = [provenance(config_hash, seed), ','.join(header)]
    lines += [','.join(format_value(x) for x in row) for row in rows]
    with open(path, 'w') as outfile:
        outfile.write('\n'.join(lines) + '\n')
    logger.info(f"Wrote {len(rows)} rows to {path}")


def _parse_header(line):
    fields = {}
    for item in line.lstrip('#').split():
        if '=' in item:
            key, value = item.split('=', 1)
            fields[key] = value
    return fields


def read_matrix(path, unit):
    """ Read a CSV matrix with a `# rows=<n> cols=<m> unit=<unit>` header """
    if not os.path.exists(path):
        raise ConfigurationError(f"Grid file not found at: {path}")
    header = {}
    with open(path) as infile:
        for line in infile:
            if line.lstrip().startswith('#'):
                header.update(_parse_header(line.strip()))
    if 'rows' not in header or 'cols' not in header:
        raise ConfigurationError(f"{path} lacks the '# rows=<n> cols=<m> unit={unit}' header")
    if header.get('unit', unit) != unit:
        raise ConfigurationError(f"{path} has unit {header['unit']}, expected {unit}")
    try:
        matrix = np.loadtxt(path, delimiter=',', comments='#', ndmin=2)
    except ValueError as e:
        raise ConfigurationError(f"Malformed data in {path}: {e}")
    shape = (int(header['rows']), int(header['cols']))
    if matrix.shape != shape:
        raise ConfigurationError(f"{path} declares {shape[0]}x{shape[1]} but holds {matrix.shape}")
    return matrix


def capacitance_path(path):
    root, _ = os.path.splitext(path)
    return root + '.cap.csv'


def read_grid(path, **grid_kwargs):
    """ SensorGrid from a resistance file and its optional sibling `<name>.cap.csv` """
    r = read_matrix(path, 'ohm')
    c_path = capacitance_path(path)
    c = read_matrix(c_path, 'farad') if os.path.exists(c_path) else None
    return SensorGrid(r, c_par=c, **grid_kwargs)


def write_matrix(path, matrix, unit, config_hash=None, seed=None):
    matrix = np.asarray(matrix, dtype=float)
    lines = []
    if config_hash is not None:
        lines.append(provenance(config_hash, seed))
    lines.append(f"# rows={matrix.shape[0]} cols={matrix.shape[1]} unit={unit}")
    np.savetxt(path, matrix, fmt='%.9g', delimiter=',', header='\n'.join(lines), comments='')


def write_grid(path, grid, config_hash=None, seed=None):
    write_matrix(path, grid.r, 'ohm', config_hash, seed)
    if grid.c_par is not None:
        write_matrix(capacitance_path(path), grid.c_par, 'farad', config_hash, seed)


def pgm_levels(r, r_lo, r_hi):
    """ 255 at r_lo down to 0 at r_hi, affine in log10(R); nan maps to 0 """
    r = np.asarray(r, dtype=float)
    span = math.log10(r_hi) - math.log10(r_lo)
    with np.errstate(divide='ignore', invalid='ignore'):
        level = PGM_MAXVAL * (math.log10(r_hi) - np.log10(r)) / span
    level = np.where(np.isnan(level), 0, level)
    return np.clip(np.round(level), 0, PGM_MAXVAL).astype(int)


def write_pgm(path, r, r_lo, r_hi, config_hash, seed):
    levels = pgm_levels(r, r_lo, r_hi)
    rows, cols = levels.shape
    lines = ['P2', provenance(config_hash, seed),
             f"# value = round({PGM_MAXVAL} * (log10({r_hi:g}) - log10(R)) / (log10({r_hi:g}) - log10({r_lo:g}))), "
             f"clipped to 0..{PGM_MAXVAL}; unmeasured sensors are 0",
             f"{cols} {rows}", str(PGM_MAXVAL)]
    lines += [' '.join(str(v) for v in row) for row in levels]
    with open(path, 'w') as outfile:
        outfile.write('\n'.join(lines) + '\n')
    logger.info(f"Wrote {rows}x{cols} heatmap to {path}")


def write_waveform_csv(path, waveform, config_hash=None, seed=None):
    """ Two columns (tick, value) under a `# rate=<Hz> unit=<V|A>` header """
    lines = []
    if config_hash is not None:
        lines.append(provenance(config_hash, seed))
    lines.append(f"# rate={format_value(float(waveform.rate))} unit={waveform.label}")
    lines += [f"{n},{format_value(float(v))}" for n, v in enumerate(waveform.samples)]
    with open(path, 'w') as outfile:
        outfile.write('\n'.join(lines) + '\n')


SVG_WIDTH, SVG_HEIGHT, SVG_MARGIN = 640, 400, 60
SVG_COLORS = ('#1f77b4', '#d62728', '#2ca02c', '#9467bd', '#ff7f0e')


def write_svg_plot(path, series, title, xlabel, ylabel, config_hash, seed, logx=False):
    """ Line chart of {label: (xs, ys)}; non-finite points are skipped """
    def tx(x):
        return math.log10(x) if logx else x

    points = {label: [(tx(x), y) for x, y in zip(xs, ys) if np.isfinite(y) and (x > 0 or not logx)]
              for label, (xs, ys) in series.items()}
    all_x = [x for pts in points.values() for x, _ in pts] or [0.0, 1.0]
    all_y = [y for pts in points.values() for _, y in pts] or [0.0, 1.0]
    x_lo, x_hi = min(all_x), max(all_x)
    y_lo, y_hi = min(all_y), max(all_y)
    if x_hi == x_lo:
        x_hi = x_lo + 1
    if y_hi == y_lo:
        y_hi = y_lo + 1
    w, h, m = SVG_WIDTH, SVG_HEIGHT, SVG_MARGIN

    def px(x):
        return m + (x - x_lo) / (x_hi - x_lo) * (w - 2 * m)

    def py(y):
        return h - m - (y - y_lo) / (y_hi - y_lo) * (h - 2 * m)

    x_tick = (lambda v: format_value(10 ** v)) if logx else format_value
    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">',
           f'<!-- config={config_hash} seed={seed} -->',
           f'<text x="{w / 2:.1f}" y="24" text-anchor="middle" font-size="16">{title}</text>',
           f'<rect x="{m}" y="{m}" width="{w - 2 * m}" height="{h - 2 * m}" fill="none" stroke="black"/>',
           f'<text x="{w / 2:.1f}" y="{h - 16}" text-anchor="middle" font-size="12">{xlabel}</text>',
           f'<text x="16" y="{h / 2:.1f}" text-anchor="middle" font-size="12" '
           f'transform="rotate(-90 16 {h / 2:.1f})">{ylabel}</text>',
           f'<text x="{m}" y="{h - m + 16}" font-size="10">{x_tick(x_lo)}</text>',
           f'<text x="{w - m}" y="{h - m + 16}" text-anchor="end" font-size="10">{x_tick(x_hi)}</text>',
           f'<text x="{m - 4}" y="{h - m}" text-anchor="end" font-size="10">{format_value(y_lo)}</text>',
           f'<text x="{m - 4}" y="{m + 10}" text-anchor="end" font-size="10">{format_value(y_hi)}</text>']
    for k, (label, pts) in enumerate(points.items()):
        color = SVG_COLORS[k % len(SVG_COLORS)]
        coords = ' '.join(f"{px(x):.2f},{py(y):.2f}" for x, y in pts)
        out.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{coords}"/>')
        out += [f'<circle cx="{px(x):.2f}" cy="{py(y):.2f}" r="2.5" fill="{color}"/>' for x, y in pts]
        out.append(f'<text x="{w - m - 4}" y="{m + 16 + 14 * k}" text-anchor="end" font-size="11" '
                   f'fill="{color}">{label}</text>')
    out.append('</svg>')
    with open(path, 'w') as outfile:
        outfile.write('\n'.join(out) + '\n')
    logger.info(f"Wrote plot to {path}")
