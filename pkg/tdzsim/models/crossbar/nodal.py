"""
Nodal analysis of the crossbar.

Nodes are the row lines 0..rows-1 followed by the column lines.  The selected row is driven at
1 V and the selected column is held at 0 V, each through the MUX on-resistance; the current
flowing into the 0 V side is the sensed current and Z = 1 V / I.  Unselected lines float, are
grounded or are driven to 1 V depending on the termination policy.
"""

import logging

import numpy as np
from scipy import linalg
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from tdzsim.models.common.exceptions import ConfigurationError, NumericalSingularityError
from tdzsim.models.crossbar.grid import TerminationPolicy

logger = logging.getLogger('tdzsim')

RESIDUAL_TOL = 1e-9
DRIVE_SIDES = ('row', 'col')


def line_name(node, rows):
    return f"row {node}" if node < rows else f"col {node - rows}"


def admittance_matrix(grid, f):
    """ Nodal admittance (Laplacian) of the elements plus the line capacitances to ground """
    rows, cols = grid.shape
    y = grid.admittance(f)
    n = rows + cols
    Y = np.zeros((n, n), dtype=complex)
    Y[:rows, rows:] = -y
    Y[rows:, :rows] = -y.T
    Y[np.arange(rows), np.arange(rows)] = y.sum(axis=1)
    Y[np.arange(rows, n), np.arange(rows, n)] = y.sum(axis=0)
    if grid.line_cap > 0:
        Y[np.arange(n), np.arange(n)] += 2j * np.pi * f * grid.line_cap
    return Y


def _check_isolation(Y, unknown, anchored):
    """ Raise if some unknown node has no admittance path to a fixed potential or a shunt """
    n = Y.shape[0]
    # node n is the reference: joined to every fixed node and to every node with a shunt to ground
    links = (np.abs(Y) > 0) & ~np.eye(n, dtype=bool)
    adjacency = np.zeros((n + 1, n + 1), dtype=bool)
    adjacency[:n, :n] = links
    adjacency[anchored, n] = True
    adjacency[n, anchored] = True
    _, labels = connected_components(csr_matrix(adjacency), directed=False)
    for node in unknown:
        if labels[node] != labels[n]:
            return node
    return None


def equivalent_impedance(grid, sel_row, sel_col, policy=TerminationPolicy.FLOATING, f=125e3, drive='row'):
    """ Impedance seen between the selected row and column lines.

    Args:
        grid: the SensorGrid.
        sel_row, sel_col: indices of the selected element.
        policy: TerminationPolicy of the unselected lines.
        f: excitation frequency [Hz].
        drive: 'row' drives the row and senses at the column; 'col' swaps the two.

    Returns:
        complex impedance [Ohm], inf when no current reaches the sense node.
    """
    rows, cols = grid.shape
    if not (0 <= sel_row < rows and 0 <= sel_col < cols):
        raise ConfigurationError(f"Selected element ({sel_row}, {sel_col}) is outside the {rows}x{cols} grid")
    if drive not in DRIVE_SIDES:
        raise ConfigurationError(f"drive must be one of {DRIVE_SIDES}, got {drive}")
    policy = TerminationPolicy.from_name(policy)
    n = rows + cols
    a, b = sel_row, rows + sel_col
    if drive == 'col':
        a, b = b, a

    Y = admittance_matrix(grid, f)
    shunt = np.zeros(n, dtype=complex)
    source = np.zeros(n, dtype=complex)
    fixed = {}
    if grid.mux_r_on > 0:
        g_on = 1.0 / grid.mux_r_on
        shunt[[a, b]] += g_on
        source[a] = g_on
    else:
        fixed[a], fixed[b] = 1.0, 0.0
    for node in range(n):
        if node in (a, b) or policy == TerminationPolicy.FLOATING:
            continue
        fixed[node] = 1.0 if policy == TerminationPolicy.DRIVEN_GUARD else 0.0

    Y[np.arange(n), np.arange(n)] += shunt
    unknown = [node for node in range(n) if node not in fixed]
    if grid.line_cap > 0 and f > 0:
        anchored = list(range(n))
    else:
        anchored = sorted(set(fixed) | set(np.flatnonzero(shunt != 0).tolist()))
    isolated = _check_isolation(Y, unknown, anchored)
    if isolated is not None:
        raise NumericalSingularityError(line_name(isolated, rows))

    v = np.zeros(n, dtype=complex)
    fixed_nodes = sorted(fixed)
    v[fixed_nodes] = [fixed[node] for node in fixed_nodes]
    if unknown:
        A = Y[np.ix_(unknown, unknown)]
        rhs = source[unknown] - Y[np.ix_(unknown, fixed_nodes)] @ v[fixed_nodes]
        try:
            v_u = linalg.solve(A, rhs)
        except linalg.LinAlgError:
            raise NumericalSingularityError(line_name(unknown[0], rows), "Nodal system is singular")
        residual = np.linalg.norm(A @ v_u - rhs)
        if residual > RESIDUAL_TOL * max(np.linalg.norm(rhs), np.finfo(float).tiny):
            raise NumericalSingularityError(line_name(unknown[0], rows),
                                            f"Nodal solve residual {residual:.3g} exceeds tolerance")
        v[unknown] = v_u

    if grid.mux_r_on > 0:
        i_sense = v[b] / grid.mux_r_on
    else:
        # current delivered into the held sense line by its elements
        i_sense = -(Y[b] @ v - Y[b, b] * v[b])
    if i_sense == 0:
        return complex(np.inf)
    return complex(1.0 / i_sense)


def _fast_floating(grid, f):
    """ All pairwise impedances of a floating, capacitance-free network from one inverse.

    With no path to ground except through the selected lines, the impedance between lines a and b
    is M_aa + M_bb - 2 M_ab for the inverse M of the Laplacian grounded at any node, in series with
    the two MUX switches.
    """
    rows, cols = grid.shape
    Y = admittance_matrix(grid, f)
    n = rows + cols
    n_comp, _ = connected_components(csr_matrix(np.abs(Y) > 0), directed=False)
    if n_comp > 1:
        return None
    A = Y[1:, 1:]
    # column k injects 1 A at node k + 1
    eye = np.eye(n - 1)
    try:
        inverse = linalg.solve(A, eye)
    except linalg.LinAlgError:
        raise NumericalSingularityError(line_name(1, rows), "Nodal system is singular")
    # backward error of each column, independent of the conductance scale
    scale = np.linalg.norm(A, ord=np.inf) * np.linalg.norm(inverse, ord=np.inf, axis=0)
    residual = np.linalg.norm(A @ inverse - eye, ord=np.inf, axis=0) / scale
    worst = int(np.argmax(residual))
    if not residual[worst] <= RESIDUAL_TOL:
        raise NumericalSingularityError(line_name(worst + 1, rows),
                                        f"Nodal solve residual {residual[worst]:.3g} exceeds tolerance")
    M = np.zeros((n, n), dtype=complex)
    M[1:, 1:] = inverse
    d = np.diag(M)
    z = d[:rows, None] + d[None, rows:] - 2 * M[:rows, rows:]
    return z + 2 * grid.mux_r_on


def equivalent_impedance_matrix(grid, policy=TerminationPolicy.FLOATING, f=125e3):
    """ equivalent_impedance for every element of the grid """
    policy = TerminationPolicy.from_name(policy)
    if policy == TerminationPolicy.FLOATING and grid.line_cap == 0:
        z = _fast_floating(grid, f)
        if z is not None:
            return z
    rows, cols = grid.shape
    z = np.empty((rows, cols), dtype=complex)
    for i in range(rows):
        for j in range(cols):
            z[i, j] = equivalent_impedance(grid, i, j, policy, f)
    return z
