"""
Finite-difference Jacobians of vector-valued functions.
"""

import numpy as np


def central_difference_jacobian(func, x0, steps):
    """Jacobian by centered differences, column j = (f(x + h_j e_j) - f(x - h_j e_j)) / (2 h_j)

    Args:
        func: Callable mapping a 1-D array to a 1-D array
        x0: Point of evaluation
        steps: Step size per coordinate (scalar or array)

    Returns:
        (len(f(x0)), len(x0)) array
    """
    x0 = np.asarray(x0, dtype=float)
    steps = np.broadcast_to(np.asarray(steps, dtype=float), x0.shape)
    columns = []
    for j in range(x0.size):
        x = x0.copy()
        x[j] = x0[j] + steps[j]
        f_plus = np.asarray(func(x), dtype=float)
        x[j] = x0[j] - steps[j]
        f_minus = np.asarray(func(x), dtype=float)
        columns.append((f_plus - f_minus) / (2.0 * steps[j]))
    return np.column_stack(columns)


def forward_difference_jacobian(func, x0, steps):
    """Jacobian by forward differences, used to cross-check the centered version"""
    x0 = np.asarray(x0, dtype=float)
    steps = np.broadcast_to(np.asarray(steps, dtype=float), x0.shape)
    f0 = np.asarray(func(x0), dtype=float)
    columns = []
    for j in range(x0.size):
        x = x0.copy()
        x[j] = x0[j] + steps[j]
        columns.append((np.asarray(func(x), dtype=float) - f0) / steps[j])
    return np.column_stack(columns)
