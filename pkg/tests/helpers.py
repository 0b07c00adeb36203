"""Small shared pieces for the test suite."""

import numpy as np


def trig_design_matrix(phi: np.ndarray, order: int) -> np.ndarray:
    """Columns [1, cos(phi), sin(phi), ..., cos(M phi), sin(M phi)]."""
    cols = [np.ones_like(phi)]
    for ell in range(1, order + 1):
        cols.append(np.cos(ell * phi))
        cols.append(np.sin(ell * phi))
    return np.stack(cols, axis=1)


def coeffs_from_lstsq(samples: np.ndarray, order: int) -> np.ndarray:
    """Dense normal-equations fit, returned in [a_{-M}, ..., a_M] layout."""
    phi = 2.0 * np.pi * np.arange(samples.shape[0]) / samples.shape[0]
    design = trig_design_matrix(phi, order)
    sol, *_ = np.linalg.lstsq(design, samples, rcond=None)
    out = np.empty(2 * order + 1)
    out[order] = sol[0]
    for ell in range(1, order + 1):
        out[order + ell] = sol[2 * ell - 1]
        out[order - ell] = sol[2 * ell]
    return out


def edge_counts(triangles) -> dict:
    """How many triangles share each undirected edge."""
    counts = {}
    for tri in triangles:
        for a, b in ((tri[0], tri[1]), (tri[1], tri[2]), (tri[2], tri[0])):
            key = (min(a, b), max(a, b))
            counts[key] = counts.get(key, 0) + 1
    return counts
