"""Adaptive Gauss-Kronrod panel quadrature shared by the numerical kernels.

The driver bisects panels until every integrand in a batch meets its
tolerance, with a hard per-integrand evaluation budget. Batches share the
panel set, which is what makes density-matrix assembly affordable: the
integrands differ only through a scalar parameter, so refinement work is
amortized across the whole batch.
"""

from __future__ import annotations

import heapq

import numpy as np

from .errors import AccuracyError

# 15-point Kronrod nodes/weights with the embedded 7-point Gauss rule
# (QUADPACK dqk15 constants).
_XGK = np.array(
    [
        -0.991455371120813,
        -0.949107912342759,
        -0.864864423359769,
        -0.741531185599394,
        -0.586087235467691,
        -0.405845151377397,
        -0.207784955007898,
        0.0,
        0.207784955007898,
        0.405845151377397,
        0.586087235467691,
        0.741531185599394,
        0.864864423359769,
        0.949107912342759,
        0.991455371120813,
    ]
)
_WGK = np.array(
    [
        0.022935322010529,
        0.063092092629979,
        0.104790010322250,
        0.140653259715525,
        0.169004726639267,
        0.190350578064785,
        0.204432940075298,
        0.209482141084728,
        0.204432940075298,
        0.190350578064785,
        0.169004726639267,
        0.140653259715525,
        0.104790010322250,
        0.063092092629979,
        0.022935322010529,
    ]
)
# 7-point Gauss weights sit on the odd Kronrod nodes.
_WG = np.zeros(15)
_WG[1::2] = [
    0.129484966168870,
    0.279705391489277,
    0.381830050505119,
    0.417959183673469,
    0.381830050505119,
    0.279705391489277,
    0.129484966168870,
]

N_PANEL = 15


def _eval_panel(f, a, b):
    """Integrate one panel for every integrand; returns (values, errors)."""
    half = 0.5 * (b - a)
    nodes = 0.5 * (a + b) + half * _XGK
    vals = np.atleast_2d(f(nodes))
    i15 = half * (vals @ _WGK)
    i7 = half * (vals @ _WG)
    # QUADPACK-style error sharpening is overkill here; |K15-G7| is already
    # conservative for the smooth integrands we feed in.
    err = np.abs(i15 - i7)
    return i15, err


def adaptive_panels(
    f,
    a,
    b,
    *,
    abs_tol,
    rel_tol=1e-12,
    budget=10_000,
    breakpoints=(),
    label="integrand",
):
    """Integrate ``f`` over [a, b] adaptively with shared panels.

    Parameters
    ----------
    f : callable
        Maps a node array of shape (k,) to values of shape (n, k) (or (k,)
        for a single integrand). Values may be complex.
    abs_tol : float or (n,) array
        Per-integrand absolute tolerance.
    rel_tol : float
        Relative tolerance, combined as ``tol = max(abs_tol, rel_tol*|I|)``.
    budget : int
        Max integrand evaluations per batch element before AccuracyError.
    breakpoints : sequence of float
        Interior seed points (singularities, scale changes).

    Returns
    -------
    (n,) array of integrals (squeezed to scalar for a single integrand fed
    as a 1-d function).
    """
    pts = np.unique(np.concatenate(([a, b], np.asarray(breakpoints, dtype=float))))
    pts = pts[(pts >= a) & (pts <= b)]
    if pts[0] != a or pts[-1] != b:
        raise ValueError("breakpoints must lie inside [a, b]")

    panels = []  # list of [a, b, vals, errs]
    for lo, hi in zip(pts[:-1], pts[1:]):
        vals, errs = _eval_panel(f, lo, hi)
        panels.append([lo, hi, vals, errs])
    n = panels[0][2].shape[0]
    abs_tol = np.broadcast_to(np.asarray(abs_tol, dtype=float), (n,)).copy()

    max_panels = max(len(panels) + 1, budget // N_PANEL)
    while True:
        total = np.sum([p[2] for p in panels], axis=0)
        err = np.sum([p[3] for p in panels], axis=0)
        tol = np.maximum(abs_tol, rel_tol * np.abs(total))
        bad = err > tol
        if not np.any(bad):
            break
        if len(panels) >= max_panels:
            worst = int(np.argmax(err / tol))
            raise AccuracyError(
                f"adaptive quadrature for {label} exhausted its "
                f"{budget}-evaluation budget (err={err[worst]:.3e}, "
                f"tol={tol[worst]:.3e})"
            )
        # Refine the panels that dominate the error of unconverged integrands.
        scores = [np.max(p[3][bad] / tol[bad]) for p in panels]
        top = max(scores)
        eligible = [i for i, sc in enumerate(scores) if sc > 0.05 * top]
        order = heapq.nlargest(
            max(1, min(len(eligible), len(panels) // 4 + 1,
                       max_panels - len(panels))),
            eligible,
            key=lambda i: scores[i],
        )
        for idx in sorted(order, reverse=True):
            lo, hi, _, _ = panels.pop(idx)
            mid = 0.5 * (lo + hi)
            v1, e1 = _eval_panel(f, lo, mid)
            v2, e2 = _eval_panel(f, mid, hi)
            panels.append([lo, mid, v1, e1])
            panels.append([mid, hi, v2, e2])

    return np.sum([p[2] for p in panels], axis=0)
