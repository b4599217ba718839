"""Univariate slice sampling with stepping-out and shrinkage (Neal, 2003)."""
from __future__ import annotations

import math


def slice_sample_1d(x0: float, logf, gen, width: float = 1.0, max_steps: int = 50, logf_x0: float | None = None):
    """One slice-sampling update of a scalar.

    Args:
        x0: Current state; ``logf(x0)`` must be finite.
        logf: Unnormalised log-density, may return ``-inf``.
        gen: ``numpy.random.Generator``.
        width: Initial bracket width.
        max_steps: Cap on the total number of stepping-out expansions.
        logf_x0: ``logf(x0)`` if already known.

    Returns:
        ``(x1, logf(x1))``.
    """
    fx0 = logf(x0) if logf_x0 is None else logf_x0
    if not math.isfinite(fx0):
        raise ValueError("slice sampler started at a point of zero density")
    level = fx0 + math.log(gen.random())

    left = x0 - width * gen.random()
    right = left + width
    j = int(max_steps * gen.random())
    k = max_steps - 1 - j
    while j > 0 and logf(left) > level:
        left -= width
        j -= 1
    while k > 0 and logf(right) > level:
        right += width
        k -= 1

    while True:
        x1 = left + (right - left) * gen.random()
        fx1 = logf(x1)
        if fx1 > level:
            return x1, fx1
        if x1 < x0:
            left = x1
        elif x1 > x0:
            right = x1
        else:
            # interval collapsed onto x0, which always lies in the slice
            return x0, fx0
