"""Parallel sums of PSD matrices and the mutual-singularity test they induce.

The parallel sum S:T = S (S+T)^+ T is the operator harmonic mean: it is PSD,
below both arguments in the Loewner order, and vanishes exactly when the two
ranges intersect trivially -- which makes trace(S:T) a quantitative witness
for mutual singularity.  On commuting diagonals it reduces to the entrywise
scalar formula s*t/(s+t).
"""

from __future__ import annotations

from typing import Optional

import numpy as np

from .errors import ConsistencyError, DimensionMismatchError
from .psd_core import (
    DEFAULT_CONFIG,
    PsdMatrix,
    ToleranceConfig,
    joint_scale,
    projector_above,
    rank_above,
    trace,
)


def parallel_sum(s: PsdMatrix, t: PsdMatrix, cfg: ToleranceConfig = DEFAULT_CONFIG) -> PsdMatrix:
    """Parallel sum S:T = S (S+T)^+ T, realized through one spectral pass.

    On the common range this agrees with the variational harmonic mean of the
    two operators; the pseudoinverse cutoff comes from cfg.rank_cutoff.
    """
    if s.dim != t.dim:
        raise DimensionMismatchError(f"dimension mismatch: {s.dim} vs {t.dim}")
    total = PsdMatrix(s.array + t.array, cfg)
    w = total.eigenvalues
    keep = w > cfg.rank_cutoff * total.lam_max
    inv = np.where(keep, 1.0 / np.where(keep, w, 1.0), 0.0)
    V = total.spectrum.eigenvectors
    pseudo = (V * inv) @ V.conj().T
    product = s.array @ pseudo @ t.array
    return PsdMatrix((product + product.conj().T) / 2, cfg)


def is_singular_pair(s: PsdMatrix, t: PsdMatrix, cfg: ToleranceConfig = DEFAULT_CONFIG) -> bool:
    """Decide whether the only common positive minorant of s and t is zero.

    Primary criterion: trace(s:t) below conv_tol relative to the input traces.
    Cross-checked against dim(range s intersect range t) = 0 computed from the
    range projections (taken at the pair's joint scale, so roundoff ghosts of
    zero carry no rank); disagreement between the two raises ConsistencyError,
    signalling a tolerance misconfiguration rather than an answer.
    """
    mean = parallel_sum(s, t, cfg)
    trace_says = trace(mean) <= cfg.conv_tol * max(1.0, trace(s), trace(t))

    cutoff = cfg.rank_cutoff * joint_scale(s, t)
    proj_s = projector_above(s, cutoff)
    proj_t = projector_above(t, cutoff)
    rank_join = PsdMatrix(proj_s + proj_t, cfg).rank(cfg)
    intersection_dim = rank_above(s, cutoff) + rank_above(t, cutoff) - rank_join
    range_says = intersection_dim == 0

    if trace_says != range_says:
        raise ConsistencyError(
            "singularity criteria disagree: trace of parallel sum says "
            f"{trace_says}, range intersection of dimension {intersection_dim} says "
            f"{range_says}; tolerances are misconfigured for this pair",
            details={"parallel_sum_trace": trace(mean), "intersection_dim": intersection_dim},
        )
    return trace_says


def nonzero_common_minorant(
    s: PsdMatrix, t: PsdMatrix, cfg: ToleranceConfig = DEFAULT_CONFIG
) -> Optional[PsdMatrix]:
    """A witness R != 0 with R <= s and R <= t, or None when the pair is singular.

    The parallel sum itself is the witness: it is always a common minorant and
    is nonzero exactly on non-singular pairs.
    """
    if is_singular_pair(s, t, cfg):
        return None
    return parallel_sum(s, t, cfg)
