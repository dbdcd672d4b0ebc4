"""The functional layer: trace pairings against a representing operator.

A normal functional is stored intensionally, by the positive trace-class
operator representing it through A -> trace(A T), never as a closure.  Order,
decomposition and uniqueness questions then reduce to operator computations
on the representatives, which is exactly the reduction the trace pairing
licenses: T -> f_T is an order isomorphism onto the normal positive
functionals, and it carries Lebesgue decompositions both ways.

``kvn_sup_estimate`` evaluates the smallest-positive-extension supremum
  sup { |f(X* A)|^2 : A finite rank, f(A* A) <= 1 }
on a concrete maximizing family built from the spectral projections of the
representing operator, rather than by generic optimization: the projections
commute with the operator, which makes the estimates exactly nondecreasing
in the rank and equal to f(X* X) at full rank.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np

from .diagonal import (
    L1Sequence,
    RatioCertificate,
    diag_decompose,
    diag_is_dominated,
    diag_uniqueness,
    sequence_from_json,
    sequence_to_json,
    truncate_to_matrix,
)
from .errors import DimensionMismatchError, ConsistencyError, ValidationError
from .lebesgue import UniquenessCertificate, decompose, uniqueness_certificate
from .psd_core import (
    DEFAULT_CONFIG,
    HermitianMatrix,
    PsdMatrix,
    ToleranceConfig,
    loewner_leq,
    matrix_to_json,
    psd_from_json,
    trace,
)

# Truncation at which sequence-represented functionals are probed against
# matrix panels when no explicit dimension is supplied.
PROBE_DIM = 32

# Size of the seeded random panel on which functional decompositions verify
# their pointwise additivity before being returned.
ADDITIVITY_PANEL = 50
ADDITIVITY_RTOL = 1e-9


@dataclass(frozen=True)
class NormalFunctional:
    """Positive functional A -> trace(A T), stored via its representative T."""

    rep: Union[PsdMatrix, L1Sequence]
    label: Optional[str] = None

    @property
    def kind(self) -> str:
        return "matrix" if isinstance(self.rep, PsdMatrix) else "sequence"

    def rep_matrix(self, dim: Optional[int] = None, cfg: ToleranceConfig = DEFAULT_CONFIG) -> PsdMatrix:
        """The representing operator as a matrix, truncating sequence reps."""
        if isinstance(self.rep, PsdMatrix):
            if dim is not None and self.rep.dim != dim:
                raise DimensionMismatchError(
                    f"functional acts on dimension {self.rep.dim}, argument has {dim}"
                )
            return self.rep
        return truncate_to_matrix(self.rep, dim if dim is not None else PROBE_DIM, cfg)


def _argument(a) -> HermitianMatrix:
    return a if isinstance(a, HermitianMatrix) else HermitianMatrix(a)


def evaluate(f: NormalFunctional, a, cfg: ToleranceConfig = DEFAULT_CONFIG) -> float:
    """f(A) = trace(A T).  Sequence representatives act through truncation."""
    arg = _argument(a)
    rep = f.rep_matrix(arg.dim, cfg)
    return float(np.trace(arg.array @ rep.array).real)


def functional_leq(f: NormalFunctional, g: NormalFunctional, cfg: ToleranceConfig = DEFAULT_CONFIG) -> bool:
    """Order between functionals, decided on the representing operators."""
    if f.kind != g.kind:
        raise ValidationError(f"cannot order a {f.kind} functional against a {g.kind} one")
    if f.kind == "matrix":
        return loewner_leq(f.rep, g.rep, cfg)
    c = diag_is_dominated(f.rep, g.rep)
    return c is not None and c <= 1.0 + cfg.psd_tol


def functional_lebesgue(
    g: NormalFunctional,
    f: NormalFunctional,
    cfg: ToleranceConfig = DEFAULT_CONFIG,
    panel_seed: int = 0,
) -> Tuple[NormalFunctional, NormalFunctional]:
    """Split g into its f-regular and f-singular parts.

    The split happens on the representatives; before returning, pointwise
    additivity g = g_r + g_s is verified on a seeded panel of random Hermitian
    arguments.
    """
    if f.kind != g.kind:
        raise ValidationError(f"cannot decompose a {g.kind} functional against a {f.kind} one")
    base = g.label or "g"
    if g.kind == "matrix":
        dec = decompose(g.rep, f.rep, cfg)
        regular = NormalFunctional(dec.ac, label=f"{base}_r")
        singular = NormalFunctional(dec.sing, label=f"{base}_s")
    else:
        ac, sing = diag_decompose(g.rep, f.rep)
        regular = NormalFunctional(ac, label=f"{base}_r")
        singular = NormalFunctional(sing, label=f"{base}_s")
    _verify_additivity(g, regular, singular, cfg, panel_seed)
    return regular, singular


def _verify_additivity(g, regular, singular, cfg, seed):
    dim = g.rep.dim if g.kind == "matrix" else PROBE_DIM
    rng = np.random.default_rng(seed)
    for _ in range(ADDITIVITY_PANEL):
        raw = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
        probe = HermitianMatrix((raw + raw.conj().T) / 2)
        total = evaluate(g, probe, cfg)
        split = evaluate(regular, probe, cfg) + evaluate(singular, probe, cfg)
        if abs(total - split) > ADDITIVITY_RTOL * max(1.0, abs(total)):
            raise ConsistencyError(
                f"functional split is not additive on the verification panel "
                f"({total} vs {split})"
            )


def regular_part_approximants(
    g: NormalFunctional, f: NormalFunctional, cfg: ToleranceConfig = DEFAULT_CONFIG
) -> List[NormalFunctional]:
    """The monotone sequence of f-dominated functionals climbing to the regular part.

    Certifies almost domination constructively rather than by a boolean: each
    returned functional is represented by one monotone approximant of the
    operator iteration, so it is dominated by a multiple of f and the sequence
    increases pointwise to the regular part of g.
    """
    if f.kind != "matrix" or g.kind != "matrix":
        raise ValidationError("approximant certificates are matrix-level objects")
    record = decompose(g.rep, f.rep, cfg).trace_of_iteration
    base = g.label or "g"
    return [
        NormalFunctional(step.approximant, label=f"{base}_r[{step.k}]")
        for step in record.steps
    ]


def functional_uniqueness(
    g: NormalFunctional, f: NormalFunctional, cfg: ToleranceConfig = DEFAULT_CONFIG
) -> UniquenessCertificate:
    """Uniqueness of the decomposition of g relative to f, on representatives."""
    if f.kind != g.kind:
        raise ValidationError(f"cannot compare a {g.kind} functional against a {f.kind} one")
    if g.kind == "matrix":
        return uniqueness_certificate(g.rep, f.rep, cfg)
    unique, certificate = diag_uniqueness(g.rep, f.rep)
    if unique:
        return UniquenessCertificate(unique=True, c=certificate.c)
    return UniquenessCertificate(
        unique=False,
        c=math.inf,
        witness=_describe_unbounded(certificate),
    )


def _describe_unbounded(certificate: RatioCertificate) -> str:
    samples = certificate.witness_ladder((10, 1e3, 1e6))
    rendered = ", ".join(f"ratio >= {b:g} at index {n}" for b, n in samples)
    return f"entrywise ratios against the reference are unbounded ({rendered})"


def kvn_sup_estimate(
    f: NormalFunctional,
    x,
    rank_schedule: Sequence[int],
    cfg: ToleranceConfig = DEFAULT_CONFIG,
) -> List[float]:
    """Ascent of the smallest-positive-extension supremum along spectral ranks.

    For each rank k the maximizing family member is A_k = X P_k / sqrt(f(P_k
    X* X P_k)) with P_k the projection onto the top-k eigenvectors of the
    representing operator; the list of values |f(X* A_k)|^2 is nondecreasing
    and reaches f(X* X) at full rank.  Ranks whose normalizer vanishes
    contribute zero (their numerator vanishes with them).
    """
    arg = _argument(x)
    rep = f.rep_matrix(arg.dim, cfg)
    if trace(rep) <= 0.0:
        raise ValidationError("the zero functional admits no normalized maximizing family")
    gram = arg.array.conj().T @ arg.array
    vectors = rep.spectrum.eigenvectors
    out: List[float] = []
    for rank in rank_schedule:
        if not (isinstance(rank, int) and 1 <= rank <= rep.dim):
            raise ValidationError(f"rank schedule entries must lie in 1..{rep.dim}, got {rank!r}")
        basis = vectors[:, :rank]
        projector = basis @ basis.conj().T
        numerator = complex(np.trace(gram @ projector @ rep.array))
        denominator = float(np.trace(projector @ gram @ projector @ rep.array).real)
        out.append(0.0 if denominator <= 0.0 else abs(numerator) ** 2 / denominator)
    return out


def normality_gap(f: NormalFunctional, cfg: ToleranceConfig = DEFAULT_CONFIG) -> float:
    """f(I) minus the full-rank supremum estimate at X = I.

    Nonpositive up to roundoff for every representable functional: every
    trace-pairing functional attains its extension supremum.
    """
    if f.kind != "matrix":
        raise ValidationError("normality gap is defined for matrix-represented functionals")
    dim = f.rep.dim
    identity = HermitianMatrix(np.eye(dim))
    estimate = kvn_sup_estimate(f, identity, [dim], cfg)[-1]
    return evaluate(f, identity, cfg) - estimate


# --- JSON wire format -------------------------------------------------------
#
# {"kind": "matrix" | "sequence", "rep": <matrix or sequence JSON>, "label": ...}


def functional_from_json(obj, cfg: ToleranceConfig = DEFAULT_CONFIG) -> NormalFunctional:
    if not isinstance(obj, dict):
        raise ValidationError("functional JSON must be an object")
    kind = obj.get("kind")
    if kind not in ("matrix", "sequence"):
        raise ValidationError("functional JSON needs kind 'matrix' or 'sequence'")
    if "rep" not in obj:
        raise ValidationError("functional JSON needs a 'rep' field")
    label = obj.get("label")
    if label is not None and not isinstance(label, str):
        raise ValidationError("'label' must be a string when present")
    if kind == "matrix":
        return NormalFunctional(psd_from_json(obj["rep"], cfg), label=label)
    return NormalFunctional(sequence_from_json(obj["rep"]), label=label)


def functional_to_json(f: NormalFunctional) -> dict:
    rep = matrix_to_json(f.rep) if f.kind == "matrix" else sequence_to_json(f.rep)
    return {"kind": f.kind, "rep": rep, "label": f.label}
