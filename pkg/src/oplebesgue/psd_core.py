"""Tolerance-aware Hermitian/PSD matrix kernel.

Spectral decompositions, square roots, pseudoinverses, range projections,
Loewner-order comparison and the trace functionals everything else is built
on.  All types are immutable after construction and all operations are pure,
so they are safe to share between threads.

The operators here are finite-dimensional stand-ins for positive trace-class
operators: the trace norm is the natural size measure and every rank decision
is made relative to the largest eigenvalue, never in absolute terms, so that
rescaling an operator can never change its computed rank.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatchError, ConsistencyError, ValidationError

# Absolute deviation allowed between A and A* (relative to the largest entry,
# floored at 1) before the input is rejected as non-Hermitian.
HERMITIAN_ATOL = 1e-12

# Invariant tolerance for spectral factorizations (reconstruction error and
# eigenvector orthonormality, both Frobenius).
SPECTRAL_TOL = 1e-10


@dataclass(frozen=True)
class ToleranceConfig:
    """Numerical policy knobs, exposed so callers can tighten every check.

    psd_tol      relative band below zero inside which eigenvalues are
                 treated as roundoff and clipped at construction
    rank_cutoff  relative eigenvalue threshold for numerical rank
    conv_tol     relative trace-norm stopping threshold for iterations
    max_iters    iteration budget for monotone approximation
    """

    psd_tol: float = 1e-10
    rank_cutoff: float = 1e-10
    conv_tol: float = 1e-9
    max_iters: int = 60

    def __post_init__(self):
        for name in ("psd_tol", "rank_cutoff", "conv_tol"):
            value = getattr(self, name)
            if not (isinstance(value, (int, float)) and value > 0 and math.isfinite(value)):
                raise ValidationError(f"{name} must be a finite positive scalar, got {value!r}")
        if not (isinstance(self.max_iters, int) and self.max_iters >= 1):
            raise ValidationError(f"max_iters must be an integer >= 1, got {self.max_iters!r}")


DEFAULT_CONFIG = ToleranceConfig()


def _frozen(array: np.ndarray) -> np.ndarray:
    array.setflags(write=False)
    return array


class HermitianMatrix:
    """A validated square complex matrix equal to its conjugate transpose.

    Real symmetric input is accepted as the zero-imaginary-part special case.
    The stored array is the Hermitian average (A + A*)/2 of the input and is
    read-only.
    """

    __slots__ = ("_array",)

    def __init__(self, entries):
        arr = np.asarray(entries, dtype=complex)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise ValidationError(f"expected a square matrix, got shape {arr.shape}")
        if arr.size and not (np.all(np.isfinite(arr.real)) and np.all(np.isfinite(arr.imag))):
            raise ValidationError("matrix entries must be finite")
        scale = max(float(np.abs(arr).max()) if arr.size else 0.0, 1.0)
        deviation = np.abs(arr - arr.conj().T)
        if arr.size and deviation.max() > HERMITIAN_ATOL * scale:
            i, j = np.unravel_index(int(np.argmax(deviation)), deviation.shape)
            raise ValidationError(
                f"matrix is not Hermitian: entries ({i},{j})={arr[i, j]:.6g} and "
                f"({j},{i})={arr[j, i]:.6g} differ beyond tolerance"
            )
        self._array = _frozen((arr + arr.conj().T) / 2)

    @property
    def array(self) -> np.ndarray:
        return self._array

    @property
    def dim(self) -> int:
        return self._array.shape[0]

    def __repr__(self):
        return f"{type(self).__name__}(dim={self.dim})"


@dataclass(frozen=True)
class SpectralDecomp:
    """Eigenvalues in nonincreasing order with orthonormal eigenvector columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        V = self.eigenvectors
        return (V * self.eigenvalues) @ V.conj().T


def eigh(matrix) -> SpectralDecomp:
    """Spectral decomposition of a Hermitian matrix, eigenvalues descending.

    The factorization invariants (reconstruction accuracy, orthonormality)
    are verified before the result is returned.
    """
    herm = matrix if isinstance(matrix, HermitianMatrix) else HermitianMatrix(matrix)
    arr = herm.array
    w, V = np.linalg.eigh(arr)
    w, V = w[::-1].copy(), V[:, ::-1].copy()
    decomp = SpectralDecomp(_frozen(w), _frozen(V))
    norm_a = max(1.0, float(np.linalg.norm(arr)))
    if float(np.linalg.norm(decomp.reconstruct() - arr)) > SPECTRAL_TOL * norm_a:
        raise ConsistencyError("spectral factorization failed to reconstruct its input")
    gram_err = float(np.linalg.norm(V.conj().T @ V - np.eye(herm.dim)))
    if gram_err > SPECTRAL_TOL:
        raise ConsistencyError("eigenvector system is not orthonormal")
    return decomp


class PsdMatrix(HermitianMatrix):
    """Hermitian matrix with all eigenvalues nonnegative up to tolerance.

    Eigenvalues in the roundoff band [-psd_tol * max(lambda_max, 1), 0) are
    clipped to zero at construction; anything more negative is a hard error.
    The clipped spectral form is cached and reused by every downstream
    operation (square roots, pseudoinverses, projections).
    """

    __slots__ = ("_spectrum",)

    def __init__(self, entries, cfg: ToleranceConfig = DEFAULT_CONFIG):
        super().__init__(entries)
        decomp = eigh(self)
        w = decomp.eigenvalues
        lam_max = float(w[0]) if w.size else 0.0
        band = cfg.psd_tol * max(lam_max, 1.0)
        lam_min = float(w[-1]) if w.size else 0.0
        if lam_min < -band:
            raise ValidationError(
                f"matrix is not positive semidefinite: eigenvalue {lam_min:.6g} "
                f"below tolerance band {-band:.6g}"
            )
        clipped = np.clip(w, 0.0, None)
        self._spectrum = SpectralDecomp(_frozen(clipped), decomp.eigenvectors)

    @property
    def spectrum(self) -> SpectralDecomp:
        return self._spectrum

    @property
    def eigenvalues(self) -> np.ndarray:
        return self._spectrum.eigenvalues

    @property
    def lam_max(self) -> float:
        w = self._spectrum.eigenvalues
        return float(w[0]) if w.size else 0.0

    def rank(self, cfg: ToleranceConfig = DEFAULT_CONFIG) -> int:
        """Numerical rank: eigenvalues above rank_cutoff * lambda_max."""
        w = self._spectrum.eigenvalues
        return int(np.sum(w > cfg.rank_cutoff * self.lam_max))


def _as_array(matrix) -> np.ndarray:
    if isinstance(matrix, HermitianMatrix):
        return matrix.array
    return np.asarray(matrix, dtype=complex)


def _as_psd(matrix, cfg: ToleranceConfig) -> PsdMatrix:
    if isinstance(matrix, PsdMatrix):
        return matrix
    return PsdMatrix(matrix, cfg)


def _require_same_dim(a: np.ndarray, b: np.ndarray):
    if a.shape != b.shape:
        raise DimensionMismatchError(f"dimension mismatch: {a.shape} vs {b.shape}")


def sqrt_psd(matrix, cfg: ToleranceConfig = DEFAULT_CONFIG) -> PsdMatrix:
    """Positive square root via the cached spectral form."""
    psd = _as_psd(matrix, cfg)
    decomp = psd.spectrum
    V = decomp.eigenvectors
    root = (V * np.sqrt(decomp.eigenvalues)) @ V.conj().T
    return PsdMatrix(root, cfg)


def pinv_psd(matrix, cfg: ToleranceConfig = DEFAULT_CONFIG) -> PsdMatrix:
    """Moore-Penrose pseudoinverse with eigenvalues below the rank cutoff zeroed."""
    psd = _as_psd(matrix, cfg)
    w = psd.eigenvalues
    cut = cfg.rank_cutoff * psd.lam_max
    keep = w > cut
    inv = np.where(keep, 1.0 / np.where(keep, w, 1.0), 0.0)
    V = psd.spectrum.eigenvectors
    return PsdMatrix((V * inv) @ V.conj().T, cfg)


def range_projection(matrix, cfg: ToleranceConfig = DEFAULT_CONFIG) -> PsdMatrix:
    """Orthogonal projection onto the numerical range (eigenvalues above cutoff)."""
    psd = _as_psd(matrix, cfg)
    k = psd.rank(cfg)
    V = psd.spectrum.eigenvectors[:, :k]
    return PsdMatrix(V @ V.conj().T, cfg)


def loewner_leq(a, b, cfg: ToleranceConfig = DEFAULT_CONFIG) -> bool:
    """Decide a <= b in the Loewner order.

    True iff the smallest eigenvalue of b - a stays above
    -psd_tol * max(1, lambda_max(b)).
    """
    arr_a, arr_b = _as_array(a), _as_array(b)
    _require_same_dim(arr_a, arr_b)
    if arr_a.size == 0:
        return True
    diff_min = float(np.linalg.eigvalsh(arr_b - arr_a)[0])
    lam_max_b = float(np.linalg.eigvalsh(arr_b)[-1])
    return diff_min >= -cfg.psd_tol * max(1.0, lam_max_b)


def trace(matrix) -> float:
    """Trace of a Hermitian matrix (real by construction)."""
    return float(np.trace(_as_array(matrix)).real)


def trace_norm(matrix) -> float:
    """Sum of singular values; equals the trace for PSD input."""
    arr = _as_array(matrix)
    if arr.size == 0:
        return 0.0
    if isinstance(matrix, HermitianMatrix):
        return float(np.abs(np.linalg.eigvalsh(arr)).sum())
    return float(np.linalg.svd(arr, compute_uv=False).sum())


def op_norm(matrix) -> float:
    """Largest singular value."""
    arr = _as_array(matrix)
    if arr.size == 0:
        return 0.0
    if isinstance(matrix, HermitianMatrix):
        return float(np.abs(np.linalg.eigvalsh(arr)).max())
    return float(np.linalg.svd(arr, compute_uv=False).max())


def hs_inner(a, b):
    """Hilbert-Schmidt pairing trace(b* a); conjugate-symmetric in (a, b)."""
    arr_a, arr_b = _as_array(a), _as_array(b)
    _require_same_dim(arr_a, arr_b)
    value = complex(np.vdot(arr_b, arr_a))
    if abs(value.imag) <= 1e-12 * max(1.0, abs(value)):
        return value.real
    return value


def joint_scale(a: "PsdMatrix", b: "PsdMatrix") -> float:
    """Shared magnitude reference for comparisons between two operators.

    Floored at 1 like the Loewner comparison band, so that roundoff ghosts of
    an exact zero (largest eigenvalue at noise level) do not acquire rank
    relative to themselves.
    """
    return max(a.lam_max, b.lam_max, 1.0)


def rank_above(psd: "PsdMatrix", cutoff: float) -> int:
    return int(np.sum(psd.eigenvalues > cutoff))


def projector_above(psd: "PsdMatrix", cutoff: float) -> np.ndarray:
    k = rank_above(psd, cutoff)
    V = psd.spectrum.eigenvectors[:, :k]
    return V @ V.conj().T


def range_contained(a, b, cfg: ToleranceConfig = DEFAULT_CONFIG) -> bool:
    """Is range(a) contained in range(b) at the configured rank tolerance?

    Ranks are taken against the pair's joint scale, so a part that is zero up
    to roundoff of the surrounding computation counts as zero.  Containment is
    measured by the largest principal-angle sine, op_norm((I - P_b) P_a);
    genuine inclusions sit at roundoff level while violations are O(1), so
    the threshold sqrt(rank_cutoff) separates them with orders of margin and
    tightens together with the rank policy.
    """
    psd_a, psd_b = _as_psd(a, cfg), _as_psd(b, cfg)
    _require_same_dim(psd_a.array, psd_b.array)
    cutoff = cfg.rank_cutoff * joint_scale(psd_a, psd_b)
    if rank_above(psd_a, cutoff) == 0:
        return True
    proj_a = projector_above(psd_a, cutoff)
    proj_b = projector_above(psd_b, cutoff)
    leak = (np.eye(psd_a.dim) - proj_b) @ proj_a
    return op_norm(leak) <= math.sqrt(cfg.rank_cutoff)


# --- JSON wire format -------------------------------------------------------
#
# {"dim": n, "real": [[...n x n...]], "imag": [[...]] (optional, default 0)}
# Row-major; ragged or non-square payloads are rejected.


def _grid(obj, name: str, dim: int) -> np.ndarray:
    if not isinstance(obj, list) or len(obj) != dim:
        raise ValidationError(f"'{name}' must be a list of {dim} rows")
    rows = []
    for row in obj:
        if not isinstance(row, list) or len(row) != dim:
            raise ValidationError(f"'{name}' must be a square {dim}x{dim} grid with no ragged rows")
        for value in row:
            if not isinstance(value, (int, float)) or isinstance(value, bool):
                raise ValidationError(f"'{name}' entries must be numbers")
        rows.append([float(v) for v in row])
    return np.array(rows, dtype=float)


def hermitian_from_json(obj) -> HermitianMatrix:
    """Parse the matrix wire format into a validated HermitianMatrix."""
    if not isinstance(obj, dict):
        raise ValidationError("matrix JSON must be an object")
    if "dim" not in obj or "real" not in obj:
        raise ValidationError("matrix JSON needs 'dim' and 'real' fields")
    dim = obj["dim"]
    if not isinstance(dim, int) or isinstance(dim, bool) or dim < 1:
        raise ValidationError(f"'dim' must be a positive integer, got {dim!r}")
    real = _grid(obj["real"], "real", dim)
    if obj.get("imag") is not None:
        imag = _grid(obj["imag"], "imag", dim)
        return HermitianMatrix(real + 1j * imag)
    return HermitianMatrix(real)


def psd_from_json(obj, cfg: ToleranceConfig = DEFAULT_CONFIG) -> PsdMatrix:
    return PsdMatrix(hermitian_from_json(obj).array, cfg)


def matrix_to_json(matrix) -> dict:
    arr = _as_array(matrix)
    out = {"dim": int(arr.shape[0]), "real": [[float(v) for v in row] for row in arr.real]}
    if np.any(arr.imag != 0.0):
        out["imag"] = [[float(v) for v in row] for row in arr.imag]
    return out
