"""Dense complex-matrix kernel.

Everything downstream works with plain ``numpy`` arrays of dtype
``complex128``.  This module provides the few primitives the rest of the
package relies on: adjoints, operator norms (largest singular value),
positivity tests, Hilbert-Schmidt geometry, least-squares membership in a
matrix span, and orthonormalization of (possibly redundant) spanning sets
with respect to an arbitrary inner product.

All tolerances are absolute, scaled by ``1 + norm`` wherever a residual is
compared, and every routine is pure.
"""

from __future__ import annotations

import os
from collections.abc import Callable, Sequence

import numpy as np

from .errors import InvalidMatrix, NotInSpan, ShapeMismatch

DEFAULT_TOL = 1e-9
# relative singular-value cutoff for pseudo-inverses of Gram matrices
GRAM_CUTOFF = 1e-12
# relative cutoff deciding the rank of a spanning set
RANK_CUTOFF = 1e-10
DEFAULT_SEED = 42


def default_rng(seed: int | None = None) -> np.random.Generator:
    """Seeded generator; ``ANGLES_SEED`` overrides the built-in default 42."""
    if seed is None:
        seed = int(os.environ.get("ANGLES_SEED", DEFAULT_SEED))
    return np.random.default_rng(seed)


def as_matrix(m) -> np.ndarray:
    """Validate and convert to a finite 2-D complex128 array."""
    a = np.asarray(m, dtype=np.complex128)
    if a.ndim != 2:
        raise ShapeMismatch(f"expected a 2-D matrix, got ndim={a.ndim}")
    if not np.all(np.isfinite(a)):
        raise InvalidMatrix("matrix has non-finite entries")
    return a


def adjoint(m: np.ndarray) -> np.ndarray:
    return np.conjugate(np.transpose(m))


def operator_norm(m) -> float:
    """Largest singular value, i.e. the C*-norm in a faithful representation."""
    a = as_matrix(m)
    if a.size == 0:
        return 0.0
    return float(np.linalg.svd(a, compute_uv=False)[0])


def frobenius_norm(m) -> float:
    return float(np.linalg.norm(np.asarray(m)))


def hs_inner(a: np.ndarray, b: np.ndarray) -> complex:
    """Hilbert-Schmidt inner product Tr(a* b), conjugate-linear in ``a``."""
    return complex(np.vdot(a, b))


def is_positive_semidefinite(m, tol: float = DEFAULT_TOL) -> bool:
    """True iff ``m`` is self-adjoint within ``tol`` and min eigenvalue >= -tol."""
    a = as_matrix(m)
    if a.shape[0] != a.shape[1]:
        raise ShapeMismatch(f"positivity needs a square matrix, got {a.shape}")
    if operator_norm(a - adjoint(a)) > tol:
        return False
    hermitized = (a + adjoint(a)) / 2.0
    smallest = float(np.linalg.eigvalsh(hermitized)[0])
    return smallest >= -tol


def gram_matrix(mats: Sequence[np.ndarray]) -> np.ndarray:
    """Hilbert-Schmidt Gram matrix of a family of same-shape matrices."""
    flat = np.stack([np.ravel(m) for m in mats])
    return np.conjugate(flat) @ flat.T


def coordinates_in_span(
    basis: Sequence[np.ndarray], target, tol: float = DEFAULT_TOL
) -> np.ndarray:
    """Least-squares coordinates of ``target`` over ``basis``.

    Solves the normal equations against the Hilbert-Schmidt Gram matrix,
    regularized by pseudo-inversion with a relative singular-value cutoff
    (the basis may be linearly dependent).  Raises :class:`NotInSpan` when
    the reconstruction residual exceeds ``tol * (1 + ||target||_F)``.
    """
    if len(basis) == 0:
        raise ShapeMismatch("empty basis")
    t = as_matrix(target)
    mats = [as_matrix(b) for b in basis]
    shape = mats[0].shape
    for b in mats:
        if b.shape != shape:
            raise ShapeMismatch(f"basis shapes differ: {b.shape} vs {shape}")
    if t.shape != shape:
        raise ShapeMismatch(f"target shape {t.shape} does not match basis {shape}")

    flat = np.stack([np.ravel(m) for m in mats])
    gram = np.conjugate(flat) @ flat.T
    rhs = np.conjugate(flat) @ np.ravel(t)
    coeffs = np.linalg.pinv(gram, rcond=GRAM_CUTOFF, hermitian=True) @ rhs

    residual = float(np.linalg.norm(coeffs @ flat - np.ravel(t)))
    bound = tol * (1.0 + float(np.linalg.norm(t)))
    if residual > bound:
        raise NotInSpan(residual, bound)
    return coeffs


def in_span(basis: Sequence[np.ndarray], target, tol: float = DEFAULT_TOL) -> bool:
    try:
        coordinates_in_span(basis, target, tol)
    except NotInSpan:
        return False
    return True


def orthonormalize(
    mats: Sequence[np.ndarray],
    inner: Callable[[np.ndarray, np.ndarray], complex] = hs_inner,
    cutoff: float = RANK_CUTOFF,
) -> list[np.ndarray]:
    """Orthonormal basis of span(mats) with respect to ``inner``.

    Modified Gram-Schmidt with one re-orthogonalization pass, processing the
    inputs in order; candidates whose residual norm falls below
    ``cutoff * (1 + original norm)`` are dropped, which is how the rank of a
    redundant spanning set is decided.  Inputs that are already orthonormal
    are returned unchanged (so a caller-chosen basis ordering survives).
    """
    basis: list[np.ndarray] = []
    for m in mats:
        v = np.array(m, dtype=np.complex128)
        scale = np.sqrt(abs(inner(v, v)))
        for _ in range(2):  # second pass for numerical stability
            for b in basis:
                v = v - inner(b, v) * b
        nrm = np.sqrt(abs(inner(v, v)))
        if nrm > cutoff * (1.0 + scale):
            basis.append(v / nrm)
    return basis


def max_operator_norm(mats, noise_floor: float = 1e-13) -> float:
    """Exact maximum of operator norms over a family of matrices.

    Screens with the Frobenius norm (an upper bound on the operator norm):
    scanning in descending Frobenius order, once the bound drops below the
    best exact value found, no remaining matrix can win.  Below
    ``noise_floor`` the Frobenius bound itself is returned, which is
    accurate enough for any tolerance this package uses.
    """
    ranked = sorted(
        ((float(np.linalg.norm(m)), m) for m in mats), key=lambda p: -p[0]
    )
    best = 0.0
    for frob, m in ranked:
        if frob <= best or frob < noise_floor:
            return max(best, min(frob, noise_floor))
        best = max(best, operator_norm(m))
    return best


def psd_sqrt(m) -> np.ndarray:
    """Square root of a positive-semidefinite self-adjoint matrix."""
    a = as_matrix(m)
    w, v = np.linalg.eigh((a + adjoint(a)) / 2.0)
    return (v * np.sqrt(np.clip(w, 0.0, None))) @ adjoint(v)


def random_matrix(n: int, rng: np.random.Generator, scale: float = 1.0) -> np.ndarray:
    """Random complex n-by-n matrix with independent Gaussian entries."""
    return scale * (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n)))


def random_unitary(n: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-ish random unitary via QR with the standard phase fix."""
    q, r = np.linalg.qr(random_matrix(n, rng))
    d = np.diagonal(r)
    return q * (d / np.abs(d))


def random_combination(
    basis: Sequence[np.ndarray], rng: np.random.Generator
) -> np.ndarray:
    coeffs = rng.standard_normal(len(basis)) + 1j * rng.standard_normal(len(basis))
    return sum(c * b for c, b in zip(coeffs, basis))
