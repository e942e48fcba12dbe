"""Dense complex linear algebra primitives for small Hilbert spaces.

Everything here operates on plain complex numpy arrays.  Matrices are
dense, row-major, and small (soft cap 64x64), so LAPACK via numpy is more
than adequate; what this module adds on top is a deterministic treatment
of degenerate eigenspaces and spectral definitions of matrix functions
with an explicit 0*log(0) == 0 convention.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "LinalgError",
    "SupportError",
    "EigenSystem",
    "hermitian_eigendecompose",
    "tensor_product",
    "partial_trace",
    "unitary_from_hamiltonian",
    "commutator_norm",
    "relative_entropy",
    "von_neumann_entropy",
]

#: Relative width (w.r.t. spectral range) within which eigenvalues are
#: treated as one degenerate cluster.
DEGENERACY_RTOL = 1e-9

#: Residual bound for the eigendecomposition contract,
#: ||V L V^dag - M||_max <= RESIDUAL_RTOL * ||M||_max.
RESIDUAL_RTOL = 1e-11


class LinalgError(ValueError):
    """Invalid input to a linear-algebra operation."""


class SupportError(LinalgError):
    """First argument of a relative entropy has weight outside the
    support of the second."""


def _as_square(m: np.ndarray, name: str = "matrix") -> np.ndarray:
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise LinalgError(f"{name} must be square, got shape {m.shape}")
    return m


def _check_hermitian(m: np.ndarray, tol: float, name: str = "matrix") -> None:
    scale = max(np.abs(m).max(), 1.0)
    dev = np.abs(m - m.conj().T).max()
    if dev > tol * scale:
        raise LinalgError(f"{name} is not Hermitian (deviation {dev:.3e})")


@dataclass(frozen=True)
class EigenSystem:
    """Spectral decomposition of a Hermitian matrix.

    ``values`` are real and sorted descending; column ``k`` of ``vectors``
    is the orthonormal eigenvector paired with ``values[k]``.
    """

    values: np.ndarray
    vectors: np.ndarray

    @property
    def dim(self) -> int:
        return self.values.shape[0]

    def reconstruct(self) -> np.ndarray:
        return (self.vectors * self.values) @ self.vectors.conj().T


def _fix_phases(vectors: np.ndarray) -> np.ndarray:
    """Make the first nonzero component of each column real positive."""
    out = vectors.copy()
    for k in range(out.shape[1]):
        col = out[:, k]
        idx = np.flatnonzero(np.abs(col) > 1e-12)
        j = idx[0] if idx.size else int(np.argmax(np.abs(col)))
        z = col[j]
        if np.abs(z) > 0:
            out[:, k] = col * (z.conjugate() / np.abs(z))
    return out


def hermitian_eigendecompose(
    m: np.ndarray,
    tiebreak: np.ndarray | None = None,
    hermiticity_tol: float = 1e-10,
) -> EigenSystem:
    """Eigendecompose a Hermitian matrix deterministically.

    Eigenvalues equal within ``DEGENERACY_RTOL`` times the spectral range
    form one cluster.  Inside each cluster the basis is rotated to
    diagonalize the projection of ``tiebreak``, ordered by ascending
    tiebreak expectation; without a tiebreak, only the column phases are
    fixed.  The result is a pure function of the input bits.
    """
    m = _as_square(m)
    _check_hermitian(m, hermiticity_tol)
    if tiebreak is not None:
        tiebreak = _as_square(tiebreak, "tiebreak")
        if tiebreak.shape != m.shape:
            raise LinalgError("tiebreak dimension mismatch")
        _check_hermitian(tiebreak, hermiticity_tol, "tiebreak")

    try:
        w, v = np.linalg.eigh(m)
    except np.linalg.LinAlgError as exc:  # iteration cap exceeded
        raise LinalgError(f"eigendecomposition failed to converge: {exc}")

    # eigh returns ascending order; the contract is descending.
    w = w[::-1].copy()
    v = v[:, ::-1].copy()

    span = max(w[0] - w[-1], 0.0)
    gap = DEGENERACY_RTOL * max(span, 1e-300)
    start = 0
    for stop in range(1, len(w) + 1):
        if stop < len(w) and w[start] - w[stop] <= gap:
            continue
        if stop - start > 1 and tiebreak is not None:
            blk = v[:, start:stop]
            t = blk.conj().T @ tiebreak @ blk
            _, r = np.linalg.eigh((t + t.conj().T) / 2.0)
            v[:, start:stop] = blk @ r  # eigh order: tiebreak expectation ascends
        start = stop

    v = _fix_phases(v)

    scale = max(np.abs(m).max(), 1e-300)
    resid = np.abs((v * w) @ v.conj().T - m).max()
    if resid > RESIDUAL_RTOL * scale:
        raise LinalgError(f"eigendecomposition residual too large: {resid:.3e}")
    return EigenSystem(values=w, vectors=v)


def tensor_product(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Kronecker product with the first factor index-major."""
    return np.kron(np.asarray(a, dtype=complex), np.asarray(b, dtype=complex))


def partial_trace(m: np.ndarray, dim_a: int, dim_b: int, keep: str) -> np.ndarray:
    """Trace out one subsystem of an operator on a ``dim_a * dim_b`` space.

    ``keep`` is ``"A"`` or ``"B"``; the trace of the result equals the
    trace of the input.
    """
    m = _as_square(m)
    if m.shape[0] != dim_a * dim_b:
        raise LinalgError(
            f"dimension mismatch: {m.shape[0]} != {dim_a}*{dim_b}"
        )
    t = m.reshape(dim_a, dim_b, dim_a, dim_b)
    if keep == "A":
        return np.einsum("ikjk->ij", t)
    if keep == "B":
        return np.einsum("kikj->ij", t)
    raise LinalgError(f"keep must be 'A' or 'B', got {keep!r}")


def unitary_from_hamiltonian(h: np.ndarray, t: float) -> np.ndarray:
    """exp(-i*t*H) computed spectrally for Hermitian H."""
    eig = hermitian_eigendecompose(h)
    phases = np.exp(-1j * t * eig.values)
    return (eig.vectors * phases) @ eig.vectors.conj().T


def commutator_norm(a: np.ndarray, b: np.ndarray) -> float:
    """Max-entry magnitude of the commutator AB - BA."""
    a = _as_square(a, "a")
    b = _as_square(b, "b")
    if a.shape != b.shape:
        raise LinalgError("commutator of matrices with different dimensions")
    return float(np.abs(a @ b - b @ a).max())


def von_neumann_entropy(rho: np.ndarray, zero_tol: float = 1e-14) -> float:
    """-tr[rho ln rho] with 0*ln(0) == 0."""
    eig = hermitian_eigendecompose(rho)
    p = np.clip(eig.values, 0.0, None)
    mask = p > zero_tol
    return float(-np.sum(p[mask] * np.log(p[mask])))


def relative_entropy(
    rho: np.ndarray,
    sigma: np.ndarray,
    zero_tol: float = 1e-12,
) -> float:
    """Quantum relative entropy tr[rho ln rho] - tr[rho ln sigma].

    Both arguments must be unit-trace positive semidefinite.  Raises
    :class:`SupportError` if ``rho`` has weight where ``sigma`` vanishes.
    """
    rho = _as_square(rho, "rho")
    sigma = _as_square(sigma, "sigma")
    if rho.shape != sigma.shape:
        raise LinalgError("relative entropy of states with different dimensions")
    for name, state in (("rho", rho), ("sigma", sigma)):
        if abs(np.trace(state).real - 1.0) > 1e-8:
            raise LinalgError(f"{name} is not unit trace")

    er = hermitian_eigendecompose(rho)
    es = hermitian_eigendecompose(sigma)

    pr = np.clip(er.values, 0.0, None)
    mask = pr > zero_tol
    tr_rho_ln_rho = float(np.sum(pr[mask] * np.log(pr[mask])))

    # weight of rho on each sigma eigenvector
    weights = np.real(np.einsum("ij,ik,kj->j", es.vectors.conj(), rho, es.vectors))
    ps = es.values
    bad = (ps <= zero_tol) & (weights > zero_tol)
    if np.any(bad):
        raise SupportError(
            "rho has weight {:.3e} outside the support of sigma".format(
                weights[bad].max()
            )
        )
    ok = ps > zero_tol
    tr_rho_ln_sigma = float(np.sum(weights[ok] * np.log(ps[ok])))
    return tr_rho_ln_rho - tr_rho_ln_sigma
