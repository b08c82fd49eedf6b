"""Hodge and BIG Laplacians, kernels, spectra, Betti numbers.

For boundary condition bc and degree k the Hodge Laplacian is

    L_k = D_k^T S_{k+1} D_k  +  S_k D_{k-1} S_{k-1}^{-1} D_{k-1}^T S_k

(restricted operators throughout); replacing every star by the identity
gives the BIG variant

    L_k^B = D_k^T D_k + D_{k-1} D_{k-1}^T.

Both are assembled as sums of Gram matrices (B^T B and C C^T with the
diagonal square roots folded into B and C), which makes them exactly
symmetric and positive semi-definite by construction.

Kernel dimensions recover topology: dim ker L_{k,t} = beta_k and
dim ker L_{k,n} = beta_{m-k} for foregrounds that are proper subsets of
the grid.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg
import scipy.sparse as sp
import scipy.sparse.linalg as sla

from .errors import BuildError, SolverError
from .grid import GridComplex
from .manifold import SupportSet, VertexMask, build_support, restricted_derivative, restricted_star

VARIANTS = ("hodge", "big")

# Harmonic cutoff: eigenvalues below this fraction of lambda_max count as zero.
ZERO_THRESHOLD_FACTOR = 1e-8
# Below this operator size the dense symmetric eigensolver is used directly.
DENSE_LIMIT = 2000
POWER_ITERATIONS = 100


@dataclass
class LaplacianOperator:
    """Assembled symmetric PSD operator for one (degree, condition, variant)."""

    degree: int
    condition: str
    variant: str
    matrix: sp.csr_matrix

    @property
    def shape(self):
        return self.matrix.shape


@dataclass
class HarmonicBasis:
    """Orthonormal basis of the numerical kernel of a Laplacian."""

    degree: int
    condition: str
    variant: str
    threshold: float
    eigenvalues: np.ndarray
    vectors: np.ndarray  # columns orthonormal

    @property
    def dimension(self) -> int:
        return self.vectors.shape[1]


def _gram_upper(D: sp.csr_matrix, s_next: np.ndarray | None) -> sp.csr_matrix:
    """D^T S_{k+1} D as B^T B with B = sqrt(S_{k+1}) D."""
    B = D if s_next is None else sp.diags(np.sqrt(s_next)) @ D
    return (B.T @ B).tocsr()

def _gram_lower(
    D: sp.csr_matrix, s_here: np.ndarray | None, s_prev: np.ndarray | None
) -> sp.csr_matrix:
    """S_k D S_{k-1}^{-1} D^T S_k as C C^T with C = S_k D sqrt(S_{k-1})^{-1}."""
    C = D
    if s_prev is not None:
        C = C @ sp.diags(1.0 / np.sqrt(s_prev))
    if s_here is not None:
        C = sp.diags(s_here) @ C
    return (C @ C.T).tocsr()


def assemble(g: GridComplex, s: SupportSet, k: int, variant: str = "big") -> LaplacianOperator:
    """Assemble L_{k,bc} (hodge) or L_{k,bc}^B (big) on the support."""
    if variant not in VARIANTS:
        raise BuildError(f"variant must be one of {VARIANTS}")
    if not 0 <= k <= g.m:
        raise BuildError(f"no Laplacian at degree {k} on an m={g.m} grid")
    n = s.size(k)
    L = sp.csr_matrix((n, n))
    use_star = variant == "hodge"
    if k < g.m:
        D = restricted_derivative(g, s, k)
        s_next = restricted_star(g, s, k + 1).diagonal() if use_star else None
        L = L + _gram_upper(D, s_next)
    if k > 0:
        D = restricted_derivative(g, s, k - 1)
        s_here = restricted_star(g, s, k).diagonal() if use_star else None
        s_prev = restricted_star(g, s, k - 1).diagonal() if use_star else None
        L = L + _gram_lower(D, s_here, s_prev)
    L = L.tocsr()
    L.sort_indices()
    return LaplacianOperator(k, s.condition, variant, L)


def lambda_max(matrix: sp.spmatrix, iterations: int = POWER_ITERATIONS, seed: int = 0) -> float:
    """Largest-eigenvalue estimate by power iteration from a seeded vector."""
    n = matrix.shape[0]
    if n == 0:
        return 0.0
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(n)
    v /= np.linalg.norm(v)
    lam = 0.0
    for _ in range(iterations):
        w = matrix @ v
        norm = np.linalg.norm(w)
        if norm == 0:
            return 0.0
        lam = float(v @ w)
        v = w / norm
    return max(lam, 0.0)


def _dense_eigh(matrix: sp.spmatrix) -> tuple[np.ndarray, np.ndarray]:
    return scipy.linalg.eigh(matrix.toarray())


def harmonic_space(
    L: LaplacianOperator,
    num_requested: int | None = None,
    threshold_factor: float = ZERO_THRESHOLD_FACTOR,
    dense_limit: int = DENSE_LIMIT,
    seed: int = 0,
) -> HarmonicBasis:
    """All eigenpairs with eigenvalue below threshold_factor * lambda_max.

    Dense solve below `dense_limit`; otherwise shift-invert Lanczos around a
    small negative shift, enlarging the requested block until an eigenvalue
    above the cutoff confirms the kernel is complete.
    """
    A = L.matrix
    n = A.shape[0]
    if n == 0:
        return HarmonicBasis(L.degree, L.condition, L.variant, 0.0,
                             np.zeros(0), np.zeros((0, 0)))
    lam = lambda_max(A, seed=seed)
    if lam <= 0.0:
        # Identically zero operator: the whole space is harmonic.
        return HarmonicBasis(L.degree, L.condition, L.variant, 0.0,
                             np.zeros(n), np.eye(n))
    thr = threshold_factor * lam

    if n <= dense_limit:
        w, V = _dense_eigh(A)
        keep = w < thr
        return HarmonicBasis(L.degree, L.condition, L.variant, thr, w[keep], V[:, keep])

    rng = np.random.default_rng(seed)
    v0 = rng.standard_normal(n)
    k = num_requested if num_requested else 8
    sigma = -1e-3 * lam
    while True:
        k = min(k, n - 1)
        try:
            w, V = sla.eigsh(A, k=k, sigma=sigma, which="LM", v0=v0)
        except sla.ArpackNoConvergence as exc:
            raise SolverError(f"eigensolver did not converge (k={k}): {exc}") from exc
        order = np.argsort(w)
        w, V = w[order], V[:, order]
        if w[-1] >= thr or k >= n - 1:
            break
        k = min(2 * k, n - 1)
    keep = w < thr
    vectors = V[:, keep]
    if vectors.shape[1]:
        vectors, _ = np.linalg.qr(vectors)
    return HarmonicBasis(L.degree, L.condition, L.variant, thr, w[keep], vectors)


def spectrum(
    L: LaplacianOperator,
    count: int,
    dense_limit: int = DENSE_LIMIT,
    seed: int = 0,
) -> np.ndarray:
    """The `count` smallest eigenvalues, ascending."""
    A = L.matrix
    n = A.shape[0]
    if count > n:
        raise BuildError(f"requested {count} eigenvalues of a {n}-dimensional operator")
    if count == 0:
        return np.zeros(0)
    if n <= dense_limit or count >= n - 1:
        w = scipy.linalg.eigvalsh(A.toarray())
        return w[:count]
    lam = lambda_max(A, seed=seed)
    if lam <= 0.0:
        return np.zeros(count)
    rng = np.random.default_rng(seed)
    v0 = rng.standard_normal(n)
    try:
        w = sla.eigsh(A, k=count, sigma=-1e-3 * lam, which="LM", v0=v0,
                      return_eigenvectors=False)
    except sla.ArpackNoConvergence as exc:
        raise SolverError(f"eigensolver did not converge: {exc}") from exc
    return np.sort(w)


def betti(
    g: GridComplex,
    mask: VertexMask,
    k: int,
    condition: str = "tangential",
    variant: str = "big",
    support: SupportSet | None = None,
) -> int:
    """Kernel dimension of L_{k,bc}: beta_k (tangential) or beta_{m-k} (normal)."""
    s = support if support is not None else build_support(g, mask, condition)
    L = assemble(g, s, k, variant)
    return harmonic_space(L).dimension
