"""
Pointwise multilinear algebra on small dense arrays.

Index conventions are fixed once for the whole package:

- a metric ``g[i, j] = g_ij`` and its inverse ``g_inv[i, j] = g^ij``;
- an endomorphism ``J[k, j] = J^k_j`` (row = upper index);
- a (1,2)-tensor ``A[k, i, j] = A^k_ij`` (first index upper), so connection coefficients satisfy
  ``∇_{∂_i} ∂_j = Γ^k_ij ∂_k`` and the coordinate torsion is ``T^k_ij = Γ^k_ij - Γ^k_ji``;
- a (0,3)-tensor obtained by lowering ``L[k, i, j] = g_kl A^l_ij``, that is ``L(i, j, k) = g(A(∂_i, ∂_j), ∂_k)``
  stored with the lowered slot first.
"""
import numpy as np
import numpy.typing as npt

from ..exceptions import SingularMetricError

Array = npt.NDArray[np.float64]

DET_THRESHOLD = 1e-10


def invert_metric(g: Array) -> Array:
    """
    Inverts a metric at a point.

    Parameters
    ----------
    g : Array
        The n×n symmetric metric components ``g_ij``.

    Returns
    -------
    Array
        The inverse ``g^ij``, symmetrized to remove round-off asymmetry.

    Raises
    ------
    SingularMetricError
        If ``|det g| <= 1e-10``.
    """
    det = float(np.linalg.det(g))
    if not abs(det) > DET_THRESHOLD:
        raise SingularMetricError(det)

    g_inv = np.linalg.inv(g)
    return 0.5 * (g_inv + g_inv.T)


def metric_signature(g: Array) -> tuple[int, int]:
    """Returns the numbers (p, q) of positive and negative eigenvalues of a symmetric matrix."""
    eigenvalues = np.linalg.eigvalsh(0.5 * (g + g.T))
    return int(np.sum(eigenvalues > 0)), int(np.sum(eigenvalues < 0))


def lower_first(A: Array, g: Array) -> Array:
    """
    Lowers the upper index of a (1,2)-tensor: ``result[k, i, j] = g_kl A^l_ij``.

    Parameters
    ----------
    A : Array
        The (1,2)-tensor, shape (n, n, n).
    g : Array
        The metric, shape (n, n).

    Returns
    -------
    Array
        The (0,3)-tensor ``g(A(∂_i, ∂_j), ∂_k)`` stored at ``[k, i, j]``.
    """
    return np.einsum("kl,...lij->...kij", g, A)


def raise_first(L: Array, g_inv: Array) -> Array:
    """Inverse of `lower_first`: ``result[k, i, j] = g^kl L_lij``."""
    return np.einsum("kl,...lij->...kij", g_inv, L)


def max_abs(A: Array) -> float:
    """
    Defect norm: the largest absolute component of a tensor.

    Every "equals zero" statement in connforge is checked as ``max_abs(...) <= tol``.

    Parameters
    ----------
    A : Array
        Any numeric array.

    Returns
    -------
    float
        The maximum of ``|A|`` over all components, 0 for an empty array.
    """
    A = np.asarray(A, dtype=float)
    if A.size == 0:
        return 0.0
    return float(np.max(np.abs(A)))


def antisymmetry_defect_last_two(L: Array) -> float:
    """
    Defect of ``g(S(X,Y),Z) + g(S(X,Z),Y) = 0`` for a lowered tensor ``L[k, i, j] = g(S(∂_i, ∂_j), ∂_k)``.

    With X = ∂_i the condition pairs the slots ``k`` and ``j``.
    """
    return max_abs(L + np.transpose(L, (2, 1, 0)))


def total_antisymmetry_defect(H: Array) -> float:
    """Defect of total antisymmetry of a (0,3)-tensor."""
    return max(max_abs(H + np.transpose(H, (1, 0, 2))),
               max_abs(H + np.transpose(H, (0, 2, 1))),
               max_abs(H + np.transpose(H, (2, 1, 0))))
