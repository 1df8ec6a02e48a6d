"""
Pointwise constrained linear solves for connections that are characterized but have no closed formula.

Both solves are affine in their unknowns. The system is assembled by evaluating the residual map at zero
and on a basis of the unknowns, then solved by a truncated singular value decomposition; the rank
decision certifies uniqueness.
"""
from dataclasses import dataclass
from itertools import combinations
from typing import Callable, Literal, Optional

import numpy as np
from scipy import linalg

from connforge import logger
from ..calculus.tensor import Array, max_abs, raise_first
from ..exceptions import UnavailableConnectionError
from ..geometry.frame import PointFrame
from .coefficients import (ConnectionCoeffs, TorsionForm, _nabla_g, _nabla_J, _torsion, _torsion_condition,
                           levi_civita)

RANK_CUTOFF = 1e-10
AMBIGUITY_BAND = 1e-7
RESIDUAL_TOL = 1e-9

SolveStatus = Literal["unique", "none", "underdetermined"]


@dataclass(frozen=True, eq=False)
class SolveReport:
    """
    Outcome of a pointwise linear solve.

    Parameters
    ----------
    status : str
        ``unique`` when the system is consistent (residual at most 1e-9) with a trivial kernel, ``none``
        when the least-squares residual exceeds 1e-9, ``underdetermined`` when the kernel is nontrivial or
        the numerical rank is ambiguous.
    solution : ConnectionCoeffs | TorsionForm
        The minimum-norm least-squares solution. It is reported for every status.
    residual : float
        Defect norm of the constraints at the solution.
    kernel_dim : int
        Dimension of the solution space of the homogeneous system.
    rank : int
        Numerical rank of the system.
    unknowns : int
        Number of unknowns.
    equations : int
        Number of scalar equations.
    diagnostic : str, optional
        Explanation of an ambiguous rank decision.
    """
    status: SolveStatus
    solution: ConnectionCoeffs | TorsionForm
    residual: float
    kernel_dim: int
    rank: int
    unknowns: int
    equations: int
    diagnostic: Optional[str] = None

    @property
    def is_unique(self) -> bool:
        return self.status == "unique"

    def to_dict(self) -> dict:
        """Summary without the solution, as written in reports."""
        return {"status": self.status, "residual": self.residual, "kernel_dim": self.kernel_dim, "rank": self.rank,
                "unknowns": self.unknowns, "equations": self.equations, "diagnostic": self.diagnostic}


@dataclass(frozen=True)
class _LinearSolution:
    x: Array
    residual: float
    rank: int
    kernel_dim: int
    equations: int
    ambiguous: Optional[str]


def _solve_affine(residual: Callable[[Array], Array], basis: Array) -> _LinearSolution:
    # residual maps a (batch of) unknown tensor(s) to the flattened constraint values
    offset = residual(np.zeros(basis.shape[1:]))
    unknowns = basis.shape[0]

    if unknowns == 0:
        return _LinearSolution(np.zeros(0), max_abs(offset), 0, 0, offset.size, None)

    A = (residual(basis) - offset).T
    b = -offset

    U, s, Vh = linalg.svd(A, full_matrices=False)
    largest = float(s[0]) if s.size else 0.0
    cutoff = RANK_CUTOFF * largest
    rank = int(np.sum(s > cutoff)) if largest > 0 else 0

    ambiguous = None
    near = s[(s > cutoff) & (s <= AMBIGUITY_BAND * largest)]
    if near.size:
        ambiguous = (f"{near.size} singular value(s) within the ambiguity band: smallest "
                     f"{float(near.min()):.3e} relative to largest {largest:.3e}")

    x = Vh[:rank].T @ ((U[:, :rank].T @ b) / s[:rank])
    return _LinearSolution(x, max_abs(A @ x - b), rank, unknowns - rank, A.shape[0], ambiguous)


def _status(solution: _LinearSolution) -> SolveStatus:
    if solution.ambiguous is not None:
        return "underdetermined"
    if solution.residual > RESIDUAL_TOL:
        return "none"
    if solution.kernel_dim > 0:
        return "underdetermined"
    return "unique"


def _flatten(*blocks: Array) -> Array:
    return np.concatenate([block.reshape(block.shape[:-3] + (-1,)) for block in blocks], axis=-1)


def solve_chern(frame: PointFrame) -> SolveReport:
    """
    Solves for the Chern connection at a point.

    The unknowns are the n³ coefficients Γ^k_ij, constrained by ``∇g = 0``, ``∇J = 0`` and the torsion
    condition ``T(JX, JY) = α T(X, Y)``. The connection exists and is unique when ``αε = −1``; when
    ``αε = 1`` the status is never ``unique`` unless the structure is degenerate.

    Parameters
    ----------
    frame : PointFrame
        Pointwise data.

    Returns
    -------
    SolveReport
        The solve outcome; its solution has provenance ``chern``.

    Examples
    --------
    ???+ Example "Chern connection of a conformally flat Hermitian structure"
        ```python
        from connforge import get_entry, solve_chern

        frame = get_entry("hermitian_conformal_4d").structure.frame_at((0.1, 0.2, 0.3, 0.4))
        report = solve_chern(frame)
        report.status, report.kernel_dim    # ('unique', 0)
        ```
    """
    n = frame.dimension

    def residual(G: Array) -> Array:
        return _flatten(_nabla_g(G, frame), _nabla_J(G, frame), _torsion_condition(_torsion(G), frame))

    basis = np.eye(n ** 3).reshape(n ** 3, n, n, n)
    solution = _solve_affine(residual, basis)
    status = _status(solution)

    if solution.ambiguous is not None:
        logger.warning(f"Ambiguous rank in the Chern solve at {frame.point}: {solution.ambiguous}")
    logger.debug(f"Chern solve at {frame.point}: {status}, residual {solution.residual:.3e}, "
                 f"kernel {solution.kernel_dim}")

    return SolveReport(status=status, solution=ConnectionCoeffs(frame.point, solution.x.reshape(n, n, n), "chern"),
                       residual=solution.residual, kernel_dim=solution.kernel_dim, rank=solution.rank,
                       unknowns=n ** 3, equations=solution.equations, diagnostic=solution.ambiguous)


def three_form_basis(n: int) -> Array:
    """
    Basis of totally antisymmetric (0,3)-tensors in dimension n, shape ``(C(n, 3), n, n, n)``.

    Element ``(a, b, c)`` with ``a < b < c`` is +1 on even permutations of ``(a, b, c)`` and −1 on odd ones.
    """
    triples = list(combinations(range(n), 3))
    basis = np.zeros((len(triples), n, n, n))

    for index, (a, b, c) in enumerate(triples):
        for (p, q, r), sign in (((a, b, c), 1), ((b, c, a), 1), ((c, a, b), 1),
                                ((b, a, c), -1), ((a, c, b), -1), ((c, b, a), -1)):
            basis[index, p, q, r] = sign

    return basis


def solve_skew(frame: PointFrame) -> SolveReport:
    """
    Solves for an adapted connection with totally skew-symmetric torsion at a point.

    The unknowns are the C(n, 3) independent components of a 3-form H; the connection is
    ``∇ = ∇^g + ½T`` with ``g(T(X, Y), Z) = H(X, Y, Z)``, which is metric for every H, and the constraint
    is ``∇J = 0``.

    Parameters
    ----------
    frame : PointFrame
        Pointwise data.

    Returns
    -------
    SolveReport
        The solve outcome; its solution is a `TorsionForm`.

    Notes
    -----
    A status of ``none`` means no such connection exists at the point: the least-squares residual is
    reported so the size of the obstruction is visible.
    """
    n = frame.dimension
    lc = levi_civita(frame).gamma
    basis = three_form_basis(n)

    def residual(H: Array) -> Array:
        return _flatten(_nabla_J(lc + 0.5 * raise_first(H, frame.g_inv), frame))

    solution = _solve_affine(residual, basis)
    status = _status(solution)

    if solution.ambiguous is not None:
        logger.warning(f"Ambiguous rank in the skew-torsion solve at {frame.point}: {solution.ambiguous}")
    logger.debug(f"Skew-torsion solve at {frame.point}: {status}, residual {solution.residual:.3e}, "
                 f"kernel {solution.kernel_dim}")

    H = np.einsum("a,aijk->ijk", solution.x, basis) if basis.shape[0] else np.zeros((n, n, n))
    return SolveReport(status=status, solution=TorsionForm(frame.point, H), residual=solution.residual,
                       kernel_dim=solution.kernel_dim, rank=solution.rank, unknowns=basis.shape[0],
                       equations=solution.equations, diagnostic=solution.ambiguous)


def chern_connection(frame: PointFrame) -> ConnectionCoeffs:
    """
    The Chern connection, when it is uniquely determined.

    Raises
    ------
    UnavailableConnectionError
        If `solve_chern` does not report ``unique``; the report is attached.
    """
    report = solve_chern(frame)
    if not report.is_unique:
        raise UnavailableConnectionError(f"Chern connection unavailable at {frame.point}: solver status "
                                         f"{report.status!r} (alpha*epsilon = {frame.alpha * frame.epsilon})",
                                         report)
    return report.solution


def skew_torsion(frame: PointFrame) -> TorsionForm:
    """
    The torsion 3-form of the adapted skew-torsion connection, when it is uniquely determined.

    Raises
    ------
    UnavailableConnectionError
        If `solve_skew` does not report ``unique``; the report is attached.
    """
    report = solve_skew(frame)
    if not report.is_unique:
        raise UnavailableConnectionError(f"No unique skew-torsion connection at {frame.point}: solver status "
                                         f"{report.status!r}, residual {report.residual:.3e}", report)
    return report.solution
