"""
Closed-form connection constructions at a point.

A linear connection is stored through its coordinate coefficients ``gamma[k, i, j] = Γ^k_ij``
(``∇_{∂_i} ∂_j = Γ^k_ij ∂_k``). Connections at a point form an affine space whose difference space is the
space of (1,2)-tensors, so every identity between connections is checked on `ConnectionCoeffs.difference`.
"""
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from ..calculus.tensor import Array, lower_first, max_abs, raise_first, total_antisymmetry_defect
from ..exceptions import AffineWeightsError
from ..geometry.frame import PointFrame

WEIGHT_TOL = 1e-12
FORM_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class ConnectionCoeffs:
    """
    Coefficients of a linear connection at one point.

    Parameters
    ----------
    point : tuple[float, ...]
        The point the coefficients belong to.
    gamma : Array
        ``gamma[k, i, j] = Γ^k_ij``, shape (n, n, n), finite.
    provenance : str
        How the connection was obtained: ``levi-civita``, ``first-canonical``, ``chern``, ``skew-plus``,
        ``skew-minus``, ``bismut``, ``line(t)``, ``projected``, ``jstar``, ``synthetic`` or ``combo``.
    """
    point: tuple[float, ...]
    gamma: Array
    provenance: str

    def __post_init__(self):
        n = len(self.point)
        gamma = np.array(self.gamma, dtype=float)

        if gamma.shape != (n, n, n):
            raise ValueError(f"Connection coefficients must have shape {(n, n, n)}, got {gamma.shape}")
        if not np.all(np.isfinite(gamma)):
            raise ValueError(f"Connection coefficients of {self.provenance!r} are not finite")

        gamma.setflags(write=False)
        object.__setattr__(self, "gamma", gamma)
        object.__setattr__(self, "point", tuple(float(x) for x in self.point))

    @property
    def dimension(self) -> int:
        return len(self.point)

    def difference(self, other: "ConnectionCoeffs") -> Array:
        """
        The (1,2)-tensor ``self − other``.

        Raises
        ------
        ValueError
            If the connections live at different points.
        """
        if self.point != other.point:
            raise ValueError(f"Cannot compare connections at {self.point} and {other.point}")
        return self.gamma - other.gamma

    def distance(self, other: "ConnectionCoeffs") -> float:
        """Defect norm of `difference`."""
        return max_abs(self.difference(other))

    def with_provenance(self, provenance: str) -> "ConnectionCoeffs":
        return ConnectionCoeffs(self.point, self.gamma, provenance)


@dataclass(frozen=True, eq=False)
class TorsionForm:
    """
    A totally antisymmetric (0,3)-tensor ``H`` at a point, the lowered torsion of a skew-torsion connection.

    Components are stored like every lowered tensor: ``components[k, i, j] = g(T(∂_i, ∂_j), ∂_k)``.

    Raises
    ------
    ValueError
        If the components are not totally antisymmetric to 1e-10.
    """
    point: tuple[float, ...]
    components: Array

    def __post_init__(self):
        n = len(self.point)
        H = np.array(self.components, dtype=float)

        if H.shape != (n, n, n):
            raise ValueError(f"Torsion form must have shape {(n, n, n)}, got {H.shape}")

        defect = total_antisymmetry_defect(H)
        if defect > FORM_TOL * max(1.0, max_abs(H)):
            raise ValueError(f"Torsion form is not totally antisymmetric: defect {defect:.3e}")

        H.setflags(write=False)
        object.__setattr__(self, "components", H)
        object.__setattr__(self, "point", tuple(float(x) for x in self.point))

    @classmethod
    def zero(cls, point: Sequence[float]) -> "TorsionForm":
        n = len(point)
        return cls(tuple(point), np.zeros((n, n, n)))


def _coefficients(connection: ConnectionCoeffs | Array) -> Array:
    return connection.gamma if isinstance(connection, ConnectionCoeffs) else np.asarray(connection, dtype=float)


# Array-level kernels. A leading batch axis is allowed on the coefficients so that the solvers can
# evaluate a whole basis of unknowns at once.

def _nabla_g(G: Array, frame: PointFrame) -> Array:
    return (frame.dg
            - np.einsum("...lki,lj->...kij", G, frame.g)
            - np.einsum("...lkj,il->...kij", G, frame.g))


def _nabla_J(G: Array, frame: PointFrame) -> Array:
    return (np.einsum("ikj->kij", frame.dJ)
            + np.einsum("...kil,lj->...kij", G, frame.J)
            - np.einsum("...lij,kl->...kij", G, frame.J))


def _torsion(G: Array) -> Array:
    return G - np.swapaxes(G, -1, -2)


def _torsion_condition(T: Array, frame: PointFrame) -> Array:
    # J^l_i J^m_j T^k_lm − α T^k_ij
    return np.einsum("li,mj,...klm->...kij", frame.J, frame.J, T) - frame.alpha * T


def levi_civita(frame: PointFrame) -> ConnectionCoeffs:
    """
    The Levi-Civita connection ∇^g.

    Computed from the Christoffel formula ``Γ^k_ij = ½ g^kl (∂_i g_jl + ∂_j g_il − ∂_l g_ij)``.

    Parameters
    ----------
    frame : PointFrame
        Pointwise data; only ``g_inv`` and ``dg`` are used.

    Returns
    -------
    ConnectionCoeffs
        Torsion-free metric coefficients with provenance ``levi-civita``.

    Examples
    --------
    ???+ Example "A polar-like metric"
        ```python
        from connforge import load_structure, levi_civita

        # g = diag(1, x1^2) on [1, 3] x [-1, 1]
        gamma = levi_civita(structure.frame_at((2.0, 0.0))).gamma
        gamma[0, 1, 1], gamma[1, 0, 1]   # (-2.0, 0.5)
        ```
    """
    dg = frame.dg
    lowered = 0.5 * (np.einsum("ijl->ijl", dg) + np.einsum("jil->ijl", dg) - np.einsum("lij->ijl", dg))
    return ConnectionCoeffs(frame.point, np.einsum("kl,ijl->kij", frame.g_inv, lowered), "levi-civita")


def nabla_g(connection: ConnectionCoeffs | Array, frame: PointFrame) -> Array:
    """
    Covariant derivative of the metric, ``result[k, i, j] = (∇_{∂_k} g)_ij``.

    ``(∇_{∂_k} g)_ij = ∂_k g_ij − Γ^l_ki g_lj − Γ^l_kj g_il``. A connection is metric iff the result vanishes.
    """
    return _nabla_g(_coefficients(connection), frame)


def nabla_g_defect(connection: ConnectionCoeffs | Array, frame: PointFrame) -> float:
    """Defect norm of `nabla_g`."""
    return max_abs(nabla_g(connection, frame))


def nabla_J(connection: ConnectionCoeffs | Array, frame: PointFrame) -> Array:
    """
    Covariant derivative of the structure tensor, ``result[k, i, j] = (∇_{∂_i} J)^k_j``.

    ``(∇_{∂_i} J)^k_j = ∂_i J^k_j + Γ^k_il J^l_j − Γ^l_ij J^k_l``. A connection is adapted to J iff the
    result vanishes.

    Parameters
    ----------
    connection : ConnectionCoeffs | Array
        The connection, or bare coefficients.
    frame : PointFrame
        Pointwise data; ``J`` and ``dJ`` are used.

    Returns
    -------
    Array
        A (1,2)-tensor with the differentiation direction in the middle slot.
    """
    return _nabla_J(_coefficients(connection), frame)


def nabla_J_defect(connection: ConnectionCoeffs | Array, frame: PointFrame) -> float:
    """Defect norm of `nabla_J`."""
    return max_abs(nabla_J(connection, frame))


def torsion(connection: ConnectionCoeffs | Array) -> Array:
    """
    Coordinate torsion ``T^k_ij = Γ^k_ij − Γ^k_ji``.

    Coordinate fields commute, so no bracket term enters.
    """
    return _torsion(_coefficients(connection))


def torsion_condition_defect(connection: ConnectionCoeffs | Array, frame: PointFrame) -> float:
    """Defect norm of ``T(JX, JY) − α T(X, Y)``, the torsion condition of the Chern connection."""
    return max_abs(_torsion_condition(torsion(connection), frame))


def j_star(connection: ConnectionCoeffs, frame: PointFrame) -> ConnectionCoeffs:
    """
    The canonical involution ``(J*∇)_X Y = α J(∇_X (JY))``.

    In coordinates ``(J*Γ)^k_ij = α J^k_l (∂_i J^l_j + Γ^l_im J^m_j)``. J* is an involutive affine map of
    the space of connections whose fixed points are exactly the connections adapted to J. Indeed
    ``J*Γ − Γ = α J (∇J)``.

    Parameters
    ----------
    connection : ConnectionCoeffs
        Any connection at the point of the frame.
    frame : PointFrame
        Pointwise data.

    Returns
    -------
    ConnectionCoeffs
        The image, with provenance ``jstar``.

    Examples
    --------
    ???+ Example "Involutivity"
        ```python
        gamma = synthetic_connection(frame, seed=3)
        j_star(j_star(gamma, frame), frame).distance(gamma)   # ~1e-15
        ```
    """
    alpha = frame.alpha
    G = connection.gamma
    image = (alpha * np.einsum("kl,ilj->kij", frame.J, frame.dJ)
             + alpha * np.einsum("kl,lim,mj->kij", frame.J, G, frame.J))
    return ConnectionCoeffs(frame.point, image, "jstar")


def project(connection: ConnectionCoeffs, frame: PointFrame) -> ConnectionCoeffs:
    """
    The projection ``π(∇) = ½∇ + ½J*(∇)`` onto connections adapted to J.

    π is idempotent, fixes adapted connections and maps metric connections to metric connections.

    Parameters
    ----------
    connection : ConnectionCoeffs
        Any connection at the point of the frame.
    frame : PointFrame
        Pointwise data.

    Returns
    -------
    ConnectionCoeffs
        The projected connection, with provenance ``projected``.

    See Also
    --------
    - [`s_tensor`](#connforge.connections.coefficients.s_tensor): ``π(∇) = ∇ + S_∇``.
    """
    image = 0.5 * (connection.gamma + j_star(connection, frame).gamma)
    return ConnectionCoeffs(frame.point, image, "projected")


def s_tensor(connection: ConnectionCoeffs | Array, frame: PointFrame) -> Array:
    """
    The tensor ``S_∇(X, Y) = (−α/2)(∇_X J)(JY)`` with ``π(∇) = ∇ + S_∇``.

    ``S^k_ij = (−α/2)(∇_{∂_i} J)^k_m J^m_j``. For a metric connection the lowered S is antisymmetric in
    its last two slots.
    """
    return (-frame.alpha / 2) * np.einsum("kim,mj->kij", nabla_J(connection, frame), frame.J)


def first_canonical(frame: PointFrame) -> ConnectionCoeffs:
    """
    The first canonical connection ``∇⁰ = ∇^g + (−α/2)(∇^g J)J``.

    ∇⁰ is adapted to both J and g. It is the projection of the Levi-Civita connection and equals it
    exactly on structures of Kähler type.

    Parameters
    ----------
    frame : PointFrame
        Pointwise data.

    Returns
    -------
    ConnectionCoeffs
        Coefficients with provenance ``first-canonical``.
    """
    lc = levi_civita(frame)
    return ConnectionCoeffs(frame.point, lc.gamma + s_tensor(lc, frame), "first-canonical")


def skew_connection(frame: PointFrame, H: TorsionForm | Array, u: float) -> ConnectionCoeffs:
    """
    The metric connection ``∇^g + u·½T`` whose lowered torsion is ``u·H``.

    ``Γ = Γ^g + (u/2) g^kl H_lij``. For totally antisymmetric H every member is metric; ``u = ±1`` gives
    the connections ∇⁺ and ∇⁻.

    Parameters
    ----------
    frame : PointFrame
        Pointwise data.
    H : TorsionForm | Array
        The torsion 3-form.
    u : float
        Line parameter.

    Returns
    -------
    ConnectionCoeffs
        Coefficients with provenance ``skew-plus``, ``skew-minus`` or ``skew(u)``.
    """
    components = H.components if isinstance(H, TorsionForm) else np.asarray(H, dtype=float)
    provenance = {1.0: "skew-plus", -1.0: "skew-minus"}.get(float(u), f"skew({u:g})")
    gamma = levi_civita(frame).gamma + 0.5 * u * raise_first(components, frame.g_inv)
    return ConnectionCoeffs(frame.point, gamma, provenance)


def nabla_plus_minus(frame: PointFrame, H: TorsionForm | Array, sign: int) -> ConnectionCoeffs:
    """
    The connections ``∇± = ∇^g ± ½T`` of a skew-symmetric torsion ``g(T(X, Y), Z) = H(X, Y, Z)``.

    Parameters
    ----------
    frame : PointFrame
        Pointwise data.
    H : TorsionForm | Array
        The torsion 3-form, typically the solution of `solve_skew`.
    sign : int
        ``+1`` for ∇⁺, ``-1`` for ∇⁻.

    Returns
    -------
    ConnectionCoeffs
        Coefficients with provenance ``skew-plus`` or ``skew-minus``.

    Raises
    ------
    ValueError
        If ``sign`` is not ±1.
    """
    if sign not in (-1, 1):
        raise ValueError(f"sign must be 1 or -1, got {sign}")
    return skew_connection(frame, H, float(sign))


def affine_combine(terms: Iterable[tuple[float, ConnectionCoeffs]], provenance: str = "combo") -> ConnectionCoeffs:
    """
    Barycentric combination ``Σ λ_i Γ_i`` of connections at one point.

    Parameters
    ----------
    terms : Iterable[tuple[float, ConnectionCoeffs]]
        Pairs of weight and connection. The weights must sum to 1 within 1e-12.
    provenance : str, optional
        Tag of the result. Defaults to ``combo``.

    Returns
    -------
    ConnectionCoeffs
        The combined connection.

    Raises
    ------
    AffineWeightsError
        If there are no terms, the weights do not sum to 1, or the connections live at different points.

    Examples
    --------
    ???+ Example "The midpoint of two connections"
        ```python
        affine_combine([(0.5, gamma_plus), (0.5, gamma_minus)]).distance(levi_civita(frame))   # ~1e-16
        ```
    """
    terms = [(float(weight), connection) for weight, connection in terms]
    if not terms:
        raise AffineWeightsError("An affine combination needs at least one term")

    total = sum(weight for weight, _ in terms)
    if abs(total - 1.0) > WEIGHT_TOL:
        raise AffineWeightsError(f"Affine weights must sum to 1, got {total!r}")

    point = terms[0][1].point
    if any(connection.point != point for _, connection in terms):
        raise AffineWeightsError(f"All connections of an affine combination must live at {point}")

    gamma = sum(weight * connection.gamma for weight, connection in terms)
    return ConnectionCoeffs(point, gamma, provenance)


def canonical_line(first: ConnectionCoeffs, chern: ConnectionCoeffs, t: float) -> ConnectionCoeffs:
    """
    Member ``∇ᵗ = (1 − t)∇⁰ + t∇^c`` of the canonical line.

    Parameters
    ----------
    first : ConnectionCoeffs
        The first canonical connection ∇⁰.
    chern : ConnectionCoeffs
        The Chern connection ∇^c.
    t : float
        Line parameter; ``t = 0`` gives ∇⁰, ``t = 1`` gives ∇^c and ``t = −1`` the Bismut connection.

    Returns
    -------
    ConnectionCoeffs
        Coefficients with provenance ``line(t)``.
    """
    return affine_combine([(1.0 - t, first), (t, chern)], provenance=f"line({t:g})")


def bismut(first: ConnectionCoeffs, chern: ConnectionCoeffs) -> ConnectionCoeffs:
    """
    The Bismut connection ``∇^b = 2∇⁰ − ∇^c``, so that ∇⁰ is the midpoint of ∇^b and ∇^c.

    On almost Hermitian structures admitting an adapted connection with totally skew-symmetric torsion it
    coincides with ∇⁺.
    """
    return canonical_line(first, chern, -1.0).with_provenance("bismut")


def _rng(seed: int | Sequence[int]) -> np.random.Generator:
    return np.random.default_rng(seed)


def synthetic_connection(frame: PointFrame, seed: int | Sequence[int], scale: float = 1.0) -> ConnectionCoeffs:
    """
    A random connection ``Γ^g + A`` with standard normal A, neither metric nor adapted in general.

    Parameters
    ----------
    frame : PointFrame
        Pointwise data.
    seed : int | Sequence[int]
        Seed of `numpy.random.default_rng`; equal seeds give equal connections.
    scale : float, optional
        Standard deviation of the entries of A. Defaults to 1.
    """
    n = frame.dimension
    A = scale * _rng(seed).standard_normal((n, n, n))
    return ConnectionCoeffs(frame.point, levi_civita(frame).gamma + A, "synthetic")


def synthetic_metric_connection(frame: PointFrame, seed: int | Sequence[int], scale: float = 1.0) -> ConnectionCoeffs:
    """
    A random metric connection ``Γ^g + A``.

    A is raised from a random (0,3)-tensor antisymmetric in the slots paired by
    ``g(A(X, Y), Z) + g(A(X, Z), Y) = 0``, which makes ``∇^g + A`` metric.

    Parameters
    ----------
    frame : PointFrame
        Pointwise data.
    seed : int | Sequence[int]
        Seed of `numpy.random.default_rng`.
    scale : float, optional
        Scale of the random entries. ``scale = 0`` returns ∇^g.

    Returns
    -------
    ConnectionCoeffs
        Coefficients with provenance ``synthetic`` and metric defect at round-off level.
    """
    n = frame.dimension
    B = scale * _rng(seed).standard_normal((n, n, n))
    L = B - np.transpose(B, (2, 1, 0))
    return ConnectionCoeffs(frame.point, levi_civita(frame).gamma + raise_first(L, frame.g_inv), "synthetic")


def lowered_s_tensor(connection: ConnectionCoeffs | Array, frame: PointFrame) -> Array:
    """`s_tensor` lowered with the metric, ``result[k, i, j] = g(S(∂_i, ∂_j), ∂_k)``."""
    return lower_first(s_tensor(connection, frame), frame.g)
