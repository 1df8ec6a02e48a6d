from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from ..calculus.tensor import Array, invert_metric


@dataclass(frozen=True, eq=False)
class PointFrame:
    """
    All pointwise data of an (α,ε)-structure at one point of a chart.

    Every connection construction in connforge is an algebraic function of a frame, so frames can be
    evaluated once per sample point and shared between threads. Arrays are made read-only.

    Parameters
    ----------
    point : tuple[float, ...]
        The coordinates of the point.
    g : Array
        Metric components ``g[i, j] = g_ij``.
    g_inv : Array
        Inverse metric ``g_inv[i, j] = g^ij``.
    dg : Array
        Metric derivatives ``dg[k, i, j] = ∂_k g_ij``.
    J : Array
        Structure components ``J[k, j] = J^k_j``.
    dJ : Array
        Structure derivatives ``dJ[i, k, j] = ∂_i J^k_j``.
    alpha : int
        The sign of ``J² = α Id``.
    epsilon : int
        The sign of ``g(JX, JY) = ε g(X, Y)``.

    See Also
    --------
    - [`GeometryStructure.frame_at`](structure.md#connforge.geometry.structure.GeometryStructure.frame_at):
      Evaluates a frame from a structure.
    """
    point: tuple[float, ...]
    g: Array
    g_inv: Array
    dg: Array
    J: Array
    dJ: Array
    alpha: int
    epsilon: int

    def __post_init__(self):
        n = len(self.point)
        shapes = {"g": (n, n), "g_inv": (n, n), "dg": (n, n, n), "J": (n, n), "dJ": (n, n, n)}

        for name, shape in shapes.items():
            array = np.array(getattr(self, name), dtype=float)
            if array.shape != shape:
                raise ValueError(f"{name} must have shape {shape}, got {array.shape}")
            array.setflags(write=False)
            object.__setattr__(self, name, array)

        object.__setattr__(self, "point", tuple(float(x) for x in self.point))

    @classmethod
    def from_arrays(cls, point: Sequence[float], g, J, alpha: int, epsilon: int,
                    dg: Optional[Array] = None, dJ: Optional[Array] = None) -> "PointFrame":
        """
        Builds a frame from numeric arrays, inverting the metric.

        Missing derivatives default to zero, which describes constant fields.

        Raises
        ------
        SingularMetricError
            If the metric cannot be inverted.
        """
        n = len(point)
        g = np.asarray(g, dtype=float)
        return cls(point=tuple(point), g=g, g_inv=invert_metric(g),
                   dg=np.zeros((n, n, n)) if dg is None else dg, J=np.asarray(J, dtype=float),
                   dJ=np.zeros((n, n, n)) if dJ is None else dJ, alpha=alpha, epsilon=epsilon)

    @property
    def dimension(self) -> int:
        return len(self.point)
