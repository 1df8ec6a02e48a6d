import json
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Annotated, Any, Literal, Mapping, Optional, Sequence

import numpy as np
import sympy
from annotated_types import Ge
from pydantic import BaseModel, ConfigDict, ValidationError, model_validator

from connforge import logger
from ..calculus.expr import ScalarExpr, parse
from ..calculus.tensor import Array, DET_THRESHOLD, invert_metric, max_abs, metric_signature
from ..exceptions import DomainError, EvaluationError, ExpressionSyntaxError, StructureFileError
from ..utils import DEFAULT_TOLERANCE, dumps_json
from .frame import PointFrame

GEOMETRY_SIGNS: dict[str, tuple[int, int]] = {
    "hermitian": (-1, 1),
    "norden": (-1, -1),
    "product": (1, 1),
    "para-hermitian": (1, -1),
}

GeometryLabel = Literal["hermitian", "norden", "product", "para-hermitian"]
KahlerType = Literal["kahler-type", "non-kahler-type"]


def geometry_label(alpha: int, epsilon: int) -> str:
    """Returns the geometry name of the sign pair (α, ε)."""
    return next(label for label, signs in GEOMETRY_SIGNS.items() if signs == (alpha, epsilon))


@dataclass(frozen=True)
class Chart:
    """
    A coordinate chart: an axis-aligned box in ℝⁿ with coordinates ``x1 .. xn``.

    Parameters
    ----------
    dimension : int
        The even dimension n ≥ 2.
    domain : tuple[tuple[float, float], ...]
        One closed interval ``(lo, hi)`` per coordinate, ``lo <= hi``.
    """
    dimension: int
    domain: tuple[tuple[float, float], ...]

    def __post_init__(self):
        if self.dimension < 2 or self.dimension % 2:
            raise ValueError(f"Chart dimension must be even and at least 2, got {self.dimension}")

        domain = tuple((float(lo), float(hi)) for lo, hi in self.domain)
        if len(domain) != self.dimension:
            raise ValueError(f"Domain must have {self.dimension} intervals, got {len(domain)}")

        for i, (lo, hi) in enumerate(domain, start=1):
            if not lo <= hi:
                raise ValueError(f"Interval of x{i} is empty: [{lo}, {hi}]")

        object.__setattr__(self, "domain", domain)

    def contains(self, point: Sequence[float]) -> bool:
        """Whether a point lies in the closed box."""
        return len(point) == self.dimension and all(lo <= x <= hi for x, (lo, hi) in zip(point, self.domain))

    def sample_points(self, count: int, seed: int = 0) -> list[tuple[float, ...]]:
        """
        Draws uniform points from the box.

        Parameters
        ----------
        count : int
            Number of points, at least 1.
        seed : int, optional
            Seed of the generator. The same seed always yields the same points. Defaults to 0.

        Returns
        -------
        list[tuple[float, ...]]
            The sampled points.
        """
        if count < 1:
            raise ValueError(f"Sample count must be at least 1, got {count}")

        lo = np.array([a for a, _ in self.domain])
        hi = np.array([b for _, b in self.domain])
        samples = np.random.default_rng(seed).uniform(lo, hi, size=(count, self.dimension))

        return [tuple(float(x) for x in row) for row in samples]


class ConditionCheck(BaseModel):
    """One defining condition of an (α,ε)-structure, aggregated over the sample points."""
    model_config = ConfigDict(frozen=True)

    condition: str
    value: float
    threshold: float
    passed: bool


class ValidationReport(BaseModel):
    """
    Outcome of `GeometryStructure.validate`.

    Algebraic conditions report their largest defect (passing when ``value <= threshold``); the
    ``nondegeneracy`` and ``positivity`` checks report the smallest ``|det g|`` and the smallest
    eigenvalue of g (passing when ``value > threshold``).
    """
    model_config = ConfigDict(frozen=True)

    structure: str
    alpha: int
    epsilon: int
    points: int
    tolerance: float
    signature: Optional[tuple[int, int]] = None
    checks: list[ConditionCheck]
    errors: list[str] = []
    passed: bool

    def check(self, condition: str) -> ConditionCheck:
        """Returns the check of the given condition."""
        for check in self.checks:
            if check.condition == condition:
                return check
        raise KeyError(condition)


class StructureFile(BaseModel):
    """
    The JSON schema of structure files.

    Examples
    --------
    !!! Example "A flat Hermitian structure"
        ```json
        {"name": "flat", "geometry": "hermitian", "alpha": -1, "epsilon": 1, "dimension": 2,
         "domain": [[-1, 1], [-1, 1]],
         "metric": [["1", "0"], ["0", "1"]],
         "J": [["0", "-1"], ["1", "0"]]}
        ```
    """
    model_config = ConfigDict(extra="forbid")

    name: str
    geometry: Optional[GeometryLabel] = None
    alpha: Literal[-1, 1]
    epsilon: Literal[-1, 1]
    dimension: Annotated[int, Ge(2)]
    domain: list[tuple[float, float]]
    metric: list[list[str]]
    J: list[list[str]]
    description: str = ""

    @model_validator(mode="after")
    def _model_validator(self):
        n = self.dimension

        if len(self.domain) != n:
            raise ValueError(f"domain must list {n} intervals, got {len(self.domain)}")

        for key in ("metric", "J"):
            rows = getattr(self, key)
            if len(rows) != n or any(len(row) != n for row in rows):
                raise ValueError(f"{key} must be a full {n}x{n} array")

        if self.geometry is not None and GEOMETRY_SIGNS[self.geometry] != (self.alpha, self.epsilon):
            alpha, epsilon = GEOMETRY_SIGNS[self.geometry]
            raise ValueError(f"geometry {self.geometry!r} requires (alpha, epsilon) = ({alpha}, {epsilon}), "
                             f"got ({self.alpha}, {self.epsilon})")

        return self


@dataclass(frozen=True, eq=False)
class GeometryStructure:
    """
    An (α,ε)-structure (J, g) on a coordinate chart.

    The four sign choices give almost Hermitian (−1, 1), almost Norden (−1, −1), almost product
    Riemannian (1, 1) and almost para-Hermitian (1, −1) manifolds. The defining conditions
    ``J² = α Id``, ``trace J = 0`` and ``g(JX, JY) = ε g(X, Y)`` (with g Riemannian when ε = 1) are not
    enforced at construction; `validate` measures them.

    Parameters
    ----------
    name : str
        Identifier of the structure.
    chart : Chart
        The coordinate chart.
    metric : tuple[tuple[ScalarExpr, ...], ...]
        Metric components ``g_ij``.
    J : tuple[tuple[ScalarExpr, ...], ...]
        Structure components ``J^k_j``, row = upper index.
    alpha : int
        −1 or 1.
    epsilon : int
        −1 or 1.
    geometry : str, optional
        Declared geometry label; must agree with (α, ε) when given.
    description : str, optional
        Free text.

    Examples
    --------
    ???+ Example "Loading and validating a structure file"
        ```python
        from connforge import load_structure

        structure = load_structure("my_structure.json")
        report = structure.validate()
        report.passed, report.check("compatibility").value
        ```
    """
    name: str
    chart: Chart
    metric: tuple[tuple[ScalarExpr, ...], ...]
    J: tuple[tuple[ScalarExpr, ...], ...]
    alpha: int
    epsilon: int
    geometry: Optional[str] = None
    description: str = ""

    def __post_init__(self):
        if self.alpha not in (-1, 1) or self.epsilon not in (-1, 1):
            raise ValueError(f"alpha and epsilon must be -1 or 1, got ({self.alpha}, {self.epsilon})")

        if self.geometry is not None and GEOMETRY_SIGNS.get(self.geometry) != (self.alpha, self.epsilon):
            raise ValueError(f"geometry {self.geometry!r} is inconsistent with (alpha, epsilon) = "
                             f"({self.alpha}, {self.epsilon})")

        n = self.chart.dimension
        for key in ("metric", "J"):
            rows = tuple(tuple(row) for row in getattr(self, key))
            if len(rows) != n or any(len(row) != n for row in rows):
                raise ValueError(f"{key} must be a full {n}x{n} array")
            object.__setattr__(self, key, rows)

    @property
    def dimension(self) -> int:
        return self.chart.dimension

    @cached_property
    def _metric_derivatives(self) -> tuple:
        # [k][i][j] -> ∂_k g_ij
        n = self.dimension
        return tuple(tuple(tuple(self.metric[i][j].diff(k + 1) for j in range(n)) for i in range(n)) for k in range(n))

    @cached_property
    def _structure_derivatives(self) -> tuple:
        # [i][k][j] -> ∂_i J^k_j
        n = self.dimension
        return tuple(tuple(tuple(self.J[k][j].diff(i + 1) for j in range(n)) for k in range(n)) for i in range(n))

    @staticmethod
    def _evaluate(entries, point) -> Array:
        if isinstance(entries, ScalarExpr):
            return entries.eval(point)
        return np.array([GeometryStructure._evaluate(entry, point) for entry in entries], dtype=float)

    def sample_points(self, count: int = 50, seed: int = 0) -> list[tuple[float, ...]]:
        """
        Draws deterministic uniform points from the chart.

        See Also
        --------
        - [`Chart.sample_points`](#connforge.geometry.structure.Chart.sample_points)
        """
        return self.chart.sample_points(count, seed)

    def frame_at(self, point: Sequence[float]) -> PointFrame:
        """
        Evaluates all pointwise data at a point.

        Derivatives are exact: the symbolic partial derivatives of the components are evaluated.

        Parameters
        ----------
        point : Sequence[float]
            A point of the chart.

        Returns
        -------
        PointFrame
            Metric, inverse metric, their derivatives and the structure tensor at the point.

        Raises
        ------
        DomainError
            If the point lies outside the chart.
        EvaluationError
            If a component cannot be evaluated at the point.
        SingularMetricError
            If the metric is singular at the point.
        """
        if not self.chart.contains(point):
            raise DomainError(f"Point {tuple(point)} lies outside the domain {self.chart.domain} of {self.name!r}")

        g = self._evaluate(self.metric, point)
        return PointFrame(point=tuple(point), g=g, g_inv=invert_metric(g),
                          dg=self._evaluate(self._metric_derivatives, point), J=self._evaluate(self.J, point),
                          dJ=self._evaluate(self._structure_derivatives, point), alpha=self.alpha,
                          epsilon=self.epsilon)

    def validate(self, points: Optional[Sequence[Sequence[float]]] = None, tol: float = DEFAULT_TOLERANCE,
                 count: int = 50, seed: int = 0) -> ValidationReport:
        """
        Measures the defining conditions of an (α,ε)-structure at sample points.

        Mathematical failures never raise: they are reported, including points where a component
        cannot be evaluated.

        Parameters
        ----------
        points : Sequence[Sequence[float]], optional
            Points to check. Defaults to ``count`` points sampled with ``seed``.
        tol : float, optional
            Bound of the defect norms. Defaults to 1e-9.
        count : int, optional
            Number of sampled points when ``points`` is not given. Defaults to 50.
        seed : int, optional
            Sampling seed when ``points`` is not given. Defaults to 0.

        Returns
        -------
        ValidationReport
            Per-condition aggregates; ``passed`` iff every condition holds.

        Examples
        --------
        ???+ Example "A structure tensor off by 10%"
            ```python
            report = structure.validate()
            report.check("square").value    # |1.21 α − α| = 0.21 when J is scaled by 1.1
            ```
        """
        if points is None:
            points = self.sample_points(count, seed)

        n = self.dimension
        identity = np.eye(n)
        worst = {"symmetry": 0.0, "square": 0.0, "trace": 0.0, "compatibility": 0.0}
        min_det = np.inf
        min_eigenvalue = np.inf
        signature = None
        errors = []

        for point in points:
            try:
                g = self._evaluate(self.metric, point)
                J = self._evaluate(self.J, point)
            except EvaluationError as e:
                errors.append(str(e))
                continue

            if signature is None:
                signature = metric_signature(g)

            worst["symmetry"] = max(worst["symmetry"], max_abs(g - g.T))
            worst["square"] = max(worst["square"], max_abs(J @ J - self.alpha * identity))
            worst["trace"] = max(worst["trace"], abs(float(np.trace(J))))
            worst["compatibility"] = max(worst["compatibility"], max_abs(J.T @ g @ J - self.epsilon * g))
            min_det = min(min_det, abs(float(np.linalg.det(g))))
            min_eigenvalue = min(min_eigenvalue, float(np.min(np.linalg.eigvalsh(0.5 * (g + g.T)))))

        checks = [
            ConditionCheck(condition="symmetry", value=worst["symmetry"], threshold=tol,
                           passed=worst["symmetry"] <= tol),
            ConditionCheck(condition="nondegeneracy", value=min_det, threshold=DET_THRESHOLD,
                           passed=bool(min_det > DET_THRESHOLD)),
        ]
        if self.epsilon == 1:
            checks.append(ConditionCheck(condition="positivity", value=min_eigenvalue, threshold=DET_THRESHOLD,
                                         passed=bool(min_eigenvalue > DET_THRESHOLD)))
        checks += [ConditionCheck(condition=key, value=worst[key], threshold=tol, passed=worst[key] <= tol)
                   for key in ("square", "trace", "compatibility")]
        checks.append(ConditionCheck(condition="evaluation", value=float(len(errors)), threshold=0.0,
                                     passed=not errors))

        report = ValidationReport(structure=self.name, alpha=self.alpha, epsilon=self.epsilon, points=len(points),
                                  tolerance=tol, signature=signature, checks=checks, errors=errors,
                                  passed=all(check.passed for check in checks))

        if report.passed:
            logger.debug(f"{self.name} validated at {len(points)} points.")
        else:
            failed = ", ".join(check.condition for check in checks if not check.passed)
            logger.info(f"{self.name} failed validation: {failed}.")

        return report

    def kahler_defect(self, points: Sequence[Sequence[float]]) -> float:
        """Returns the largest ``max_abs(∇^g J)`` over the points."""
        from ..connections.coefficients import levi_civita, nabla_J

        defect = 0.0
        for point in points:
            frame = self.frame_at(point)
            defect = max(defect, max_abs(nabla_J(levi_civita(frame), frame)))
        return defect

    def classify_kahler_type(self, points: Optional[Sequence[Sequence[float]]] = None,
                             tol: float = DEFAULT_TOLERANCE) -> KahlerType:
        """
        Decides whether the Levi-Civita connection is adapted to J.

        The structure is of Kähler type iff ``∇^g J = 0``, checked as ``max_abs(∇^g J) <= tol`` at every
        point.

        Parameters
        ----------
        points : Sequence[Sequence[float]], optional
            Points to check. Defaults to 50 points sampled with seed 0.
        tol : float, optional
            Bound of the defect norm. Defaults to 1e-9.

        Returns
        -------
        str
            ``"kahler-type"`` or ``"non-kahler-type"``.
        """
        if points is None:
            points = self.sample_points()

        return "kahler-type" if self.kahler_defect(points) <= tol else "non-kahler-type"

    def to_file(self) -> StructureFile:
        """Returns the structure in the structure-file schema."""
        return StructureFile(name=self.name, geometry=self.geometry, alpha=self.alpha, epsilon=self.epsilon,
                             dimension=self.dimension, domain=list(self.chart.domain),
                             metric=[[str(e) for e in row] for row in self.metric],
                             J=[[str(e) for e in row] for row in self.J], description=self.description)


def validate_structure(structure: GeometryStructure, points: Optional[Sequence[Sequence[float]]] = None,
                       tol: float = DEFAULT_TOLERANCE) -> ValidationReport:
    """Function form of `GeometryStructure.validate`."""
    return structure.validate(points, tol=tol)


def _parse_array(rows: list[list[str]], n: int, key: str) -> tuple[tuple[ScalarExpr, ...], ...]:
    parsed = []
    for i, row in enumerate(rows):
        parsed_row = []
        for j, text in enumerate(row):
            try:
                parsed_row.append(parse(text, n))
            except (ExpressionSyntaxError, EvaluationError) as e:
                raise StructureFileError(f"{key}[{i}][{j}]: {e}") from e
        parsed.append(tuple(parsed_row))
    return tuple(parsed)


def structure_from_file(model: StructureFile) -> GeometryStructure:
    """
    Builds a structure from a validated structure-file model.

    A file without a geometry label gets the one implied by (α, ε).

    Raises
    ------
    StructureFileError
        If an expression does not parse, the metric is symbolically asymmetric, or the chart is invalid.
    """
    n = model.dimension
    metric = _parse_array(model.metric, n, "metric")
    J = _parse_array(model.J, n, "J")

    for i in range(n):
        for j in range(i + 1, n):
            # differently written but equal entries are accepted
            if sympy.simplify(metric[i][j].expr - metric[j][i].expr) != 0:
                raise StructureFileError(f"metric is asymmetric: metric[{i}][{j}] = {metric[i][j]} but "
                                         f"metric[{j}][{i}] = {metric[j][i]}")

    try:
        chart = Chart(dimension=n, domain=tuple(tuple(interval) for interval in model.domain))
    except ValueError as e:
        raise StructureFileError(str(e)) from e

    geometry = model.geometry or geometry_label(model.alpha, model.epsilon)
    return GeometryStructure(name=model.name, chart=chart, metric=metric, J=J, alpha=model.alpha,
                             epsilon=model.epsilon, geometry=geometry, description=model.description)


def load_structure(source: str | Path | Mapping[str, Any]) -> GeometryStructure:
    """
    Loads a structure file.

    Parameters
    ----------
    source : str | Path | Mapping
        Path of a UTF-8 JSON structure file, or its already decoded content.

    Returns
    -------
    GeometryStructure
        The parsed structure. It is not validated; call `GeometryStructure.validate`.

    Raises
    ------
    OSError
        If the file cannot be read.
    StructureFileError
        If the content is not JSON, violates the schema, declares a geometry label inconsistent with
        (α, ε), contains an expression that does not parse, or an asymmetric metric.
    """
    if isinstance(source, Mapping):
        data = source
    else:
        text = Path(source).read_text(encoding="utf-8")
        try:
            data = json.loads(text)
        except json.JSONDecodeError as e:
            raise StructureFileError(f"{source}: invalid JSON: {e}") from e

    try:
        model = StructureFile.model_validate(data)
    except ValidationError as e:
        raise StructureFileError(f"Structure file does not match the schema: {e}") from e

    return structure_from_file(model)


def dump_structure(structure: GeometryStructure, path: Optional[str | Path] = None) -> str:
    """
    Serializes a structure to the structure-file format.

    Parameters
    ----------
    structure : GeometryStructure
        The structure to export.
    path : str | Path, optional
        File to write. When omitted only the text is returned.

    Returns
    -------
    str
        The JSON text.
    """
    text = dumps_json(structure.to_file().model_dump())
    if path is not None:
        Path(path).write_text(text, encoding="utf-8")
    return text
