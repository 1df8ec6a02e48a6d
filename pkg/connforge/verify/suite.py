"""
The invariant suite: every identity between connections is checked at seeded sample points.

Records are identified by a short id. ``G1`` is the validation of the structure itself; ``1`` to ``12``
are the connection identities:

1. J* is involutive.
2. The fixed points of J* are exactly the connections adapted to J.
3. π lands in the adapted connections and is idempotent.
4. π(∇^g) = ∇⁰.
5. π(∇) = ∇ + S_∇.
6. π preserves metric connections, and the lowered S of a metric connection is antisymmetric in its last
   two slots.
7. The Chern connection is certified when αε = −1 and never unique when αε = 1.
8. π(∇⁺) = ∇⁺, π(∇⁻) = ∇^c, ∇^g is the midpoint of ∇⁺ and ∇⁻, and 2∇⁰ − ∇^c = ∇⁺.
9. The canonical line lies in the connections adapted to J and g.
10. On structures of Kähler type ∇^g, ∇⁰ and ∇^c coincide.
11. π maps the line ∇^g + u·½T onto the canonical line, with parameter t = −u.
12. The skew-torsion connections are metric, ∇⁺ is adapted and its lowered torsion is H.
"""
import datetime
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Annotated, Optional, Sequence

from annotated_types import Ge, Gt
from pydantic import BaseModel, ConfigDict, model_validator
from rich.progress import Progress, BarColumn, TimeElapsedColumn, TextColumn, TaskProgressColumn, SpinnerColumn
from tzlocal import get_localzone

from connforge import logger, console
from ..calculus.tensor import antisymmetry_defect_last_two, lower_first, max_abs
from ..catalog import get_entry, list_entries
from ..connections.coefficients import (affine_combine, bismut, canonical_line, first_canonical, j_star, levi_civita,
                                        lowered_s_tensor, nabla_g_defect, nabla_J_defect, nabla_plus_minus, project,
                                        s_tensor, skew_connection, synthetic_connection, synthetic_metric_connection,
                                        torsion, torsion_condition_defect)
from ..connections.solvers import solve_chern, solve_skew
from ..exceptions import ConnforgeError
from ..geometry.structure import GeometryStructure, ValidationReport
from ..utils import DEFAULT_TOLERANCE, Settings, Workers

RECORD_ORDER = ["G1"] + [str(i) for i in range(1, 13)]

DESCRIPTIONS = {
    "G1": "structure satisfies the defining conditions",
    "1": "canonical involution is involutive",
    "2": "fixed points of the involution are the J-adapted connections",
    "3": "projection is J-adapted and idempotent",
    "4": "projection of Levi-Civita is the first canonical connection",
    "5": "projection equals connection plus S",
    "6": "projection preserves metric connections",
    "7": "Chern connection certificate",
    "8": "skew-torsion connections project onto themselves and the Chern connection",
    "9": "canonical line is adapted and metric",
    "10": "Kähler-type degeneracy",
    "11": "projection maps the skew-torsion line onto the canonical line",
    "12": "skew-torsion certificate",
}

LINE_PARAMETERS = (-1.0, 0.0, 0.5, 1.0, 3.0)
PLANE_PARAMETERS = (-2.0, -1.0, 0.0, 0.5, 1.0, 2.0)

FIXED_POINT_SIGNAL = 1e-3
FIXED_POINT_RESPONSE = 1e-6


class InvariantRecord(BaseModel):
    """
    One invariant aggregated over sample points.

    ``max_defect`` is the largest defect norm over the points where the invariant applies; ``violations``
    counts points failing a logical condition. The record passes iff ``max_defect <= tolerance`` and there
    are no violations.
    """
    model_config = ConfigDict(frozen=True)

    id: str
    description: str
    points: int
    max_defect: float
    violations: int
    tolerance: float
    passed: bool


class VerifyReport(BaseModel):
    """Verification outcome for one structure."""
    model_config = ConfigDict(frozen=True)

    structure: str
    alpha: int
    epsilon: int
    kahler_type: bool
    records: list[InvariantRecord]
    solver_statuses: dict[str, dict[str, int]]
    passed: bool
    seed: int
    points: int
    tolerance: float
    timestamp: str

    def record(self, id: str) -> InvariantRecord:
        """Returns the record with the given id."""
        for record in self.records:
            if record.id == id:
                return record
        raise KeyError(id)

    def failed(self) -> list[InvariantRecord]:
        return [record for record in self.records if not record.passed]


class VerifySummary(BaseModel):
    """Verification outcome for several structures, reports ordered by structure name."""
    model_config = ConfigDict(frozen=True)

    reports: list[VerifyReport]
    passed: bool
    seed: int
    points: int
    tolerance: float
    timestamp: str


@dataclass
class _Tally:
    points: int = 0
    max_defect: float = 0.0
    violations: int = 0

    def add(self, defect: float = 0.0, violations: int = 0):
        self.points += 1
        self.max_defect = max(self.max_defect, float(defect))
        self.violations += violations


@dataclass
class _PointResult:
    tallies: dict[str, _Tally] = field(default_factory=dict)
    chern: Optional[str] = None
    skew: Optional[str] = None
    error: Optional[str] = None

    def add(self, id: str, defect: float = 0.0, violations: int = 0):
        self.tallies.setdefault(id, _Tally()).add(defect, violations)


def _timestamp() -> str:
    return datetime.datetime.now(tz=get_localzone()).isoformat()


class Verifier(BaseModel):
    """
    Runs the invariant suite on structures.

    Parameters
    ----------
    points : int, optional
        Number of sample points per structure. Defaults to 20.
    seed : int, optional
        Seed of the point sampler and of the synthetic connections. Defaults to 0.
    tolerance : float, optional
        Bound of every defect norm. Defaults to 1e-9.
    synthetic : int, optional
        Number of random connections drawn per point. Defaults to 5.
    workers : int, optional
        Number of threads evaluating sample points. Values below 1 use all but two cores. Defaults to 1.

    Examples
    --------
    ???+ Example "Verifying the whole catalog"
        ```python
        from connforge import Verifier

        summary = Verifier(points=20, seed=7, workers=4).verify_all()
        summary.passed   # True
        ```
    """
    points: Annotated[int, Ge(1)] = 20
    seed: Annotated[int, Ge(0)] = 0
    tolerance: Annotated[float, Gt(0)] = DEFAULT_TOLERANCE
    synthetic: Annotated[int, Ge(1)] = 5
    workers: Workers = 1

    @model_validator(mode="after")
    def _model_validator(self):
        if self.tolerance >= 1:
            raise ValueError(f"Tolerance must be below 1, got {self.tolerance}")
        return self

    @classmethod
    def from_settings(cls, settings: Settings, **kwargs) -> "Verifier":
        return cls(points=settings.points, seed=settings.seed, tolerance=settings.tolerance,
                   workers=settings.workers, **kwargs)

    def verify(self, structure: GeometryStructure, progress: Optional[Progress] = None) -> VerifyReport:
        """
        Runs every applicable invariant on a structure.

        Which invariants apply follows from (α, ε), from the computed Kähler type and from the solver
        statuses at each point. The result is deterministic given the seed.

        Parameters
        ----------
        structure : GeometryStructure
            The structure to verify.
        progress : Progress, optional
            Progress bar to advance once per point.

        Returns
        -------
        VerifyReport
            The report; ``passed`` iff every record passes.
        """
        logger.info(f"Verifying {structure.name}.")
        sample = structure.sample_points(self.points, self.seed)
        validation = structure.validate(sample, tol=self.tolerance)

        try:
            kahler = structure.classify_kahler_type(sample, self.tolerance) == "kahler-type"
        except (ConnforgeError, ArithmeticError):
            kahler = False

        task = progress.add_task(structure.name, total=len(sample)) if progress is not None else None

        def check(args):
            index, point = args
            result = self._check_point(structure, kahler, index, point)
            if progress is not None:
                progress.update(task, advance=1)
            return result

        with ThreadPoolExecutor(max_workers=self.workers) as executor:
            results = list(executor.map(check, enumerate(sample)))

        records = [self._validation_record(validation, results)]
        for id in RECORD_ORDER[1:]:
            tally = _Tally()
            for result in results:
                if id in result.tallies:
                    point_tally = result.tallies[id]
                    tally.points += 1
                    tally.max_defect = max(tally.max_defect, point_tally.max_defect)
                    tally.violations += point_tally.violations
            if tally.points:
                records.append(self._record(id, tally))

        statuses = {solver: {status: sum(getattr(result, solver) == status for result in results)
                             for status in ("unique", "none", "underdetermined")}
                    for solver in ("chern", "skew")}

        report = VerifyReport(structure=structure.name, alpha=structure.alpha, epsilon=structure.epsilon,
                              kahler_type=kahler, records=records, solver_statuses=statuses,
                              passed=all(record.passed for record in records), seed=self.seed, points=len(sample),
                              tolerance=self.tolerance, timestamp=_timestamp())

        if report.passed:
            logger.info(f"{structure.name}: [green]passed[/green] {len(records)} records.", extra={"markup": True})
        else:
            failed = ", ".join(record.id for record in report.failed())
            logger.info(f"{structure.name}: [red]failed[/red] records {failed}.", extra={"markup": True})

        return report

    def verify_entry(self, name: str, progress: Optional[Progress] = None) -> VerifyReport:
        """Verifies a catalog entry."""
        return self.verify(get_entry(name).structure, progress)

    def verify_all(self, names: Optional[Sequence[str]] = None, log_level: int = logging.INFO) -> VerifySummary:
        """
        Verifies catalog entries with a progress bar.

        Parameters
        ----------
        names : Sequence[str], optional
            Entries to verify. Defaults to the whole catalog.
        log_level : int, optional
            Level of the connforge logger during the run. Defaults to `logging.INFO`.

        Returns
        -------
        VerifySummary
            One report per entry, ordered by name.
        """
        logger.setLevel(log_level)
        names = sorted(names if names is not None else list_entries())

        logger.info(f"Verification started.")
        with Progress(SpinnerColumn(), TextColumn("[progress.description]{task.description}"), BarColumn(),
                      TaskProgressColumn(), TimeElapsedColumn(), console=console) as progress:
            reports = [self.verify_entry(name, progress) for name in names]

        summary = VerifySummary(reports=reports, passed=all(report.passed for report in reports), seed=self.seed,
                                points=self.points, tolerance=self.tolerance, timestamp=_timestamp())
        logger.info(f"Verification finished: {sum(r.passed for r in reports)}/{len(reports)} structures passed.")

        return summary

    def _record(self, id: str, tally: _Tally) -> InvariantRecord:
        return InvariantRecord(id=id, description=DESCRIPTIONS[id], points=tally.points, max_defect=tally.max_defect,
                               violations=tally.violations, tolerance=self.tolerance,
                               passed=tally.max_defect <= self.tolerance and tally.violations == 0)

    def _validation_record(self, validation: ValidationReport, results: list[_PointResult]) -> InvariantRecord:
        defect = max(validation.check(condition).value for condition in ("symmetry", "square", "trace",
                                                                          "compatibility"))
        violations = sum(not check.passed for check in validation.checks)
        violations += sum(result.error is not None for result in results)
        return InvariantRecord(id="G1", description=DESCRIPTIONS["G1"], points=validation.points, max_defect=defect,
                               violations=violations, tolerance=self.tolerance,
                               passed=validation.passed and violations == 0 and defect <= self.tolerance)

    def _check_point(self, structure: GeometryStructure, kahler: bool, index: int,
                     point: tuple[float, ...]) -> _PointResult:
        result = _PointResult()
        tol = self.tolerance

        try:
            frame = structure.frame_at(point)
        except (ConnforgeError, ArithmeticError) as e:
            logger.debug(f"Skipping {structure.name} at {point}: {e}")
            result.error = str(e)
            return result

        alpha_epsilon = frame.alpha * frame.epsilon
        lc = levi_civita(frame)
        first = first_canonical(frame)
        chern_report = solve_chern(frame)
        skew_report = solve_skew(frame)
        result.chern, result.skew = chern_report.status, skew_report.status
        chern = chern_report.solution if chern_report.is_unique else None

        free = [synthetic_connection(frame, [self.seed, index, k, 0]) for k in range(self.synthetic)]
        metric = [synthetic_metric_connection(frame, [self.seed, index, k, 1]) for k in range(self.synthetic)]
        randoms = free + metric

        result.add("1", max(j_star(j_star(gamma, frame), frame).distance(gamma) for gamma in randoms))

        adapted = [first] + [project(gamma, frame) for gamma in randoms]
        if chern is not None:
            adapted.append(chern)
        violations = 0
        for gamma in adapted + randoms:
            nabla = nabla_J_defect(gamma, frame)
            moved = j_star(gamma, frame).distance(gamma)
            if (nabla <= tol) != (moved <= tol) or (nabla >= FIXED_POINT_SIGNAL and moved < FIXED_POINT_RESPONSE):
                violations += 1
        result.add("2", violations=violations)

        projected = [project(gamma, frame) for gamma in randoms]
        result.add("3", max(max(nabla_J_defect(p, frame), project(p, frame).distance(p)) for p in projected))
        result.add("4", project(lc, frame).distance(first))
        result.add("5", max(max_abs(p.gamma - (gamma.gamma + s_tensor(gamma, frame)))
                            for gamma, p in zip(randoms, projected)))
        result.add("6", max(max(nabla_g_defect(gamma, frame), nabla_g_defect(project(gamma, frame), frame),
                                antisymmetry_defect_last_two(lowered_s_tensor(gamma, frame))) for gamma in metric))

        if alpha_epsilon == -1:
            if chern is None:
                result.add("7", violations=1)
            else:
                result.add("7", max(chern_report.residual, nabla_g_defect(chern, frame), nabla_J_defect(chern, frame),
                                    torsion_condition_defect(chern, frame)))

                line = [canonical_line(first, chern, t) for t in LINE_PARAMETERS]
                result.add("9", max(max(nabla_J_defect(gamma, frame), nabla_g_defect(gamma, frame)) for gamma in line))
        else:
            result.add("7", violations=int(chern_report.is_unique))

        if kahler:
            defect = max(lc.distance(first), nabla_J_defect(lc, frame))
            if chern is not None:
                defect = max(defect, chern.distance(lc))
            result.add("10", defect)

        if skew_report.is_unique:
            H = skew_report.solution
            plus, minus = nabla_plus_minus(frame, H, 1), nabla_plus_minus(frame, H, -1)

            result.add("12", max(skew_report.residual, nabla_g_defect(plus, frame), nabla_g_defect(minus, frame),
                                 nabla_J_defect(plus, frame),
                                 max_abs(lower_first(torsion(plus), frame.g) - H.components)))

            if (frame.alpha, frame.epsilon) == (-1, 1) and chern is not None:
                midpoint = affine_combine([(0.5, plus), (0.5, minus)])
                result.add("8", max(project(plus, frame).distance(plus), project(minus, frame).distance(chern),
                                    midpoint.distance(lc), bismut(first, chern).distance(plus)))

                result.add("11", max(project(skew_connection(frame, H, u), frame).distance(
                    canonical_line(first, chern, -u)) for u in PLANE_PARAMETERS))

        return result
