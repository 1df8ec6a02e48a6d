"""
Built-in example structures covering the four (α,ε) geometries.

Every entry declares whether it is of Kähler type, whether the Chern connection exists and whether an
adapted connection with totally skew-symmetric torsion exists. The declarations are re-derived by
`CatalogEntry.certify` the first time an entry is requested; a disagreement is an error.
"""
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path
from typing import Optional

from connforge import logger
from .connections.solvers import solve_chern, solve_skew
from .exceptions import CatalogError, CertificationError
from .geometry.structure import GeometryStructure, dump_structure, load_structure
from .utils import DEFAULT_TOLERANCE

_BOX = [[-1, 1]] * 4

# Je1 = e2, Je2 = -e1, Je3 = e4, Je4 = -e3
_J_COMPLEX = [["0", "-1", "0", "0"],
              ["1", "0", "0", "0"],
              ["0", "0", "0", "-1"],
              ["0", "0", "1", "0"]]

# Je1 = e2, Je2 = e1, Je3 = e4, Je4 = e3
_J_PARA = [["0", "1", "0", "0"],
           ["1", "0", "0", "0"],
           ["0", "0", "0", "1"],
           ["0", "0", "1", "0"]]

_J_PRODUCT = [["1", "0", "0", "0"],
              ["0", "1", "0", "0"],
              ["0", "0", "-1", "0"],
              ["0", "0", "0", "-1"]]


def _diagonal(*entries: str) -> list[list[str]]:
    n = len(entries)
    return [[entries[i] if i == j else "0" for j in range(n)] for i in range(n)]


_DEFINITIONS = [
    dict(name="flat_hermitian", geometry="hermitian", alpha=-1, epsilon=1, metric=_diagonal("1", "1", "1", "1"),
         J=_J_COMPLEX, flags=(True, True, True),
         description="Euclidean metric with the standard complex structure. Kähler type."),
    dict(name="flat_norden", geometry="norden", alpha=-1, epsilon=-1, metric=_diagonal("1", "-1", "1", "-1"),
         J=_J_COMPLEX, flags=(True, False, True),
         description="Flat neutral metric with the standard complex structure, anti-compatible. Kähler type."),
    dict(name="flat_product", geometry="product", alpha=1, epsilon=1, metric=_diagonal("1", "1", "1", "1"),
         J=_J_PRODUCT, flags=(True, False, True),
         description="Euclidean metric with the product structure diag(1, 1, -1, -1). Kähler type."),
    dict(name="flat_para", geometry="para-hermitian", alpha=1, epsilon=-1, metric=_diagonal("1", "-1", "1", "-1"),
         J=_J_PARA, flags=(True, True, True),
         description="Flat neutral metric with the paracomplex structure swapping e1, e2 and e3, e4. Kähler type."),
    dict(name="hermitian_conformal_4d", geometry="hermitian", alpha=-1, epsilon=1,
         metric=_diagonal(*["exp(2*x1)"] * 4), J=_J_COMPLEX, flags=(False, True, True),
         description="Conformally flat Hermitian structure g = exp(2 x1) Id with the standard complex structure."),
    dict(name="norden_4d", geometry="norden", alpha=-1, epsilon=-1,
         metric=_diagonal("exp(2*x1)", "-exp(2*x1)", "exp(2*x1)", "-exp(2*x1)"), J=_J_COMPLEX,
         flags=(False, False, False),
         description="Conformally flat Norden structure g = exp(2 x1) diag(1, -1, 1, -1)."),
    dict(name="product_riemannian_4d", geometry="product", alpha=1, epsilon=1,
         metric=_diagonal("exp(2*x3)", "exp(2*x3)", "1", "1"), J=_J_PRODUCT, flags=(False, False, False),
         description="Warped product structure g = diag(exp(2 x3), exp(2 x3), 1, 1) with J = diag(1, 1, -1, -1)."),
    dict(name="para_hermitian_4d", geometry="para-hermitian", alpha=1, epsilon=-1,
         metric=_diagonal("exp(2*x1)", "-exp(2*x1)", "exp(2*x1)", "-exp(2*x1)"), J=_J_PARA,
         flags=(False, True, True),
         description="Conformally flat para-Hermitian structure g = exp(2 x1) diag(1, -1, 1, -1)."),
]

_BY_NAME = {definition["name"]: definition for definition in _DEFINITIONS}


@dataclass(frozen=True, eq=False)
class CatalogEntry:
    """
    A built-in structure with its declared flags.

    Parameters
    ----------
    structure : GeometryStructure
        The structure, loaded from its structure-file definition.
    documentation : str
        What the entry is and why it is in the catalog.
    kahler_type : bool
        Whether ``∇^g J = 0``.
    chern_exists : bool
        Whether `solve_chern` is unique at every sampled point.
    skew_exists : bool
        Whether `solve_skew` is unique at every sampled point.
    """
    structure: GeometryStructure
    documentation: str
    kahler_type: bool
    chern_exists: bool
    skew_exists: bool

    @property
    def name(self) -> str:
        return self.structure.name

    def flags(self) -> dict[str, bool]:
        return {"kahler_type": self.kahler_type, "chern_exists": self.chern_exists, "skew_exists": self.skew_exists}

    def certify(self, points: int = 20, seed: int = 0, tol: float = DEFAULT_TOLERANCE) -> dict[str, bool]:
        """
        Re-derives the declared flags by computation.

        The structure is validated at 50 points, then classified and solved at ``points`` sampled points.

        Parameters
        ----------
        points : int, optional
            Number of sample points for classification and solves. Defaults to 20.
        seed : int, optional
            Sampling seed. Defaults to 0.
        tol : float, optional
            Tolerance of the Kähler-type decision. Defaults to 1e-9.

        Returns
        -------
        dict[str, bool]
            The computed flags.

        Raises
        ------
        CertificationError
            If the structure fails validation or a computed flag disagrees with the declared one.
        """
        report = self.structure.validate(seed=seed, tol=tol)
        if not report.passed:
            failed = [check.condition for check in report.checks if not check.passed]
            raise CertificationError(f"Catalog entry {self.name!r} fails validation: {', '.join(failed)}")

        sample = self.structure.sample_points(points, seed)
        frames = [self.structure.frame_at(point) for point in sample]
        computed = {
            "kahler_type": self.structure.classify_kahler_type(sample, tol) == "kahler-type",
            "chern_exists": all(solve_chern(frame).is_unique for frame in frames),
            "skew_exists": all(solve_skew(frame).is_unique for frame in frames),
        }

        mismatched = [key for key, value in self.flags().items() if computed[key] != value]
        if mismatched:
            details = ", ".join(f"{key}: declared {self.flags()[key]}, computed {computed[key]}" for key in mismatched)
            raise CertificationError(f"Catalog entry {self.name!r} disagrees with computation ({details})")

        logger.debug(f"Catalog entry {self.name} certified: {computed}")
        return computed


def list_entries() -> list[str]:
    """Returns the names of the catalog entries, sorted."""
    return sorted(_BY_NAME)


def _build(name: str) -> CatalogEntry:
    definition = _BY_NAME[name]
    kahler_type, chern_exists, skew_exists = definition["flags"]
    structure = load_structure({"name": name, "geometry": definition["geometry"], "alpha": definition["alpha"],
                                "epsilon": definition["epsilon"], "dimension": 4, "domain": _BOX,
                                "metric": definition["metric"], "J": definition["J"],
                                "description": definition["description"]})
    return CatalogEntry(structure=structure, documentation=definition["description"], kahler_type=kahler_type,
                        chern_exists=chern_exists, skew_exists=skew_exists)


@lru_cache(maxsize=None)
def get_entry(name: str) -> CatalogEntry:
    """
    Returns a certified catalog entry.

    Certification runs once per entry and process.

    Parameters
    ----------
    name : str
        One of `list_entries`.

    Returns
    -------
    CatalogEntry
        The entry.

    Raises
    ------
    CatalogError
        If the name is unknown.
    CertificationError
        If the entry's declared flags disagree with computation.

    Examples
    --------
    ???+ Example "Inspecting an entry"
        ```python
        from connforge import get_entry

        entry = get_entry("hermitian_conformal_4d")
        entry.flags()   # {'kahler_type': False, 'chern_exists': True, 'skew_exists': True}
        ```
    """
    if name not in _BY_NAME:
        raise CatalogError(f"Unknown catalog entry {name!r}; known entries: {', '.join(list_entries())}")

    entry = _build(name)
    entry.certify()
    return entry


def export_entry(name: str, path: Optional[str | Path] = None) -> str:
    """
    Writes a catalog entry in the structure-file format.

    Loading the exported file with `load_structure` gives a structure with identical verification results.

    Parameters
    ----------
    name : str
        One of `list_entries`.
    path : str | Path, optional
        Destination file. When omitted only the text is returned.

    Returns
    -------
    str
        The JSON text.
    """
    return dump_structure(get_entry(name).structure, path)
