import json
import math
import multiprocessing
import os
from typing import Annotated, Any

import numpy as np
from annotated_types import Ge, Gt
from pydantic import AfterValidator, BaseModel, ConfigDict

TOLERANCE_ENV = "CONNFORGE_TOL"
DEFAULT_TOLERANCE = 1e-9


def resolve_workers(workers: int) -> int:
    """Returns ``workers``, or all cores but two when it is below 1."""
    return workers if workers > 0 else max(1, multiprocessing.cpu_count() - 2)


Workers = Annotated[int, AfterValidator(resolve_workers)]


class Settings(BaseModel):
    """
    Run configuration shared by the command line and the verifier.

    Parameters
    ----------
    tolerance : float, optional
        Bound under which a defect norm counts as zero. Defaults to 1e-9, or to the value of the
        ``CONNFORGE_TOL`` environment variable when read through `from_env`.
    points : int, optional
        Number of sample points per structure. Defaults to 50.
    seed : int, optional
        Seed of the point sampler and of the synthetic connections. Defaults to 0.
    workers : int, optional
        Number of threads evaluating sample points. Values below 1 use all but two cores.

    Examples
    --------
    !!! Example "Overriding the environment"
        ```python
        import os
        from connforge.utils import Settings

        os.environ["CONNFORGE_TOL"] = "1e-8"
        Settings.from_env().tolerance               # 1e-8
        Settings.from_env(tolerance=1e-6).tolerance # 1e-6, explicit values win
        ```
    """
    model_config = ConfigDict(frozen=True)

    tolerance: Annotated[float, Gt(0)] = DEFAULT_TOLERANCE
    points: Annotated[int, Ge(1)] = 50
    seed: Annotated[int, Ge(0)] = 0
    workers: Workers = 1

    @classmethod
    def from_env(cls, **overrides) -> "Settings":
        """
        Builds settings from defaults, then the environment, then explicit overrides.

        Parameters
        ----------
        overrides :
            Field values taking precedence over the environment. ``None`` values are ignored.

        Returns
        -------
        Settings
            The resolved settings.

        Raises
        ------
        ValueError
            If ``CONNFORGE_TOL`` is set to something that is not a positive number.
        """
        values = {}
        raw = os.environ.get(TOLERANCE_ENV)
        if raw is not None and raw.strip():
            try:
                values["tolerance"] = float(raw)
            except ValueError:
                raise ValueError(f"{TOLERANCE_ENV} must be a number, got {raw!r}")

        values.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**values)


def _format_float(value: float) -> str:
    if not math.isfinite(value):
        return "null"
    text = format(value, ".17g")
    if not any(c in text for c in ".en"):
        text += ".0"
    return text


def _plain(value: Any) -> Any:
    if isinstance(value, BaseModel):
        return value.model_dump()
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, np.bool_):
        return bool(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return float(value)
    return value


def _is_scalar(value: Any) -> bool:
    return value is None or isinstance(value, (bool, int, float, str))


def _encode(value: Any, level: int) -> str:
    value = _plain(value)
    pad = "  " * (level + 1)
    end = "  " * level

    if value is None:
        return "null"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return _format_float(value)
    if isinstance(value, str):
        return json.dumps(value, ensure_ascii=False)
    if isinstance(value, dict):
        if not value:
            return "{}"
        items = [f"{pad}{json.dumps(str(k), ensure_ascii=False)}: {_encode(v, level + 1)}" for k, v in value.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(value, (list, tuple)):
        values = [_plain(v) for v in value]
        if not values:
            return "[]"
        # rows of numbers stay on one line
        if all(_is_scalar(v) for v in values):
            return "[" + ", ".join(_encode(v, level + 1) for v in values) + "]"
        return "[\n" + ",\n".join(pad + _encode(v, level + 1) for v in values) + "\n" + end + "]"

    raise TypeError(f"Object of type {type(value).__name__} is not JSON serializable")


def dumps_json(obj: Any) -> str:
    """
    Serializes reports deterministically.

    Floats are written with 17 significant digits and non-finite floats as ``null``; dictionaries keep
    their insertion order. Pydantic models and numpy arrays are converted on the way.

    Parameters
    ----------
    obj : Any
        A pydantic model, or nested dictionaries, lists, numbers and strings.

    Returns
    -------
    str
        The JSON text, terminated by a newline.
    """
    return _encode(obj, 0) + "\n"
