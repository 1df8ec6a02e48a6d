import json

import pytest

from connforge import get_entry, load_structure

FLAT_HERMITIAN_2D = {
    "name": "flat_2d",
    "geometry": "hermitian",
    "alpha": -1,
    "epsilon": 1,
    "dimension": 2,
    "domain": [[-1, 1], [-1, 1]],
    "metric": [["1", "0"], ["0", "1"]],
    "J": [["0", "-1"], ["1", "0"]],
}

# g = diag(1, x1^2) with the rotation J d1 = d2 / x1, J d2 = -x1 d1
POLAR_2D = {
    "name": "polar_2d",
    "geometry": "hermitian",
    "alpha": -1,
    "epsilon": 1,
    "dimension": 2,
    "domain": [[1, 3], [-1, 1]],
    "metric": [["1", "0"], ["0", "x1^2"]],
    "J": [["0", "-x1"], ["1/x1", "0"]],
}


@pytest.fixture
def flat_2d_data() -> dict:
    return json.loads(json.dumps(FLAT_HERMITIAN_2D))


@pytest.fixture
def polar_structure():
    return load_structure(POLAR_2D)


@pytest.fixture
def structure_file(tmp_path):
    def write(data: dict, name: str = "structure.json"):
        path = tmp_path / name
        path.write_text(json.dumps(data), encoding="utf-8")
        return path

    return write


def frames(name: str, count: int = 20, seed: int = 0):
    structure = get_entry(name).structure
    return [structure.frame_at(point) for point in structure.sample_points(count, seed)]


@pytest.fixture
def catalog_frames():
    return frames
