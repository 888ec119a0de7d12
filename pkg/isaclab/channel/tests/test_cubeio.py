import numpy as np

from isaclab.channel import cubeio
from isaclab.channel.synthesis import DataCube


def test_binary_round_trip(tmp_path, grid, rng):
    y = rng.standard_normal((3, 8, 6)) + 1j * rng.standard_normal((3, 8, 6))
    cube = DataCube(y, grid, seed=11, scene_digest='abc')
    path = tmp_path / 'cube.bin'
    cubeio.write_cube(cube, path)
    out = cubeio.read_cube(path)
    assert np.array_equal(out.y, y)
    assert out.grid == grid and out.seed == 11 and out.scene_digest == 'abc'


def test_binary_subcarrier_major(tmp_path, grid):
    y = np.zeros((3, 8, 6), dtype=complex)
    y[2, 1, 0] = 5.0
    cubeio.write_cube(DataCube(y, grid), tmp_path / 'c.bin')
    raw = (tmp_path / 'c.bin').read_bytes()
    body = np.frombuffer(raw[-y.size * 16:], dtype='<c16').reshape(8, 3, 6)
    assert body[1, 2, 0] == 5.0


def test_csv_round_trip(tmp_path, grid, rng):
    y = rng.standard_normal((2, 8, 6)) + 1j * rng.standard_normal((2, 8, 6))
    cubeio.write_cube_csv(DataCube(y, grid), tmp_path / 'cube.csv')
    assert np.array_equal(cubeio.read_cube_csv(tmp_path / 'cube.csv', grid).y, y)
