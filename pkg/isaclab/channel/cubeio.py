"""Binary and CSV containers for data cubes"""
import json
import logging
import struct

import numpy as np
import pandas as pd

from ..scene.grid import OfdmGrid
from .synthesis import DataCube

MAGIC = b'ISACCUBE'


def _grid_header(grid):
    return {'f0': grid.f0, 'delta_f': grid.delta_f, 'N': grid.N, 'L': grid.L,
            'T_cp': grid.T_cp, 'wideband': grid.wideband}


def write_cube(cube, path):
    """Write magic, uint32 header length, JSON header, then complex128 (N, N_r, L) body"""
    header = {'dims': list(cube.y.shape), 'grid': _grid_header(cube.grid),
              'seed': cube.seed, 'scene_digest': cube.scene_digest}
    text = json.dumps(header, sort_keys=True).encode()
    body = np.ascontiguousarray(np.transpose(cube.y, (1, 0, 2))).astype('<c16')
    with open(path, 'wb') as f:
        f.write(MAGIC)
        f.write(struct.pack('<I', len(text)))
        f.write(text)
        f.write(body.tobytes())
    logging.debug(f'Wrote cube {cube.y.shape} to {path}')


def read_cube(path):
    with open(path, 'rb') as f:
        if f.read(len(MAGIC)) != MAGIC:
            raise ValueError(f'{path} is not a cube container')
        (length,) = struct.unpack('<I', f.read(4))
        header = json.loads(f.read(length).decode())
        body = np.frombuffer(f.read(), dtype='<c16')
    N_r, N, L = header['dims']
    if body.size != N_r * N * L:
        raise ValueError(f'{path}: body holds {body.size} samples, header says {N_r * N * L}')
    y = np.transpose(body.reshape(N, N_r, L), (1, 0, 2))
    return DataCube(y.copy(), OfdmGrid(**header['grid']), header['seed'], header['scene_digest'])


def cube_to_frame(cube):
    N_r, N, L = cube.y.shape
    i, n, l = np.meshgrid(np.arange(N_r), np.arange(N), np.arange(L), indexing='ij')
    return pd.DataFrame({'element': i.ravel(), 'subcarrier': n.ravel(), 'symbol': l.ravel(),
                         're': cube.y.real.ravel(), 'im': cube.y.imag.ravel()})


def write_cube_csv(cube, path):
    cube_to_frame(cube).to_csv(path, index=False, float_format='%.17g')


def read_cube_csv(path, grid):
    df = pd.read_csv(path)
    shape = (df['element'].max() + 1, df['subcarrier'].max() + 1, df['symbol'].max() + 1)
    y = np.zeros(shape, dtype=complex)
    y[df['element'], df['subcarrier'], df['symbol']] = df['re'].to_numpy() + 1j * df['im'].to_numpy()
    return DataCube(y, grid)
