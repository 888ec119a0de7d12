"""Persistence of covariance estimates and clutter kernels"""
import json
import logging
import struct

import joblib
import numpy as np
import pandas as pd

from .estimate import CovEstimate
from .kernel import ClutterKernel

MAGIC = b'ISACCOV\x00'


def _plain(metadata):
    return {k: v for k, v in metadata.items() if isinstance(v, (bool, int, float, str, list))}


def write_cov(est, path):
    """Magic, uint32 header length, JSON header (dims, domain, estimator, support), complex128 body"""
    header = {'dims': list(est.R.shape), 'domain': est.domain, 'estimator': est.estimator,
              'support': est.support, 'metadata': _plain(est.metadata)}
    text = json.dumps(header, sort_keys=True).encode()
    with open(path, 'wb') as f:
        f.write(MAGIC)
        f.write(struct.pack('<I', len(text)))
        f.write(text)
        f.write(np.ascontiguousarray(est.R).astype('<c16').tobytes())
    logging.debug(f'Wrote {est.estimator} covariance {est.R.shape} to {path}')


def read_cov(path):
    with open(path, 'rb') as f:
        if f.read(len(MAGIC)) != MAGIC:
            raise ValueError(f'{path} is not a covariance container')
        (length,) = struct.unpack('<I', f.read(4))
        header = json.loads(f.read(length).decode())
        body = np.frombuffer(f.read(), dtype='<c16')
    rows, cols = header['dims']
    if body.size != rows * cols:
        raise ValueError(f'{path}: body holds {body.size} entries, header says {rows * cols}')
    return CovEstimate(body.reshape(rows, cols).copy(), header['domain'], header['estimator'],
                       header['support'], header['metadata'])


def cov_to_frame(est):
    i, j = np.indices(est.R.shape)
    return pd.DataFrame({'row': i.ravel(), 'col': j.ravel(),
                         're': est.R.real.ravel(), 'im': est.R.imag.ravel()})


def write_cov_csv(est, path):
    cov_to_frame(est).to_csv(path, index=False, float_format='%.17g')


def read_cov_csv(path, domain='spatial', estimator='scm'):
    df = pd.read_csv(path)
    dim = int(df['row'].max()) + 1
    R = np.zeros((dim, int(df['col'].max()) + 1), dtype=complex)
    R[df['row'], df['col']] = df['re'].to_numpy() + 1j * df['im'].to_numpy()
    return CovEstimate(R, domain, estimator)


def save_kernel(kernel, path):
    """joblib dump of a kernel with its domain and penalty metadata"""
    joblib.dump({'V': kernel.V, 'domain': kernel.domain, 'penalty': kernel.penalty,
                 'weight': kernel.weight, 'metadata': kernel.metadata}, path)


def load_kernel(path):
    data = joblib.load(path)
    return ClutterKernel(data['V'], data['domain'], data['penalty'], data['weight'],
                         data.get('metadata', {}))
