import glob
import logging
import os

import numpy as np


def setupOutputPaths(name, outpath):
    """Create and return the next numbered experiment folder outpath/name/expNN/"""
    if not outpath.endswith('/'):
        outpath += '/'
    os.makedirs(outpath, exist_ok=True)

    exppath = 'exp01/'
    rootpath = outpath + name
    if os.path.isdir(rootpath):
        exppaths = glob.glob(rootpath + '/exp*')
        if exppaths:
            lastnum = max(int(p.rstrip('/')[-2:]) for p in exppaths) + 1
            exppath = f'exp{lastnum:02d}/'
    else:
        os.mkdir(rootpath)

    newpath = rootpath + '/' + exppath
    os.mkdir(newpath)
    return newpath


def addLogFile(path, name='isaclab.log'):
    """Mirror log records into a file inside the experiment folder"""
    handler = logging.FileHandler(os.path.join(path, name), mode='w')
    handler.setFormatter(logging.Formatter('%(asctime)s %(message)s'))
    logging.getLogger().addHandler(handler)
    return handler


def trial_seed(seed, trial):
    """Independent 63-bit seed for one trial of a seeded batch"""
    return int(np.random.SeedSequence([int(seed), int(trial)]).generate_state(1, np.uint64)[0] >> 1)


def nearest_index(axis, value):
    return int(np.argmin(np.abs(np.asarray(axis) - value)))
