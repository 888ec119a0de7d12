#!/usr/bin/env python
# coding: utf-8

# ## Description

# Runs the clutter-aware ISAC laboratory end to end: synthesis of a data
# cube, the sensing receiver chain, transceiver design and the case-study
# presets.
#
# Usage:
#
#     python ISAC_Driver.py synth --config desk --out-dir ../runs/
# or
#     python ISAC_Driver.py pipeline --config desk --emit csv,plot
# or
#     python ISAC_Driver.py preset --preset mixed --config desk --jobs 4
#
# Exit codes: 0 ok, 2 config error, 3 infeasible optimization, 4 numerical failure.

import argparse
import dataclasses
import logging
import os
import sys

from isaclab.channel.cubeio import write_cube
from isaclab.errors import ConfigError, InfeasibleError, NumericalError
from isaclab.utils.time_controller import TimeController

# custom libraries
import config as cfg
import experiments
import outputs
import utils

timer = TimeController()
COMMANDS = ('synth', 'pipeline', 'optimize', 'preset')


def _override(config, seed=None, out_dir=None, emit=None, preset=None):
    changes = {}
    if seed is not None:
        changes['seed'] = int(seed)
        changes['scene'] = dataclasses.replace(config.scene, seed=int(seed))
    if preset is not None:
        changes['preset'] = preset
    output = {}
    if out_dir is not None:
        output['out_dir'] = out_dir
    if emit is not None:
        output['formats'] = tuple(f.strip() for f in emit.split(',') if f.strip())
    if output:
        changes['output'] = dataclasses.replace(config.output, **output)
    config = dataclasses.replace(config, **changes)
    # re-validate the overridden fields
    return cfg.config_from_dict(cfg.to_dict(config))


@timer.timeit
def synth(config, path, full_scale=False):
    scene, tx, cube = experiments.synth(config, full_scale)
    filename = os.path.join(path, 'cube.bin')
    write_cube(cube, filename)
    logging.info(f'Cube {cube.y.shape} of scene {scene.digest()} written to {filename}')
    return [filename]


@timer.timeit
def experiment(config, name, path, jobs=1, full_scale=False):
    bundle = experiments.run_experiment(config, name, jobs, full_scale)
    return outputs.emit_outputs(bundle, config.output.formats, path)


def run(command='pipeline',
        config='desk',
        seed=None,
        out_dir=None,
        emit=None,
        preset=None,
        jobs=1,
        full_scale=False,
        verbose=False):

    logging.getLogger().setLevel(logging.DEBUG if verbose else logging.INFO)
    if command not in COMMANDS:
        raise ConfigError(f'{command!r} is not one of {", ".join(COMMANDS)}', 'command')

    conf = _override(cfg.parse_config(config), seed, out_dir, emit, preset)
    if command == 'preset' and not conf.preset:
        raise ConfigError('the preset command needs --preset or a preset in the config', 'preset')

    name = conf.preset if command == 'preset' else command
    newpath = utils.setupOutputPaths(name, conf.output.out_dir)
    handler = utils.addLogFile(newpath)
    try:
        logging.info(f'{name}: seed {conf.seed}, config {conf.digest()}, output {newpath}')
        if command == 'synth':
            files = synth(conf, newpath, full_scale)
        else:
            files = experiment(conf, name, newpath, jobs, full_scale)
        if verbose:
            for f in files:
                print(f)
    finally:
        logging.getLogger().removeHandler(handler)
        handler.close()
    return newpath


def main(argv=None):
    opt = parse_opt(argv)
    try:
        run(**vars(opt))
    except (ConfigError, InfeasibleError, NumericalError) as e:
        logging.error(f'{type(e).__name__}: {e}')
        return e.exit_code
    return 0


def parse_opt(argv=None):
    parser = argparse.ArgumentParser(description='Clutter-aware MIMO-OFDM ISAC laboratory')
    parser.add_argument('command', choices=COMMANDS, help='Step to run')
    parser.add_argument('--config', required=False, default='desk',
                        help='Experiment JSON file, or a bundled preset name (desk, reference)')
    parser.add_argument('--seed', required=False, type=int, default=None, help='Override the config seed')
    parser.add_argument('--out-dir', dest='out_dir', required=False, default=None, help='Path for output files')
    parser.add_argument('--emit', required=False, default=None, help='Comma-separated output formats: csv,plot')
    parser.add_argument('--preset', required=False, default=None, choices=cfg.PRESETS,
                        help='Case-study experiment to run')
    parser.add_argument('--jobs', required=False, type=int, default=1, help='Parallel trial workers')
    parser.add_argument('--full-scale', dest='full_scale', action='store_true',
                        help='Use the full reference dimensions instead of desk scale')
    parser.add_argument('--verbose', action='store_true', help='Debug logging')
    return parser.parse_args(argv)


if __name__ == "__main__":
    logging.basicConfig(format='%(asctime)s %(message)s')
    sys.exit(main())
