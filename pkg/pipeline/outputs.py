"""CSV, plot and summary emission for experiment artifact bundles

Every CSV starts with ``#`` comment lines carrying the config hash and seed;
``read_table`` skips them. Plots are rendered from the written CSVs only.
"""
import json
import logging
import os
from dataclasses import dataclass, field

import matplotlib
matplotlib.use('Agg')
import matplotlib.pyplot as plt
import numpy as np
import pandas as pd
import seaborn as sns

FORMATS = ('csv', 'plot')
SCHEMAS = {
    'rdm': ['range_m', 'velocity_mps', 'power_db'],
    'adm': ['angle_deg', 'velocity_mps', 'power_db'],
    'detections': ['range_bin', 'doppler_bin', 'statistic', 'threshold'],
    'trace': ['iter', 'eta', 'scnr_db', 'worst_residual'],
    'spectrum': ['angle_deg', 'power_db'],
    'tradeoff': ['K', 'gamma_db', 'kind', 'scnr_db'],
    'stap': ['variant', 'subcarrier', 'scnr_db'],
    'trials': ['trial', 'seed', 'metric', 'value'],
}
PLOTS = {
    'rdm': ('heatmap', 'velocity_mps', 'range_m', 'power_db'),
    'adm': ('heatmap', 'velocity_mps', 'angle_deg', 'power_db'),
    'spectrum': ('line', 'angle_deg', 'power_db', None),
    'trace': ('line', 'iter', 'scnr_db', None),
    'tradeoff': ('line', 'gamma_db', 'scnr_db', 'kind'),
    'stap': ('line', 'subcarrier', 'scnr_db', 'variant'),
}


@dataclass
class Table:
    """One CSV artifact; `schema` names the column layout and plot style"""

    name: str
    schema: str
    frame: pd.DataFrame
    title: str = ''
    facet: str = None

    def __post_init__(self):
        if self.schema not in SCHEMAS:
            raise ValueError(f'unknown table schema {self.schema!r}')
        columns = SCHEMAS[self.schema] + ([self.facet] if self.facet else [])
        missing = [c for c in columns if c not in self.frame.columns]
        if missing:
            raise ValueError(f'{self.name}: missing columns {missing}')
        self.frame = self.frame[columns]


@dataclass
class ArtifactBundle:
    """Tables and headline metrics of one experiment run"""

    name: str
    seed: int
    config_hash: str
    tables: list = field(default_factory=list)
    summary: dict = field(default_factory=dict)

    def add(self, name, schema, frame, title='', facet=None):
        self.tables.append(Table(name, schema, frame, title or name, facet))

    def table(self, name):
        for t in self.tables:
            if t.name == name:
                return t
        raise KeyError(name)


def write_table(frame, path, config_hash, seed):
    with open(path, 'w', encoding='utf-8', newline='') as f:
        f.write(f'# config_hash={config_hash}\n')
        f.write(f'# seed={seed}\n')
        frame.to_csv(f, index=False, lineterminator='\n')
    return path


def read_table(path):
    return pd.read_csv(path, comment='#')


def read_header(path):
    """Comment-header fields of a written CSV as a dict"""
    header = {}
    with open(path, 'r', encoding='utf-8') as f:
        for line in f:
            if not line.startswith('#'):
                break
            key, _, value = line[1:].strip().partition('=')
            header[key] = value
    return header


def plot_table(csv_path, png_path, schema, title='', facet=None):
    """Render a heatmap or a line chart from a written CSV"""
    kind, x, y, hue = PLOTS[schema]
    df = read_table(csv_path)
    fig, ax = plt.subplots(figsize=(8, 5))
    if df.empty:
        ax.text(0.5, 0.5, 'no data', ha='center', va='center')
    elif kind == 'heatmap':
        grid = df.pivot_table(index=y, columns=x, values=hue or 'power_db', aggfunc='max')
        grid = grid.sort_index(ascending=False)
        sns.heatmap(grid, ax=ax, cmap='viridis', xticklabels=max(len(grid.columns) // 8, 1),
                    yticklabels=max(len(grid.index) // 8, 1), cbar_kws={'label': 'power [dB]'})
    else:
        group = hue if hue and hue in df.columns else facet
        sns.lineplot(data=df, x=x, y=y, hue=group, marker='o', ax=ax, errorbar=None)
    ax.set_title(title)
    fig.tight_layout()
    fig.savefig(png_path, metadata={'Software': None})
    plt.close(fig)
    return png_path


def _jsonable(value):
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, float) and not np.isfinite(value):
        return None
    return value


def emit_outputs(bundle, formats, path):
    """Write the bundle's CSVs, plots and summary.json into `path`

    Returns
    -------
    list of str
        Written files in emission order.

    """
    formats = set(formats)
    unknown = formats - set(FORMATS)
    if unknown:
        raise ValueError(f'formats must be drawn from "csv" and "plot", got {sorted(unknown)}')
    os.makedirs(path, exist_ok=True)
    written = []
    for table in bundle.tables:
        csv_path = os.path.join(path, f'{table.name}.csv')
        # plots read the CSV back
        write_table(table.frame, csv_path, bundle.config_hash, bundle.seed)
        if 'csv' in formats:
            written.append(csv_path)
        if 'plot' in formats and table.schema in PLOTS:
            png_path = os.path.join(path, f'{table.name}.png')
            written.append(plot_table(csv_path, png_path, table.schema, table.title, table.facet))
        if 'csv' not in formats:
            os.remove(csv_path)

    summary = dict(bundle.summary, experiment=bundle.name, seed=bundle.seed,
                   config_hash=bundle.config_hash)
    filename = os.path.join(path, 'summary.json')
    with open(filename, 'w', encoding='utf-8') as f:
        json.dump(_jsonable(summary), f, ensure_ascii=False, indent=4, sort_keys=True)
    written.append(filename)
    logging.info(f'Wrote {len(written)} files to {path}')
    return written
