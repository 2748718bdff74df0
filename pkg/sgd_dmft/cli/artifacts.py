"""
CSV tables, run manifests and comparison reports.

Floats are written with 17 significant digits so that reading a table back
gives the same doubles.
"""
import csv
import json
import logging
import os
import subprocess
from dataclasses import asdict, dataclass, field
from typing import Dict, List, Optional

import numpy as np

from ..constants import COMPARE_PAIRS
from ..exceptions import ArtifactError, ShapeMismatchError
from ..utils import format_dt, format_float, parse_datetime

logger = logging.getLogger(__name__)


def write_csv(path, columns, rows):
    try:
        with open(path, 'w', newline='') as fh:
            writer = csv.writer(fh, lineterminator='\n')
            writer.writerow(columns)
            for row in rows:
                writer.writerow([int(row[0])] + [format_float(x) for x in row[1:]])
    except OSError as e:
        raise ArtifactError('cannot write {0}: {1}'.format(path, e))
    return path


def table_rows(table, columns):
    """Rows of a column mapping ``{'t': [...], 'm': [...], ...}``."""
    return zip(*[table[name] for name in columns])


def read_csv(path):
    """Columns of a table as float arrays, ``t`` as int."""
    try:
        with open(path, newline='') as fh:
            reader = csv.reader(fh)
            header = next(reader)
            records = [row for row in reader if row]
    except (OSError, StopIteration) as e:
        raise ArtifactError('cannot read table {0}: {1}'.format(path, e))
    table = {}
    for j, name in enumerate(header):
        try:
            values = [r[j] for r in records]
            table[name] = (np.array([int(v) for v in values]) if name == 't'
                           else np.array([float(v) for v in values]))
        except (IndexError, ValueError) as e:
            raise ArtifactError('malformed column {0} in {1}: {2}'.format(name, path, e))
    return table


def version_string():
    """``git describe`` of the source checkout, or the package version."""
    from .. import __version__
    here = os.path.dirname(os.path.abspath(__file__))
    try:
        out = subprocess.run(
            ['git', 'describe', '--tags', '--always', '--dirty'], cwd=here,
            capture_output=True, text=True, timeout=5)
    except (OSError, subprocess.SubprocessError):
        return __version__
    described = out.stdout.strip()
    return described if out.returncode == 0 and described else __version__


@dataclass
class RunManifest:
    command: str
    config: dict
    seed: Optional[int]
    version: str
    started: str
    finished: str
    wall_clock: float
    converged: Optional[bool] = None
    outputs: Dict[str, str] = field(default_factory=dict)

    @property
    def started_at(self):
        return parse_datetime(self.started)

    @property
    def finished_at(self):
        return parse_datetime(self.finished)

    @classmethod
    def build(cls, command, config, seed, started, finished, converged=None, outputs=None):
        return cls(
            command=command, config=config, seed=seed, version=version_string(),
            started=format_dt(started), finished=format_dt(finished),
            wall_clock=(finished - started).total_seconds(),
            converged=converged, outputs=dict(outputs or {}),
        )

    def save(self, path):
        try:
            with open(path, 'w') as fh:
                json.dump(asdict(self), fh, indent=2, sort_keys=True)
                fh.write('\n')
        except OSError as e:
            raise ArtifactError('cannot write manifest {0}: {1}'.format(path, e))
        return path

    @classmethod
    def load(cls, path):
        try:
            with open(path) as fh:
                return cls(**json.load(fh))
        except (OSError, ValueError, TypeError) as e:
            raise ArtifactError('cannot read manifest {0}: {1}'.format(path, e))


@dataclass
class CompareReport:
    tolerance: float
    t: np.ndarray
    deviations: Dict[str, np.ndarray]

    @property
    def max_deviation(self):
        return {name: float(np.max(dev, initial=0.0)) for name, dev in self.deviations.items()}

    @property
    def passed(self):
        return all(value <= self.tolerance for value in self.max_deviation.values())

    def columns(self):
        return ['t'] + list(self.deviations)

    def rows(self):
        return zip(self.t, *self.deviations.values())

    def summary(self):
        lines = ['{0:<20} {1:>12}'.format('column', 'max |dev|')]
        for name, value in self.max_deviation.items():
            lines.append('{0:<20} {1:>12.3e}'.format(name, value))
        lines.append('tolerance {0:g}: {1}'.format(
            self.tolerance, 'PASS' if self.passed else 'FAIL'))
        return '\n'.join(lines)

    def to_dict(self):
        return {'tolerance': self.tolerance, 'passed': self.passed,
                'max_deviation': self.max_deviation}


def compare_tables(reference, candidate, tolerance, pairs=COMPARE_PAIRS, columns=None):
    """
    Per-step absolute deviations for every ``reference -> candidate`` column
    pair present in both tables (identical column names pair with themselves),
    restricted to the reference columns in ``columns`` when given.
    """
    t_ref, t_cand = reference.get('t'), candidate.get('t')
    if t_ref is None or t_cand is None or not np.array_equal(t_ref, t_cand):
        raise ShapeMismatchError('tables are not on the same t grid')
    matched: List[tuple] = []
    for name in reference:
        if name == 't' or (columns and name not in columns):
            continue
        if name in candidate:
            matched.append((name, name))
        elif pairs.get(name) in candidate:
            matched.append((name, pairs[name]))
    if not matched:
        raise ShapeMismatchError('tables share no comparable columns')
    deviations = {
        ref if ref == cand else '{0}~{1}'.format(ref, cand):
            np.abs(reference[ref] - candidate[cand])
        for ref, cand in matched
    }
    return CompareReport(tolerance=tolerance, t=t_ref, deviations=deviations)


def save_report(path, report):
    try:
        with open(path, 'w') as fh:
            json.dump(report.to_dict(), fh, indent=2, sort_keys=True)
            fh.write('\n')
    except OSError as e:
        raise ArtifactError('cannot write report {0}: {1}'.format(path, e))
    return path
