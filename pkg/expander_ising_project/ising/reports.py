"""
Report artifacts: JSON for scalars and structures, CSV for series, JSON
lines for samples, and a RunManifest next to every output.

Every writer has a matching loader; identical inputs give byte-identical files.
"""

import csv
import json
import logging
from dataclasses import asdict, dataclass, field, is_dataclass
from enum import Enum
from fractions import Fraction
from pathlib import Path

import numpy as np
from django.core.serializers.json import DjangoJSONEncoder

from .. import __version__
from .exceptions import ReportError
from .graphs import mask_of, members
from .numeric import LogWeight

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1


class ReportEncoder(DjangoJSONEncoder):
    """Fractions as "a/b" strings, LogWeights as {sign, log}, enums by value."""

    def default(self, o):
        if isinstance(o, Fraction):
            return str(o)
        if isinstance(o, LogWeight):
            return {'sign': o.sign, 'log': o.log_abs}
        if isinstance(o, Enum):
            return o.value
        if isinstance(o, np.integer):
            return int(o)
        if isinstance(o, np.floating):
            return float(o)
        if isinstance(o, np.ndarray):
            return o.tolist()
        if isinstance(o, (set, frozenset)):
            return sorted(o)
        if hasattr(o, 'as_dict'):
            return o.as_dict()
        if is_dataclass(o) and not isinstance(o, type):
            return asdict(o)
        return super().default(o)


def dumps(payload):
    return json.dumps(payload, cls=ReportEncoder, indent=2) + '\n'


def parse_weight(value):
    """Inverse of the encoder for a single numeric value."""
    if isinstance(value, dict) and set(value) == {'sign', 'log'}:
        return LogWeight.from_log(value['log'], value['sign'])
    if isinstance(value, str):
        return Fraction(value)
    return value


@dataclass
class RunManifest:
    subcommand: str
    graph: str
    params: dict = field(default_factory=dict)
    flags: dict = field(default_factory=dict)
    seed: int = None
    outputs: list = field(default_factory=list)
    version: str = __version__
    schema: int = SCHEMA_VERSION

    def as_dict(self):
        return {
            'schema': self.schema,
            'version': self.version,
            'subcommand': self.subcommand,
            'graph': self.graph,
            'params': self.params,
            'flags': self.flags,
            'seed': self.seed,
            'outputs': list(self.outputs),
        }


def _write(path, text):
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text, encoding='utf-8', newline='\n')
    except OSError as e:
        raise ReportError(f'Cannot write {path}: {e}') from e
    logger.debug(f'Wrote {path}')
    return path


def emit_report(out_dir, name, payload, manifest=None):
    """Write ``{name}.json`` (and ``manifest.json`` when given) under out_dir; returns the report path."""
    out_dir = Path(out_dir)
    path = _write(out_dir / f'{name}.json', dumps({'schema': SCHEMA_VERSION, 'report': name, 'data': payload}))
    if manifest is not None:
        if path.name not in manifest.outputs:
            manifest.outputs.append(path.name)
        write_manifest(out_dir, manifest)
    return path


def write_manifest(out_dir, manifest):
    return _write(Path(out_dir) / 'manifest.json', dumps(manifest.as_dict()))


def _format(value):
    return repr(float(value))


def write_tv_csv(path, curve):
    """Series [(t, tv)] as CSV with header t,tv."""
    lines = [['t', 'tv']] + [[str(t), _format(tv)] for t, tv in curve]
    return _write(path, _csv_text(lines))


def write_comparison_csv(path, curves):
    """Side-by-side TV curves: header t,<name>,... with one column per chain."""
    names = list(curves)
    length = min(len(curves[name]) for name in names)
    lines = [['t'] + names]
    for i in range(length):
        t = curves[names[0]][i][0]
        lines.append([str(t)] + [_format(curves[name][i][1]) for name in names])
    return _write(path, _csv_text(lines))


def _csv_text(rows):
    return '\n'.join(','.join(row) for row in rows) + '\n'


def write_samples(path, samples):
    """One sorted vertex list per line."""
    return _write(path, ''.join(json.dumps(members(int(s))) + '\n' for s in samples))


def load_report(path):
    try:
        document = json.loads(Path(path).read_text(encoding='utf-8'))
    except (OSError, ValueError) as e:
        raise ReportError(f'Cannot read report {path}: {e}') from e
    if document.get('schema') != SCHEMA_VERSION:
        raise ReportError(f'{path}: unsupported schema {document.get("schema")!r}')
    return document


def load_tv_csv(path):
    """[(t, tv)] from a t,tv CSV."""
    try:
        with open(path, newline='', encoding='utf-8') as handle:
            reader = csv.DictReader(handle)
            if reader.fieldnames != ['t', 'tv']:
                raise ReportError(f'{path}: expected header t,tv, got {reader.fieldnames}')
            return [(int(row['t']), float(row['tv'])) for row in reader]
    except OSError as e:
        raise ReportError(f'Cannot read {path}: {e}') from e


def load_comparison_csv(path):
    """{name: [(t, tv)]} from a comparison CSV."""
    with open(path, newline='', encoding='utf-8') as handle:
        reader = csv.reader(handle)
        header = next(reader)
        curves = {name: [] for name in header[1:]}
        for row in reader:
            for name, value in zip(header[1:], row[1:]):
                curves[name].append((int(row[0]), float(value)))
    return curves


def load_samples(path):
    """Bitmasks from a JSON lines sample file."""
    try:
        lines = Path(path).read_text(encoding='utf-8').splitlines()
    except OSError as e:
        raise ReportError(f'Cannot read {path}: {e}') from e
    return [mask_of(json.loads(line)) for line in lines if line.strip()]


def is_nonincreasing(curve, tol=1e-12):
    values = [float(tv) for _, tv in curve]
    return all(b <= a + tol for a, b in zip(values, values[1:]))
