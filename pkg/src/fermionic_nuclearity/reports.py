"""JSON and CSV report serialization.

A report is one JSON object per run. Its layout is described by
``report_schema.json``, which ships with the package. Writes are atomic: the
file is written to a temporary sibling and then renamed into place.
"""
import csv
import io
import json
import math
import os
import tempfile
from importlib import resources
from pathlib import Path

import numpy as np

from . import __version__

TOOL = "fermionic-nuclearity"


def _plain(obj):
    """Convert numpy scalars/arrays, tuples and non-finite floats into JSON values."""
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else str(x)
    if isinstance(obj, complex):
        return {"re": obj.real, "im": obj.imag}
    return obj


def build_report(command, config, audits):
    """Assemble the report object for one run.

    Parameters
    ----------
    command : str
        Subcommand name, e.g. ``"verify car"``.
    config : dict
        Fully resolved configuration.
    audits : list of Audit
    """
    return _plain({
        "tool": TOOL,
        "version": __version__,
        "command": command,
        "config": config,
        "passed": all(a.passed for a in audits),
        "converged": all(a.converged for a in audits),
        "audits": [a.to_dict() for a in audits],
    })


def dumps(report):
    return json.dumps(report, indent=2, sort_keys=True) + "\n"


def _atomic_write(path, text):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_json(path, report):
    _atomic_write(path, dumps(report))


def csv_text(values):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["index", "value"])
    for i, v in enumerate(values):
        writer.writerow([i, repr(float(v))])
    return buf.getvalue()


def write_csv_tables(prefix, tables):
    """Write each named table to ``<prefix>_<name>.csv``; returns the paths."""
    paths = []
    prefix = Path(prefix)
    for name, values in tables.items():
        path = prefix.with_name(f"{prefix.name}_{name}.csv")
        _atomic_write(path, csv_text(values))
        paths.append(path)
    return paths


def load_schema():
    return json.loads(resources.files(__package__).joinpath("report_schema.json").read_text())
