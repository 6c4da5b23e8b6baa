"""Delimited-text I/O shared by the CLI and the report writers.

All tabular output is TSV. Floats are written with ``repr`` (shortest
round-trip), so files are byte-stable across runs and reload losslessly.
"""

from __future__ import annotations

import numpy as np

from .errors import ParseError
from .pedkin import KinshipMatrix


def format_cell(value):
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    if isinstance(value, (np.integer,)):
        return str(int(value))
    return str(value)


def write_tsv(path, header, rows):
    with open(path, "w") as fh:
        fh.write("\t".join(header) + "\n")
        for row in rows:
            fh.write("\t".join(format_cell(v) for v in row) + "\n")


def write_kinship(path, kin: KinshipMatrix):
    """Header row of subject ids; estimator recorded on a comment line."""
    with open(path, "w") as fh:
        fh.write(f"#estimator: {kin.estimator}\n")
        fh.write("id\t" + "\t".join(kin.subject_ids) + "\n")
        for sid, row in zip(kin.subject_ids, kin.values):
            fh.write(sid + "\t" + "\t".join(repr(float(v)) for v in row) + "\n")


def read_kinship(path) -> KinshipMatrix:
    estimator = "unknown"
    with open(path) as fh:
        lines = [ln.rstrip("\n") for ln in fh if ln.strip()]
    if lines and lines[0].startswith("#estimator:"):
        estimator = lines[0].split(":", 1)[1].strip()
        lines = lines[1:]
    if not lines:
        raise ParseError("empty kinship file", path=path, line=1)
    header = lines[0].split("\t")
    if header[0] != "id":
        raise ParseError("kinship header must start with 'id'", path=path, line=1)
    ids = header[1:]
    values = np.empty((len(ids), len(ids)))
    if len(lines) - 1 != len(ids):
        raise ParseError(
            f"expected {len(ids)} data rows, found {len(lines) - 1}", path=path, line=2
        )
    for i, line in enumerate(lines[1:], start=2):
        fields = line.split("\t")
        if len(fields) != len(ids) + 1:
            raise ParseError(
                f"expected {len(ids) + 1} columns, got {len(fields)}", path=path, line=i
            )
        try:
            values[i - 2] = [float(v) for v in fields[1:]]
        except ValueError as exc:
            raise ParseError(f"bad numeric value: {exc}", path=path, line=i)
    return KinshipMatrix(values, estimator, tuple(ids))


def read_phenotype(path, id_column="iid"):
    """Read a header-ed TSV keyed by subject id.

    Returns (ids, column names, float matrix). Non-numeric cells raise
    ParseError with their line number.
    """
    with open(path) as fh:
        lines = [ln.rstrip("\n") for ln in fh if ln.strip()]
    if not lines:
        raise ParseError("empty phenotype file", path=path, line=1)
    header = lines[0].split("\t")
    if id_column not in header:
        raise ParseError(f"no {id_column!r} column in header {header}", path=path, line=1)
    id_pos = header.index(id_column)
    names = [h for i, h in enumerate(header) if i != id_pos]
    ids = []
    values = []
    for lineno, line in enumerate(lines[1:], start=2):
        fields = line.split("\t")
        if len(fields) != len(header):
            raise ParseError(
                f"expected {len(header)} columns, got {len(fields)}", path=path, line=lineno
            )
        ids.append(fields[id_pos])
        try:
            values.append([float(v) for v in (f for i, f in enumerate(fields) if i != id_pos)])
        except ValueError as exc:
            raise ParseError(f"bad numeric value: {exc}", path=path, line=lineno)
    return ids, names, np.array(values, dtype=float)
