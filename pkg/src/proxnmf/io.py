"""Matrix CSV and JSON persistence.

CSV: one matrix row per line, comma separated, no header, LF endings,
17 significant digits so that write-then-read is bit exact.
"""
import json

import numpy as np

from .errors import InvalidInput

__all__ = ["write_matrix_csv", "read_matrix_csv", "write_json", "read_json",
           "write_anchors", "read_anchors"]


def _fmt(x):
    return format(float(x), ".17g")


def write_matrix_csv(path, M):
    M = np.asarray(M, dtype=np.float64)
    if M.ndim != 2:
        raise ValueError("expected a 2-D matrix")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for row in M:
            fh.write(",".join(_fmt(x) for x in row))
            fh.write("\n")


def read_matrix_csv(path):
    """
    Parse a matrix CSV.

    Raises
    ------
    InvalidInput
        On ragged rows, unparsable or non-finite fields, or an empty file.
    """
    rows = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            try:
                rows.append([float(tok) for tok in line.split(",")])
            except ValueError as exc:
                raise InvalidInput(f"{path}:{lineno}: {exc}") from None
            if len(rows[-1]) != len(rows[0]):
                raise InvalidInput(
                    f"{path}:{lineno}: expected {len(rows[0])} fields, got {len(rows[-1])}")
    if not rows:
        raise InvalidInput(f"{path}: empty matrix")
    M = np.asfortranarray(rows, dtype=np.float64)
    if not np.all(np.isfinite(M)):
        raise InvalidInput(f"{path}: non-finite entries")
    return M


def write_json(path, obj):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def read_json(path):
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def write_anchors(path, anchors):
    """Write 0-based `anchors` as 1-based indices, one per line."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("".join(f"{int(i) + 1}\n" for i in anchors))


def read_anchors(path):
    """Read a 1-based anchors file into a 0-based array."""
    with open(path, encoding="utf-8") as fh:
        return np.asarray([int(tok) - 1 for tok in fh.read().split()], dtype=np.intp)
