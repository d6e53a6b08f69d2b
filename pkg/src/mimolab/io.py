"""CSV output: comma separated, 17 significant digits, LF line endings.

Files are written to a temporary name in the target directory and renamed
into place, so a failed run never leaves a partial file behind.
"""

import csv
import io
import os
import tempfile

import numpy as np

__all__ = ["format_value", "csv_text", "write_csv", "write_text", "write_complex_matrix_csv"]


def format_value(v):
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.17g}"
    return str(v)


def csv_text(header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([format_value(v) for v in row])
    return buf.getvalue()


def write_text(path, text):
    path = os.fspath(path)
    directory = os.path.dirname(path) or "."
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=".part")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def write_csv(path, header, rows):
    return write_text(path, csv_text(header, rows))


def write_complex_matrix_csv(path, mat):
    """One row per entry: ``row, col, re, im``."""
    mat = np.atleast_2d(np.asarray(mat, dtype=complex))
    rows = (
        (i, j, mat[i, j].real, mat[i, j].imag)
        for i in range(mat.shape[0])
        for j in range(mat.shape[1])
    )
    return write_csv(path, ("row", "col", "re", "im"), rows)
