"""This module renders tables as CSV text and writes run artifacts."""
import io
import logging
from pathlib import Path

import numpy as np

from .exceptions import ArtifactError

logger = logging.getLogger(__name__)

FLOAT_FORMAT = '%.17g'


def table_to_csv(header, columns, formats):
    """Return CSV text with `header` and one row per entry of `columns`.

    Floats use a round-trip format so identical inputs give identical bytes.
    """
    buffer = io.StringIO()
    data = np.column_stack([np.asarray(column, dtype=float)
                            for column in columns])
    np.savetxt(buffer, data, fmt=list(formats), delimiter=',',
               header=','.join(header), comments='', newline='\n')
    return buffer.getvalue()


def matrix_to_gnuplot(x, y, values):
    """Return a gnuplot `nonuniform matrix` block for values[i][j] = u(x_i, y_j)."""
    values = np.asarray(values, dtype=float)
    block = np.empty((len(y) + 1, len(x) + 1))
    block[0, 0] = len(x)
    block[0, 1:] = x
    block[1:, 0] = y
    block[1:, 1:] = values.T
    buffer = io.StringIO()
    np.savetxt(buffer, block, fmt=FLOAT_FORMAT, delimiter=' ', newline='\n')
    return buffer.getvalue()


def write_artifacts(output_dir, files):
    """Write every `name -> text` entry of `files` into `output_dir`.

    Either all files are written or none are left behind.
    """
    directory = Path(output_dir)
    written = []
    try:
        directory.mkdir(parents=True, exist_ok=True)
        for name, text in files.items():
            path = directory / name
            path.write_text(text, encoding='utf-8', newline='\n')
            written.append(path)
    except OSError as exc:
        for path in written:
            path.unlink(missing_ok=True)
        raise ArtifactError(f"cannot write to {directory}: {exc}") from exc
    for path in written:
        logger.info("wrote %s", path)
    return written
