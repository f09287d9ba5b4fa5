"""alist export/import and the JSON sidecar of lifted codes."""

import json
import logging
from pathlib import Path
from typing import Union

import numpy as np
from scipy import sparse

from apps.common.exceptions import ConfigurationError
from apps.qclift.lifting import QCCode

logger = logging.getLogger('protoshape.qclift')

MatrixSource = Union[QCCode, sparse.spmatrix, np.ndarray]


def _matrix(source: MatrixSource) -> sparse.csr_matrix:
    if isinstance(source, QCCode):
        return source.parity_check
    return sparse.csr_matrix(source, dtype=np.uint8)


def _padded(indices, width: int) -> str:
    values = [str(i + 1) for i in indices] + ['0'] * (width - len(indices))
    return ' '.join(values)


def export_alist(source: MatrixSource) -> str:
    """Binary parity-check matrix in alist form (columns first, 1-based, zero padded)."""
    h = _matrix(source)
    csc = h.tocsc()
    rows, columns = h.shape
    column_weights = np.diff(csc.indptr)
    row_weights = np.diff(h.indptr)
    lines = [
        f"{columns} {rows}",
        f"{int(column_weights.max(initial=0))} {int(row_weights.max(initial=0))}",
        ' '.join(str(int(w)) for w in column_weights),
        ' '.join(str(int(w)) for w in row_weights),
    ]
    width = int(column_weights.max(initial=0))
    for column in range(columns):
        lines.append(_padded(np.sort(csc.indices[csc.indptr[column]:csc.indptr[column + 1]]), width))
    width = int(row_weights.max(initial=0))
    for row in range(rows):
        lines.append(_padded(np.sort(h.indices[h.indptr[row]:h.indptr[row + 1]]), width))
    return '\n'.join(lines) + '\n'


def _from_lists(lists, shape, by_column: bool) -> sparse.csr_matrix:
    owners = np.repeat(np.arange(len(lists)), [len(item) for item in lists])
    members = np.array([i for item in lists for i in item], dtype=np.int64)
    rows, columns = (members, owners) if by_column else (owners, members)
    return sparse.csr_matrix((np.ones(members.size, dtype=np.uint8), (rows, columns)), shape=shape)


def import_alist(text: str) -> sparse.csr_matrix:
    """
    Parse alist text.

    Raises:
        ConfigurationError: the text is truncated or its weights disagree
            with the listed indices.
    """
    lines = [line.split() for line in text.strip().splitlines()]
    try:
        columns, rows = (int(v) for v in lines[0])
        column_weights = [int(v) for v in lines[2]]
        row_weights = [int(v) for v in lines[3]]
        column_lists = [[int(v) - 1 for v in line if int(v)] for line in lines[4:4 + columns]]
        row_lists = [[int(v) - 1 for v in line if int(v)] for line in lines[4 + columns:4 + columns + rows]]
    except (IndexError, ValueError) as exc:
        raise ConfigurationError(f"malformed alist: {exc}") from exc
    if len(column_lists) != columns or len(row_lists) != rows:
        raise ConfigurationError("alist is truncated")
    if [len(c) for c in column_lists] != column_weights or [len(r) for r in row_lists] != row_weights:
        raise ConfigurationError("alist weights disagree with the index lists")

    h = _from_lists(column_lists, (rows, columns), by_column=True)
    if (h != _from_lists(row_lists, (rows, columns), by_column=False)).nnz:
        raise ConfigurationError("alist column and row lists describe different matrices")
    return h


def sidecar(code: QCCode) -> dict:
    data = code.to_dict()
    data['level_order'] = list(code.base.level_order)
    data['d_per_level'] = code.base.d_per_level
    return data


def write_code(code: QCCode, directory: Path, stem: str = 'code') -> tuple:
    """Write ``<stem>.alist`` and ``<stem>.json``; returns both paths."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    alist_path = directory / f'{stem}.alist'
    sidecar_path = directory / f'{stem}.json'
    alist_path.write_text(export_alist(code))
    sidecar_path.write_text(json.dumps(sidecar(code), indent=2, sort_keys=True) + '\n')
    logger.info("wrote %s and %s", alist_path, sidecar_path)
    return alist_path, sidecar_path


def read_code(alist_path: Path, sidecar_path: Path) -> QCCode:
    """
    Rebuild a code from its sidecar and check it against the alist.

    Raises:
        ConfigurationError: the files are unreadable or disagree.
    """
    try:
        data = json.loads(Path(sidecar_path).read_text())
        h = import_alist(Path(alist_path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigurationError(f"cannot read code files: {exc}") from exc
    try:
        code = QCCode.from_dict(data)
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigurationError(f"malformed sidecar: {exc}", 'sidecar') from exc
    if h.shape != code.parity_check.shape or (h != code.parity_check).nnz:
        raise ConfigurationError(f"{alist_path} does not match the lifting in {sidecar_path}")
    return code
