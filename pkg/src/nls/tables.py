"""Two-column numeric CSV reader shared by tabulated symbols and potentials."""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

from .errors import ArgumentOutOfDomain


def read_two_columns(path: str | Path) -> tuple[np.ndarray, np.ndarray]:
    rows = []
    with open(path, newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            cells = [c.strip() for c in row if c.strip()]
            if not cells or cells[0].startswith("#"):
                continue
            if len(cells) != 2:
                raise ArgumentOutOfDomain(f"{path}:{lineno}: expected two columns, got {len(cells)}")
            try:
                rows.append((float(cells[0]), float(cells[1])))
            except ValueError:
                if rows:
                    raise ArgumentOutOfDomain(f"{path}:{lineno}: non-numeric row {cells}") from None
                # header line
    if not rows:
        raise ArgumentOutOfDomain(f"{path}: no numeric rows")
    data = np.array(rows)
    return data[:, 0], data[:, 1]
