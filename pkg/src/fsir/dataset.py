"""Functional datasets and their CSV / JSON file formats."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from typing import Literal, NamedTuple

import numpy as np

from .basis import BasisSpec, analyze_rows

Design = Literal["full_path", "discrete_points"]


class Sample(NamedTuple):
    y: float
    a: np.ndarray


@dataclass(frozen=True, eq=False)
class FunctionalDataset:
    """n sample paths with scalar responses.

    ``full_path`` designs carry basis coefficients in ``x`` (shape n x N);
    ``discrete_points`` designs carry path values at ``points`` (shape n x q).
    """

    y: np.ndarray
    x: np.ndarray
    basis: BasisSpec = field(repr=False)
    design: Design = "full_path"
    points: np.ndarray | None = None

    def __post_init__(self):
        y = np.asarray(self.y, dtype=float).reshape(-1)
        x = np.atleast_2d(np.asarray(self.x, dtype=float))
        if x.shape[0] != y.size:
            raise ValueError(f"{y.size} responses but {x.shape[0]} paths")
        if self.design == "full_path":
            if x.shape[1] != self.basis.n_basis:
                raise ValueError(f"paths have {x.shape[1]} coefficients, basis has {self.basis.n_basis}")
        elif self.design == "discrete_points":
            if self.points is None:
                raise ValueError("discrete_points design needs observation points")
            pts = np.asarray(self.points, dtype=float).reshape(-1)
            if pts.size != x.shape[1]:
                raise ValueError(f"{pts.size} observation points but paths have {x.shape[1]} values")
            if np.any((pts < 0) | (pts > 1)):
                raise ValueError("observation points must lie in [0, 1]")
            object.__setattr__(self, "points", pts)
        else:
            raise ValueError(f"unknown design {self.design!r}")
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "x", x)

    def __len__(self) -> int:
        return self.y.size

    def __getitem__(self, i) -> Sample:
        return Sample(float(self.y[i]), self.x[i])

    def subset(self, idx) -> "FunctionalDataset":
        return FunctionalDataset(self.y[idx], self.x[idx], self.basis, self.design, self.points)

    def coefficients(self) -> np.ndarray:
        """Basis coefficients of every path.

        For a discrete design they are recovered by least squares on the
        observation points, which needs at least n_basis well-spread points.
        """
        if self.design == "full_path":
            return self.x
        if np.array_equal(self.points, self.basis.nodes):
            return analyze_rows(self.x, self.basis)
        Psi = self.basis.evaluate(self.points)
        if Psi.shape[0] < Psi.shape[1] or np.linalg.matrix_rank(Psi) < Psi.shape[1]:
            raise ValueError(
                f"{Psi.shape[0]} observation points cannot determine {Psi.shape[1]} basis coefficients"
            )
        coef, *_ = np.linalg.lstsq(Psi, self.x.T, rcond=None)
        return coef.T

    def observe(self, points) -> "FunctionalDataset":
        """Evaluate full paths at ``points``, giving a discrete design."""
        if self.design != "full_path":
            raise ValueError("can only observe a full_path dataset")
        pts = np.asarray(points, dtype=float).reshape(-1)
        return FunctionalDataset(self.y, self.x @ self.basis.evaluate(pts).T, self.basis, "discrete_points", pts)

    def scaled(self, c: float) -> "FunctionalDataset":
        return FunctionalDataset(self.y, c * self.x, self.basis, self.design, self.points)


def _fmt(v: float) -> str:
    # repr is the shortest string that round-trips
    return repr(float(v))


def write_csv(data: FunctionalDataset, header_comment: dict | None = None) -> str:
    """Render a dataset as CSV text.

    Full-path datasets use columns ``y, a_1..a_N``; discrete designs use
    ``y, x_1..x_q`` with the points kept in a JSON sidecar. An optional leading
    ``#`` line carries metadata as compact JSON.
    """
    buf = io.StringIO()
    if header_comment is not None:
        buf.write("# " + json.dumps(header_comment, sort_keys=True, separators=(",", ":")) + "\n")
    w = csv.writer(buf, lineterminator="\n")
    prefix = "a" if data.design == "full_path" else "x"
    w.writerow(["y"] + [f"{prefix}_{i + 1}" for i in range(data.x.shape[1])])
    for yi, row in zip(data.y, data.x):
        w.writerow([_fmt(yi)] + [_fmt(v) for v in row])
    return buf.getvalue()


def read_csv(text: str, basis: BasisSpec, points=None) -> tuple[FunctionalDataset, dict | None]:
    """Parse CSV written by :func:`write_csv`; returns (dataset, header metadata)."""
    meta = None
    lines = text.splitlines()
    body = []
    for line in lines:
        if line.startswith("#"):
            if meta is None:
                meta = json.loads(line[1:].strip())
            continue
        if line.strip():
            body.append(line)
    if not body:
        raise ValueError("empty dataset file")
    rows = list(csv.reader(body))
    header, rows = rows[0], rows[1:]
    if not header or header[0] != "y":
        raise ValueError("dataset header must start with 'y'")
    if not rows:
        raise ValueError("dataset has no samples")
    arr = np.array(rows, dtype=float)
    design = "discrete_points" if points is not None else "full_path"
    if design == "full_path" and any(not h.startswith("a_") for h in header[1:]):
        raise ValueError("full-path dataset columns must be a_1..a_N")
    return FunctionalDataset(arr[:, 0], arr[:, 1:], basis, design, points), meta
