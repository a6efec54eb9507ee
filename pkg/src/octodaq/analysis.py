"""Agreement analysis between acquired series and references.

Mirrors the bench methodology of plotting two humidity/temperature
records against each other: align the second series onto the first's
time grid by linear interpolation, then summarize the differences.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class AlignmentError(ValueError):
    """The two series share no overlapping time range."""


@dataclass
class Series:
    """A unit-labelled time series with strictly increasing times."""

    unit: str
    times: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if self.times.ndim != 1 or self.times.shape != self.values.shape:
            raise ValueError("times and values must be 1-D and the same length")
        if len(self.times) and not np.all(np.diff(self.times) > 0):
            raise ValueError("times must be strictly increasing")

    def __len__(self) -> int:
        return len(self.times)

    @classmethod
    def from_pairs(cls, pairs, unit: str = "") -> "Series":
        pts = list(pairs)
        times = [t for t, _ in pts]
        values = [v for _, v in pts]
        return cls(unit, np.array(times, dtype=float), np.array(values, dtype=float))


@dataclass
class AgreementStats:
    max_abs_diff: float
    mean_abs_diff: float
    rmse: float
    n_points: int

    def to_dict(self) -> dict:
        return {
            "max_abs_diff": self.max_abs_diff,
            "mean_abs_diff": self.mean_abs_diff,
            "rmse": self.rmse,
            "n_points": self.n_points,
        }


def align(a: Series, b: Series) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Pair a's samples with b interpolated at a's times.

    Only a-times inside b's span are kept (no extrapolation).  Returns
    (times, a_values, b_values).
    """
    if len(a) == 0 or len(b) == 0:
        raise AlignmentError("cannot align an empty series")
    mask = (a.times >= b.times[0]) & (a.times <= b.times[-1])
    if not mask.any():
        raise AlignmentError(
            f"no overlap: a spans [{a.times[0]}, {a.times[-1]}], "
            f"b spans [{b.times[0]}, {b.times[-1]}]"
        )
    t = a.times[mask]
    return t, a.values[mask], np.interp(t, b.times, b.values)


def compare(a: Series, b: Series) -> AgreementStats:
    """Agreement statistics over the aligned pairs of a and b."""
    _, av, bv = align(a, b)
    diff = np.abs(av - bv)
    return AgreementStats(
        max_abs_diff=float(diff.max()),
        mean_abs_diff=float(diff.mean()),
        rmse=float(np.sqrt(np.mean((av - bv) ** 2))),
        n_points=int(len(diff)),
    )


def write_comparison_csv(path, times, a_values, b_values) -> None:
    """Plot-ready CSV of the aligned pair: time, a, b, diff."""
    a = np.asarray(a_values, dtype=float)
    b = np.asarray(b_values, dtype=float)
    with open(path, "w", newline="") as fh:
        fh.write("time_s,a,b,diff\n")
        for t, x, y in zip(np.asarray(times, dtype=float), a, b):
            fh.write(f"{t:.6g},{x:.6g},{y:.6g},{x - y:.6g}\n")
