"""Sampled monotone scalar curves shared by the SE, modem, code and rate modules."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = ["TransferCurve", "pav_decreasing"]


def pav_decreasing(y: np.ndarray) -> np.ndarray:
    """Project y onto the nonincreasing cone (pool adjacent violators)."""
    y = np.asarray(y, dtype=float)
    # PAV for nonincreasing = PAV for nondecreasing on the reversed array
    z = y[::-1].copy()
    w = np.ones_like(z)
    # blocks as (value, weight) merged while decreasing
    vals: list[float] = []
    wts: list[float] = []
    for v, ww in zip(z, w):
        vals.append(v)
        wts.append(ww)
        while len(vals) > 1 and vals[-2] > vals[-1]:
            v2, w2 = vals.pop(), wts.pop()
            v1, w1 = vals.pop(), wts.pop()
            vals.append((v1 * w1 + v2 * w2) / (w1 + w2))
            wts.append(w1 + w2)
    out = np.concatenate([np.full(int(ww), v) for v, ww in zip(vals, wts)])
    return out[::-1]


@dataclass(frozen=True)
class TransferCurve:
    """A sampled scalar function with a declared monotonicity direction.

    `x` must be strictly ascending.  `direction` is "decreasing", "increasing"
    or "none".  Measured curves carry per-sample standard errors in `stderr`,
    which set the tolerance used when the monotonicity invariant is checked.
    """

    x: np.ndarray
    y: np.ndarray
    direction: str = "decreasing"
    stderr: np.ndarray | None = field(default=None)

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float)
        y = np.asarray(self.y, dtype=float)
        if x.ndim != 1 or x.shape != y.shape or x.size < 2:
            raise ValueError("curve needs matching 1-d x/y with at least 2 samples")
        if not np.all(np.diff(x) > 0):
            raise ValueError("abscissas must be strictly ascending")
        if self.direction not in ("decreasing", "increasing", "none"):
            raise ValueError(f"unknown direction {self.direction!r}")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)
        if self.stderr is not None:
            se = np.asarray(self.stderr, dtype=float)
            if se.shape != x.shape:
                raise ValueError("stderr shape mismatch")
            object.__setattr__(self, "stderr", se)
        self.check_monotone()

    # -- evaluation ---------------------------------------------------------

    def __call__(self, xq) -> np.ndarray | float:
        """Linear interpolation, clamped to the boundary values outside the grid."""
        return np.interp(xq, self.x, self.y)

    def inverse(self, level: float) -> float:
        """Abscissa of the first grid crossing of `level` (monotone curves only)."""
        if self.direction == "none":
            raise ValueError("inverse needs a monotone curve")
        y = self.y
        if self.direction == "decreasing":
            idx = np.nonzero(y <= level)[0]
            if idx.size == 0:
                raise ValueError(f"curve never reaches level {level}")
            i = idx[0]
        else:
            idx = np.nonzero(y >= level)[0]
            if idx.size == 0:
                raise ValueError(f"curve never reaches level {level}")
            i = idx[0]
        if i == 0:
            return float(self.x[0])
        x0, x1, y0, y1 = self.x[i - 1], self.x[i], y[i - 1], y[i]
        if y1 == y0:
            return float(x1)
        return float(x0 + (level - y0) * (x1 - x0) / (y1 - y0))

    # -- invariants ---------------------------------------------------------

    def check_monotone(self, n_sigma: float = 3.0) -> None:
        """Raise if ordinates violate the declared direction beyond noise tolerance."""
        if self.direction == "none":
            return
        d = np.diff(self.y)
        if self.stderr is not None:
            tol = n_sigma * np.hypot(self.stderr[:-1], self.stderr[1:])
        else:
            tol = 1e-12 * (1.0 + np.abs(self.y[:-1]))
        bad = d > tol if self.direction == "decreasing" else d < -tol
        if np.any(bad):
            i = int(np.nonzero(bad)[0][0])
            raise ValueError(
                f"curve not {self.direction} at x={self.x[i]:g}->{self.x[i + 1]:g} "
                f"(dy={d[i]:g}, tol={tol if np.isscalar(tol) else tol[i]:g})"
            )

    def smoothed(self) -> "TransferCurve":
        """Monotone (isotonic) projection of the ordinates; keeps grid and stderr."""
        if self.direction == "decreasing":
            ys = pav_decreasing(self.y)
        elif self.direction == "increasing":
            ys = -pav_decreasing(-self.y)
        else:
            ys = self.y.copy()
        return TransferCurve(self.x, ys, self.direction, self.stderr)

    # -- I/O ------------------------------------------------------------------

    def to_csv(self, path) -> None:
        """Two-column CSV (abscissa, ordinate); stderr appended when present."""
        cols = [self.x, self.y]
        header = "x,y"
        if self.stderr is not None:
            cols.append(self.stderr)
            header += ",stderr"
        np.savetxt(path, np.column_stack(cols), delimiter=",", header=header, comments="")

    @classmethod
    def from_csv(cls, path, direction: str = "decreasing") -> "TransferCurve":
        data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
        se = data[:, 2] if data.shape[1] > 2 else None
        return cls(data[:, 0], data[:, 1], direction, se)
