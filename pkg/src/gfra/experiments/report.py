"""Rate statistics and comma-separated result tables."""

from __future__ import annotations

import math
import platform
import sys
from dataclasses import dataclass

import numpy as np

RATE_GRID_DB = np.round(np.arange(-20.0, 80.0 + 0.25, 0.5), 1)


def ccdf(samples, grid_db=RATE_GRID_DB) -> np.ndarray:
    """Fraction of rate samples strictly above each grid point (grid in dB of bit/s)."""
    r = np.sort(np.asarray(samples, dtype=float))
    if r.size == 0:
        return np.zeros(len(grid_db))
    thresholds = 10.0 ** (np.asarray(grid_db) / 10.0)
    return 1.0 - np.searchsorted(r, thresholds, side="right") / r.size


def likely95(samples) -> float:
    """Rate exceeded by 95% of the samples; NaN for no samples."""
    r = np.asarray(samples, dtype=float)
    return float(np.quantile(r, 0.05)) if r.size else float("nan")


def ergodic(samples) -> float:
    r = np.asarray(samples, dtype=float)
    return float(r.mean()) if r.size else float("nan")


def to_db(x: float) -> float:
    return float(10.0 * np.log10(x)) if x > 0 else -math.inf


@dataclass(frozen=True, eq=False)
class RateReport:
    """Rate samples keyed by ``(scheme, m_c)``, in trial order."""

    samples: dict
    n_trials: int
    n_collided: int

    def keys(self):
        return list(self.samples)

    def likely95(self, scheme: str, m_c: int) -> float:
        return likely95(self.samples[(scheme, m_c)])

    def ergodic(self, scheme: str, m_c: int) -> float:
        return ergodic(self.samples[(scheme, m_c)])

    def ccdf(self, scheme: str, m_c: int) -> np.ndarray:
        return ccdf(self.samples[(scheme, m_c)])

    def write_summary(self, path) -> None:
        with open(path, "w") as fh:
            fh.write("scheme,m_c,n_samples,likely95_bps,likely95_db,ergodic_bps\n")
            for (scheme, m_c), r in self.samples.items():
                l95 = likely95(r)
                fh.write(f"{scheme},{m_c},{len(r)},{l95!r},{to_db(l95)!r},{ergodic(r)!r}\n")

    def write_ccdf(self, path) -> None:
        keys = self.keys()
        cols = [ccdf(self.samples[k]) for k in keys]
        with open(path, "w") as fh:
            fh.write("rate_db," + ",".join(f"{s}@{m}" for s, m in keys) + "\n")
            for i, g in enumerate(RATE_GRID_DB):
                fh.write(f"{g!r}," + ",".join(repr(float(c[i])) for c in cols) + "\n")

    def write_samples(self, path) -> None:
        with open(path, "w") as fh:
            fh.write("scheme,m_c,index,rate_bps\n")
            for (scheme, m_c), r in self.samples.items():
                for i, v in enumerate(r):
                    fh.write(f"{scheme},{m_c},{i},{float(v)!r}\n")


def write_table(path, header, rows) -> None:
    with open(path, "w") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_cell(v) for v in row) + "\n")


def _cell(v) -> str:
    if isinstance(v, str):
        return v
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return repr(float(v))


def versions() -> dict:
    import scipy

    from .. import __version__
    return {"gfra": __version__, "python": sys.version.split()[0], "numpy": np.__version__,
            "scipy": scipy.__version__, "platform": platform.platform()}
