"""Report records shared by the intersection and analysis modules."""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return v
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def to_json(record) -> str:
    """Deterministic JSON text of a report dataclass."""
    return json.dumps(_plain(asdict(record)), sort_keys=True, indent=2)


def linear_fit(x, y) -> tuple:
    """Least-squares line ``y = a + b x``; returns (slope, intercept, slope stderr, rms residual)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    n = len(x)
    if n < 2:
        return math.nan, math.nan, math.nan, math.nan
    xm, ym = x.mean(), y.mean()
    sxx = float(np.sum((x - xm) ** 2))
    if sxx == 0:
        return math.nan, math.nan, math.nan, math.nan
    b = float(np.sum((x - xm) * (y - ym)) / sxx)
    a = float(ym - b * xm)
    res = y - (a + b * x)
    rss = float(np.sum(res**2))
    se = math.sqrt(rss / (n - 2) / sxx) if n > 2 else math.nan
    return b, a, se, math.sqrt(rss / n)


@dataclass
class AnalysisReport:
    """A fitted estimate with its window and residuals.

    Attributes
    ----------
    kind : str
        ``holder``, ``tail-audit`` and so on.
    estimate : float
    secondary : float
        Companion constant (e.g. the Hölder constant ``K``).
    fit_window : tuple
    residual : float
    flags : list of str
    table : dict
        Raw per-scale or per-parameter data.
    """

    kind: str
    estimate: float
    secondary: float = math.nan
    fit_window: tuple = ()
    residual: float = math.nan
    flags: list = field(default_factory=list)
    table: dict = field(default_factory=dict)

    def to_json(self) -> str:
        return to_json(self)


@dataclass
class DimensionFit:
    """Slope of a log-count (or log-sum) against the dyadic level."""

    kind: str
    m_lo: int
    m_hi: int
    levels: list
    values: list
    slope: float
    stderr: float
    residual: float = math.nan

    def to_json(self) -> str:
        return to_json(self)


@dataclass
class SpectrumReport:
    """Dyadic band peaks of Fourier moduli and the fitted decay."""

    bands: list
    peaks: list
    peak_frequencies: list
    sigma: float
    dimension_estimate: float
    stderr: float
    fit_window: tuple
    total_mass: float
    zero_mode: float
    probe: str = "integer"
    flags: list = field(default_factory=list)

    def to_json(self) -> str:
        return to_json(self)
