"""One-time seeded calibration of the statistical acceptance thresholds.

Writes ``src/simart/data/calibration.json``. The calibration root seed is
disjoint from the acceptance root seed, so the acceptance suite never reuses
the draws that produced its thresholds.

Usage::

    python3 scripts/calibrate.py [--out PATH]
"""

from __future__ import annotations

import argparse
import json
import math
import time
from pathlib import Path

import numpy as np
from scipy import stats

from simart import __version__
from simart.analysis import increment_tail_audit
from simart.core import SeedPath
from simart.experiments import (cutout_box_dimensions, line_decay_slopes, projection_contrast,
                                salem_convolution_sups, salem_fourier_estimates,
                                sumset_detections)
from simart.families import PlaneParam
from simart.models import ModelSpec

CALIBRATION_ROOT = 271828182
# one-sided tail probability of a three-standard-error normal bound
TAIL = float(stats.norm.sf(3.0))

# sizes used by the acceptance suite
DECAY_TEST_REPLICATES = 100
SUMSET_TEST_PAIRS = 50
TAIL_TEST_REPLICATES = 10_000


def calibrate_decay(seed: SeedPath, replicates: int = 2000, boot: int = 4000) -> dict:
    """Window for the median decay slope of 100 surviving lines.

    The window is the calibration median plus or minus four bootstrap standard
    errors of a 100-replicate median.
    """
    slopes = line_decay_slopes(0.5, 12, replicates, seed)
    ok = slopes[np.isfinite(slopes)]
    rng = np.random.default_rng(np.random.SeedSequence(seed.root_seed, spawn_key=seed.path + (1,)))
    meds = np.median(rng.choice(ok, size=(boot, DECAY_TEST_REPLICATES)), axis=1)
    se = float(meds.std(ddof=1))
    med = float(np.median(ok))
    return {"depth": 12, "alpha": 0.5, "replicates": replicates, "defined": int(ok.size),
            "median": med, "se_median_100": se, "window": [med - 4 * se, med + 4 * se]}


def calibrate_projection(seed: SeedPath) -> dict:
    out = projection_contrast(0.9, 8, seed)
    return {"p": 0.9, "depth": 8, "seed": seed.to_list(), "observed": out, "factor_min": 5.0}


def calibrate_sumset(seed: SeedPath, pairs: int = 400) -> dict:
    """Pinned detection fraction for 50 pairs.

    Wilson lower bound (z = 3) on the calibration frequency, then the
    three-sigma lower binomial quantile of a 50-pair frequency at that rate.
    """
    hits = sumset_detections(2**-0.4, 12, pairs, seed)
    k, n, z = int(hits.sum()), pairs, 3.0
    p = k / n
    centre = (p + z * z / (2 * n)) / (1 + z * z / n)
    half = z * math.sqrt(p * (1 - p) / n + z * z / (4 * n * n)) / (1 + z * z / n)
    p_lo = max(0.0, centre - half)
    pinned = float(stats.binom.ppf(TAIL, SUMSET_TEST_PAIRS, p_lo)) / SUMSET_TEST_PAIRS
    return {"p": 2**-0.4, "depth": 12, "pairs": pairs, "detections": k, "frequency": p,
            "wilson_lower": p_lo, "pinned_fraction": pinned,
            "threshold_fraction": 0.1, "min_coarse_cells": 4}


def calibrate_tail(seed: SeedPath, replicates: int = 40_000) -> dict:
    """Pinned lower bound for the kappa 0.5 / kappa 1.0 frequency ratio.

    The ratio is the reciprocal of the conditional exceedance probability
    ``P(kappa=1 | kappa=0.5)``; the bound adds three binomial standard errors
    for the number of kappa=0.5 events expected in a 10**4-replicate run.
    """
    model = ModelSpec("ball-cutout", 2, {"alpha": 0.5})
    line = PlaneParam.line([0.0, 0.0], [1.0, 0.0])
    kappas = [0.25, 0.5, 1.0, 2.0]
    rep = increment_tail_audit(model, line, 6, kappas, replicates, seed)
    counts = dict(zip(kappas, rep.table["count"]))
    c05, c1 = counts[0.5], counts[1.0]
    q = c1 / c05
    expected = c05 * TAIL_TEST_REPLICATES / replicates
    q_hi = q + 3 * math.sqrt(q * (1 - q) / expected)
    return {"n": 6, "replicates": replicates, "kappas": kappas, "counts": rep.table["count"],
            "ratio": c05 / c1 if c1 else math.inf, "conditional": q,
            "pinned_ratio": 1.0 / q_hi}


def observe_box_dimension(seed: SeedPath, survivors: int = 10) -> dict:
    fits, extinct = cutout_box_dimensions(0.5, 12, 8192, survivors, seed)
    dims = [f.slope for f in fits]
    return {"survivors": survivors, "extinct": extinct, "median": float(np.median(dims)),
            "values": dims}


def observe_salem(seed: SeedPath, replicates: int = 20) -> dict:
    est = salem_fourier_estimates(0.6, 14, 2**12, replicates, seed.child(0))
    sups = salem_convolution_sups(0.6, [12, 14], replicates, seed.child(1))
    rel = np.abs(sups[:, 1] - sups[:, 0]) / sups[:, 0]
    return {"fourier_median": float(np.median(est)), "fourier_values": est.tolist(),
            "sup12": sups[:, 0].tolist(), "sup14": sups[:, 1].tolist(),
            "median_relative_change": float(np.median(rel))}


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    default = Path(__file__).resolve().parents[1] / "src" / "simart" / "data" / "calibration.json"
    ap.add_argument("--out", type=Path, default=default)
    args = ap.parse_args(argv)
    root = SeedPath(CALIBRATION_ROOT)
    t0 = time.perf_counter()
    result = {
        "root_seed": CALIBRATION_ROOT,
        "version": __version__,
        "tail_probability": TAIL,
        "decay": calibrate_decay(root.child(5)),
        "projection": calibrate_projection(root.child(6)),
        "sumset": calibrate_sumset(root.child(9)),
        "tail_audit": calibrate_tail(root.child(10)),
        "box_dimension": observe_box_dimension(root.child(2)),
        "salem": observe_salem(root.child(7)),
    }
    if not result["decay"]["window"][1] < 0:
        raise SystemExit("calibrated decay window does not exclude zero")
    if not result["sumset"]["pinned_fraction"] > 0:
        raise SystemExit("calibrated sumset fraction is not positive")
    if not result["tail_audit"]["pinned_ratio"] > 1:
        raise SystemExit("calibrated tail ratio is not above 1")
    if not result["projection"]["observed"]["factor"] >= 5:
        raise SystemExit("projection contrast below 5 on the pinned seed")
    args.out.write_text(json.dumps(result, indent=2, sort_keys=True) + "\n")
    print(f"wrote {args.out} in {time.perf_counter() - t0:.1f} s")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
