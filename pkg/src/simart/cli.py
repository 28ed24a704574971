"""Command line entry point: seeded experiment batches, persisted outputs and renders.

Exit codes: 0 success, 1 other library error, 2 configuration or hypothesis
violation, 3 resource cap exceeded, 4 I/O failure.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import platform
import sys
import time
import warnings
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__, kernels
from .analysis import (
    box_dimension,
    convolve,
    correlation_dimension,
    fourier_dimension_estimate,
    increment_tail_audit,
    sumset_interior,
)
from .config import ExperimentConfig, load_config
from .core import ResourceError, SeedPath, SimartError, ValidationError
from .cutout import CutoutRealization, density_raster, pixel_centers, raster_kill_levels
from .intersect import mass_sequence, projection_profile, sampling_window
from .io import canonical_json, sha256_bytes, tree_hashes, write_csv, write_pgm16
from .models import dump_realization, load_realization, realize
from .reports import _plain
from .subdivision import SubdivisionTree, density_field

EXIT_OK, EXIT_ERROR, EXIT_SCHEMA, EXIT_RESOURCE, EXIT_IO = 0, 1, 2, 3, 4

STAGES = ("simulate", "intersect", "project", "dimension", "fourier", "convolve", "tail-audit",
          "render")
_STAGE_OF = {"projection": "project", "box-dimension": "dimension",
             "correlation-dimension": "dimension", "fourier": "fourier", "convolve": "convolve",
             "tail-audit": "tail-audit", "render": "render"}


# ---------------------------------------------------------------------------
# realization handling


def _window(cfg: ExperimentConfig):
    if cfg.window != "family" or not cfg.model.is_cutout or not cfg.families:
        return None
    boxes = [sampling_window(cfg.model, f) for _, f in cfg.families]
    lo = np.min([b[0] for b in boxes], axis=0)
    hi = np.max([b[1] for b in boxes], axis=0)
    return lo, hi


def _cache_path(cfg: ExperimentConfig, seed: SeedPath, window):
    cache = os.environ.get("SIMART_CACHE")
    if not cache:
        return None
    key = canonical_json({
        "model": cfg.model.to_dict(), "seed": seed.to_list(), "depth": cfg.depth,
        "window": None if window is None else [np.asarray(w).tolist() for w in window],
        "version": __version__,
    })
    return Path(cache) / (sha256_bytes(key.encode()) + ".real")


def obtain_realization(cfg: ExperimentConfig, seed: SeedPath, window=None):
    """Realization for ``seed``, read from ``$SIMART_CACHE`` when present there."""
    path = _cache_path(cfg, seed, window)
    if path is not None and path.exists():
        return load_realization(path.read_text())
    real = realize(cfg.model, seed, cfg.depth, window)
    if path is not None:
        path.parent.mkdir(parents=True, exist_ok=True)
        tmp = path.with_suffix(".tmp")
        tmp.write_text(dump_realization(real))
        tmp.replace(path)
    return real


class Batch:
    """Replicate realizations of one configuration, produced lazily and in order."""

    def __init__(self, cfg: ExperimentConfig, threads: int = 1, stored: Path | None = None):
        self.cfg = cfg
        self.threads = max(1, int(threads))
        self.window = _window(cfg)
        self.stored = stored
        self._reals = None

    def map(self, fn, items):
        """Apply ``fn`` over ``items`` on the worker pool; results keep input order."""
        items = list(items)
        if self.threads == 1 or len(items) < 2:
            return [fn(i) for i in items]
        with ThreadPoolExecutor(self.threads) as pool:
            return list(pool.map(fn, items))

    def _load_or_draw(self, r: int):
        seed = self.cfg.seed(r)
        if self.stored is not None:
            for ext in ("json", "tree"):
                path = self.stored / f"rep_{r:04d}.{ext}"
                if path.exists():
                    real = load_realization(path.read_text())
                    if real.seed == seed and real.depth == self.cfg.depth:
                        return real
        return obtain_realization(self.cfg, seed, self.window)

    def realizations(self):
        """Replicates in order; stored files from an earlier simulate stage are reused."""
        if self._reals is None:
            self._reals = self.map(self._load_or_draw, range(self.cfg.replicates))
        return self._reals


# ---------------------------------------------------------------------------
# stages


def _write_json(path: Path, obj) -> None:
    path.write_text(json.dumps(_plain(obj), sort_keys=True, indent=2) + "\n")


def stage_simulate(batch: Batch, out: Path) -> None:
    cfg = batch.cfg
    rows = []
    rdir = out / "realizations"
    if cfg.save_realizations:
        rdir.mkdir(parents=True, exist_ok=True)
    for r, real in enumerate(batch.realizations()):
        seed = cfg.seed(r)
        if isinstance(real, CutoutRealization):
            size, ext = len(real), "json"
            mass = math.nan
        else:
            size, ext = real.cell_count(real.depth), "tree"
            mass = real.total_mass(real.depth)
        if cfg.save_realizations:
            (rdir / f"rep_{r:04d}.{ext}").write_text(dump_realization(real))
        rows.append((r, seed.to_text(), size, mass))
    write_csv(out / "simulate.csv", ["replicate", "seed", "size", "total_mass"], rows)


def stage_intersect(batch: Batch, out: Path) -> None:
    cfg = batch.cfg
    if not cfg.families:
        return
    eng = cfg.engine
    n_max = max(cfg.levels) if cfg.levels else cfg.depth

    def one(r):
        real = batch.realizations()[r]
        res = []
        for fid, fam in cfg.families:
            # growth-regime runs are declared in the config; the tag lands in the report
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                seq = mass_sequence(real, fam, n_max, eng.get("method", "auto"),
                                    eng.get("tol", 1e-3), eng.get("step", 1e-3),
                                    eng.get("diam_tol"), eng.get("weighted", False), fid)
            res.append(seq)
        return res

    seqs = batch.map(one, range(cfg.replicates))
    rows, summary = [], []
    for r, per in enumerate(seqs):
        seed = cfg.seed(r).to_text()
        for seq in per:
            for n in cfg.levels:
                inc = seq.increments[n] if n < len(seq.increments) else ""
                rows.append((r, seed, seq.family_id, n, seq.values[n], inc, seq.method))
            summary.append({"replicate": r, "seed": seed, "family_id": seq.family_id,
                            "method": seq.method, "regime": seq.regime,
                            "decay_slope": seq.decay_slope, "growth_slope": seq.growth_slope,
                            "fit_window": list(seq.fit_window), "final": seq.limit})
    write_csv(out / "masses.csv",
              ["replicate", "seed", "family_id", "n", "Y", "increment", "method"], rows)
    slopes = [s["decay_slope"] for s in summary if math.isfinite(s["decay_slope"])]
    _write_json(out / "reports" / "masses.json", {
        "sequences": summary,
        "median_decay_slope": float(np.median(slopes)) if slopes else math.nan,
    })


def _analysis_id(an, i):
    return an.get("id", f"{an['type']}-{i}")


def stage_project(batch: Batch, out: Path, an: dict, aid: str) -> None:
    cfg = batch.cfg
    level = an.get("level", cfg.depth)
    direction = an.get("direction", [1.0] + [0.0] * (cfg.model.d - 1))
    gp = an.get("grid_points", 256)

    def one(r):
        return projection_profile(batch.realizations()[r], direction, level, gp)

    profs = batch.map(one, range(cfg.replicates))
    rows, summary = [], []
    for r, p in enumerate(profs):
        seed = cfg.seed(r).to_text()
        for t, v in zip(p.offsets, p.values):
            rows.append((r, seed, t, v))
        jumps = p.jumps()
        summary.append({"replicate": r, "seed": seed, "riemann_mass": p.riemann_mass,
                        "total_mass": p.total_mass, "mass_defect": p.mass_defect,
                        "max_jump": float(jumps.max()) if len(jumps) else 0.0,
                        "median_jump": float(np.median(jumps)) if len(jumps) else 0.0,
                        "method": p.method})
    write_csv(out / f"{aid}.csv", ["replicate", "seed", "t", "f"], rows)
    _write_json(out / "reports" / f"{aid}.json",
                {"direction": direction, "level": level, "grid_points": gp, "profiles": summary})


def alive_mask(real, level: int, resolution: int):
    """Boolean raster of the level-``level`` support over the seed domain's square."""
    if isinstance(real, CutoutRealization):
        if real.d != 2:
            raise ValidationError("cutout rasters need d = 2")
        if all(k == 0 for k in np.unique(real.kinds)) and real.window is None:
            kill = raster_kill_levels(real.spec, real.domain, level, real.seed, resolution)
            inside = real.domain.contains(pixel_centers(real.domain, resolution))
            return (kill.ravel() > level) & inside
        return (density_raster(real, level, resolution) > 0).ravel()
    raise ValidationError("masks are built for cutout realizations")


def stage_dimension(batch: Batch, out: Path, an: dict, aid: str) -> None:
    cfg = batch.cfg
    level = an.get("level", cfg.depth)
    fw = an.get("fit_window")
    kind = an["type"]

    def one(r):
        real = batch.realizations()[r]
        if isinstance(real, SubdivisionTree):
            if real.cell_count(level) == 0:
                return None
            sub = [real.index[m] for m in range(level + 1)]
            if kind == "box-dimension":
                return box_dimension(sub, fw)
            return correlation_dimension([real.cell_masses(m) for m in range(level + 1)], fw)
        res = an.get("resolution", 2 ** (level + 1))
        mask = alive_mask(real, level, res).reshape(res, res)
        if not mask.any():
            return None
        if kind == "box-dimension":
            return box_dimension(mask, fw)
        raise ValidationError("correlation dimension needs a dyadic model")

    fits = batch.map(one, range(cfg.replicates))
    rows = []
    for r, f in enumerate(fits):
        seed = cfg.seed(r).to_text()
        if f is None:
            rows.append((r, seed, "extinct", "", ""))
        else:
            rows.append((r, seed, "ok", f.slope, f.stderr))
    write_csv(out / f"{aid}.csv", ["replicate", "seed", "status", "slope", "stderr"], rows)
    ok = [f.slope for f in fits if f is not None]
    _write_json(out / "reports" / f"{aid}.json", {
        "kind": kind, "level": level, "fit_window": fw, "surviving": len(ok),
        "median": float(np.median(ok)) if ok else math.nan,
        "fits": [None if f is None else _plain(f.__dict__) for f in fits]})


def stage_fourier(batch: Batch, out: Path, an: dict, aid: str) -> None:
    cfg = batch.cfg
    level = an.get("level", cfg.depth)
    k_max = an.get("k_max", 2 ** max(5, level - 2))
    probe = an.get("probe", "integer")
    fw = an.get("fit_window")

    def one(r):
        real = batch.realizations()[r]
        return fourier_dimension_estimate(real, level, k_max, probe, fw)

    reps = batch.map(one, range(cfg.replicates))
    rows = []
    for r, rep in enumerate(reps):
        seed = cfg.seed(r).to_text()
        for b, pk in zip(rep.bands, rep.peaks):
            rows.append((r, seed, b, pk))
    write_csv(out / f"{aid}.csv", ["replicate", "seed", "band", "peak"], rows)
    est = [x.dimension_estimate for x in reps if math.isfinite(x.dimension_estimate)]
    _write_json(out / "reports" / f"{aid}.json", {
        "level": level, "k_max": k_max, "probe": probe,
        "median_dimension_estimate": float(np.median(est)) if est else math.nan,
        "reports": [_plain(x.__dict__) for x in reps]})


def stage_convolve(batch: Batch, out: Path, an: dict, aid: str) -> None:
    cfg = batch.cfg
    level = an.get("level", cfg.depth)
    coarse = an.get("coarse_level", max(level - 2, 0))
    S = an.get("S")
    partner = an.get("partner", "self")
    frac = an.get("threshold_fraction", 0.5)
    min_cells = an.get("min_coarse_cells", 0)
    res_default = 2 ** level if not cfg.model.is_cutout else 2 ** (level + 2)

    def one(r):
        a = batch.realizations()[r]
        same = partner == "self"
        b = a if same else obtain_realization(cfg, cfg.partner_seed(r), batch.window)
        res = an.get("resolution", res_default)
        g = convolve(a, b, S, res, same, n=level)
        res_c = max(2, res >> (level - coarse)) if not cfg.model.is_cutout else res
        gc = convolve(a, b, S, res_c, same, n=coarse)
        rep = sumset_interior(g, frac, gc, min_cells)
        return g, gc, rep

    outs = batch.map(one, range(cfg.replicates))
    rows = []
    for r, (g, gc, rep) in enumerate(outs):
        seed = cfg.seed(r).to_text()
        rows.append((r, seed, g.sup, gc.sup, g.mass, int(not rep.empty),
                     rep.low[0] if rep.low else "", rep.high[0] if rep.high else "",
                     ";".join(g.flags)))
    write_csv(out / f"{aid}.csv", ["replicate", "seed", "sup", "sup_coarse", "mass",
                                   "interior", "low0", "high0", "flags"], rows)
    _write_json(out / "reports" / f"{aid}.json", {
        "level": level, "coarse_level": coarse, "partner": partner,
        "threshold_fraction": frac,
        "interior_fraction": float(np.mean([not o[2].empty for o in outs])),
        "median_sup": float(np.median([o[0].sup for o in outs])),
        "median_sup_coarse": float(np.median([o[1].sup for o in outs])),
        "sumsets": [_plain(o[2].__dict__) for o in outs]})


def stage_tail_audit(batch: Batch, out: Path, an: dict, aid: str, index: int) -> None:
    cfg = batch.cfg
    fam = cfg.family(an["family"])
    seed = cfg.audit_seed(index)
    rep = increment_tail_audit(cfg.model, fam, an.get("level", min(6, cfg.depth - 1)),
                               an.get("kappas", [0.25, 0.5, 1.0, 2.0]),
                               an.get("replicates", cfg.replicates), seed)
    tab = rep.table
    # rows aggregate replicates seed.child(0 .. replicates - 1)
    write_csv(out / f"{aid}.csv", ["seed", "replicates", "kappa", "count", "frequency", "x"],
              [(seed.to_text(), tab["replicates"], k, c, f, x)
               for k, c, f, x in zip(tab["kappa"], tab["count"], tab["frequency"], tab["x"])])
    _write_json(out / "reports" / f"{aid}.json", rep.__dict__)


def render_array(real, level: int, resolution: int) -> np.ndarray:
    """Raster of ``mu_level`` with row ``j`` at height ``y_j`` (row 0 lowest)."""
    if real.d != 2:
        raise ValidationError("render needs d = 2")
    if isinstance(real, SubdivisionTree):
        return density_field(real, level, resolution).T
    return density_raster(real, level, resolution)


def stage_render(batch: Batch, out: Path, an: dict, aid: str) -> None:
    cfg = batch.cfg
    level = an.get("level", cfg.depth)
    res = an.get("resolution", 512)
    count = min(an.get("max_replicates", 1), cfg.replicates)
    rdir = out / "renders"
    rdir.mkdir(parents=True, exist_ok=True)
    for r in range(count):
        write_pgm16(rdir / f"{aid}_rep{r:04d}.pgm", render_array(batch.realizations()[r], level, res))


# ---------------------------------------------------------------------------
# orchestration


def _versions() -> dict:
    import scipy

    return {"simart": __version__, "numpy": np.__version__, "scipy": scipy.__version__,
            "python": platform.python_version(), "kernel_backend": kernels.BACKEND}


def run_stages(cfg: ExperimentConfig, out: Path, stages, threads: int = 1,
               seed_override=None) -> dict:
    """Run the requested stages and write ``manifest.json`` plus ``timing.json``."""
    out.mkdir(parents=True, exist_ok=True)
    (out / "reports").mkdir(exist_ok=True)
    batch = Batch(cfg, threads, out / "realizations")
    timing = {}
    t_all = time.perf_counter()

    def timed(name, fn, *args):
        t0 = time.perf_counter()
        fn(*args)
        timing[name] = time.perf_counter() - t0

    if "simulate" in stages:
        timed("simulate", stage_simulate, batch, out)
    if "intersect" in stages:
        timed("intersect", stage_intersect, batch, out)
    for i, an in enumerate(cfg.analyses):
        stage = _STAGE_OF[an["type"]]
        if stage not in stages:
            continue
        aid = _analysis_id(an, i)
        if stage == "project":
            timed(aid, stage_project, batch, out, an, aid)
        elif stage == "dimension":
            timed(aid, stage_dimension, batch, out, an, aid)
        elif stage == "fourier":
            timed(aid, stage_fourier, batch, out, an, aid)
        elif stage == "convolve":
            timed(aid, stage_convolve, batch, out, an, aid)
        elif stage == "tail-audit":
            timed(aid, stage_tail_audit, batch, out, an, aid, i)
        elif stage == "render":
            timed(aid, stage_render, batch, out, an, aid)
    timing["total"] = time.perf_counter() - t_all
    # wall time lives outside the manifest so reruns hash identically
    _write_json(out / "timing.json", {"wall_seconds": timing})
    manifest = {
        "config_hash": cfg.config_hash,
        "config": cfg.raw,
        "seed_root": cfg.root_seed,
        "seed_override": seed_override,
        "stages": [s for s in STAGES if s in stages],
        "versions": _versions(),
        "files": tree_hashes(out, exclude=("manifest.json", "timing.json")),
    }
    _write_json(out / "manifest.json", manifest)
    return manifest


def _output_dir(args, cfg: ExperimentConfig) -> Path:
    if args.out:
        return Path(args.out)
    if cfg.output_dir:
        return Path(cfg.output_dir)
    raise ValidationError("no output directory: pass --out or set output.dir")


def cmd_config_stage(args, stages) -> int:
    cfg = load_config(args.config, args.seed_override)
    run_stages(cfg, _output_dir(args, cfg), stages, args.threads, args.seed_override)
    return EXIT_OK


def cmd_render(args) -> int:
    text = Path(args.realization).read_text()
    real = load_realization(text)
    if real.d != 2:
        raise ValidationError("render needs d = 2")
    level = real.depth if args.level is None else args.level
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    write_pgm16(out, render_array(real, level, args.resolution))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="simart", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"simart {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--config", required=True, help="experiment JSON file")
        sp.add_argument("--out", help="output directory (overrides output.dir)")
        sp.add_argument("--threads", type=int, default=1, help="worker threads for replicates")
        sp.add_argument("--seed-override", type=int, default=None, dest="seed_override",
                        help="replace the configured root seed")

    common(sub.add_parser("run", help="run every stage of a configuration"))
    for name in STAGES[:-1]:
        common(sub.add_parser(name, help=f"run the {name} stage only"))
    sp = sub.add_parser("render", help="write a 16-bit PGM of a stored realization")
    sp.add_argument("realization", help="file written by the simulate stage")
    sp.add_argument("--level", type=int, default=None)
    sp.add_argument("--resolution", type=int, default=512)
    sp.add_argument("--out", required=True, help="output .pgm path")
    sp.add_argument("--config", help=argparse.SUPPRESS)
    sp.add_argument("--threads", type=int, default=1, help=argparse.SUPPRESS)
    sp.add_argument("--seed-override", type=int, default=None, dest="seed_override",
                    help=argparse.SUPPRESS)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "render":
            return cmd_render(args)
        if args.command == "run":
            stages = STAGES
        else:
            stages = (args.command,)
        return cmd_config_stage(args, stages)
    except ValidationError as exc:
        print(f"simart: invalid input: {exc}", file=sys.stderr)
        return EXIT_SCHEMA
    except ResourceError as exc:
        print(f"simart: resource cap: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except OSError as exc:
        print(f"simart: I/O failure: {exc}", file=sys.stderr)
        return EXIT_IO
    except SimartError as exc:
        print(f"simart: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
