"""Experiment configuration: JSON schema validation plus model/family cross-checks."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import jsonschema

from .core import SeedPath, ValidationError
from .families import family_from_dict, frostman_exponent
from .io import canonical_json, sha256_bytes
from .models import ModelSpec

__all__ = ["ExperimentConfig", "load_config", "parse_config", "config_schema"]


def config_schema() -> dict:
    text = resources.files("simart").joinpath("data/config.schema.json").read_text()
    return json.loads(text)


@dataclass
class ExperimentConfig:
    """Validated experiment description.

    Attributes
    ----------
    raw : dict
        The configuration as loaded (defaults not filled in).
    model : ModelSpec
    families : list
        ``(id, member)`` pairs.
    depth, replicates : int
    root_seed : int
    overrides : dict
        Replicate index to root seed.
    """

    raw: dict
    model: ModelSpec
    depth: int
    replicates: int
    root_seed: int
    overrides: dict = field(default_factory=dict)
    families: list = field(default_factory=list)
    levels: list = field(default_factory=list)
    regime: str = "limit"
    window: str = "none"
    engine: dict = field(default_factory=dict)
    analyses: list = field(default_factory=list)
    output_dir: str | None = None
    save_realizations: bool = True

    @property
    def config_hash(self) -> str:
        """SHA-256 of the canonical JSON text of the raw configuration."""
        return sha256_bytes(canonical_json(self.raw).encode("utf-8"))

    def seed(self, replicate: int) -> SeedPath:
        """Seed of one replicate: an override root or the node ``(0, replicate)``."""
        if replicate in self.overrides:
            return SeedPath(self.overrides[replicate])
        return SeedPath(self.root_seed).child(0, replicate)

    def partner_seed(self, replicate: int) -> SeedPath:
        """Seed of the independent partner realization used by convolutions."""
        return SeedPath(self.root_seed).child(1, replicate)

    def audit_seed(self, index: int) -> SeedPath:
        """Root node of the replicates drawn by a tail audit."""
        return SeedPath(self.root_seed).child(2, index)

    def family(self, fid: str):
        for i, f in self.families:
            if i == fid:
                return f
        raise ValidationError(f"unknown family id {fid!r}")


def parse_config(raw: dict, seed_override: int | None = None) -> ExperimentConfig:
    """Validate ``raw`` against the schema and the modelling hypotheses."""
    try:
        jsonschema.validate(raw, config_schema())
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ValidationError(f"config schema violation at {where}: {exc.message}") from None
    model = ModelSpec.from_dict(raw["model"])
    depth = int(raw["depth"])
    seeds = raw.get("seeds", {})
    root = int(seeds.get("root", 0)) if seed_override is None else int(seed_override)
    overrides = {int(k): int(v) for k, v in seeds.get("overrides", {}).items()}
    families = []
    seen = set()
    for fd in raw.get("families", []):
        if fd["id"] in seen:
            raise ValidationError(f"duplicate family id {fd['id']!r}")
        seen.add(fd["id"])
        member = family_from_dict(fd)
        dim = getattr(member, "d", None)
        if dim is not None and dim != model.d:
            raise ValidationError(f"family {fd['id']!r} lives in d={dim}, model in d={model.d}")
        families.append((fd["id"], member))
    regime = raw.get("regime", "limit")
    alpha = model.alpha
    for fid, member in families:
        s = frostman_exponent(member)
        if regime == "limit" and not s > alpha:
            raise ValidationError(
                f"family {fid!r} violates the hypothesis s > α (s={s:.6g}, α={alpha:.6g}); "
                "declare regime 'growth' to study divergent masses")
    levels = sorted(set(raw.get("levels", list(range(depth + 1)))))
    if levels and levels[-1] > depth:
        raise ValidationError(f"level {levels[-1]} exceeds depth {depth}")
    analyses = raw.get("analyses", [])
    for i, an in enumerate(analyses):
        if an.get("level", 0) > depth:
            raise ValidationError(f"analysis {i} level exceeds depth {depth}")
        if an["type"] == "tail-audit":
            if "family" not in an:
                raise ValidationError("tail-audit needs a family id")
            fam = [f for fid, f in families if fid == an["family"]]
            if not fam:
                raise ValidationError(f"tail-audit family {an['family']!r} not declared")
            if not frostman_exponent(fam[0]) > alpha:
                raise ValidationError("tail-audit requires the hypothesis s > α")
    ids = [an.get("id", f"{an['type']}-{i}") for i, an in enumerate(analyses)]
    if len(set(ids)) != len(ids):
        raise ValidationError("analysis ids must be unique")
    out = raw.get("output", {})
    return ExperimentConfig(raw, model, depth, int(raw.get("replicates", 1)), root, overrides,
                            families, levels, regime, raw.get("window", "none"),
                            dict(raw.get("engine", {})), analyses, out.get("dir"),
                            bool(out.get("save_realizations", True)))


def load_config(path, seed_override: int | None = None) -> ExperimentConfig:
    """Read and validate a JSON configuration file."""
    text = Path(path).read_text()
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"config is not valid JSON: {exc}") from None
    return parse_config(raw, seed_override)
