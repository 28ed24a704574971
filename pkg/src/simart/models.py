"""Model descriptions and the single entry point that draws a realization."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .core import SeedPath, ValidationError, ball_volume
from .cutout import (
    CutoutRealization,
    Domain,
    IntensitySpec,
    alpha_of_intensity,
    canonical_domain,
    sample_cutouts,
)
from .subdivision import (
    SalemLineSpec,
    SubdivisionTree,
    WeightLaw,
    generate_cascade,
    generate_percolation,
    generate_salem_line,
)

MODEL_KINDS = ("ball-cutout", "snowflake-cutout", "cutout", "percolation", "cascade", "salem-line")


@dataclass(frozen=True)
class ModelSpec:
    """One random-measure model.

    Attributes
    ----------
    kind : str
        One of ``MODEL_KINDS``.
    d : int
    params : dict
        ``ball-cutout``: ``alpha`` or ``r``; ``snowflake-cutout``: ``alpha`` or
        ``r`` and ``rotated``; ``cutout``: ``atoms``; ``percolation``: ``p``;
        ``cascade``: ``values`` and ``probs``; ``salem-line``: ``alpha0``.
    """

    kind: str
    d: int = 2
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in MODEL_KINDS:
            raise ValidationError(f"unknown model kind {self.kind!r}")
        if self.d not in (1, 2, 3):
            raise ValidationError("d must be 1, 2 or 3")
        if self.kind == "salem-line" and self.d != 1:
            raise ValidationError("the Salem-line model lives in d = 1")
        if self.kind == "snowflake-cutout" and self.d != 2:
            raise ValidationError("snowflake models live in d = 2")
        # build once to validate parameters
        if self.is_cutout:
            self.intensity()
        elif self.kind == "cascade":
            WeightLaw(tuple(self.params["values"]), tuple(self.params["probs"]))
        elif self.kind == "percolation":
            WeightLaw.percolation(float(self.params["p"]))
        else:
            SalemLineSpec(float(self.params["alpha0"]), 0)

    @property
    def is_cutout(self) -> bool:
        return self.kind.endswith("cutout")

    def intensity(self) -> IntensitySpec:
        p = self.params
        if self.kind == "cutout":
            return IntensitySpec(tuple(tuple(a) for a in p["atoms"]),
                                 snowflake_depth=int(p.get("snowflake_depth", 8)))
        shape = "ball"
        if self.kind == "snowflake-cutout":
            shape = "rotated-snowflake" if p.get("rotated", False) else "snowflake"
        if "r" in p:
            r = float(p["r"])
        elif "alpha" in p:
            unit = alpha_of_intensity(IntensitySpec(((shape, 1.0),)), self.d)
            r = float(p["alpha"]) / unit
        else:
            raise ValidationError("cutout models need 'alpha' or 'r'")
        return IntensitySpec(((shape, r),), snowflake_depth=int(p.get("snowflake_depth", 8)))

    def domain(self) -> Domain:
        if self.is_cutout:
            return canonical_domain(self.intensity(), self.d)
        return Domain("ball", self.d, 1.0)  # unused by dyadic models

    @property
    def alpha(self) -> float:
        if self.is_cutout:
            return alpha_of_intensity(self.intensity(), self.d)
        if self.kind == "percolation":
            return -math.log2(float(self.params["p"]))
        if self.kind == "cascade":
            return math.log2(WeightLaw(tuple(self.params["values"]),
                                       tuple(self.params["probs"])).max_value)
        return 1.0 - float(self.params["alpha0"])

    @property
    def growth_constant(self) -> float:
        if self.is_cutout:
            return 2.0**self.alpha
        if self.kind == "percolation":
            return 1.0 / float(self.params["p"])
        if self.kind == "cascade":
            return WeightLaw(tuple(self.params["values"]), tuple(self.params["probs"])).max_value
        return 2.0 if float(self.params["alpha0"]) < 1 else 1.0

    def seed_domain(self) -> dict:
        """Description of the canonical seed domain, recorded in outputs."""
        if self.is_cutout:
            return self.domain().to_dict()
        return {"kind": "unit-cube", "d": self.d}

    def to_dict(self) -> dict:
        return {"kind": self.kind, "d": self.d, **self.params}

    @classmethod
    def from_dict(cls, data: dict) -> "ModelSpec":
        data = dict(data)
        kind = data.pop("kind")
        d = int(data.pop("d", 1 if kind == "salem-line" else 2))
        return cls(kind, d, data)


def realize(model: ModelSpec, seed: SeedPath, depth: int, window=None):
    """Draw one realization of ``model`` up to level ``depth``.

    ``window`` restricts cutout sampling to shapes reaching a closed box; it
    is ignored by dyadic models.
    """
    if model.is_cutout:
        return sample_cutouts(model.intensity(), model.domain(), depth, seed, window)
    if model.kind == "percolation":
        return generate_percolation(model.d, float(model.params["p"]), depth, seed)
    if model.kind == "cascade":
        law = WeightLaw(tuple(model.params["values"]), tuple(model.params["probs"]))
        return generate_cascade(model.d, law, depth, seed)
    return generate_salem_line(float(model.params["alpha0"]), depth, seed)


def load_realization(text: str):
    """Parse a realization written by :func:`dump_realization`."""
    stripped = text.lstrip()
    if stripped.startswith("{"):
        return CutoutRealization.from_json(text)
    return SubdivisionTree.from_text(text)


def dump_realization(real) -> str:
    if isinstance(real, CutoutRealization):
        return real.to_json()
    return real.to_text()


def ball_alpha_constant(d: int) -> float:
    """``alpha / r`` for ball cutouts: the volume of a ball of diameter 1."""
    return ball_volume(d, 0.5)
