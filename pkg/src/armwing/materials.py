"""Hinge material models and strain budget screening.

Flexure hinges printed in rubber-like blends survive a bounded working
strain.  This module loads the material database (Shore hardness band,
elongation-at-break band, and optional incompressible Mooney-Rivlin
constants fitted from uniaxial test data) and checks a design's peak
hinge strain, scaled by a safety factor, against the weakest published
elongation at break.

Stress values are nominal (first Piola-Kirchhoff) in MPa; stretch is the
uniaxial stretch ratio lambda = 1 + strain.  The hinge loads here are
dominantly stretching/bending of thin strips, so the uniaxial closed form
is used as a screen; full continuum FEA is out of scope.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np

from .errors import (
    MissingMaterialModel,
    NonPositiveStretch,
    SchemaError,
    UnknownMaterial,
    VersionError,
)

__all__ = [
    "MooneyRivlin",
    "MaterialSpec",
    "StrainBudget",
    "mooney_rivlin_stress",
    "mooney_rivlin_uniaxial",
    "strain_budget_check",
    "load_materials",
    "get_material",
    "default_materials_path",
]

FORMAT_VERSION = 1


@dataclass(frozen=True)
class MooneyRivlin:
    """Two-parameter incompressible Mooney-Rivlin solid (uniaxial form)."""

    c10_mpa: float
    c01_mpa: float
    poisson: float


@dataclass(frozen=True)
class MaterialSpec:
    """One printable hinge material: hardness and rupture bands plus an
    optional fitted hyperelastic model."""

    name: str
    shore_a: tuple[float, float]
    elongation_break_pct: tuple[float, float]
    description: str = ""
    model: MooneyRivlin | None = None

    @property
    def min_elongation_break_pct(self) -> float:
        return self.elongation_break_pct[0]


@dataclass(frozen=True)
class StrainBudget:
    """Outcome of a hinge strain check against one material."""

    material: str
    strain_pct: float
    safety_factor: float
    demand_pct: float
    capacity_pct: float
    margin_pct: float
    passed: bool


def mooney_rivlin_stress(stretch, c10_mpa: float, c01_mpa: float):
    """Uniaxial nominal stress of an incompressible Mooney-Rivlin solid.

    sigma(lambda) = 2 (lambda - lambda^-2) (C10 + C01 / lambda), MPa.
    Accepts a scalar or array stretch; every entry must be > 0.  The
    undeformed state gives exactly zero stress.
    """
    lam = np.asarray(stretch, dtype=float)
    if np.any(~(lam > 0.0)):
        raise NonPositiveStretch(
            f"stretch ratio must be > 0, got {float(np.min(lam))!r}"
        )
    sigma = 2.0 * (lam - lam**-2) * (c10_mpa + c01_mpa / lam)
    if np.ndim(stretch) == 0:
        return float(sigma)
    return sigma


def mooney_rivlin_uniaxial(stretch, mat: MaterialSpec):
    """Nominal stress for a named material; requires fitted constants.

    Raises MissingMaterialModel when the database entry ships only the
    hardness/elongation bands, and NonPositiveStretch for stretch <= 0.
    """
    if mat.model is None:
        raise MissingMaterialModel(f"material {mat.name!r} has no hyperelastic model")
    return mooney_rivlin_stress(stretch, mat.model.c10_mpa, mat.model.c01_mpa)


def strain_budget_check(
    strain_pct: float, mat: MaterialSpec, safety_factor: float = 1.0
) -> StrainBudget:
    """Check peak hinge strain (percent) against the material's weakest
    published elongation at break.

    The demand is strain * safety_factor; the check passes when the demand
    does not exceed the capacity.  ``margin_pct`` is capacity - demand, so
    a failing check reports a negative margin.
    """
    if safety_factor < 1.0:
        raise ValueError(f"safety factor must be >= 1, got {safety_factor!r}")
    if strain_pct < 0.0:
        raise ValueError(f"strain must be >= 0 percent, got {strain_pct!r}")
    demand = strain_pct * safety_factor
    capacity = mat.min_elongation_break_pct
    margin = capacity - demand
    return StrainBudget(
        material=mat.name,
        strain_pct=float(strain_pct),
        safety_factor=float(safety_factor),
        demand_pct=float(demand),
        capacity_pct=float(capacity),
        margin_pct=float(margin),
        passed=demand <= capacity,
    )


def default_materials_path() -> Path:
    return Path(str(resources.files("armwing").joinpath("data/materials.json")))


def load_materials(path: str | Path | None = None) -> dict[str, MaterialSpec]:
    """Load a material database; defaults to the packaged one.

    Returns an insertion-ordered name -> MaterialSpec mapping.  Raises
    VersionError on a missing/unsupported format_version and SchemaError
    on malformed entries.
    """
    src = Path(path) if path is not None else default_materials_path()
    doc = json.loads(src.read_text())
    version = doc.get("format_version")
    if version != FORMAT_VERSION:
        raise VersionError(
            f"unsupported materials format_version {version!r} "
            f"(expected {FORMAT_VERSION})"
        )
    out: dict[str, MaterialSpec] = {}
    for i, entry in enumerate(doc.get("materials", [])):
        where = f"materials[{i}]"
        try:
            name = entry["name"]
            shore = tuple(float(v) for v in entry["shore_a"])
            brk = tuple(float(v) for v in entry["elongation_break_pct"])
        except (KeyError, TypeError, ValueError) as exc:
            raise SchemaError(where, f"bad entry: {exc}") from None
        if len(shore) != 2 or len(brk) != 2:
            raise SchemaError(where, "shore_a and elongation_break_pct need 2 values")
        if not brk[0] > 0.0 or brk[1] < brk[0]:
            raise SchemaError(where, "elongation band must be positive, low <= high")
        if name in out:
            raise SchemaError(where, f"duplicate material {name!r}")
        model = None
        raw_model = entry.get("model")
        if raw_model is not None:
            if raw_model.get("type") != "mooney-rivlin":
                raise SchemaError(
                    f"{where}.model", f"unknown model type {raw_model.get('type')!r}"
                )
            try:
                model = MooneyRivlin(
                    c10_mpa=float(raw_model["c10_mpa"]),
                    c01_mpa=float(raw_model["c01_mpa"]),
                    poisson=float(raw_model["poisson"]),
                )
            except (KeyError, TypeError, ValueError) as exc:
                raise SchemaError(f"{where}.model", f"bad constants: {exc}") from None
            if not 0.0 < model.poisson <= 0.5:
                raise SchemaError(
                    f"{where}.model.poisson", "Poisson ratio must be in (0, 0.5]"
                )
        out[name] = MaterialSpec(
            name=name,
            shore_a=shore,
            elongation_break_pct=brk,
            description=entry.get("description", ""),
            model=model,
        )
    return out


def get_material(db: dict[str, MaterialSpec], name: str) -> MaterialSpec:
    """Case-sensitive lookup with a domain error on a miss."""
    try:
        return db[name]
    except KeyError:
        known = ", ".join(db)
        raise UnknownMaterial(f"unknown material {name!r} (have: {known})") from None
