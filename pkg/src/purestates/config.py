"""Schema-validated experiment configs for the command line harness.

Every model forbids unknown keys, so a typo in a config file is a
validation failure (exit code 2) rather than a silently ignored setting.
"""

from __future__ import annotations

import hashlib
import json
from typing import Annotated, Literal, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from purestates.states import PAULI


class Strict(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class MatrixSpec(Strict):
    re: list[list[float]]
    im: list[list[float]] | None = None

    def array(self) -> np.ndarray:
        re = np.asarray(self.re, dtype=float)
        im = np.zeros_like(re) if self.im is None else np.asarray(self.im, dtype=float)
        if re.shape != im.shape:
            raise ValueError("re and im parts differ in shape")
        return re + 1j * im

    @classmethod
    def of(cls, m: np.ndarray) -> "MatrixSpec":
        m = np.asarray(m, dtype=complex)
        im = m.imag.tolist() if np.any(m.imag) else None
        return cls(re=m.real.tolist(), im=im)


class VectorSpec(Strict):
    re: list[float]
    im: list[float] | None = None

    def array(self) -> np.ndarray:
        re = np.asarray(self.re, dtype=float)
        im = np.zeros_like(re) if self.im is None else np.asarray(self.im, dtype=float)
        if re.shape != im.shape:
            raise ValueError("re and im parts differ in length")
        return re + 1j * im


class Tolerances(Strict):
    purity: float = Field(1e-9, gt=0)
    gns_null: float = Field(1e-10, gt=0)
    commutant: float = Field(1e-9, gt=0)


# ---------------------------------------------------------------- states


class TargetSpec(Strict):
    observable: MatrixSpec
    value: float


class StatesConfig(Strict):
    task: Literal["purity", "bloch", "decompose", "gap"]
    rho: MatrixSpec | None = None
    bloch: list[float] | None = None
    targets: list[TargetSpec] | None = None
    resolution: int = Field(200, ge=50)

    @model_validator(mode="after")
    def _inputs_present(self):
        if self.task == "gap" and not self.targets:
            raise ValueError("task 'gap' needs 'targets'")
        if self.task == "decompose" and self.rho is None:
            raise ValueError("task 'decompose' needs 'rho'")
        if self.task in ("purity", "bloch") and (self.rho is None) == (self.bloch is None):
            raise ValueError(f"task '{self.task}' needs exactly one of 'rho' or 'bloch'")
        return self


# ---------------------------------------------------------------- gns


class GNSCase(Strict):
    name: str = ""
    algebra: Literal["full", "diagonal", "generated"] = "full"
    n: int = Field(..., ge=1)
    generators: list[MatrixSpec] | None = None
    vector: VectorSpec | None = None
    density: MatrixSpec | None = None

    @model_validator(mode="after")
    def _one_state(self):
        if (self.vector is None) == (self.density is None):
            raise ValueError("give exactly one of 'vector' or 'density'")
        if self.algebra == "generated" and not self.generators:
            raise ValueError("algebra 'generated' needs 'generators'")
        return self


class GNSConfig(Strict):
    cases: list[GNSCase] = Field(..., min_length=1)

    @model_validator(mode="before")
    @classmethod
    def _single_case(cls, data):
        if isinstance(data, dict) and "cases" not in data:
            return {"cases": [data]}
        return data


# ---------------------------------------------------------------- purify


class PurifyConfig(Strict):
    rho: MatrixSpec
    dim_II: int | None = Field(None, ge=1)


# ---------------------------------------------------------------- weyl


class GridSpec(Strict):
    n_points: int = 1024
    half_length: float = 8.0


class BumpEnvelopeSpec(Strict):
    kind: Literal["bump"] = "bump"
    center: float = 0.0
    width: float = Field(1.0, gt=0)


class GaussianEnvelopeSpec(Strict):
    kind: Literal["gaussian"] = "gaussian"


EnvelopeSpec = Annotated[Union[GaussianEnvelopeSpec, BumpEnvelopeSpec], Field(discriminator="kind")]


class BumpSymbolSpec(Strict):
    kind: Literal["bump"] = "bump"
    center: tuple[float, float] = (0.0, 0.0)
    radii: tuple[float, float] = (2.0, 2.0)
    amplitude: float = 1.0


class PlateauSymbolSpec(Strict):
    kind: Literal["plateau"] = "plateau"
    center: tuple[float, float] = (0.0, 0.0)
    inner: float = Field(1.0, gt=0)
    outer: float = Field(2.0, gt=0)
    value: float = 1.0


class AffineSymbolSpec(Strict):
    kind: Literal["affine"] = "affine"
    coefficients: tuple[float, float, float]
    center: tuple[float, float] = (0.0, 0.0)
    inner: float = Field(1.0, gt=0)
    outer: float = Field(2.0, gt=0)


SymbolSpec = Annotated[
    Union[BumpSymbolSpec, PlateauSymbolSpec, AffineSymbolSpec], Field(discriminator="kind")
]


class HusimiSpec(Strict):
    x_range: tuple[float, float] = (-2.0, 2.0)
    xi_range: tuple[float, float] = (-2.0, 2.0)
    cells_per_width: int = Field(2, ge=1)


class WeylConfig(Strict):
    grid: GridSpec = GridSpec()
    envelope: EnvelopeSpec = GaussianEnvelopeSpec()
    x0: float = 0.3
    xi0: float = -0.5
    symbol: SymbolSpec = BumpSymbolSpec()
    hbar_list: list[float] = Field(default_factory=lambda: [0.4, 0.2, 0.1, 0.05], min_length=1)
    husimi: HusimiSpec | None = None


# ---------------------------------------------------------------- semiclassical


class SemiclassicalConfig(Strict):
    beta: float = 0.05
    p1: float = 0.6
    p2: float = 0.8
    hbar_list: list[float] = Field(default_factory=lambda: [0.04, 0.02, 0.01], min_length=1)
    times: list[float] = Field(default_factory=lambda: [-1.0, 1.0], min_length=1)
    grid: GridSpec = GridSpec(n_points=2**14, half_length=8.0)
    radius: float = Field(0.3, gt=0)
    dt: float | None = Field(None, gt=0)
    smoothing: float = Field(0.0, ge=0)
    envelope1: BumpEnvelopeSpec = BumpEnvelopeSpec(center=1.5, width=1.0)
    envelope2: BumpEnvelopeSpec = BumpEnvelopeSpec(center=-1.5, width=1.0)
    snapshots: HusimiSpec | None = None


# ---------------------------------------------------------------- defaults and hashing


def _counterexample_targets() -> list[dict]:
    A = np.diag([-5.0, 5.0])
    B = 5.0 * PAULI[0]
    C = np.array([[0, 1j], [-1j, 0]])
    # mixture diag(1/3, 2/3): <A> = 5/3, <B> = <C> = 0
    return [
        {"observable": MatrixSpec.of(A).model_dump(), "value": 5.0 / 3.0},
        {"observable": MatrixSpec.of(B).model_dump(), "value": 0.0},
        {"observable": MatrixSpec.of(C).model_dump(), "value": 0.0},
    ]


def paper_defaults(subcommand: str) -> dict:
    """Configs reproducing the anchored examples for each subcommand."""
    s = 1 / np.sqrt(2)
    table = {
        "states": {"task": "gap", "targets": _counterexample_targets(), "resolution": 200},
        "gns": {
            "cases": [
                {"name": "M2 vector e1", "algebra": "full", "n": 2, "vector": {"re": [1.0, 0.0]}},
                {"name": "M2 diag(1/3,2/3)", "algebra": "full", "n": 2,
                 "density": {"re": [[1 / 3, 0.0], [0.0, 2 / 3]]}},
                {"name": "diagonal superselection", "algebra": "diagonal", "n": 2,
                 "vector": {"re": [s, s]}},
            ]
        },
        "purify": {"rho": {"re": [[1 / 3, 0.0], [0.0, 2 / 3]]}},
        "weyl": {},
        "semiclassical": {},
    }
    return table[subcommand]


MODELS = {
    "states": StatesConfig,
    "gns": GNSConfig,
    "purify": PurifyConfig,
    "weyl": WeylConfig,
    "semiclassical": SemiclassicalConfig,
}


def config_hash(subcommand: str, cfg: BaseModel, extra: dict | None = None) -> str:
    doc = {"subcommand": subcommand, "config": cfg.model_dump(mode="json"), **(extra or {})}
    text = json.dumps(doc, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(text.encode()).hexdigest()[:16]
