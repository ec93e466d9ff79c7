"""
Model spec files: JSON documents describing a PC-LS model.

    {
      "schema": 1,
      "partition": {"lengths": [1.0, 2.0]},
      "ls": {"psi": [...], "gamma": [...], "periodic": true, "weight_time": "global"},
      "pc": {"sigma": [1.0, 2.0], "rho": 0.5},
      "flags": {"include_ls": true, "include_pc": true},
      "run": {"grid": {"start": 0, "stop": 6, "step": 0.125}, "seed": 0, "paths": 1000}
    }

Validation errors are reported as {"path": "pc.rho", "message": ...} entries.
"""

import json
import logging
from pathlib import Path
from typing import Literal, Optional, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from pcls.core import SCHEMA_VERSION, PCLSModel
from pcls.errors import PCLSError, SpecValidationError
from pcls.kernels.excov import CLOSED_FORMS, excov_from_dict, gram_psd_check
from pcls.kernels.pc_component import pcseq_from_dict
from pcls.kernels.stationary import stationary_from_dict
from pcls.partition import Partition

logger = logging.getLogger(__name__)

# Points per psi Gram spot-check
GRAM_POINTS = 8


class _Spec(BaseModel):
    model_config = ConfigDict(extra="forbid", populate_by_name=True)


class PartitionSpec(_Spec):
    lengths: list[float]
    period: Optional[int] = None

    @field_validator("lengths")
    @classmethod
    def positive_lengths(cls, v):
        if not v or any(not np.isfinite(a) or a <= 0 for a in v):
            raise ValueError("block lengths must be a non-empty list of positive numbers")
        return v

    @model_validator(mode="after")
    def period_matches(self):
        if self.period is not None and self.period != len(self.lengths):
            raise ValueError(f"period {self.period} does not match {len(self.lengths)} lengths")
        return self


class PsiSpec(_Spec):
    type: Literal["laplace_mixture", "closed_form"]
    weights: Optional[list[float]] = None
    rates: Optional[list[float]] = None
    name: Optional[str] = None

    @field_validator("weights")
    @classmethod
    def positive_weights(cls, v):
        if v is not None and (not v or any(not np.isfinite(w) or w <= 0 for w in v)):
            raise ValueError("mixture weights must be positive")
        return v

    @field_validator("rates")
    @classmethod
    def distinct_rates(cls, v):
        if v is not None and (any(not np.isfinite(r) for r in v) or len(set(v)) != len(v)):
            raise ValueError("mixture rates must be finite and distinct")
        return v

    @field_validator("name")
    @classmethod
    def known_name(cls, v):
        if v is not None and v not in CLOSED_FORMS:
            raise ValueError(f"unknown closed form '{v}', known: {', '.join(sorted(CLOSED_FORMS))}")
        return v

    @model_validator(mode="after")
    def complete(self):
        if self.type == "laplace_mixture":
            if self.weights is None or self.rates is None:
                raise ValueError("laplace_mixture needs weights and rates")
            if len(self.weights) != len(self.rates):
                raise ValueError("weights and rates must have the same length")
        elif self.name is None:
            raise ValueError("closed_form needs a name")
        return self


class StationarySpec(_Spec):
    family: Literal["exponential", "squared_exp", "cosine_mixture"]
    theta: Optional[float] = Field(None, gt=0)
    length: Optional[float] = Field(None, gt=0)
    sigma2: float = Field(1.0, gt=0)
    masses: Optional[list[float]] = None
    frequencies: Optional[list[float]] = None

    @field_validator("masses")
    @classmethod
    def positive_masses(cls, v):
        if v is not None and (not v or any(p <= 0 for p in v)):
            raise ValueError("cosine masses must be positive")
        return v

    @field_validator("frequencies")
    @classmethod
    def nonnegative_frequencies(cls, v):
        if v is not None and any(w < 0 for w in v):
            raise ValueError("cosine frequencies must be >= 0")
        return v

    @model_validator(mode="after")
    def complete(self):
        required = {
            "exponential": ("theta",),
            "squared_exp": ("length",),
            "cosine_mixture": ("masses", "frequencies"),
        }[self.family]
        missing = [name for name in required if getattr(self, name) is None]
        if missing:
            raise ValueError(f"{self.family} needs {', '.join(missing)}")
        if self.family == "cosine_mixture" and len(self.masses) != len(self.frequencies):
            raise ValueError("masses and frequencies must have the same length")
        return self

    def to_dict(self) -> dict:
        return self.model_dump(exclude_none=True)


class LSSpec(_Spec):
    psi: list[PsiSpec]
    gamma: list[StationarySpec]
    periodic: bool = True
    weight_time: Literal["local", "global"] = "global"

    @model_validator(mode="after")
    def same_length(self):
        if not self.psi or len(self.psi) != len(self.gamma):
            raise ValueError("psi and gamma must be non-empty lists of the same length")
        return self


class PCSpec(_Spec):
    sigma: Optional[list[float]] = None
    rho: Optional[float] = Field(None, gt=-1, lt=1)
    base_matrix: Optional[list[list[float]]] = None
    periods: int = Field(1, ge=1)

    @field_validator("sigma")
    @classmethod
    def positive_sigma(cls, v):
        if v is not None and (not v or any(s <= 0 for s in v)):
            raise ValueError("sigma values must be positive")
        return v

    @model_validator(mode="after")
    def one_generator(self):
        parametric = self.sigma is not None or self.rho is not None
        if parametric == (self.base_matrix is not None):
            raise ValueError("give either sigma and rho, or base_matrix")
        if parametric and (self.sigma is None or self.rho is None):
            raise ValueError("a parametric PC sequence needs both sigma and rho")
        return self

    def to_dict(self) -> dict:
        if self.base_matrix is not None:
            return {"base_matrix": self.base_matrix, "periods": self.periods}
        return {"sigma": self.sigma, "rho": self.rho}


class FlagsSpec(_Spec):
    include_ls: Optional[bool] = None
    include_pc: Optional[bool] = None


class GridSpec(_Spec):
    start: float = Field(0.0, ge=0)
    stop: float = Field(..., gt=0)
    step: float = Field(..., gt=0)


class RunSpec(_Spec):
    """Defaults for CLI runs; flags on the command line take precedence."""

    grid: Optional[GridSpec] = None
    points: Optional[list[float]] = None
    seed: int = 0
    paths: int = Field(1000, ge=1)
    method: Literal["joint_factorization", "component_wise"] = "joint_factorization"
    tol: Optional[float] = Field(None, ge=0)
    z: Optional[float] = Field(None, gt=0)


class ModelSpecFile(_Spec):
    schema_version: int = Field(alias="schema")
    partition: PartitionSpec
    ls: Optional[LSSpec] = None
    pc: Optional[PCSpec] = None
    flags: FlagsSpec = FlagsSpec()
    run: RunSpec = RunSpec()

    @field_validator("schema_version")
    @classmethod
    def supported_schema(cls, v):
        if v != SCHEMA_VERSION:
            raise ValueError(f"unsupported schema version {v}, expected {SCHEMA_VERSION}")
        return v

    @model_validator(mode="after")
    def components_present(self):
        if self.include_ls and self.ls is None:
            raise ValueError("include_ls is set but there is no ls section")
        if self.include_pc and self.pc is None:
            raise ValueError("include_pc is set but there is no pc section")
        if not (self.include_ls or self.include_pc):
            raise ValueError("the model has no enabled component")
        return self

    @property
    def include_ls(self) -> bool:
        flag = self.flags.include_ls
        return self.ls is not None if flag is None else flag

    @property
    def include_pc(self) -> bool:
        flag = self.flags.include_pc
        return self.pc is not None if flag is None else flag


def _format_loc(loc) -> str:
    path = ""
    for part in loc:
        if isinstance(part, int):
            path += f"[{part}]"
        else:
            path += f".{part}" if path else str(part)
    return path or "$"


def _diagnostics(error: ValidationError) -> list:
    return [{"path": _format_loc(e["loc"]), "message": e["msg"]} for e in error.errors()]


def parse_spec(data: dict) -> ModelSpecFile:
    """
    Validate a spec document.

    Raises:
        SpecValidationError: with one diagnostic per schema violation
    """
    try:
        return ModelSpecFile.model_validate(data)
    except ValidationError as e:
        raise SpecValidationError(_diagnostics(e)) from e


def load_spec(path: Union[str, Path]) -> ModelSpecFile:
    """Read and validate a spec file."""
    try:
        with open(path, 'r') as f:
            data = json.load(f)
    except json.JSONDecodeError as e:
        raise SpecValidationError([{"path": "$", "message": f"invalid JSON: {e}"}]) from e
    return parse_spec(data)


def build_model(spec: ModelSpecFile) -> PCLSModel:
    """
    Construct the PCLSModel described by a validated spec.

    Construction-time checks (PC sequence PSD, period consistency) are
    reported as diagnostics on the section that failed.

    Raises:
        SpecValidationError: if construction fails
    """
    section = "partition"
    try:
        partition = Partition(spec.partition.lengths)
        psi, gamma, periodic, local = (), (), True, False
        if spec.ls is not None:
            section = "ls"
            psi = [excov_from_dict(p.model_dump(exclude_none=True)) for p in spec.ls.psi]
            gamma = [stationary_from_dict(g.to_dict()) for g in spec.ls.gamma]
            periodic = spec.ls.periodic
            local = spec.ls.weight_time == "local"
        pcseq = None
        if spec.pc is not None:
            section = "pc"
            pcseq = pcseq_from_dict(spec.pc.to_dict())
        section = "$"
        return PCLSModel(partition=partition, psi=psi, gamma=gamma, pcseq=pcseq,
                         include_ls=spec.include_ls, include_pc=spec.include_pc,
                         periodic=periodic, local_weight_time=local)
    except PCLSError as e:
        raise SpecValidationError([{"path": section, "message": str(e)}]) from e


def load_model(path: Union[str, Path]) -> tuple[PCLSModel, ModelSpecFile]:
    spec = load_spec(path)
    return build_model(spec), spec


def psi_spot_checks(model: PCLSModel, tol: float = 1e-8) -> list:
    """Gram PSD spot-checks of every psi on its weight clock; returns failures as diagnostics."""
    diagnostics = []
    span = 2.0 * float(np.max(model.partition.lengths))
    points = np.linspace(span / GRAM_POINTS, span, GRAM_POINTS)
    for i, psi in enumerate(model.psi):
        report = gram_psd_check(psi, points, tol)
        if not report["pass"]:
            diagnostics.append({
                "path": f"ls.psi[{i}]",
                "message": f"Gram matrix not PSD (min eigenvalue {report['min_eigenvalue']:.3e})",
            })
    return diagnostics


def validate_spec(source: Union[str, Path, dict]) -> dict:
    """
    Full validation of a spec: schema, model construction and psi spot-checks.

    Returns:
        dict: {"valid": bool, "diagnostics": [...], "fingerprint": str or None}
    """
    try:
        spec = parse_spec(source) if isinstance(source, dict) else load_spec(source)
        model = build_model(spec)
        diagnostics = psi_spot_checks(model)
    except SpecValidationError as e:
        return {"valid": False, "diagnostics": e.diagnostics, "fingerprint": None}

    return {
        "valid": not diagnostics,
        "diagnostics": diagnostics,
        "fingerprint": model.fingerprint(),
    }
