"""Tri-state verdicts for semi-decidable properties."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any

import numpy as np

from .exact import frac_str


class Status(str, enum.Enum):
    YES = "CertifiedYes"
    NO = "CertifiedNo"
    UNKNOWN = "Unknown"


@dataclass(frozen=True)
class Certificate:
    """Outcome of a certification routine.

    ``CertifiedNo`` always carries a witness that can be re-verified; ``Unknown``
    means no violation was found among ``samples_used`` checks.
    """

    status: Status
    witness: Any = None
    samples_used: int = 0
    seed: int | None = None
    details: dict = field(default_factory=dict)

    @property
    def yes(self) -> bool:
        return self.status is Status.YES

    @property
    def no(self) -> bool:
        return self.status is Status.NO

    @property
    def unknown(self) -> bool:
        return self.status is Status.UNKNOWN

    def to_json(self) -> dict:
        out = {
            "status": self.status.value,
            "witness": jsonable(self.witness),
            "samples_used": self.samples_used,
            "seed": self.seed,
        }
        if self.details:
            out["details"] = jsonable(self.details)
        return out


def jsonable(obj):
    """Recursively convert fractions, numpy arrays, enums and dataclasses to JSON types.

    Fractions become ``"p/q"`` strings (integers stay integers).
    """
    if obj is None or isinstance(obj, (bool, str)):
        return obj
    if isinstance(obj, enum.Enum):
        return obj.value
    if isinstance(obj, Fraction):
        return obj.numerator if obj.denominator == 1 else frac_str(obj)
    if isinstance(obj, int):
        return obj
    if isinstance(obj, float):
        return obj
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return [jsonable(v) for v in obj.tolist()]
    if isinstance(obj, Certificate):
        return obj.to_json()
    if hasattr(obj, "to_json"):
        return obj.to_json()
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if hasattr(obj, "__dataclass_fields__"):
        return {k: jsonable(getattr(obj, k)) for k in obj.__dataclass_fields__}
    raise TypeError(f"cannot serialize {type(obj).__name__}")
