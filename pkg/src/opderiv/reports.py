"""Shared check-report record emitted by the verification operations."""

from __future__ import annotations

from dataclasses import dataclass, field


@dataclass
class CheckReport:
    """Outcome of one check on one instance.

    Serializes as {check, instance_id, residuals[], tolerance, pass, details}.
    """

    check: str
    instance_id: str
    residuals: list[float]
    tolerance: float
    passed: bool
    details: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "check": self.check,
            "instance_id": self.instance_id,
            "residuals": [float(r) for r in self.residuals],
            "tolerance": float(self.tolerance),
            "pass": bool(self.passed),
            "details": _plain(self.details),
        }


def _plain(value):
    """Recursively convert numpy scalars/arrays into JSON-friendly values."""
    import numpy as np

    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, (np.floating, np.integer)):
        return value.item()
    if isinstance(value, np.bool_):
        return bool(value)
    if isinstance(value, np.ndarray):
        return _plain(value.tolist())
    if isinstance(value, complex):
        return [value.real, value.imag]
    return value
