"""Numerical tolerances shared by every module."""

from __future__ import annotations

from dataclasses import dataclass, replace


@dataclass(frozen=True)
class ToleranceProfile:
    herm_tol: float = 1e-9
    cluster_tol: float = 1e-8
    weight_floor: float = 1e-12
    state_tol: float = 1e-9
    tol_audit: float = 1e-9

    def with_overrides(self, **kwargs) -> "ToleranceProfile":
        """Copy with the non-None keyword values replaced."""
        return replace(self, **{k: v for k, v in kwargs.items() if v is not None})


DEFAULT_TOL = ToleranceProfile()


def resolve(tol: ToleranceProfile | None) -> ToleranceProfile:
    return DEFAULT_TOL if tol is None else tol
