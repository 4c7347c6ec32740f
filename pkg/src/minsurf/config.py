"""Central tolerance record and JSON run-configuration loading.

Every numeric gate used by the pipeline lives in one place so that a run can
be tightened or relaxed coherently.  Defaults are calibrated for analytic
jets sampled on charts of 64^2 .. 128^2 nodes.
"""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass

from .errors import ConfigurationError, InputFormatError


@dataclass(frozen=True)
class Tolerances:
    """Numeric gates; all values are positive, most are relative tolerances."""

    #: relative conformality gate |<df,df>| / (F/2) on input immersions
    conformality: float = 1e-8
    #: floor on the conformal factor lambda before an immersion is degenerate
    lambda_floor: float = 1e-12
    #: relative minimality residual gate (tension field against -2f)
    minimality: float = 1e-6
    #: singular value gate for rank detection, relative to the largest
    #: singular value of the node's jet matrix
    rank_gate: float = 1e-7
    #: orthogonality drift allowed in flag frames
    orthogonality: float = 1e-10
    #: normalized d-bar residual below which a field counts as holomorphic
    holomorphy: float = 1e-6
    #: pointwise identity checks between equivalent invariant formulas
    identity: float = 1e-10
    #: relative gate for declaring an a-invariant identically zero
    zero_invariant: float = 1e-8
    #: PDE residual gate (curvature ladders, Ricci condition)
    pde_residual: float = 1e-4
    #: standard deviation gate certifying a ratio invariant is constant
    rho_constancy: float = 1e-8
    #: standard deviation gate on ellipse eccentricities (independent
    #: exceptionality test)
    eccentricity_constancy: float = 1e-6
    #: flatness residual gate before frame integration is attempted
    flatness_gate: float = 1e-5
    #: congruence gate (max deviation after orthogonal alignment)
    congruence: float = 1e-6
    #: estimated spectral/stencil differentiation noise allowed per call
    differentiation: float = 1e-8

    def replace(self, **kw) -> "Tolerances":
        unknown = set(kw) - {f.name for f in dataclasses.fields(self)}
        if unknown:
            raise ConfigurationError(f"unknown tolerance names: {sorted(unknown)}")
        for k, v in kw.items():
            if not (float(v) > 0.0):
                raise ConfigurationError(f"tolerance {k!r} must be positive, got {v!r}")
        return dataclasses.replace(self, **{k: float(v) for k, v in kw.items()})

    def as_dict(self) -> dict:
        return dataclasses.asdict(self)


DEFAULT_TOLERANCES = Tolerances()

_RUN_KEYS = {"tolerances", "chart", "workers", "output", "format"}


@dataclass
class RunConfig:
    """Run-level settings parsed from a JSON config file."""

    tolerances: Tolerances = DEFAULT_TOLERANCES
    chart: dict | None = None
    workers: int = 1
    output: str | None = None
    format: str = "json"


def load_run_config(path) -> RunConfig:
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise InputFormatError(f"cannot read run config {path}: {exc}") from exc
    if not isinstance(raw, dict):
        raise InputFormatError("run config must be a JSON object")
    unknown = set(raw) - _RUN_KEYS
    if unknown:
        raise InputFormatError(f"unknown run-config keys: {sorted(unknown)}")
    tol = DEFAULT_TOLERANCES.replace(**raw.get("tolerances", {}))
    workers = int(raw.get("workers", 1))
    if workers < 1:
        raise ConfigurationError("workers must be >= 1")
    fmt = raw.get("format", "json")
    if fmt not in ("json", "csv", "svg"):
        raise ConfigurationError(f"unknown output format {fmt!r}")
    return RunConfig(
        tolerances=tol,
        chart=raw.get("chart"),
        workers=workers,
        output=raw.get("output"),
        format=fmt,
    )
