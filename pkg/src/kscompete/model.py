"""System parameters and the homogeneous positive equilibrium."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, replace
from typing import Any


class ParameterError(ValueError):
    """Raised when parameters violate a constraint; carries the violations."""

    def __init__(self, violations: list["Violation"]):
        self.violations = violations
        super().__init__("; ".join(str(v) for v in violations))


@dataclass(frozen=True)
class Violation:
    field: str
    message: str

    def __str__(self) -> str:
        return f"{self.field}: {self.message}"


@dataclass(frozen=True)
class ModelParams:
    """Coefficients of the two-species chemotaxis competition system on (0, L).

    ``lam`` is the chemical decay rate; it is spelled ``lambda`` in config files.
    """

    d1: float = 1.0
    d2: float = 0.1
    chi: float = 61.0
    xi: float = 0.5
    mu1: float = 1.0
    mu2: float = 1.0
    a1: float = 0.5
    a2: float = 0.5
    lam: float = 0.5
    L: float = 0.5

    def with_(self, **changes: Any) -> "ModelParams":
        if "lambda" in changes:
            changes["lam"] = changes.pop("lambda")
        return replace(self, **changes)

    def to_dict(self) -> dict[str, float]:
        d = asdict(self)
        d["lambda"] = d.pop("lam")
        return {k: d[k] for k in PARAM_KEYS}

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "ModelParams":
        d = dict(d)
        if "lambda" in d:
            d["lam"] = d.pop("lambda")
        return cls(**{k: float(v) for k, v in d.items()})


PARAM_KEYS = ("d1", "d2", "chi", "xi", "mu1", "mu2", "a1", "a2", "lambda", "L")


@dataclass(frozen=True)
class ValidationResult:
    """Separate violation lists: the solver only needs ``simulation`` to be empty."""

    simulation: tuple[Violation, ...] = ()
    equilibrium: tuple[Violation, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.simulation and not self.equilibrium

    @property
    def ok_for_simulation(self) -> bool:
        return not self.simulation

    @property
    def violations(self) -> list[Violation]:
        return list(self.simulation) + list(self.equilibrium)


def validate_params(p: ModelParams, allow_zero_kinetics: bool = False) -> ValidationResult:
    """Check sign constraints and the competition condition for a positive equilibrium.

    ``allow_zero_kinetics`` admits mu1 = mu2 = 0 and lambda = 0, a test mode of the
    solver used for conservation checks.
    """
    sim: list[Violation] = []
    for name in ("d1", "d2", "chi", "xi", "mu1", "mu2", "a1", "a2", "lam", "L"):
        val = getattr(p, name)
        if not math.isfinite(val):
            sim.append(Violation(_public(name), "must be finite"))
    positive = ["d1", "d2", "L"]
    nonneg = ["a1", "a2"]
    if allow_zero_kinetics:
        nonneg += ["mu1", "mu2", "lam"]
    else:
        positive += ["mu1", "mu2", "lam"]
    for name in positive:
        if not getattr(p, name) > 0:
            sim.append(Violation(_public(name), f"{_public(name)} must be positive"))
    for name in nonneg:
        if not getattr(p, name) >= 0:
            sim.append(Violation(_public(name), f"{_public(name)} must be nonnegative"))

    eqv: list[Violation] = []
    for name in ("a1", "a2"):
        if not getattr(p, name) < 1:
            eqv.append(Violation(name, f"{name} must be < 1 for positive equilibrium"))
    if allow_zero_kinetics:
        for name in ("mu1", "mu2", "lam"):
            if not getattr(p, name) > 0:
                eqv.append(Violation(_public(name), f"{_public(name)} must be positive for equilibrium analysis"))
    return ValidationResult(tuple(sim), tuple(eqv))


def _public(name: str) -> str:
    return "lambda" if name == "lam" else name


@dataclass(frozen=True)
class Equilibrium:
    u_bar: float
    v_bar: float
    w_bar: float

    def residuals(self, p: ModelParams) -> tuple[float, float, float]:
        return (
            1.0 - self.u_bar - p.a1 * self.v_bar,
            1.0 - p.a2 * self.u_bar - self.v_bar,
            p.lam * self.w_bar - self.u_bar - self.v_bar,
        )


def compute_equilibrium(p: ModelParams) -> Equilibrium:
    res = validate_params(p)
    if not res.ok:
        raise ParameterError(res.violations)
    den = 1.0 - p.a1 * p.a2
    u = (1.0 - p.a1) / den
    v = (1.0 - p.a2) / den
    w = (2.0 - p.a1 - p.a2) / (p.lam * den)
    return Equilibrium(u, v, w)


# Reference parameter sets.
SHORT_INTERVAL = ModelParams()
WAVEMODE = ModelParams(L=7.0)
OSCILLATORY = ModelParams(d1=5.0, d2=0.1, xi=0.1, lam=5.0, L=4.0, chi=80.0)
COARSENING = ModelParams(d1=0.2, d2=0.3, chi=20.0, xi=50.0, lam=0.5, L=10.0)
