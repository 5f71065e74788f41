"""Closed-form monomer and dimer results.

These serve as oracles for the numerical engine. The dimer expression
is the one that agrees with :func:`qswalk.est.est_laplace` to machine
precision: the prefactor of ``f`` is ``(1 - alpha)**2``, and the offset enters
through ``|delta|`` because the incoherent part dephases node 2 at rate
``|H_22| = |delta|``. The variant with ``(1 - alpha**2)`` is kept for
comparison only.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import ValidationError

__all__ = [
    "DimerParams",
    "monomer_populations",
    "monomer_est",
    "dimer_f",
    "dimer_g",
    "dimer_est_closed",
    "dimer_est_limits",
    "VALIDATED_VARIANT",
]

VALIDATED_VARIANT = "squared"
_VARIANTS = ("squared", "printed")


@dataclass(frozen=True)
class DimerParams:
    V: float
    delta: float
    Gamma: float
    gamma: float

    def __post_init__(self):
        if not self.Gamma > 0 or not self.gamma > 0:
            raise ValidationError("source and drain rates must be positive")


def monomer_populations(Gamma: float, gamma: float, t: float) -> tuple[float, float, float]:
    """Source, node and drain populations of a single node between source and drain."""
    if not Gamma > 0 or not gamma > 0:
        raise ValidationError("rates must be positive")
    if t < 0:
        raise ValidationError("t must be >= 0")
    p0 = math.exp(-Gamma * t)
    if Gamma == gamma:
        p1 = Gamma * t * math.exp(-Gamma * t)
    else:
        # Gamma/(gamma - Gamma) * (e^{-Gamma t} - e^{-gamma t}), via expm1 near the diagonal
        diff = gamma - Gamma
        p1 = Gamma * math.exp(-Gamma * t) * (-math.expm1(-diff * t)) / diff
    p2 = 1.0 - p0 - p1
    return p0, p1, p2


def monomer_est(Gamma: float, gamma: float) -> float:
    if not Gamma > 0 or not gamma > 0:
        raise ValidationError("rates must be positive")
    return 1.0 / Gamma + 1.0 / gamma


def dimer_f(alpha, V, delta, gamma, variant=VALIDATED_VARIANT):
    if variant not in _VARIANTS:
        raise ValidationError(f"unknown variant {variant!r}")
    d = abs(delta) if variant == "squared" else delta
    pref = (1 - alpha) ** 2 if variant == "squared" else (1 - alpha**2)
    return 4 * pref * (2 * V * alpha + gamma + alpha * d)


def dimer_g(alpha, V, delta, gamma, variant=VALIDATED_VARIANT):
    d = abs(delta) if variant == "squared" else delta
    a = alpha
    return (
        4 * V**2 * a * (2 + a * (3 * a - 4))
        + 4 * V * (1 + 2 * (a - 1) * a) * (gamma + a * d)
        + a * (gamma**2 + 2 * a * gamma * d + (4 + a * (5 * a - 8)) * d**2)
    )


def _reduced_numerator(alpha, V, d, gamma):
    # (g - V f) / alpha with the common factor alpha cancelled by hand
    return (
        gamma**2
        + 4 * d**2
        + alpha * (2 * d * gamma + 4 * V * gamma - 8 * d**2)
        + alpha**2 * (5 * d**2 + 4 * d * V + 4 * V**2)
    )


def dimer_est_closed(params: DimerParams, alpha: float, variant: str = VALIDATED_VARIANT) -> float:
    """EST of the source-dimer-drain system (source on node 1, drain on node 2).

    ``eta = 2/gamma + 1/Gamma + (1/V - f/g) / alpha``. For the validated
    variant the bracket is evaluated as ``h / (V g)`` with ``h = (g - V f) /
    alpha`` expanded by hand, so small alpha suffers no cancellation and
    ``alpha = 0`` gives the analytic limit
    ``2/gamma + 1/Gamma + (gamma^2 + 4 delta^2) / (4 V^2 gamma)``.
    """
    if params.V == 0:
        raise ValidationError("V = 0 decouples the nodes; the drain is unreachable")
    if not 0 <= alpha <= 1:
        raise ValidationError(f"alpha must lie in [0, 1], got {alpha}")
    # the sign of V is a gauge choice (flip node 2)
    V, g = abs(params.V), params.gamma
    base = 2 / g + 1 / params.Gamma
    if variant == VALIDATED_VARIANT:
        d = abs(params.delta)
        return base + _reduced_numerator(alpha, V, d, g) / (V * dimer_g(alpha, V, d, g))
    if alpha == 0:
        raise ValidationError("the printed variant is undefined at alpha = 0")
    f = dimer_f(alpha, V, params.delta, g, variant)
    gg = dimer_g(alpha, V, params.delta, g, variant)
    return base + (1 / V - f / gg) / alpha


def dimer_est_limits(params: DimerParams) -> tuple[float, float]:
    """``(eta at alpha -> 0, eta at alpha -> 1)`` of the validated closed form.

    The classical end is ``2/gamma + 1/Gamma + 1/V`` for any source rate.
    """
    return dimer_est_closed(params, 0.0), 2 / params.gamma + 1 / params.Gamma + 1 / abs(params.V)
