"""Fit the closed-form dimer EST to a network EST curve."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from .analytic import DimerParams, dimer_est_closed
from .errors import ValidationError
from .est import ESTCurve

__all__ = ["FitResult", "dimer_curve", "fit_dimer_to_curve", "default_starts"]


@dataclass(frozen=True)
class FitResult:
    gamma_d: float
    Gamma_d: float
    V: float
    delta_fixed: float
    loss: float
    iterations: int
    converged: bool
    start_index: int = 0
    loss_history: tuple = field(default=(), repr=False)

    def as_row(self) -> dict:
        return {
            "gamma_d": self.gamma_d,
            "Gamma_d": self.Gamma_d,
            "V": self.V,
            "delta": self.delta_fixed,
            "loss": self.loss,
            "converged": self.converged,
        }


def dimer_curve(alphas, Gamma_d, gamma_d, V, delta) -> np.ndarray:
    p = DimerParams(V=V, delta=delta, Gamma=Gamma_d, gamma=gamma_d)
    return np.array([dimer_est_closed(p, float(a)) for a in alphas])


def default_starts(guess, n_starts: int = 8) -> list[np.ndarray]:
    """The guess itself, then corners of a factor-2 box around it in a fixed order."""
    base = np.log(np.asarray(guess, dtype=float))
    starts = [base]
    for signs in itertools.product((-1, 1), repeat=3):
        if len(starts) >= n_starts:
            break
        starts.append(base + np.log(2.0) * np.array(signs))
    return starts[:n_starts]


def fit_dimer_to_curve(
    target: ESTCurve,
    delta_fixed: float,
    initial_guess=(0.2, 1.2, 0.6),
    tolerance: float = 1e-12,
    n_starts: int = 8,
    max_iter: int = 5000,
) -> FitResult:
    """Least-squares fit of ``(Gamma_d, gamma_d, V)`` at fixed ``delta``.

    Nelder-Mead in log-parameter space from ``n_starts`` deterministic
    starting points; the lowest loss wins and ties go to the earlier start.
    ``converged`` is false if the winning run hit ``max_iter``.
    """
    guess = np.asarray(initial_guess, dtype=float)
    if guess.shape != (3,) or np.any(guess <= 0) or not np.all(np.isfinite(guess)):
        raise ValidationError(f"initial guess must be three positive numbers, got {initial_guess}")
    if len(target.alphas) < 4:
        raise ValidationError("target curve needs at least 4 points")
    alphas = target.alphas
    etas = target.etas

    def loss(logp):
        Gamma_d, gamma_d, V = np.exp(logp)
        if not np.all(np.isfinite([Gamma_d, gamma_d, V])) or min(Gamma_d, gamma_d, V) <= 0:
            return np.inf
        resid = dimer_curve(alphas, Gamma_d, gamma_d, V, delta_fixed) - etas
        value = float(resid @ resid)
        return value if np.isfinite(value) else np.inf

    best = None
    for i, x0 in enumerate(default_starts(guess, n_starts)):
        history = [loss(x0)]
        res = minimize(
            loss,
            x0,
            method="Nelder-Mead",
            callback=lambda xk: history.append(loss(xk)),
            options={"xatol": tolerance, "fatol": tolerance**2, "maxiter": max_iter, "maxfev": 4 * max_iter},
        )
        if best is None or res.fun < best[1].fun:
            best = (i, res, history)

    i, res, history = best
    Gamma_d, gamma_d, V = np.exp(res.x)
    return FitResult(
        gamma_d=float(gamma_d),
        Gamma_d=float(Gamma_d),
        V=float(V),
        delta_fixed=float(delta_fixed),
        loss=float(res.fun),
        iterations=int(res.nit),
        converged=bool(res.success),
        start_index=i,
        loss_history=tuple(history),
    )
