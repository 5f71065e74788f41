"""Expected survival time (EST) of the excitation before it reaches the drain."""

from __future__ import annotations

import csv
import io
import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .dynamics import SystemSpec, assemble_superoperator, source_state, unvec, vec
from .errors import SingularGenerator, TailNotConverged, ValidationError

__all__ = ["ESTCurve", "est_laplace", "est_time_integral", "est_sweep", "CONDITION_WARN"]

CONDITION_WARN = 1e12


@dataclass(frozen=True, eq=False)
class ESTCurve:
    alphas: np.ndarray
    etas: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        a = np.asarray(self.alphas, dtype=float)
        e = np.asarray(self.etas, dtype=float)
        if a.shape != e.shape or a.ndim != 1:
            raise ValidationError("alphas and etas must be 1-d and of equal length")
        if np.any((a < 0) | (a > 1)):
            raise ValidationError("alphas must lie in [0, 1]")
        object.__setattr__(self, "alphas", a)
        object.__setattr__(self, "etas", e)

    def to_csv(self, path=None, extra_meta: dict | None = None) -> str:
        meta = dict(self.meta)
        meta.update(extra_meta or {})
        buf = io.StringIO()
        for key, value in meta.items():
            buf.write(f"# {key}={value}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["alpha", "eta"])
        for a, e in zip(self.alphas, self.etas):
            w.writerow([repr(float(a)), repr(float(e))])
        text = buf.getvalue()
        if path is not None:
            with open(path, "w") as fh:
                fh.write(text)
        return text

    @classmethod
    def from_csv(cls, path) -> "ESTCurve":
        meta = {}
        rows = []
        with open(path) as fh:
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                if line.startswith("#"):
                    key, _, value = line[1:].strip().partition("=")
                    if _:
                        meta[key.strip()] = value.strip()
                    continue
                rows.append(line)
        reader = csv.DictReader(rows)
        data = [(float(r["alpha"]), float(r["eta"])) for r in reader]
        a, e = zip(*data) if data else ((), ())
        return cls(np.array(a), np.array(e), meta)


def _drain_population_index(dim: int) -> int:
    return (dim - 1) + (dim - 1) * dim


def est_laplace(spec: SystemSpec) -> float:
    """EST from the zero-frequency Laplace solve.

    Deleting the drain-population coordinate leaves a nonsingular system on
    the transient coordinates; ``eta`` is the trace of its solution against
    the initial state ``|0><0|``.

    Raises
    ------
    SingularGenerator
        When the drain cannot be reached from the source (``eta`` infinite).
    """
    L = assemble_superoperator(spec).generator
    dim = spec.dim
    drain = _drain_population_index(dim)
    keep = np.delete(np.arange(dim * dim), drain)
    A = -L[np.ix_(keep, keep)]
    b = vec(source_state(dim))[keep]
    with warnings.catch_warnings():
        # exact singularity is detected below from the pivots
        warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
        try:
            lu, piv = scipy.linalg.lu_factor(A, check_finite=True)
        except (ValueError, scipy.linalg.LinAlgError) as exc:
            raise SingularGenerator(f"transient generator cannot be factorized: {exc}") from exc
    diag = np.abs(np.diag(lu))
    if diag.min() <= np.finfo(float).eps * diag.max() * len(diag):
        raise SingularGenerator("transient generator is singular; drain unreachable from source")
    x = scipy.linalg.lu_solve((lu, piv), b)
    cond = np.linalg.cond(A)
    if cond > CONDITION_WARN:
        warnings.warn(f"EST solve is ill-conditioned (cond={cond:.3g})", RuntimeWarning, stacklevel=2)
    full = np.zeros(dim * dim, dtype=complex)
    full[keep] = x
    eta = float(np.real(np.trace(unvec(full, dim))))
    if not np.isfinite(eta) or eta <= 0:
        raise SingularGenerator(f"EST solve returned non-physical value {eta}")
    return eta


def est_time_integral(
    spec: SystemSpec,
    tail_tolerance: float = 1e-10,
    dt: float = 0.5,
    t_max: float = 1e5,
) -> float:
    """EST as the time integral of the survival probability.

    The survival integral over each step is evaluated exactly from the
    propagated state using ``int_0^dt exp(sL) ds`` (one augmented matrix
    exponential). Once survival falls below ``tail_tolerance`` the remainder
    is closed with an exponential tail whose rate comes from the last step.

    Raises
    ------
    TailNotConverged
        If survival is still above ``tail_tolerance`` at ``t_max``, or is not
        decaying when the tail is attached.
    """
    if tail_tolerance <= 0:
        raise ValidationError("tail_tolerance must be positive")
    L = assemble_superoperator(spec).generator
    d2 = L.shape[0]
    dim = spec.dim
    aug = np.zeros((2 * d2, 2 * d2), dtype=complex)
    aug[:d2, :d2] = L
    aug[:d2, d2:] = np.eye(d2)
    E = scipy.linalg.expm(dt * aug)
    step = E[:d2, :d2]
    step_integral = E[:d2, d2:]

    # survival functional: trace over source and network populations
    survival_row = vec(np.diag(np.r_[np.ones(dim - 1), 0.0])).astype(complex)
    step_row = survival_row @ step_integral

    v = vec(source_state(dim))
    total = 0.0
    prev_s = 1.0
    t = 0.0
    while t < t_max:
        total += float(np.real(step_row @ v))
        v = step @ v
        t += dt
        s = float(np.real(survival_row @ v))
        if s < tail_tolerance:
            if s <= 0:
                return total
            if not s < prev_s:
                raise TailNotConverged(f"survival not decaying at t={t}")
            rate = np.log(prev_s / s) / dt
            return total + s / rate
        prev_s = s
    raise TailNotConverged(f"survival {prev_s:.3g} still above {tail_tolerance:.1g} at t={t_max}")


def est_sweep(spec: SystemSpec, alphas, meta: dict | None = None) -> ESTCurve:
    """``est_laplace`` for each alpha, holding the rest of ``spec`` fixed."""
    alphas = np.asarray(alphas, dtype=float)
    if np.any((alphas < 0) | (alphas > 1)):
        raise ValidationError("alphas must lie in [0, 1]")
    etas = np.array([est_laplace(spec.replace(alpha=float(a))) for a in alphas])
    info = {
        "Gamma": spec.source_rate,
        "gamma": spec.drain_rate,
        "N": spec.n_nodes,
    }
    info.update(meta or {})
    return ESTCurve(alphas, etas, info)
