"""Negative gradient flow of ``|m[.]|^2`` on the unit sphere of brackets.

The flow is discretized as a descent that moves along group orbits (see
:func:`nilmoment.kernels.descend`), so its limit lies in the closure of the
starting orbit by construction rather than only up to integration error.
"""
import enum
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import kernels
from ._linalg import orthonormalize
from .errors import ZeroVector
from .lie_core import JACOBI_TOL, BracketTensor, check_lie, jacobi_residual, nilpotency_class, symmetric_basis
from .moment import moment_norm_sq

CRITICALITY_TOL = 1e-8

_STATUS_NAMES = {
    kernels.STATUS_CONVERGED: "converged",
    kernels.STATUS_MAX_STEPS: "max_steps",
    kernels.STATUS_STALLED: "stalled",
}


@dataclass(frozen=True)
class FlowConfig:
    """Step rule and stopping criteria.

    With ``line_search`` off every step has length ``step_size``. Otherwise
    ``step_size`` caps an Armijo backtracking search that shrinks by ``shrink``.
    ``sample_every > 0`` records ``(step, |m|^2, |grad|)`` at that stride.
    """

    max_steps: int = 200_000
    step_size: float = 1.0
    line_search: bool = True
    shrink: float = 0.5
    armijo: float = 1e-4
    grad_tol: float = 1e-9
    renormalize_every: int = 1
    sample_every: int = 0

    def __post_init__(self):
        if self.max_steps < 0:
            raise ValueError("max_steps must be nonnegative")
        if not self.step_size > 0:
            raise ValueError("step_size must be positive")
        if not 0 < self.shrink < 1:
            raise ValueError("shrink must lie in (0, 1)")
        if not 0 < self.armijo < 1:
            raise ValueError("armijo must lie in (0, 1)")
        if not self.grad_tol > 0:
            raise ValueError("grad_tol must be positive")
        if self.renormalize_every < 0 or self.sample_every < 0:
            raise ValueError("renormalize_every and sample_every must be nonnegative")


class Verdict(enum.Enum):
    DISTINGUISHED_MINIMAL = "DistinguishedMinimal"
    DISTINGUISHED_NONMINIMAL = "DistinguishedNonminimal"
    NOT_CONVERGED = "NotConverged"


@dataclass(frozen=True)
class FlowReport:
    """Where the flow stopped and what the stopping point is.

    ``final_moment_norm_sq`` is the objective that was flowed (the moment
    projected onto the allowed directions, for a restricted flow), while
    ``full_moment_norm_sq`` always uses the unprojected moment.
    ``critical_constant`` is ``c`` at the unit-norm final point and
    ``scaled_constant`` the same ``c`` at the starting bracket's norm.
    """

    final_point: BracketTensor
    steps_taken: int
    final_grad_norm: float
    final_moment_norm_sq: float
    full_moment_norm_sq: float
    critical_constant: Optional[float]
    scaled_constant: Optional[float]
    criticality_residual: float
    verdict: Verdict
    status: str
    trajectory_samples: tuple = field(default=())


class SolitonKind(enum.Enum):
    EINSTEIN_NILRADICAL = "EinsteinNilradical"
    NOT_EINSTEIN_NILRADICAL = "NotEinsteinNilradical"
    UNDETERMINED = "Undetermined"


@dataclass(frozen=True)
class SolitonVerdict:
    kind: SolitonKind
    c: Optional[float]
    soliton_point: Optional[BracketTensor]
    nilpotency_class: int
    flow: Optional[FlowReport]


def _symmetric_generators(generators, n):
    mats = []
    for g in generators:
        g = np.asarray(g, dtype=float)
        if g.shape != (n, n):
            raise ValueError(f"generator has shape {g.shape}, expected ({n}, {n})")
        if np.max(np.abs(g - g.T)) > 1e-12 * max(1.0, np.max(np.abs(g))):
            raise ValueError("flow directions must be symmetric matrices")
        mats.append(0.5 * (g + g.T))
    return orthonormalize(mats)


def run_flow(mu0, config=None):
    """Unrestricted flow: every symmetric direction is allowed."""
    return run_flow_restricted(mu0, symmetric_basis(mu0.dim), config)


def run_flow_restricted(mu0, generators, config=None):
    """Flow of ``|m_H[.]|^2`` where ``m_H`` projects the moment onto span(generators).

    ``generators`` should span the symmetric part of a transpose-stable
    subalgebra; their commutators supply the matching skew directions.
    """
    config = config or FlowConfig()
    n = mu0.dim
    s0 = mu0.norm()
    if s0 == 0.0:
        raise ZeroVector("the flow needs a nonzero starting bracket")
    sym = _symmetric_generators(generators, n)
    if not sym:
        raise ValueError("no flow directions given")
    use_basis = len(sym) < n * (n + 1) // 2
    skew = orthonormalize([a @ b - b @ a for i, a in enumerate(sym) for b in sym[i + 1:]])
    basis = np.ascontiguousarray(np.stack(sym))
    gens = np.ascontiguousarray(np.stack(sym + skew))

    mu, steps, gn, f, status, samples = kernels.descend(
        np.ascontiguousarray(mu0.coeffs), basis, use_basis, gens,
        int(config.max_steps), float(config.step_size), bool(config.line_search),
        float(config.shrink), float(config.armijo), float(config.grad_tol),
        int(config.renormalize_every), int(config.sample_every))

    final = BracketTensor(mu)
    w = kernels.act_coeffs(kernels.project_moment(kernels.moment_coeffs(final.coeffs), basis, use_basis),
                           final.coeffs)
    c = float(np.sum(w * final.coeffs))
    residual = float(np.sqrt(np.sum((w - c * final.coeffs) ** 2)))
    present = residual <= CRITICALITY_TOL

    if gn <= config.grad_tol:
        minimal = abs(c) <= 10.0 * config.grad_tol
        verdict = Verdict.DISTINGUISHED_MINIMAL if minimal else Verdict.DISTINGUISHED_NONMINIMAL
    else:
        verdict = Verdict.NOT_CONVERGED

    return FlowReport(
        final_point=final,
        steps_taken=int(steps),
        final_grad_norm=float(gn),
        final_moment_norm_sq=float(f),
        full_moment_norm_sq=moment_norm_sq(final),
        critical_constant=c if present else None,
        scaled_constant=c * s0 * s0 if present else None,
        criticality_residual=residual,
        verdict=verdict,
        status=_STATUS_NAMES[int(status)],
        trajectory_samples=tuple((int(r[0]), float(r[1]), float(r[2])) for r in samples),
    )


def soliton_verdict(mu, config=None):
    """Decide whether ``mu`` is the bracket of an Einstein nilradical by flowing to a critical point.

    A converged flow gives a positive answer with the limit as soliton bracket,
    provided the limit still satisfies the Jacobi identity (a limit that drifted
    off the orbit proves nothing). Anything else is Undetermined; a negative
    answer is never asserted.
    """
    check_lie(mu)
    step = nilpotency_class(mu)
    if mu.is_zero():
        return SolitonVerdict(SolitonKind.EINSTEIN_NILRADICAL, 0.0, mu, step, None)
    report = run_flow(mu, config)
    if report.verdict is Verdict.NOT_CONVERGED or jacobi_residual(report.final_point) > JACOBI_TOL:
        return SolitonVerdict(SolitonKind.UNDETERMINED, None, None, step, report)
    return SolitonVerdict(SolitonKind.EINSTEIN_NILRADICAL, report.scaled_constant,
                          report.final_point, step, report)
