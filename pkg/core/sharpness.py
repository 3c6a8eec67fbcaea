"""
Sharpness Probing for Carnot Hardy Verifier
Sweeps beta through the theorem constants and brackets Hardy constants with Rayleigh quotients.
"""

import logging
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import minimize_scalar

from config.settings import Settings, get_settings
from core.geometry import HalfSpace, support_inside_halfspace
from core.group_core import GroupSpec
from core.hardy_engine import RuleLike, c1_constant, c2_constant
from core.quadrature import (
    QuadratureRule,
    RuleKind,
    RuleSpec,
    default_rule_spec,
    integrate_with_error,
)
from core.testfns import SupportError, TestFunction, TestFunctionKind
from utils.validators import ValidationError

logger = logging.getLogger(__name__)

Objective = Callable[[float], float]

C1_STATEMENTS = ("thm2.1", "cor-step2", "cor2.3", "cor2.4", "cor2.5", "corE", "thm3.1")
C2_STATEMENTS = ("thm2.6", "thm3.2")


@dataclass
class SweepResult:
    """Grid evaluation of an objective in beta.

    ``argmax`` is the lowest grid beta attaining the grid maximum; the
    refined values are present only when refinement ran.
    """

    betas: np.ndarray
    values: np.ndarray
    argmax: float
    max_value: float
    refined_argmax: Optional[float] = None
    refined_value: Optional[float] = None

    @property
    def best(self) -> Tuple[float, float]:
        if self.refined_argmax is not None and self.refined_value is not None:
            return self.refined_argmax, self.refined_value
        return self.argmax, self.max_value

    def rows(self) -> List[Tuple[float, float]]:
        return [(float(b), float(v)) for b, v in zip(self.betas, self.values)]


def beta_grid(lo: float, hi: float, step: float) -> np.ndarray:
    """Grid ``lo, lo + step, ...`` up to ``hi`` inclusive.

    Raises:
        ValidationError: If the grid would be empty.
    """
    if not step > 0:
        raise ValidationError(f"Sweep step must be positive, got {step}")
    if not lo < hi:
        raise ValidationError(f"Sweep needs lo < hi, got [{lo}, {hi}]")
    count = int(np.floor((hi - lo) / step + 1e-9)) + 1
    return lo + step * np.arange(count)


def sweep_beta(
    objective: Objective, lo: float, hi: float, step: float, refine: bool = False
) -> SweepResult:
    """Exhaustive grid sweep with optional bounded refinement around the argmax."""
    betas = beta_grid(lo, hi, step)
    values = np.array([float(objective(float(b))) for b in betas])
    k = int(np.argmax(values))
    result = SweepResult(betas, values, float(betas[k]), float(values[k]))
    logger.debug(f"Sweep over {len(betas)} points: argmax {result.argmax} value {result.max_value}")
    if refine:
        a = max(lo, result.argmax - step)
        b = min(hi, result.argmax + step)
        if a < b:
            opt = minimize_scalar(
                lambda beta: -float(objective(beta)),
                bounds=(a, b),
                method="bounded",
                options={"xatol": 1e-12},
            )
            if opt.success and -opt.fun >= result.max_value:
                result.refined_argmax = float(opt.x)
                result.refined_value = float(-opt.fun)
    return result


def constant_objective(statement: str, p: Optional[float] = None) -> Objective:
    """The beta-dependent constant in front of the angle term of a statement.

    Raises:
        ValidationError: For unknown statements or a missing/invalid ``p``.
    """
    if statement in C1_STATEMENTS:
        return c1_constant
    if statement in C2_STATEMENTS:
        if p is None or not p > 1:
            raise ValidationError(f"Statement {statement} needs an exponent p > 1")
        exponent = float(p)
        return lambda beta: c2_constant(beta, exponent)
    raise ValidationError(f"No beta-dependent constant for statement '{statement}'")


# Rayleigh quotients


@dataclass
class ProbeResult:
    """Lowest Rayleigh quotient over a trial family."""

    estimate: float
    index: int
    quotients: List[float] = field(default_factory=list)
    errors: List[float] = field(default_factory=list)

    def rows(self) -> List[Dict[str, Any]]:
        return [
            {"index": i, "quotient": q, "err_est": e}
            for i, (q, e) in enumerate(zip(self.quotients, self.errors))
        ]


def _quotient_rule(
    u: TestFunction, rule: RuleLike, settings: Settings
) -> QuadratureRule:
    if u.kind is TestFunctionKind.BOUNDARY_PROBE:
        nodes = settings.quadrature.gauss_nodes
        if isinstance(rule, (RuleSpec, QuadratureRule)) and rule.kind is not RuleKind.MONTE_CARLO:
            nodes = rule.nodes
        return QuadratureRule(
            RuleKind.GAUSS_JACOBI,
            u.support_box,
            nodes=nodes,
            singular_axis=u.axis,
            singular_exponent=2.0 * float(u.alpha) - 2.0,
            singular_nodes=settings.quadrature.probe_nodes,
            chunk_size=settings.quadrature.chunk_size,
        )
    if rule is None:
        rule = default_rule_spec(u.n, settings)
    if isinstance(rule, RuleSpec):
        return rule.bind(u.support_box)
    return rule


def _require_quotient_support(H: HalfSpace, u: TestFunction) -> None:
    if u.kind is TestFunctionKind.BOUNDARY_PROBE:
        if u.offset != float(H.d) or not H.nu_array[u.axis] == 1.0:
            raise SupportError("Probe is not attached to the boundary of this half-space")
        return
    margin = support_inside_halfspace(H, u.support_box)
    if not margin > 0:
        raise SupportError(f"Support of u is not strictly inside the half-space (margin {margin:.3g})")


def rayleigh_estimate(
    G: GroupSpec,
    H: HalfSpace,
    u: TestFunction,
    rule: RuleLike = None,
    settings: Optional[Settings] = None,
) -> Tuple[float, float]:
    """Quotient ``int |grad_G u|^2 / int u^2 / dist^2`` and its error estimate.

    Boundary probes are integrated with a Gauss-Jacobi rule matched to their
    exponent along the normal axis.

    Raises:
        ValidationError: If the denominator vanishes.
        SupportError: If the support of ``u`` leaves the half-space.
    """
    settings = settings or get_settings()
    if u.n != G.n or H.n != G.n:
        raise ValidationError("Group, half-space and function dimensions differ")
    _require_quotient_support(H, u)
    q = _quotient_rule(u, rule, settings)
    nu = H.nu_array
    d = float(H.d)

    def integrands(points: np.ndarray) -> Dict[str, np.ndarray]:
        value, grad, _ = u.evaluate(points, order=1)
        xu = np.einsum("...ij,...j->...i", G.frame_at(points), grad)
        dist = points @ nu - d
        return {"energy": np.sum(xu ** 2, axis=-1), "hardy": value ** 2 / dist ** 2}

    res = integrate_with_error(q, integrands)
    energy, e_err = res["energy"]
    hardy, h_err = res["hardy"]
    if not hardy > 0:
        raise ValidationError("Rayleigh quotient denominator vanishes (u is zero on the grid)")
    quotient = energy / hardy
    err = (e_err + abs(quotient) * h_err) / hardy
    logger.debug(f"Rayleigh quotient {quotient:.12g} +- {err:.3g} with {q.describe()}")
    return quotient, err


def rayleigh_quotient(
    G: GroupSpec,
    H: HalfSpace,
    u: TestFunction,
    rule: RuleLike = None,
    settings: Optional[Settings] = None,
) -> float:
    return rayleigh_estimate(G, H, u, rule, settings)[0]


def probe_constant(
    G: GroupSpec,
    H: HalfSpace,
    family: Sequence[TestFunction],
    rule: RuleLike = None,
    settings: Optional[Settings] = None,
) -> ProbeResult:
    """Minimum Rayleigh quotient over ``family`` with the minimizing member.

    Raises:
        ValidationError: If the family is empty.
    """
    if not family:
        raise ValidationError("Probe family is empty")
    settings = settings or get_settings()
    estimates = [rayleigh_estimate(G, H, u, rule, settings) for u in family]
    quotients = [q for q, _ in estimates]
    k = int(np.argmin(quotients))
    logger.info(f"Probed {len(family)} functions on {G.name}: lowest quotient {quotients[k]:.6g} (#{k})")
    return ProbeResult(quotients[k], k, quotients, [e for _, e in estimates])
