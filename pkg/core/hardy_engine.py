"""
Hardy Inequality Engine for Carnot Hardy Verifier
Evaluates both sides of the half-space and convex-domain Hardy inequalities by quadrature.
"""

import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, List, Mapping, NamedTuple, Optional, Sequence, Tuple, Union

import numpy as np

from config.settings import Settings, get_settings
from core.geometry import (
    ConvexPolytope,
    HalfSpace,
    field_normal_derivative_polynomial,
    interface_normal,
    sample_interface,
    step2_K_constant,
    support_inside_halfspace,
    support_inside_polytope,
)
from core.group_core import GroupSpec, Polynomial, make_engel, make_heisenberg
from core.quadrature import (
    QuadratureRule,
    RuleSpec,
    default_rule_spec,
    integrate_many,
    integrate_with_error,
)
from core.testfns import SupportError, TestFunction
from utils.validators import ValidationError

Domain = Union[HalfSpace, ConvexPolytope]
RuleLike = Union[RuleSpec, QuadratureRule, None]

CSV_COLUMNS = ("statement", "group", "beta", "p", "lhs", "rhs_total", "slack", "err_est", "verdict")


class HypothesisError(ValidationError):
    """Raised when a statement's hypothesis does not hold for the given input."""
    pass


class Verdict(Enum):
    """Outcome of comparing a report's slack with its error budget."""

    HOLDS = "holds"
    VIOLATED = "violated-beyond-tolerance"

    @classmethod
    def classify(cls, slack: float, err_est: float, floor: float = 1e-9) -> "Verdict":
        return cls.HOLDS if slack >= -(err_est + floor) else cls.VIOLATED


class LhsKind(Enum):
    """Left side of the L^p inequalities."""

    SUM = "sum"
    FULL_GRADIENT = "full-gradient"


def c1_constant(beta: float) -> float:
    """``-(beta^2 + beta)``."""
    return -(beta * beta + beta)


def c2_constant(beta: float, p: float) -> float:
    """``-(p - 1)(|beta|^(p/(p-1)) + beta)``."""
    return -(p - 1.0) * (abs(beta) ** (p / (p - 1.0)) + beta)


def check_lp_sign_identity(a: Any, b: Any, p: float) -> Any:
    """``(a - b)(a^(p-1) - b^(p-1))``, nonnegative for a, b >= 0 and p > 1.

    Raises:
        ValidationError: If ``p <= 1`` or an argument is negative.
    """
    if not p > 1:
        raise ValidationError(f"Exponent p must exceed 1, got {p}")
    a_arr = np.asarray(a, dtype=float)
    b_arr = np.asarray(b, dtype=float)
    if np.any(a_arr < 0) or np.any(b_arr < 0):
        raise ValidationError("Sign identity needs nonnegative arguments")
    out = (a_arr - b_arr) * (a_arr ** (p - 1.0) - b_arr ** (p - 1.0))
    return float(out) if out.ndim == 0 else out


@dataclass
class InequalityReport:
    """Both sides of one inequality for one test function."""

    statement: str
    group: str
    lhs: float
    rhs_terms: Dict[str, float]
    rhs_total: float
    slack: float
    err_est: float
    verdict: Verdict
    beta: Optional[float] = None
    p: Optional[float] = None
    coefficients: Dict[str, float] = field(default_factory=dict)
    errors: Dict[str, float] = field(default_factory=dict)
    quadrature: Dict[str, Any] = field(default_factory=dict)
    extras: Dict[str, float] = field(default_factory=dict)
    lhs_kind: Optional[str] = None

    def recompute_verdict(self, floor: float = 1e-9) -> Verdict:
        return Verdict.classify(self.slack, self.err_est, floor)

    def csv_row(self, float_format: str = ".17g") -> List[str]:
        """Row matching ``CSV_COLUMNS``; absent beta or p become empty cells."""

        def fmt(value: Optional[float]) -> str:
            return "" if value is None else format(float(value), float_format)

        return [
            self.statement,
            self.group,
            fmt(self.beta),
            fmt(self.p),
            fmt(self.lhs),
            fmt(self.rhs_total),
            fmt(self.slack),
            fmt(self.err_est),
            self.verdict.value,
        ]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "statement": self.statement,
            "group": self.group,
            "beta": self.beta,
            "p": self.p,
            "lhs_kind": self.lhs_kind,
            "lhs": self.lhs,
            "rhs_terms": dict(self.rhs_terms),
            "rhs_total": self.rhs_total,
            "slack": self.slack,
            "err_est": self.err_est,
            "verdict": self.verdict.value,
            "coefficients": dict(self.coefficients),
            "errors": dict(self.errors),
            "quadrature": dict(self.quadrature),
            "extras": dict(self.extras),
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "InequalityReport":
        return cls(
            statement=data["statement"],
            group=data["group"],
            lhs=float(data["lhs"]),
            rhs_terms={k: float(v) for k, v in data.get("rhs_terms", {}).items()},
            rhs_total=float(data["rhs_total"]),
            slack=float(data["slack"]),
            err_est=float(data["err_est"]),
            verdict=Verdict(data["verdict"]),
            beta=data.get("beta"),
            p=data.get("p"),
            coefficients=dict(data.get("coefficients", {})),
            errors=dict(data.get("errors", {})),
            quadrature=dict(data.get("quadrature", {})),
            extras=dict(data.get("extras", {})),
            lhs_kind=data.get("lhs_kind"),
        )


@dataclass
class InterfaceAudit:
    """Pointwise sign audit of the interface integrand between two facets."""

    j: int
    l: int
    beta: float
    p: float
    samples: int
    gap: float
    min_integrand: float
    negative_count: int
    min_sign_identity: float
    max_distance_mismatch: float

    @property
    def holds(self) -> bool:
        return self.negative_count == 0

    def to_dict(self) -> Dict[str, Any]:
        data = dict(vars(self))
        data["holds"] = self.holds
        return data


class _NodeSample(NamedTuple):
    value: np.ndarray
    xu: np.ndarray
    pairing: np.ndarray
    normal_derivative: np.ndarray
    dist: np.ndarray


class HardyEngine:
    """Quadrature evaluation of the Hardy inequalities and their proof identities."""

    def __init__(self, settings: Optional[Settings] = None):
        self.settings = settings or get_settings()
        self.logger = logging.getLogger(__name__)
        self.floor = self.settings.tolerance.absolute_floor

    # Plumbing

    def _check_dimensions(self, G: GroupSpec, domain: Domain, u: TestFunction) -> None:
        if domain.n != G.n or u.n != G.n:
            raise ValidationError(
                f"Dimension mismatch: group {G.n}, domain {domain.n}, function {u.n}"
            )

    def _require_support(self, domain: Domain, u: TestFunction) -> None:
        if isinstance(domain, HalfSpace):
            margin = support_inside_halfspace(domain, u.support_box)
        else:
            margin = support_inside_polytope(domain, u.support_box)
        if not margin > 0:
            raise SupportError(
                f"Support of u is not strictly inside the domain (margin {margin:.3g})"
            )

    def resolve_rule(self, rule: RuleLike, u: TestFunction) -> QuadratureRule:
        """Bind a rule spec to the support box of ``u``."""
        if rule is None:
            rule = default_rule_spec(u.n, self.settings)
        if isinstance(rule, RuleSpec):
            return rule.bind(u.support_box)
        for (lo, hi), (slo, shi) in zip(rule.box, u.support_box):
            if slo < lo or shi > hi:
                raise SupportError("Quadrature box does not cover the support of u")
        return rule

    def _normal_derivatives(self, G: GroupSpec, nu: Sequence[Any]) -> List[Polynomial]:
        return [field_normal_derivative_polynomial(G, nu, i + 1) for i in range(G.N1)]

    def _sampler(self, G: GroupSpec, domain: Domain, u: TestFunction):
        """Closure computing node data for ``u`` on ``domain``."""
        if isinstance(domain, HalfSpace):
            nu = domain.nu_array
            d = float(domain.d)
            hpolys = self._normal_derivatives(G, domain.nu)

            def sample(points: np.ndarray) -> _NodeSample:
                value, grad, _ = u.evaluate(points, order=1)
                frames = G.frame_at(points)
                h = np.stack([hp.evaluate_array(points) for hp in hpolys], axis=-1)
                return _NodeSample(
                    value,
                    np.einsum("...ij,...j->...i", frames, grad),
                    frames @ nu,
                    h,
                    points @ nu - d,
                )

            return sample

        normals = domain.normals
        offsets = domain.offsets
        facet_polys = [self._normal_derivatives(G, f.nu) for f in domain.facets]

        def sample_polytope(points: np.ndarray) -> _NodeSample:
            value, grad, _ = u.evaluate(points, order=1)
            frames = G.frame_at(points)
            dists = points @ normals.T - offsets
            idx = np.argmin(dists, axis=-1)
            dist = np.take_along_axis(dists, idx[:, None], axis=-1)[:, 0]
            nu = normals[idx]
            h_all = np.stack(
                [
                    np.stack([hp.evaluate_array(points) for hp in polys], axis=-1)
                    for polys in facet_polys
                ],
                axis=1,
            )
            h = np.take_along_axis(h_all, idx[:, None, None], axis=1)[:, 0, :]
            return _NodeSample(
                value,
                np.einsum("...ij,...j->...i", frames, grad),
                np.einsum("...ij,...j->...i", frames, nu),
                h,
                dist,
            )

        return sample_polytope

    def _report(
        self,
        statement: str,
        G: GroupSpec,
        lhs: Tuple[float, float],
        terms: Mapping[str, Tuple[float, Tuple[float, float]]],
        rule: QuadratureRule,
        beta: Optional[float] = None,
        p: Optional[float] = None,
        extras: Optional[Dict[str, float]] = None,
        lhs_kind: Optional[str] = None,
    ) -> InequalityReport:
        lhs_value, lhs_err = lhs
        rhs_terms: Dict[str, float] = {}
        coefficients: Dict[str, float] = {}
        errors: Dict[str, float] = {"lhs": lhs_err}
        rhs_total = 0.0
        err_est = lhs_err
        for name, (coeff, (value, err)) in terms.items():
            term = coeff * value
            rhs_terms[name] = term
            coefficients[name] = coeff
            errors[name] = abs(coeff) * err
            rhs_total += term
            err_est += abs(coeff) * err
        slack = lhs_value - rhs_total
        verdict = Verdict.classify(slack, err_est, self.floor)
        if verdict is Verdict.VIOLATED:
            self.logger.warning(
                f"{statement} on {G.name}: slack {slack:.6g} below tolerance {err_est:.3g}"
            )
        self.logger.debug(f"{statement} on {G.name}: lhs={lhs_value:.12g} terms={rhs_terms}")
        return InequalityReport(
            statement=statement,
            group=G.name,
            lhs=lhs_value,
            rhs_terms=rhs_terms,
            rhs_total=rhs_total,
            slack=slack,
            err_est=err_est,
            verdict=verdict,
            beta=beta,
            p=p,
            coefficients=coefficients,
            errors=errors,
            quadrature=rule.describe(),
            extras=extras or {},
            lhs_kind=lhs_kind,
        )

    def _l2_integrals(self, G: GroupSpec, domain: Domain, u: TestFunction, rule: QuadratureRule):
        sample = self._sampler(G, domain, u)

        def integrands(points: np.ndarray) -> Dict[str, np.ndarray]:
            s = sample(points)
            u2 = s.value ** 2
            return {
                "lhs": np.sum(s.xu ** 2, axis=-1),
                "angle": np.sum(s.pairing ** 2, axis=-1) / s.dist ** 2 * u2,
                "derivative": np.sum(s.normal_derivative, axis=-1) / s.dist * u2,
                "mass_dist": u2 / s.dist,
            }

        return integrate_with_error(rule, integrands)

    def _lp_integrals(
        self,
        G: GroupSpec,
        domain: Domain,
        u: TestFunction,
        p: float,
        lhs_kind: LhsKind,
        rule: QuadratureRule,
    ):
        sample = self._sampler(G, domain, u)

        def integrands(points: np.ndarray) -> Dict[str, np.ndarray]:
            s = sample(points)
            up = np.abs(s.value) ** p
            if lhs_kind is LhsKind.SUM:
                lhs = np.sum(np.abs(s.xu) ** p, axis=-1)
            else:
                lhs = np.sum(s.xu ** 2, axis=-1) ** (p / 2.0)
            ratio = np.abs(s.pairing) / s.dist[..., None]
            if p >= 2:
                weight = ratio ** (p - 2.0)
            else:
                safe = np.where(ratio > 0, ratio, 1.0)
                weight = np.where(ratio > 0, safe ** (p - 2.0), 0.0)
            derivative = np.sum(weight * s.normal_derivative, axis=-1) / s.dist
            return {
                "lhs": lhs,
                "angle": np.sum(ratio ** p, axis=-1) * up,
                "derivative": derivative * up,
            }

        return integrate_with_error(rule, integrands)

    @staticmethod
    def _parse_lhs_kind(lhs_kind: Union[str, LhsKind], p: float) -> LhsKind:
        try:
            kind = LhsKind(lhs_kind) if not isinstance(lhs_kind, LhsKind) else lhs_kind
        except ValueError:
            raise ValidationError(f"Unknown lhs kind '{lhs_kind}', expected 'sum' or 'full-gradient'")
        if kind is LhsKind.FULL_GRADIENT and p < 2:
            raise ValidationError("Full-gradient left side requires p >= 2")
        return kind

    @staticmethod
    def _check_p(p: float) -> float:
        if not p > 1:
            raise ValidationError(f"Exponent p must exceed 1, got {p}")
        return float(p)

    @staticmethod
    def _first_stratum_normal(G: GroupSpec, H: HalfSpace) -> None:
        if any(v != 0 for v in H.nu[G.N1:]):
            raise HypothesisError("Normal must lie in the first stratum (nu = (nu', 0, ..., 0))")

    # Half-space inequalities

    def eval_hardy_l2_halfspace(
        self, G: GroupSpec, H: HalfSpace, u: TestFunction, beta: float, rule: RuleLike = None
    ) -> InequalityReport:
        """L2 Hardy inequality with angle function on a half-space.

        Args:
            G: Group
            H: Half-space with boundary distance ``<x, nu> - d``
            u: Test function supported strictly inside ``H``
            beta: Real parameter
            rule: Rule spec (bound to the support of ``u``) or explicit rule

        Returns:
            Report with ``C1_term`` and ``derivative_term``

        Raises:
            SupportError: If the support of ``u`` touches the boundary.
        """
        self._check_dimensions(G, H, u)
        self._require_support(H, u)
        q = self.resolve_rule(rule, u)
        res = self._l2_integrals(G, H, u, q)
        return self._report(
            "thm2.1",
            G,
            res["lhs"],
            {"C1_term": (c1_constant(beta), res["angle"]), "derivative_term": (beta, res["derivative"])},
            q,
            beta=beta,
        )

    def eval_hardy_l2_step2(
        self, G: GroupSpec, H: HalfSpace, u: TestFunction, beta: float, rule: RuleLike = None
    ) -> InequalityReport:
        """Step-two form where the derivative term collapses to ``K(a, nu, beta)``."""
        if G.step != 2:
            raise HypothesisError(f"Group '{G.name}' has step {G.step}, expected 2")
        self._check_dimensions(G, H, u)
        self._require_support(H, u)
        q = self.resolve_rule(rule, u)
        K = float(step2_K_constant(G, H.nu, beta))
        res = self._l2_integrals(G, H, u, q)
        return self._report(
            "cor-step2",
            G,
            res["lhs"],
            {"C1_term": (c1_constant(beta), res["angle"]), "K_term": (K, res["mass_dist"])},
            q,
            beta=beta,
        )

    def eval_hardy_simple(
        self, G: GroupSpec, H: HalfSpace, u: TestFunction, rule: RuleLike = None
    ) -> InequalityReport:
        """Hardy inequality with constant 1/4 for a first-stratum normal."""
        self._check_dimensions(G, H, u)
        self._first_stratum_normal(G, H)
        self._require_support(H, u)
        q = self.resolve_rule(rule, u)
        nu = H.nu_array
        d = float(H.d)

        def integrands(points: np.ndarray) -> Dict[str, np.ndarray]:
            value, grad, _ = u.evaluate(points, order=1)
            xu = np.einsum("...ij,...j->...i", G.frame_at(points), grad)
            dist = points @ nu - d
            return {"lhs": np.sum(xu ** 2, axis=-1), "hardy": value ** 2 / dist ** 2}

        res = integrate_with_error(q, integrands)
        return self._report("cor2.3", G, res["lhs"], {"hardy_term": (0.25, res["hardy"])}, q)

    def eval_uncertainty(
        self, G: GroupSpec, H: HalfSpace, u: TestFunction, rule: RuleLike = None
    ) -> InequalityReport:
        """Geometric uncertainty principle on a half-space.

        The extras carry the Cauchy-Schwarz midstep quantities.
        """
        self._check_dimensions(G, H, u)
        self._first_stratum_normal(G, H)
        self._require_support(H, u)
        q = self.resolve_rule(rule, u)
        nu = H.nu_array
        d = float(H.d)

        def integrands(points: np.ndarray) -> Dict[str, np.ndarray]:
            value, grad, _ = u.evaluate(points, order=1)
            xu = np.einsum("...ij,...j->...i", G.frame_at(points), grad)
            dist = points @ nu - d
            u2 = value ** 2
            return {
                "energy": np.sum(xu ** 2, axis=-1),
                "moment": dist ** 2 * u2,
                "mass": u2,
                "hardy": u2 / dist ** 2,
            }

        res = integrate_with_error(q, integrands)
        energy, e_err = res["energy"]
        moment, m_err = res["moment"]
        lhs = float(np.sqrt(energy) * np.sqrt(moment))
        lhs_err = 0.0
        if energy > 0 and moment > 0:
            lhs_err = 0.5 * (np.sqrt(moment / energy) * e_err + np.sqrt(energy / moment) * m_err)
        mass = res["mass"][0]
        hardy = res["hardy"][0]
        extras = {
            "energy": energy,
            "moment": moment,
            "mass": mass,
            "hardy_mass": hardy,
            "cauchy_schwarz_gap": hardy * moment - mass * mass,
        }
        return self._report(
            "cor2.4", G, (lhs, float(lhs_err)), {"mass_term": (0.5, res["mass"])}, q, extras=extras
        )

    def eval_heisenberg_special(self, u: TestFunction, rule: RuleLike = None) -> InequalityReport:
        """Heisenberg half-space ``{x_3 > 0}`` with weight ``(x_1^2 + x_2^2)/x_3^2``."""
        G = make_heisenberg()
        H = HalfSpace((0, 0, 1), 0)
        self._check_dimensions(G, H, u)
        self._require_support(H, u)
        q = self.resolve_rule(rule, u)

        def integrands(points: np.ndarray) -> Dict[str, np.ndarray]:
            value, grad, _ = u.evaluate(points, order=1)
            xu = np.einsum("...ij,...j->...i", G.frame_at(points), grad)
            x1, x2, x3 = points[..., 0], points[..., 1], points[..., 2]
            return {
                "lhs": np.sum(xu ** 2, axis=-1),
                "weight": (x1 ** 2 + x2 ** 2) / x3 ** 2 * value ** 2,
            }

        res = integrate_with_error(q, integrands)
        return self._report("cor2.5", G, res["lhs"], {"weight_term": (1.0, res["weight"])}, q)

    def eval_engel_special(
        self, u: TestFunction, nu: Sequence[Any], beta: float, rule: RuleLike = None
    ) -> InequalityReport:
        """Engel half-space ``{<x, nu> > 0}`` with the explicit ``x_2 nu_4 / 3`` term."""
        G = make_engel()
        H = HalfSpace(tuple(nu), 0)
        self._check_dimensions(G, H, u)
        self._require_support(H, u)
        q = self.resolve_rule(rule, u)
        nu_a = H.nu_array

        def integrands(points: np.ndarray) -> Dict[str, np.ndarray]:
            value, grad, _ = u.evaluate(points, order=1)
            frames = G.frame_at(points)
            xu = np.einsum("...ij,...j->...i", frames, grad)
            g = frames @ nu_a
            dist = points @ nu_a
            u2 = value ** 2
            return {
                "lhs": np.sum(xu ** 2, axis=-1),
                "angle": np.sum(g ** 2, axis=-1) / dist ** 2 * u2,
                "engel": points[..., 1] * nu_a[3] / dist * u2,
            }

        res = integrate_with_error(q, integrands)
        return self._report(
            "corE",
            G,
            res["lhs"],
            {"C1_term": (c1_constant(beta), res["angle"]), "engel_term": (beta / 3.0, res["engel"])},
            q,
            beta=beta,
        )

    def eval_hardy_lp_halfspace(
        self,
        G: GroupSpec,
        H: HalfSpace,
        u: TestFunction,
        beta: float,
        p: float,
        rule: RuleLike = None,
        lhs_kind: Union[str, LhsKind] = LhsKind.SUM,
    ) -> InequalityReport:
        """L^p Hardy inequality with the p-angle function on a half-space.

        Raises:
            ValidationError: If ``p <= 1`` or a full-gradient left side is asked for p < 2.
        """
        p = self._check_p(p)
        kind = self._parse_lhs_kind(lhs_kind, p)
        self._check_dimensions(G, H, u)
        self._require_support(H, u)
        q = self.resolve_rule(rule, u)
        res = self._lp_integrals(G, H, u, p, kind, q)
        return self._report(
            "thm2.6",
            G,
            res["lhs"],
            {
                "C2_term": (c2_constant(beta, p), res["angle"]),
                "derivative_term": (beta * (p - 1.0), res["derivative"]),
            },
            q,
            beta=beta,
            p=p,
            lhs_kind=kind.value,
        )

    # Convex domains

    def eval_hardy_l2_convex(
        self, G: GroupSpec, P: ConvexPolytope, u: TestFunction, beta: float, rule: RuleLike = None
    ) -> InequalityReport:
        """L2 inequality on a convex polytope, piecewise over the facet partition.

        Raises:
            HypothesisError: If ``beta >= 0``.
        """
        if not beta < 0:
            raise HypothesisError(f"Convex-domain inequality needs beta < 0, got {beta}")
        self._check_dimensions(G, P, u)
        self._require_support(P, u)
        q = self.resolve_rule(rule, u)
        res = self._l2_integrals(G, P, u, q)
        return self._report(
            "thm3.1",
            G,
            res["lhs"],
            {"C1_term": (c1_constant(beta), res["angle"]), "derivative_term": (beta, res["derivative"])},
            q,
            beta=beta,
        )

    def eval_hardy_lp_convex(
        self,
        G: GroupSpec,
        P: ConvexPolytope,
        u: TestFunction,
        beta: float,
        p: float,
        rule: RuleLike = None,
        lhs_kind: Union[str, LhsKind] = LhsKind.SUM,
    ) -> InequalityReport:
        """L^p inequality on a convex polytope."""
        if not beta < 0:
            raise HypothesisError(f"Convex-domain inequality needs beta < 0, got {beta}")
        p = self._check_p(p)
        kind = self._parse_lhs_kind(lhs_kind, p)
        self._check_dimensions(G, P, u)
        self._require_support(P, u)
        q = self.resolve_rule(rule, u)
        res = self._lp_integrals(G, P, u, p, kind, q)
        return self._report(
            "thm3.2",
            G,
            res["lhs"],
            {
                "C2_term": (c2_constant(beta, p), res["angle"]),
                "derivative_term": (beta * (p - 1.0), res["derivative"]),
            },
            q,
            beta=beta,
            p=p,
            lhs_kind=kind.value,
        )

    def eval_hardy_l2_polytope_sequence(
        self,
        G: GroupSpec,
        polytopes: Sequence[ConvexPolytope],
        u: TestFunction,
        beta: float,
        rule: RuleLike = None,
    ) -> List[InequalityReport]:
        """Convex L2 reports along an increasing polytope sequence."""
        return [self.eval_hardy_l2_convex(G, P, u, beta, rule) for P in polytopes]

    # Proof identities

    def check_factorization_identity(
        self, G: GroupSpec, H: HalfSpace, u: TestFunction, beta: float, rule: RuleLike = None
    ) -> float:
        """Residual of ``int |grad u + beta W u|^2`` against its expanded form."""
        self._check_dimensions(G, H, u)
        self._require_support(H, u)
        q = self.resolve_rule(rule, u)
        sample = self._sampler(G, H, u)

        def integrands(points: np.ndarray) -> Dict[str, np.ndarray]:
            s = sample(points)
            w = s.pairing / s.dist[..., None]
            xw = s.normal_derivative / s.dist[..., None] - w ** 2
            u2 = (s.value ** 2)[..., None]
            square = np.sum((s.xu + beta * w * s.value[..., None]) ** 2, axis=-1)
            expanded = np.sum(s.xu ** 2 - beta * xw * u2 + beta ** 2 * w ** 2 * u2, axis=-1)
            return {"square": square, "expanded": expanded}

        res = integrate_many(q, integrands)
        residual = abs(res["square"] - res["expanded"])
        self.logger.debug(f"Factorization residual {residual:.3e} with {q.describe()}")
        return residual

    def audit_interface_sign(
        self,
        G: GroupSpec,
        P: ConvexPolytope,
        j: int,
        l: int,
        beta: float,
        p: float,
        count: int,
        box: Sequence[Tuple[float, float]],
        seed: int = 0,
    ) -> InterfaceAudit:
        """Check the discarded interface integrand is nonnegative on sampled points.

        Facet indices are 0-based. The integrand at a point of Gamma_jl is
        ``-beta (phi(g_j/dist) - phi(g_l/dist)) <X_i, n_jl>`` with
        ``phi(t) = |t|^(p-2) t`` and ``g = <X_i, nu>``.

        Raises:
            ValidationError: If j == l or the facets share no sampled interface.
            HypothesisError: If ``beta >= 0``.
        """
        if j == l:
            raise ValidationError("An interface needs two distinct facets")
        if not beta < 0:
            raise HypothesisError(f"Interface audit needs beta < 0, got {beta}")
        p = self._check_p(p)
        if P.n != G.n:
            raise ValidationError("Polytope and group dimensions differ")
        points = sample_interface(
            P, j, l, count, box, seed=seed, tolerance=self.settings.tolerance.interface
        )
        nu_j, nu_l = P.normals[j], P.normals[l]
        _, gap = interface_normal(nu_j, nu_l)
        frames = G.frame_at(points)
        dists = P.distances(points)
        dist = dists[:, j]
        a = (frames @ nu_j) / dist[:, None]
        b = (frames @ nu_l) / dist[:, None]

        def phi(t: np.ndarray) -> np.ndarray:
            mag = np.abs(t)
            safe = np.where(mag > 0, mag, 1.0)
            return np.where(mag > 0, safe ** (p - 2.0) * t, 0.0)

        pairing_n = (a - b) * dist[:, None] / gap
        integrand = -beta * (phi(a) - phi(b)) * pairing_n
        identity = check_lp_sign_identity(np.abs(a), np.abs(b), p)
        audit = InterfaceAudit(
            j=j,
            l=l,
            beta=beta,
            p=p,
            samples=len(points),
            gap=gap,
            min_integrand=float(np.min(integrand)),
            negative_count=int(np.sum(integrand < 0)),
            min_sign_identity=float(np.min(identity)),
            max_distance_mismatch=float(np.max(np.abs(dist - dists[:, l]))),
        )
        self.logger.info(
            f"Interface {j}/{l}: {audit.samples} samples, min integrand {audit.min_integrand:.3e}"
        )
        return audit
