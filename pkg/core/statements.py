"""
Statement Catalog for Carnot Hardy Verifier
Lists the verifiable inequalities, checks their hypotheses and dispatches evaluation.
"""

from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Tuple, Union

from core.geometry import ConvexPolytope, HalfSpace
from core.group_core import GroupSpec
from core.hardy_engine import HardyEngine, HypothesisError, InequalityReport, LhsKind, RuleLike
from core.testfns import TestFunction
from utils.validators import ValidationError

Domain = Union[HalfSpace, ConvexPolytope]


@dataclass(frozen=True)
class Statement:
    """One catalog entry."""

    id: str
    location: str
    title: str
    domain: str
    beta_domain: str
    nu_restriction: str
    p_domain: str
    uses_beta: bool = True
    uses_p: bool = False

    def hypothesis(self) -> str:
        return f"beta: {self.beta_domain}; nu: {self.nu_restriction}; p: {self.p_domain}"

    def to_dict(self) -> Dict[str, Any]:
        return {
            "id": self.id,
            "location": self.location,
            "title": self.title,
            "domain": self.domain,
            "hypothesis": {
                "beta": self.beta_domain,
                "nu": self.nu_restriction,
                "p": self.p_domain,
            },
        }


CATALOG: Tuple[Statement, ...] = (
    Statement(
        "thm2.1", "Theorem 2.1", "L2 Hardy inequality with angle function",
        "halfspace", "any real", "any unit normal", "2",
    ),
    Statement(
        "cor-step2", "Step-two corollary", "L2 Hardy inequality on step-two groups",
        "halfspace", "any real", "any unit normal", "2",
    ),
    Statement(
        "cor2.3", "Corollary 2.3", "Hardy inequality with constant 1/4",
        "halfspace", "not used", "first stratum only", "2", uses_beta=False,
    ),
    Statement(
        "cor2.4", "Corollary 2.4", "Geometric uncertainty principle",
        "halfspace", "not used", "first stratum only", "2", uses_beta=False,
    ),
    Statement(
        "cor2.5", "Corollary 2.5", "Heisenberg half-space {x3 > 0}",
        "halfspace", "not used", "e3 with d = 0 on the Heisenberg group", "2", uses_beta=False,
    ),
    Statement(
        "corE", "Engel corollary", "Engel half-space inequality",
        "halfspace", "any real", "any unit normal with d = 0 on the Engel group", "2",
    ),
    Statement(
        "thm2.6", "Theorem 2.6", "L^p Hardy inequality with p-angle function",
        "halfspace", "any real", "any unit normal", "p > 1", uses_p=True,
    ),
    Statement(
        "thm3.1", "Theorem 3.1", "L2 Hardy inequality on convex polytopes",
        "polytope", "beta < 0", "polytope facet normals", "2",
    ),
    Statement(
        "thm3.2", "Theorem 3.2", "L^p Hardy inequality on convex polytopes",
        "polytope", "beta < 0", "polytope facet normals", "p > 1", uses_p=True,
    ),
)

_BY_ID = {s.id: s for s in CATALOG}


def list_statements() -> List[Statement]:
    return list(CATALOG)


def get_statement(statement_id: str) -> Statement:
    try:
        return _BY_ID[statement_id]
    except KeyError:
        valid = ", ".join(_BY_ID)
        raise ValidationError(f"Unknown statement '{statement_id}', expected one of: {valid}")


def check_hypotheses(
    statement: Statement,
    G: GroupSpec,
    domain: Domain,
    beta: Optional[float] = None,
    p: Optional[float] = None,
    lhs_kind: str = LhsKind.SUM.value,
) -> None:
    """Validate a statement's hypotheses before any evaluation.

    Raises:
        HypothesisError: If a hypothesis fails.
        ValidationError: If the domain kind or a parameter is missing.
    """
    if domain.n != G.n:
        raise ValidationError(f"Domain dimension {domain.n} differs from group dimension {G.n}")
    if statement.domain == "halfspace" and not isinstance(domain, HalfSpace):
        raise ValidationError(f"{statement.id} needs a half-space domain")
    if statement.domain == "polytope" and not isinstance(domain, ConvexPolytope):
        raise ValidationError(f"{statement.id} needs a polytope domain")
    if statement.uses_beta and beta is None:
        raise ValidationError(f"{statement.id} needs a beta value")
    if statement.uses_p:
        if p is None or not p > 1:
            raise HypothesisError(f"{statement.id} needs p > 1, got {p}")
        if LhsKind(lhs_kind) is LhsKind.FULL_GRADIENT and p < 2:
            raise HypothesisError("Full-gradient left side requires p >= 2")
    if statement.beta_domain == "beta < 0" and not (beta is not None and beta < 0):
        raise HypothesisError(f"{statement.id} needs beta < 0, got {beta}")
    if statement.id in ("cor2.3", "cor2.4"):
        assert isinstance(domain, HalfSpace)
        if any(v != 0 for v in domain.nu[G.N1:]):
            raise HypothesisError(f"{statement.id} needs a first-stratum normal")
    if statement.id == "cor2.5":
        assert isinstance(domain, HalfSpace)
        if G.name != "heisenberg" or tuple(domain.nu) != (0, 0, 1) or domain.d != 0:
            raise HypothesisError("cor2.5 is stated on the Heisenberg group with nu = e3, d = 0")
    if statement.id == "corE":
        assert isinstance(domain, HalfSpace)
        if G.name != "engel" or domain.d != 0:
            raise HypothesisError("corE is stated on the Engel group with d = 0")
    if statement.id == "cor-step2" and G.step != 2:
        raise HypothesisError(f"cor-step2 needs a step-two group, '{G.name}' has step {G.step}")


def evaluate(
    engine: HardyEngine,
    statement: Statement,
    G: GroupSpec,
    domain: Domain,
    u: TestFunction,
    beta: Optional[float] = None,
    p: Optional[float] = None,
    lhs_kind: str = LhsKind.SUM.value,
    rule: RuleLike = None,
) -> InequalityReport:
    """Check hypotheses and evaluate one statement for one test function."""
    check_hypotheses(statement, G, domain, beta, p, lhs_kind)
    sid = statement.id
    if sid == "thm2.1":
        return engine.eval_hardy_l2_halfspace(G, domain, u, beta, rule)
    if sid == "cor-step2":
        return engine.eval_hardy_l2_step2(G, domain, u, beta, rule)
    if sid == "cor2.3":
        return engine.eval_hardy_simple(G, domain, u, rule)
    if sid == "cor2.4":
        return engine.eval_uncertainty(G, domain, u, rule)
    if sid == "cor2.5":
        return engine.eval_heisenberg_special(u, rule)
    if sid == "corE":
        return engine.eval_engel_special(u, domain.nu, beta, rule)
    if sid == "thm2.6":
        return engine.eval_hardy_lp_halfspace(G, domain, u, beta, p, rule, lhs_kind)
    if sid == "thm3.1":
        return engine.eval_hardy_l2_convex(G, domain, u, beta, rule)
    return engine.eval_hardy_lp_convex(G, domain, u, beta, p, rule, lhs_kind)
