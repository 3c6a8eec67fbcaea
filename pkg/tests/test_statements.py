"""
Tests for the statement catalog, hypothesis checks and dispatch.
"""

import pytest

from core.geometry import HalfSpace, square_prism
from core.hardy_engine import HardyEngine, HypothesisError, Verdict
from core.quadrature import RuleKind, RuleSpec
from core.statements import CATALOG, check_hypotheses, evaluate, get_statement, list_statements
from core.testfns import random_family
from utils.validators import ValidationError

RULE = RuleSpec(RuleKind.GAUSS, nodes=10)
PRISM = square_prism(3, (0, 1), (0.0, 0.0, 0.0), 1.0)
UPPER = HalfSpace((0, 0, 1), 0)


@pytest.fixture
def engine(mock_settings):
    return HardyEngine(mock_settings)


@pytest.mark.priority1
@pytest.mark.unit
class TestCatalog:
    """Catalog completeness and lookup."""

    def test_catalog_order(self):
        assert [s.id for s in list_statements()] == [
            "thm2.1", "cor-step2", "cor2.3", "cor2.4", "cor2.5", "corE", "thm2.6", "thm3.1", "thm3.2",
        ]

    def test_every_entry_has_location_and_hypothesis(self):
        for s in CATALOG:
            assert s.location
            assert "beta:" in s.hypothesis()
            assert set(s.to_dict()["hypothesis"]) == {"beta", "nu", "p"}

    def test_parameter_usage(self):
        assert not get_statement("cor2.5").uses_beta
        assert get_statement("thm3.2").uses_p
        assert not get_statement("thm3.1").uses_p

    def test_unknown_statement(self):
        with pytest.raises(ValidationError, match="thm2.1"):
            get_statement("thm9.9")


@pytest.mark.priority1
@pytest.mark.validation
class TestHypotheses:
    """Hypotheses are checked before any quadrature."""

    def test_convex_needs_negative_beta(self, heisenberg):
        with pytest.raises(HypothesisError):
            check_hypotheses(get_statement("thm3.1"), heisenberg, PRISM, beta=0.5)

    def test_lp_needs_p_above_one(self, heisenberg):
        with pytest.raises(HypothesisError):
            check_hypotheses(get_statement("thm2.6"), heisenberg, UPPER, beta=-0.5, p=1.0)

    def test_full_gradient_needs_p_two(self, heisenberg):
        with pytest.raises(HypothesisError):
            check_hypotheses(get_statement("thm3.2"), heisenberg, PRISM, beta=-0.5, p=1.5, lhs_kind="full-gradient")

    def test_domain_kind(self, heisenberg):
        with pytest.raises(ValidationError):
            check_hypotheses(get_statement("thm3.1"), heisenberg, UPPER, beta=-0.5)
        with pytest.raises(ValidationError):
            check_hypotheses(get_statement("thm2.1"), heisenberg, PRISM, beta=-0.5)

    def test_beta_required(self, heisenberg):
        with pytest.raises(ValidationError):
            check_hypotheses(get_statement("thm2.1"), heisenberg, UPPER)

    def test_first_stratum_normal(self, heisenberg, horizontal_halfspace):
        check_hypotheses(get_statement("cor2.3"), heisenberg, horizontal_halfspace)
        with pytest.raises(HypothesisError):
            check_hypotheses(get_statement("cor2.4"), heisenberg, UPPER)

    def test_heisenberg_corollary_domain(self, heisenberg, horizontal_halfspace):
        check_hypotheses(get_statement("cor2.5"), heisenberg, UPPER)
        with pytest.raises(HypothesisError):
            check_hypotheses(get_statement("cor2.5"), heisenberg, HalfSpace((0, 0, 1), 0.5))
        with pytest.raises(HypothesisError):
            check_hypotheses(get_statement("cor2.5"), heisenberg, horizontal_halfspace)

    def test_engel_corollary_domain(self, engel, engel_law):
        H = HalfSpace((0, 0, 0.6, 0.8), 0)
        check_hypotheses(get_statement("corE"), engel, H, beta=-0.5)
        with pytest.raises(HypothesisError):
            check_hypotheses(get_statement("corE"), engel_law, H, beta=-0.5)
        with pytest.raises(HypothesisError):
            check_hypotheses(get_statement("corE"), engel, HalfSpace((0, 0, 0.6, 0.8), 1), beta=-0.5)

    def test_step2_corollary_group(self, engel, step2_group):
        check_hypotheses(get_statement("cor-step2"), step2_group, HalfSpace((0, 0, 0, 0, 1), 0), beta=1.0)
        with pytest.raises(HypothesisError):
            check_hypotheses(get_statement("cor-step2"), engel, HalfSpace((0, 0, 0, 1), 0), beta=1.0)

    def test_dimension_mismatch(self, engel):
        with pytest.raises(ValidationError):
            check_hypotheses(get_statement("thm2.1"), engel, UPPER, beta=-0.5)


@pytest.mark.priority1
@pytest.mark.integration
class TestDispatch:
    """``evaluate`` routes every statement to its evaluator."""

    @pytest.mark.parametrize(
        "statement,beta,p,kind",
        [
            ("thm2.1", -0.5, None, "sum"),
            ("cor2.3", None, None, "sum"),
            ("cor2.4", None, None, "sum"),
            ("thm2.6", -0.5, 3.0, "full-gradient"),
        ],
    )
    def test_halfspace_statements(self, engine, heisenberg, horizontal_halfspace, statement, beta, p, kind):
        u = random_family(1, 1, [(0.0, 1.0), (0.0, 1.0), (-1.0, 1.0)])[0]
        report = evaluate(engine, get_statement(statement), heisenberg, horizontal_halfspace, u, beta, p, kind, RULE)
        assert report.statement == statement
        assert report.verdict is Verdict.HOLDS

    def test_heisenberg_corollary(self, engine, heisenberg, heisenberg_bump):
        report = evaluate(engine, get_statement("cor2.5"), heisenberg, UPPER, heisenberg_bump, rule=RULE)
        assert report.statement == "cor2.5"
        assert set(report.rhs_terms) == {"weight_term"}

    def test_engel_corollary_without_fourth_component(self, engine, engel):
        H = HalfSpace((0.6, 0.8, 0, 0), 0)
        u = random_family(2, 1, [(0.5, 1.5), (0.5, 1.5), (-1.0, 1.0), (-1.0, 1.0)])[0]
        report = evaluate(engine, get_statement("corE"), engel, H, u, beta=-0.5, rule=RULE)
        assert report.statement == "corE"
        assert report.rhs_terms["engel_term"] == 0.0
        assert report.rhs_terms["C1_term"] > 0
        assert report.verdict is Verdict.HOLDS

    def test_step2_corollary(self, engine, step2_group):
        H = HalfSpace((0, 0, 0, 0.6, 0.8), 0)
        u = random_family(3, 1, [(-1.0, 1.0)] * 3 + [(0.2, 1.5)] * 2)[0]
        report = evaluate(
            engine, get_statement("cor-step2"), step2_group, H, u, beta=-0.5,
            rule=RuleSpec(RuleKind.GAUSS, nodes=6),
        )
        assert report.statement == "cor-step2"
        assert report.verdict is Verdict.HOLDS

    @pytest.mark.parametrize("statement,p", [("thm3.1", None), ("thm3.2", 2.5)])
    def test_convex_statements(self, engine, heisenberg, statement, p):
        u = random_family(4, 1, [(-0.8, 0.8), (-0.8, 0.8), (-1.0, 1.0)])[0]
        report = evaluate(engine, get_statement(statement), heisenberg, PRISM, u, -0.5, p, "sum", RULE)
        assert report.statement == statement
        assert report.verdict is Verdict.HOLDS

    def test_hypothesis_checked_before_evaluation(self, engine, heisenberg):
        u = random_family(5, 1, [(-0.8, 0.8), (-0.8, 0.8), (-1.0, 1.0)])[0]
        with pytest.raises(HypothesisError):
            evaluate(engine, get_statement("thm3.1"), heisenberg, PRISM, u, 0.5, rule=RULE)
