"""
Input Validation for Carnot Hardy Verifier
Parses and validates run configs before any numerical work starts.
"""

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Iterator, List, Mapping, Optional, Sequence, Tuple, Union


class ValidationError(Exception):
    """Raised when input validation fails."""
    pass


BetaSpec = Union[str, float, int, Sequence[Union[float, int]], None]


def split_beta_range(text: str) -> Tuple[float, float, float]:
    """``"lo:hi:step"`` as three floats."""
    parts = str(text).split(":")
    if len(parts) != 3:
        raise ValidationError(f"Beta range must look like 'lo:hi:step', got '{text}'")
    try:
        lo, hi, step = (float(v) for v in parts)
    except ValueError:
        raise ValidationError(f"Beta range must contain numbers, got '{text}'")
    return lo, hi, step


def parse_beta_range(text: str) -> List[float]:
    """Expand ``"lo:hi:step"`` into an inclusive grid.

    Raises:
        ValidationError: If the string is malformed or the grid is empty.
    """
    from core.sharpness import beta_grid

    lo, hi, step = split_beta_range(text)
    return [float(b) for b in beta_grid(lo, hi, step)]


@dataclass
class RunCase:
    """One statement evaluated over a product of functions, betas, exponents and left sides."""

    statement: str
    group_ref: str
    group: Any
    domain: Any
    functions: List[Any]
    betas: List[Optional[float]]
    ps: List[Optional[float]]
    lhs_kinds: List[str]
    rule: Any = None

    def tasks(self) -> Iterator[Tuple[int, Any, Optional[float], Optional[float], str]]:
        """Deterministic order: function, then beta, then p, then lhs kind."""
        for index, u in enumerate(self.functions):
            for beta in self.betas:
                for p in self.ps:
                    for kind in self.lhs_kinds:
                        yield index, u, beta, p, kind


@dataclass
class RunConfig:
    """Validated run description."""

    cases: List[RunCase]
    output_csv: Optional[Path] = None
    output_json: Optional[Path] = None
    seed: int = 0
    source: Optional[Path] = None
    raw: Dict[str, Any] = field(default_factory=dict)

    @property
    def row_count(self) -> int:
        return sum(1 for case in self.cases for _ in case.tasks())


class RunConfigValidator:
    """Validates the pieces of a run config and builds the numerical objects."""

    def __init__(self, settings=None, base_dir: Optional[Path] = None):
        from config.settings import get_settings
        self.settings = settings or get_settings()
        self.base_dir = base_dir
        self.logger = logging.getLogger(__name__)

    def _resolve(self, path: str) -> Path:
        candidate = Path(path)
        if not candidate.is_absolute() and self.base_dir is not None:
            candidate = self.base_dir / candidate
        return candidate

    def validate_statement(self, statement_id: Any):
        from core.statements import get_statement

        if not isinstance(statement_id, str):
            raise ValidationError("Run config needs a 'statement' string")
        return get_statement(statement_id.strip())

    def validate_group(self, ref: Any):
        from core.group_core import load_group

        return load_group(ref, self.base_dir)

    def validate_domain(self, spec: Any):
        """Build a half-space or a polytope from ``{"halfspace": ...}`` / ``{"polytope": ...}``.

        Polytopes may be a facet list, a file path, or a builder entry
        ``{"square_prism": {...}}`` / ``{"polygon_prism": {...}}``.
        """
        from core.geometry import (
            ConvexPolytope,
            HalfSpace,
            load_polytope,
            regular_polygon_prism,
            square_prism,
        )

        if not isinstance(spec, Mapping) or len(spec) != 1:
            raise ValidationError("Domain must be an object with a single 'halfspace' or 'polytope' key")
        kind, body = next(iter(spec.items()))
        if kind == "halfspace":
            if not isinstance(body, Mapping):
                raise ValidationError("Half-space domain must be an object with 'nu' and 'd'")
            return HalfSpace.from_dict(body)
        if kind != "polytope":
            raise ValidationError(f"Unknown domain kind '{kind}'")
        if isinstance(body, str):
            return load_polytope(self._resolve(body))
        if not isinstance(body, Mapping):
            raise ValidationError("Polytope domain must be an object or a file path")
        try:
            if "square_prism" in body:
                b = body["square_prism"]
                return square_prism(int(b["n"]), tuple(b["axes"]), b["center"], float(b["half_side"]))
            if "polygon_prism" in body:
                b = body["polygon_prism"]
                return regular_polygon_prism(
                    int(b["n"]),
                    tuple(b["axes"]),
                    int(b["sides"]),
                    float(b["circumradius"]),
                    b["center"],
                    float(b.get("rotation", 0.0)),
                )
        except (KeyError, TypeError, ValueError) as e:
            raise ValidationError(f"Malformed polytope builder: {e}")
        return ConvexPolytope.from_dict(body)

    def validate_functions(self, spec: Any, seed: int) -> List[Any]:
        """Explicit function specs and ``{"random": {"seed", "count", "box"}}`` blocks, in order."""
        from core.testfns import TestFunction, random_family

        if spec is None:
            return []
        entries = spec if isinstance(spec, list) else [spec]
        functions: List[Any] = []
        for entry in entries:
            if not isinstance(entry, Mapping):
                raise ValidationError("Each test-function entry must be an object")
            if "random" in entry:
                block = entry["random"]
                try:
                    functions.extend(
                        random_family(
                            int(block.get("seed", seed)), int(block["count"]), block["box"]
                        )
                    )
                except (KeyError, TypeError, ValueError) as e:
                    raise ValidationError(f"Random family needs 'count' and 'box': {e}")
            else:
                functions.append(TestFunction.from_dict(entry))
        return functions

    def validate_betas(self, spec: BetaSpec) -> List[float]:
        if spec is None:
            return []
        if isinstance(spec, str):
            return parse_beta_range(spec)
        if isinstance(spec, (int, float)) and not isinstance(spec, bool):
            return [float(spec)]
        try:
            return [float(b) for b in spec]
        except (TypeError, ValueError):
            raise ValidationError(f"Beta must be a number, a list or 'lo:hi:step', got {spec!r}")

    def validate_ps(self, spec: Any) -> List[float]:
        if spec is None:
            return []
        values = spec if isinstance(spec, list) else [spec]
        try:
            ps = [float(p) for p in values]
        except (TypeError, ValueError):
            raise ValidationError(f"Exponents must be numbers, got {spec!r}")
        for p in ps:
            if not p > 1:
                raise ValidationError(f"Exponent p must exceed 1, got {p}")
        return ps

    def validate_rule(self, spec: Any):
        from core.quadrature import RuleSpec

        if spec is None:
            return None
        return RuleSpec.from_dict(spec, chunk_size=self.settings.quadrature.chunk_size)

    def validate_output_path(self, path: Any, suffix: str) -> Path:
        """Output paths must be strings ending in ``suffix`` and not name a directory."""
        if not path or not isinstance(path, str):
            raise ValidationError("Output path must be a non-empty string")
        out = Path(path)
        if out.suffix.lower() != suffix:
            raise ValidationError(f"Output path '{path}' must end in {suffix}")
        if out.exists() and out.is_dir():
            raise ValidationError(f"Output path '{path}' is a directory")
        return out

    def validate_case(self, data: Mapping[str, Any], seed: int) -> RunCase:
        """Build one case and check every hypothesis and support before evaluation."""
        from core.geometry import ConvexPolytope, support_inside_halfspace, support_inside_polytope
        from core.hardy_engine import LhsKind
        from core.statements import check_hypotheses
        from core.testfns import SupportError

        if not isinstance(data, Mapping):
            raise ValidationError("Run case must be an object")
        statement = self.validate_statement(data.get("statement"))
        if "group" not in data or "domain" not in data:
            raise ValidationError("Run config needs 'group' and 'domain'")
        group = self.validate_group(data["group"])
        domain = self.validate_domain(data["domain"])
        functions = self.validate_functions(data.get("u", data.get("functions")), seed)
        betas: List[Optional[float]] = list(self.validate_betas(data.get("beta")))
        ps: List[Optional[float]] = list(self.validate_ps(data.get("p")))
        kinds_spec = data.get("lhs_kind", LhsKind.SUM.value)
        kinds = kinds_spec if isinstance(kinds_spec, list) else [kinds_spec]
        for kind in kinds:
            try:
                LhsKind(kind)
            except ValueError:
                raise ValidationError(f"Unknown lhs kind '{kind}'")
        if not statement.uses_beta:
            betas = [None]
        elif not betas:
            raise ValidationError(f"{statement.id} needs at least one beta")
        if not statement.uses_p:
            ps = [None]
            kinds = [LhsKind.SUM.value]
        elif not ps:
            raise ValidationError(f"{statement.id} needs at least one exponent p")

        for beta in betas:
            for p in ps:
                for kind in kinds:
                    check_hypotheses(statement, group, domain, beta, p, kind)

        for index, u in enumerate(functions):
            if u.n != group.n:
                raise ValidationError(f"Function #{index} has dimension {u.n}, group has {group.n}")
            if isinstance(domain, ConvexPolytope):
                margin = support_inside_polytope(domain, u.support_box)
            else:
                margin = support_inside_halfspace(domain, u.support_box)
            if not margin > 0:
                raise SupportError(f"Function #{index} is not supported strictly inside the domain")

        return RunCase(
            statement=statement.id,
            group_ref=str(data["group"]),
            group=group,
            domain=domain,
            functions=functions,
            betas=betas,
            ps=ps,
            lhs_kinds=list(kinds),
            rule=self.validate_rule(data.get("rule")),
        )


def load_run_config(path: Union[str, Path], settings=None) -> RunConfig:
    """Read and validate a JSON run config.

    A config is either a single case or ``{"runs": [case, ...]}`` with shared
    ``seed`` and ``output`` entries. Relative file references resolve against
    the config's directory.

    Raises:
        ValidationError: On malformed content or a failed hypothesis.
    """
    path = Path(path)
    try:
        data = json.loads(path.read_text())
    except FileNotFoundError:
        raise ValidationError(f"Run config not found: {path}")
    except json.JSONDecodeError as e:
        raise ValidationError(f"Invalid JSON in run config {path}: {e}")
    return parse_run_config(data, settings=settings, base_dir=path.parent, source=path)


def parse_run_config(
    data: Any, settings=None, base_dir: Optional[Path] = None, source: Optional[Path] = None
) -> RunConfig:
    """Validate an already-decoded run config."""
    if not isinstance(data, Mapping):
        raise ValidationError("Run config root must be an object")
    validator = RunConfigValidator(settings, base_dir)
    try:
        seed = int(data.get("seed", 0))
    except (TypeError, ValueError):
        raise ValidationError("Seed must be an integer")
    case_specs = data["runs"] if "runs" in data else [data]
    if not isinstance(case_specs, list):
        raise ValidationError("'runs' must be a list")
    cases = [validator.validate_case(spec, seed) for spec in case_specs]

    output = data.get("output", {}) or {}
    if not isinstance(output, Mapping):
        raise ValidationError("'output' must be an object")
    csv_path = validator.validate_output_path(output["csv"], ".csv") if "csv" in output else None
    json_path = validator.validate_output_path(output["json"], ".json") if "json" in output else None
    config = RunConfig(cases, csv_path, json_path, seed, source, dict(data))
    validator.logger.debug(f"Run config with {len(cases)} case(s) and {config.row_count} row(s)")
    return config


@dataclass
class ProbeConfig:
    """Half-space probe family for constant bracketing."""

    group: Any
    halfspace: Any
    functions: List[Any]
    rule: Any = None
    output_csv: Optional[Path] = None


def load_probe_config(path: Union[str, Path], settings=None) -> ProbeConfig:
    """Read ``{"group", "domain": {"halfspace": ...}, "u": [...], "rule", "output"}``.

    Boundary probes may touch the boundary; other members must be supported
    strictly inside the half-space.
    """
    from core.geometry import HalfSpace, support_inside_halfspace
    from core.testfns import SupportError, TestFunctionKind

    path = Path(path)
    try:
        data = json.loads(path.read_text())
    except FileNotFoundError:
        raise ValidationError(f"Probe config not found: {path}")
    except json.JSONDecodeError as e:
        raise ValidationError(f"Invalid JSON in probe config {path}: {e}")
    if not isinstance(data, Mapping):
        raise ValidationError("Probe config root must be an object")
    validator = RunConfigValidator(settings, path.parent)
    group = validator.validate_group(data.get("group"))
    domain = validator.validate_domain(data.get("domain"))
    if not isinstance(domain, HalfSpace):
        raise ValidationError("Probe families are evaluated on half-spaces")
    functions = validator.validate_functions(data.get("u", data.get("functions")), int(data.get("seed", 0)))
    if not functions:
        raise ValidationError("Probe family is empty")
    for index, u in enumerate(functions):
        if u.n != group.n:
            raise ValidationError(f"Function #{index} has dimension {u.n}, group has {group.n}")
        if u.kind is TestFunctionKind.BOUNDARY_PROBE:
            continue
        if not support_inside_halfspace(domain, u.support_box) > 0:
            raise SupportError(f"Function #{index} is not supported strictly inside the half-space")
    output = data.get("output", {}) or {}
    csv_path = validator.validate_output_path(output["csv"], ".csv") if "csv" in output else None
    return ProbeConfig(group, domain, functions, validator.validate_rule(data.get("rule")), csv_path)
