"""
Test Functions for Carnot Hardy Verifier
Smooth compactly supported bumps and boundary probes with analytic derivatives.
"""

import logging
from dataclasses import dataclass, replace
from enum import Enum
from typing import Any, Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from core.geometry import HalfSpace
from core.group_core import Polynomial
from utils.validators import ValidationError

logger = logging.getLogger(__name__)

Box = Tuple[Tuple[float, float], ...]

# exp(-1/q) underflows long before q reaches this value
_CUTOFF_FLOOR = 2e-3


class SupportError(ValidationError):
    """Raised when a support does not sit strictly inside its domain."""
    pass


class TestFunctionKind(Enum):
    """Families of test functions."""

    __test__ = False

    PRODUCT_BUMP = "bump"
    POLYNOMIAL_BUMP = "polynomial-bump"
    BOUNDARY_PROBE = "probe"


Profile = Tuple[np.ndarray, np.ndarray, np.ndarray]


def bump_profile(t: np.ndarray) -> Profile:
    """``exp(-1/(1-t^2))`` on |t| < 1 with first and second derivatives."""
    t = np.asarray(t, dtype=float)
    q = 1.0 - t * t
    inside = q > _CUTOFF_FLOOR
    q_safe = np.where(inside, q, 1.0)
    phi = np.where(inside, np.exp(-1.0 / q_safe), 0.0)
    d1 = phi * (-2.0 * t / q_safe ** 2)
    d2 = phi * (4.0 * t * t / q_safe ** 4 - 2.0 / q_safe ** 2 - 8.0 * t * t / q_safe ** 3)
    return phi, np.where(inside, d1, 0.0), np.where(inside, d2, 0.0)


def _h(t: np.ndarray) -> Profile:
    """``exp(-1/t)`` for t > 0, zero otherwise."""
    positive = t > _CUTOFF_FLOOR
    ts = np.where(positive, t, 1.0)
    h = np.where(positive, np.exp(-1.0 / ts), 0.0)
    h1 = np.where(positive, h / ts ** 2, 0.0)
    h2 = np.where(positive, h * (1.0 / ts ** 4 - 2.0 / ts ** 3), 0.0)
    return h, h1, h2


def smooth_step(t: np.ndarray) -> Profile:
    """C-infinity step rising from 0 at t <= 0 to 1 at t >= 1."""
    t = np.asarray(t, dtype=float)
    a, a1, a2 = _h(t)
    b, b1, b2 = _h(1.0 - t)
    # b is a function of 1 - t
    b1, b2 = -b1, b2
    den = a + b
    den_safe = np.where(den > 0, den, 1.0)
    s = np.where(den > 0, a / den_safe, np.where(t >= 1.0, 1.0, 0.0))
    num = a1 * b - a * b1
    s1 = num / den_safe ** 2
    num1 = a2 * b - a * b2
    s2 = num1 / den_safe ** 2 - 2.0 * num * (a1 + b1) / den_safe ** 3
    inside = den > 0
    return s, np.where(inside, s1, 0.0), np.where(inside, s2, 0.0)


def power_cutoff_profile(s: np.ndarray, alpha: float, s0: float, s1: float) -> Profile:
    """``s^alpha * c(s)`` for s > 0, with c = 1 below s0 and c = 0 above s1."""
    s = np.asarray(s, dtype=float)
    positive = s > 0
    ss = np.where(positive, s, 1.0)
    width = s1 - s0
    step, step1, step2 = smooth_step((ss - s0) / width)
    c = 1.0 - step
    c1 = -step1 / width
    c2 = -step2 / width ** 2
    p0 = ss ** alpha
    p1 = alpha * ss ** (alpha - 1.0)
    p2 = alpha * (alpha - 1.0) * ss ** (alpha - 2.0)
    v = p0 * c
    d1 = p1 * c + p0 * c1
    d2 = p2 * c + 2.0 * p1 * c1 + p0 * c2
    return (
        np.where(positive, v, 0.0),
        np.where(positive, d1, 0.0),
        np.where(positive, d2, 0.0),
    )


def _product_except(values: List[np.ndarray], skip: Sequence[int], shape: Tuple[int, ...]) -> np.ndarray:
    out = np.ones(shape)
    for k, v in enumerate(values):
        if k not in skip:
            out = out * v
    return out


@dataclass(frozen=True)
class TestFunction:
    """Smooth compactly supported function with batched analytic derivatives.

    For probes ``axis`` is the 0-based normal coordinate, ``offset`` the
    boundary position along it and ``reach`` the support length from the
    boundary; ``center`` and ``half_widths`` entries on that axis are unused.
    """

    __test__ = False

    kind: TestFunctionKind
    center: Tuple[float, ...]
    half_widths: Tuple[float, ...]
    amplitude: float = 1.0
    factor: Optional[Polynomial] = None
    alpha: Optional[float] = None
    axis: Optional[int] = None
    offset: float = 0.0
    reach: float = 1.0
    plateau: float = 0.2

    def __post_init__(self) -> None:
        center = tuple(float(c) for c in self.center)
        widths = tuple(float(w) for w in self.half_widths)
        if not center:
            raise ValidationError("Test function needs at least one coordinate")
        if len(center) != len(widths):
            raise ValidationError("Center and half widths must have the same length")
        object.__setattr__(self, "center", center)
        object.__setattr__(self, "half_widths", widths)
        for j, w in enumerate(widths):
            if self.axis is not None and j == self.axis:
                continue
            if not w > 0:
                raise ValidationError(f"Half widths must be positive, got {w}")
        if self.factor is not None and self.factor.n_vars != len(center):
            raise ValidationError("Polynomial factor lives in a different dimension")
        if self.kind is TestFunctionKind.BOUNDARY_PROBE:
            if self.alpha is None or not self.alpha > 0.5:
                raise ValidationError(f"Probe exponent must exceed 1/2, got {self.alpha}")
            if self.axis is None or not 0 <= self.axis < len(center):
                raise ValidationError("Probe needs a valid normal axis")
            if not self.reach > 0:
                raise ValidationError("Probe reach must be positive")
            if not 0 < self.plateau < 1:
                raise ValidationError("Probe plateau fraction must lie in (0, 1)")

    @property
    def n(self) -> int:
        return len(self.center)

    @property
    def support_box(self) -> Box:
        box = []
        for j, (c, w) in enumerate(zip(self.center, self.half_widths)):
            if self.kind is TestFunctionKind.BOUNDARY_PROBE and j == self.axis:
                box.append((self.offset, self.offset + self.reach))
            else:
                box.append((c - w, c + w))
        return tuple(box)

    def scaled(self, c: float) -> "TestFunction":
        """The function ``c * u``."""
        return replace(self, amplitude=self.amplitude * float(c))

    def _profiles(self, x: np.ndarray) -> List[Profile]:
        out = []
        for j in range(self.n):
            if self.kind is TestFunctionKind.BOUNDARY_PROBE and j == self.axis:
                out.append(
                    power_cutoff_profile(
                        x[..., j] - self.offset,
                        float(self.alpha),
                        self.plateau * self.reach,
                        self.reach,
                    )
                )
            else:
                w = self.half_widths[j]
                v, d1, d2 = bump_profile((x[..., j] - self.center[j]) / w)
                out.append((v, d1 / w, d2 / w ** 2))
        return out

    def _envelope(
        self, x: np.ndarray, order: int
    ) -> Tuple[np.ndarray, Optional[np.ndarray], Optional[np.ndarray]]:
        profiles = self._profiles(x)
        shape = x.shape[:-1]
        vals = [p[0] for p in profiles]
        firsts = [p[1] for p in profiles]
        seconds = [p[2] for p in profiles]
        n = self.n
        value = self.amplitude * _product_except(vals, (), shape)
        if order == 0:
            return value, None, None
        grad = np.empty(shape + (n,))
        hess = np.empty(shape + (n, n)) if order > 1 else None
        for j in range(n):
            rest_j = _product_except(vals, (j,), shape)
            grad[..., j] = self.amplitude * firsts[j] * rest_j
            if hess is None:
                continue
            hess[..., j, j] = self.amplitude * seconds[j] * rest_j
            for k in range(j + 1, n):
                mixed = self.amplitude * firsts[j] * firsts[k] * _product_except(vals, (j, k), shape)
                hess[..., j, k] = mixed
                hess[..., k, j] = mixed
        return value, grad, hess

    def evaluate(self, points: Any, order: int = 2) -> Tuple[np.ndarray, Any, Any]:
        """Value and, up to ``order``, gradient and Hessian in one pass."""
        x = np.asarray(points, dtype=float)
        if x.shape[-1] != self.n:
            raise ValidationError(f"Points have {x.shape[-1]} coordinates, expected {self.n}")
        value, grad, hess = self._envelope(x, order)
        if self.factor is None:
            return value, grad, hess
        p = self.factor.value(x)
        if order == 0:
            return p * value, None, None
        dp = self.factor.gradient(x)
        new_grad = p[..., None] * grad + value[..., None] * dp
        new_hess = None
        if order > 1:
            new_hess = (
                p[..., None, None] * hess
                + dp[..., :, None] * grad[..., None, :]
                + grad[..., :, None] * dp[..., None, :]
                + value[..., None, None] * self.factor.hessian(x)
            )
        return p * value, new_grad, new_hess

    def value(self, points: Any) -> np.ndarray:
        return self.evaluate(points, order=0)[0]

    def gradient(self, points: Any) -> np.ndarray:
        return self.evaluate(points, order=1)[1]

    def hessian(self, points: Any) -> np.ndarray:
        return self.evaluate(points, order=2)[2]

    def to_dict(self) -> Dict[str, Any]:
        data: Dict[str, Any] = {
            "kind": self.kind.value,
            "center": list(self.center),
            "widths": list(self.half_widths),
        }
        if self.amplitude != 1.0:
            data["amplitude"] = self.amplitude
        if self.factor is not None:
            data["factor"] = self.factor.to_monomials()
        if self.kind is TestFunctionKind.BOUNDARY_PROBE:
            data.update(
                alpha=self.alpha,
                axis=self.axis,
                offset=self.offset,
                reach=self.reach,
                plateau=self.plateau,
            )
        return data

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "TestFunction":
        try:
            kind = TestFunctionKind(data.get("kind", "bump"))
        except ValueError:
            raise ValidationError(f"Unknown test function kind: {data.get('kind')!r}")
        try:
            center = tuple(float(c) for c in data["center"])
            widths = tuple(float(w) for w in data["widths"])
        except (KeyError, TypeError, ValueError) as e:
            raise ValidationError(f"Test function needs numeric 'center' and 'widths': {e}")
        factor = None
        if kind is TestFunctionKind.POLYNOMIAL_BUMP:
            if "factor" not in data:
                raise ValidationError("Polynomial bump needs a 'factor'")
            factor = Polynomial.from_monomials(len(center), data["factor"])
        extra: Dict[str, Any] = {}
        if kind is TestFunctionKind.BOUNDARY_PROBE:
            try:
                extra = dict(
                    alpha=float(data["alpha"]),
                    axis=int(data["axis"]),
                    offset=float(data.get("offset", 0.0)),
                    reach=float(data.get("reach", 1.0)),
                    plateau=float(data.get("plateau", 0.2)),
                )
            except (KeyError, TypeError, ValueError) as e:
                raise ValidationError(f"Probe needs numeric 'alpha' and 'axis': {e}")
        return cls(
            kind,
            center,
            widths,
            amplitude=float(data.get("amplitude", 1.0)),
            factor=factor,
            **extra,
        )


def _check_box(box: Sequence[Tuple[float, float]]) -> Box:
    bounds = tuple((float(lo), float(hi)) for lo, hi in box)
    if not bounds or any(not lo < hi for lo, hi in bounds):
        raise ValidationError("Box must give a nonempty interval per coordinate")
    return bounds


def bump(center: Sequence[float], half_widths: Sequence[float], amplitude: float = 1.0) -> TestFunction:
    """Product of one-dimensional mollifiers ``exp(-1/(1-t_i^2))``."""
    return TestFunction(
        TestFunctionKind.PRODUCT_BUMP, tuple(center), tuple(half_widths), amplitude=amplitude
    )


def polynomial_bump(
    center: Sequence[float], half_widths: Sequence[float], factor: Polynomial
) -> TestFunction:
    """A product bump multiplied by a polynomial."""
    return TestFunction(
        TestFunctionKind.POLYNOMIAL_BUMP, tuple(center), tuple(half_widths), factor=factor
    )


def boundary_power_probe(
    H: HalfSpace, alpha: float, cutoff_box: Sequence[Tuple[float, float]], plateau: float = 0.2
) -> TestFunction:
    """``dist^alpha`` near the boundary of a coordinate half-space, cut off smoothly.

    ``cutoff_box`` gives one interval per coordinate. Along the normal axis
    the support is ``[d, hi]``; the other axes carry a bump over their interval.

    Raises:
        ValidationError: If ``alpha <= 1/2`` or the normal is not a coordinate axis.
    """
    if not alpha > 0.5:
        raise ValidationError(f"Probe exponent must exceed 1/2, got {alpha}")
    nu = H.nu_array
    axes = np.flatnonzero(nu)
    if len(axes) != 1 or nu[axes[0]] != 1.0:
        raise ValidationError("Boundary probes need a coordinate normal e_k")
    axis = int(axes[0])
    bounds = _check_box(cutoff_box)
    if len(bounds) != H.n:
        raise ValidationError(f"Cutoff box must have {H.n} intervals")
    d = float(H.d)
    lo, hi = bounds[axis]
    if not lo <= d < hi:
        raise ValidationError("Cutoff interval along the normal must start at or below the boundary")
    center = tuple(0.5 * (a + b) for a, b in bounds)
    widths = tuple(0.5 * (b - a) for a, b in bounds)
    return TestFunction(
        TestFunctionKind.BOUNDARY_PROBE,
        center,
        widths,
        alpha=float(alpha),
        axis=axis,
        offset=d,
        reach=hi - d,
        plateau=plateau,
    )


def random_family(
    seed: int, count: int, box: Sequence[Tuple[float, float]], margin: float = 0.05
) -> List[TestFunction]:
    """Seeded product bumps whose supports sit strictly inside ``box``."""
    bounds = _check_box(box)
    if count < 0:
        raise ValidationError("Count must be nonnegative")
    rng = np.random.default_rng(seed)
    family = []
    for _ in range(count):
        center, widths = [], []
        for lo, hi in bounds:
            length = hi - lo
            w = rng.uniform(0.1, 0.3) * length
            c = rng.uniform(lo + w + margin * length, hi - w - margin * length)
            center.append(float(c))
            widths.append(float(w))
        family.append(bump(center, widths))
    logger.debug(f"Generated {count} random bumps with seed {seed}")
    return family


def support_margin(inner: Sequence[Tuple[float, float]], outer: Sequence[Tuple[float, float]]) -> float:
    """Smallest gap between an inner box and the faces of an outer box."""
    return min(min(slo - lo, hi - shi) for (slo, shi), (lo, hi) in zip(inner, outer))
