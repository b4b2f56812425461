"""Finite-dimensional l_p geometry: norms and the modulus of convexity.

The modulus of convexity delta_p quantifies how "round" the unit ball of
l_p is.  Two facts drive everything downstream:

* for p >= 2 there is a closed form
      delta_p(eps) = 1 - (1 - (eps/2)^p)^(1/p),
  while for 1 < p < 2 delta_p(eps) is the unique root in [0, 1] of
      (1 - d + eps/2)^p + |1 - d - eps/2|^p = 2;

* delta_p is bounded below by a power function C * eps^q (the "power
  type" property), which is what turns the convexity argument into a
  geometric series and hence into computable error bounds.

All arithmetic is plain Python operators (`**`, `abs`, comparisons), so
every function accepts float by default but also works unchanged with
higher-precision number types such as `mpmath.mpf`.  Everything here is a
pure function; concurrent callers need no coordination.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from .errors import InputError, NumericalError, PreconditionError

Vector = Sequence[float]

#: Absolute tolerance for the implicit-equation root (1 < p < 2 branch).
BISECTION_TOL = 1e-12
#: Iteration cap for the bisection; unreachable on [0, 1] at the tolerance above.
BISECTION_CAP = 200


@dataclass(frozen=True)
class LpSpace:
    """Ambient space R^dim equipped with the l_p norm, p > 1."""

    dim: int
    p: float

    def __post_init__(self):
        if self.dim < 1:
            raise InputError(f"dim must be >= 1, got {self.dim}")
        if not self.p > 1:
            raise InputError(f"uniform convexity requires p > 1, got p={self.p}")


@dataclass(frozen=True)
class PowerTypeConstants:
    """Constants (C, q) with delta_p(eps) >= C * eps^q on (0, 2]."""

    C: float
    q: float

    def __post_init__(self):
        if not self.C > 0:
            raise InputError(f"C must be positive, got {self.C}")
        if not self.q >= 2:
            raise InputError(f"q must be >= 2, got {self.q}")


def lp_norm(space: LpSpace, v: Vector):
    """Return (sum |v_i|^p)^(1/p); zero exactly when v is the zero vector."""
    if len(v) != space.dim:
        raise InputError(
            f"vector has {len(v)} coordinates, space has dim {space.dim}"
        )
    # Scaling by the largest coordinate prevents overflow/underflow of the
    # p-th powers; 1/p is formed in the same arithmetic as p so that
    # higher-precision spaces do not get a float64-rounded exponent.
    p = space.p
    scale = max(abs(c) for c in v)
    if scale == 0:
        return 0.0
    total = sum((abs(c) / scale) ** p for c in v)
    return scale * total ** (1 / p)


def power_type_constants(p: float) -> PowerTypeConstants:
    """Power-type constants for the canonical l_p norm.

    (C, q) = (1/(p*2^p), p) for p >= 2 and ((p-1)/8, 2) for 1 < p < 2.
    The two branches agree at p = 2, where both give (1/8, 2).
    """
    if not p > 1:
        raise InputError(f"p must be > 1, got {p}")
    if p >= 2:
        return PowerTypeConstants(C=1 / (p * 2 ** p), q=p)
    return PowerTypeConstants(C=(p - 1) / 8, q=2.0)


def _implicit_lhs(delta, p: float, eps: float):
    return (1.0 - delta + eps / 2.0) ** p + abs(1.0 - delta - eps / 2.0) ** p


def modulus_of_convexity(p: float, eps: float):
    """delta_p(eps) for eps in (0, 2].

    Closed form for p >= 2.  For 1 < p < 2 the defining equation
    (1 - d + eps/2)^p + |1 - d - eps/2|^p = 2 is solved by bisection on
    [0, 1]; the left side is strictly decreasing in d there, so the root
    is unique and bisection cannot fail.
    """
    if not p > 1:
        raise InputError(f"p must be > 1, got {p}")
    if not (0 < eps <= 2):
        raise InputError(f"eps must lie in (0, 2], got {eps}")
    if p >= 2:
        u = (eps / 2.0) ** p
        if u >= 1.0:
            return 1.0
        # expm1/log1p keeps full relative accuracy when u is far below
        # machine epsilon (large p, small eps), where the naive form
        # 1 - (1 - u)^(1/p) would round to exactly 0.
        return -math.expm1(math.log1p(-u) / p)

    lo, hi = 0.0, 1.0  # lhs(lo) >= 2 >= lhs(hi)
    for _ in range(BISECTION_CAP):
        if hi - lo <= BISECTION_TOL:
            break
        mid = 0.5 * (lo + hi)
        if _implicit_lhs(mid, p, eps) > 2.0:
            lo = mid
        else:
            hi = mid
    else:
        raise NumericalError(
            f"bisection for delta_p did not reach tol={BISECTION_TOL} "
            f"within {BISECTION_CAP} iterations (p={p}, eps={eps})"
        )
    return 0.5 * (lo + hi)


def inverse_modulus_bound(t, consts: PowerTypeConstants):
    """Upper bound (t/C)^(1/q) for the inverse modulus delta^{-1}(t).

    Follows from delta(eps) >= C * eps^q: any eps with delta(eps) <= t
    satisfies eps <= (t/C)^(1/q).
    """
    if t < 0:
        raise InputError(f"t must be nonnegative, got {t}")
    if t == 0:
        return 0.0
    return (t / consts.C) ** (1.0 / consts.q)


def check_convexity_inequality(
    space: LpSpace,
    x: Vector,
    y: Vector,
    z: Vector,
    R: float,
    r: float,
) -> bool:
    """Check the uniform-convexity inequality for a midpoint.

    For ||x - z|| <= R, ||y - z|| <= R and ||x - y|| >= r with
    r in [0, 2R], uniform convexity forces

        ||(x + y)/2 - z|| <= (1 - delta_p(r/R)) * R.

    The hypotheses are re-verified first; a violation raises
    PreconditionError so it can never be mistaken for a failure of the
    inequality itself.  Returns True iff the displayed inequality holds
    within relative tolerance 1e-9 (scaled by R).
    """
    if not R > 0:
        raise InputError(f"R must be positive, got {R}")
    if not (0 <= r <= 2 * R):
        raise InputError(f"r must lie in [0, 2R]=[0, {2 * R}], got {r}")

    slack = 1e-12 * max(R, 1.0)
    dxz = lp_norm(space, [a - b for a, b in zip(x, z)])
    dyz = lp_norm(space, [a - b for a, b in zip(y, z)])
    dxy = lp_norm(space, [a - b for a, b in zip(x, y)])
    if dxz > R + slack:
        raise PreconditionError(f"||x - z|| = {dxz} exceeds R = {R}")
    if dyz > R + slack:
        raise PreconditionError(f"||y - z|| = {dyz} exceeds R = {R}")
    if dxy < r - slack:
        raise PreconditionError(f"||x - y|| = {dxy} is below r = {r}")

    # Round-off at the boundary can push r/R marginally outside [0, 2].
    ratio = min(max(r / R, 0.0), 2.0)
    delta = 0.0 if ratio == 0 else modulus_of_convexity(space.p, ratio)
    mid = [(a + b) / 2.0 - c for a, b, c in zip(x, y, z)]
    lhs = lp_norm(space, mid)
    rhs = (1.0 - delta) * R
    return lhs <= rhs + 1e-9 * max(R, 1.0)
