"""Picard iteration with certified error budgets for best proximity points.

For a cyclic contraction T with coefficient k on sets at distance d > 0,
inside a space whose modulus of convexity dominates C * eps^q, the even
Picard iterates x_{2n} converge to the unique best proximity point xi in
A, and two computable bounds certify the remaining error:

* a priori, from the initial displacement D = ||x - Tx|| alone:

      ||xi - x_{2n}|| <= D / (1 - k^(2/q)) * ((D - d)/(C d))^(1/q) * k^(2n/q);

* a posteriori, from the latest odd-to-even displacement
  P = ||x_{2n-1} - x_{2n}||:

      ||xi - x_{2n}|| <= P / (1 - k^(2/q)) * ((P - d)/(C d))^(1/q) * k^(1/q).

The a posteriori form is a direct stopping criterion: halt at the first
even step whose bound falls below the target eps.  The a priori form
predicts the required step count before iterating.

Bound evaluators and the iteration engine use only `**`, `abs` and
comparisons, so they run unchanged on higher-precision number types
(useful when displacement excesses decay below float64 resolution; see
the oracle module).  Each run is sequential by nature, but independent
runs may proceed concurrently; everything here is reentrant.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

from .cyclic import CyclicMapSpec, apply_map
from .errors import BudgetExhaustedError, InputError
from .norms import PowerTypeConstants, Vector, lp_norm, power_type_constants

#: Gap D - d (or P - d) more negative than this is an input error; anything
#: in (-GAP_CLAMP, 0) is round-off below a true gap of 0 and clamps to 0.
GAP_CLAMP = 1e-12


class StopKind(Enum):
    APRIORI = "apriori"
    APOSTERIORI = "aposteriori"
    MAX_STEPS = "max-steps"


@dataclass(frozen=True)
class StopRule:
    """Stopping policy: which bound to watch, the target eps, and a step cap."""

    kind: StopKind
    epsilon: float
    max_steps: int = 100_000

    def __post_init__(self):
        if not self.epsilon > 0:
            raise InputError(f"epsilon must be positive, got {self.epsilon}")
        if self.max_steps < 2 or self.max_steps % 2 != 0:
            raise InputError(f"max_steps must be an even integer >= 2, got {self.max_steps}")


@dataclass(frozen=True)
class ErrorBudget:
    """Both error bounds at an even step 2n."""

    step: int
    apriori: float
    aposteriori: float


@dataclass
class IterationTrace:
    """Record of a Picard run: orbit, displacements, per-even-step budgets.

    `displacements[i]` is ||x_i - x_{i+1}||.  When `store_iterates` is
    False only x0 is kept in `iterates` (long runs); `last` always holds
    the final point.  The declared (k, d) and power-type constants are
    carried so budgets can be recomputed from the trace alone.
    """

    x0: Vector
    k: float
    d: float
    constants: PowerTypeConstants
    iterates: list = field(default_factory=list)
    displacements: list = field(default_factory=list)
    budgets: list = field(default_factory=list)
    last: Vector = None
    store_iterates: bool = True

    @property
    def steps(self) -> int:
        return len(self.displacements)


def _checked_gap(value, d, name: str):
    """Validate value >= d > 0 and return the clamped gap value - d."""
    if not d > 0:
        raise InputError(f"finite bounds require dist(A, B) > 0, got d={d}")
    gap = value - d
    if gap < 0:
        if gap < -GAP_CLAMP:
            raise InputError(f"{name}={value} is below d={d}")
        gap = 0.0
    return gap


def apriori_bound(D, d, k, consts: PowerTypeConstants, n: int):
    """Error bound at even step 2n from the initial displacement D.

    Returns exactly 0 when D = d (the orbit already realizes the set
    distance, so the best proximity point is reached).
    """
    if not (0 < k < 1):
        raise InputError(f"k must lie in (0, 1), got {k}")
    if n < 1:
        raise InputError(f"n must be >= 1, got {n}")
    gap = _checked_gap(D, d, "D")
    if gap == 0:
        return 0.0
    C, q = consts.C, consts.q
    return D / (1 - k ** (2.0 / q)) * (gap / (C * d)) ** (1.0 / q) * k ** (2.0 * n / q)


def aposteriori_bound(P, d, k, consts: PowerTypeConstants):
    """Error bound at even step 2n from P = ||x_{2n-1} - x_{2n}||.

    Returns exactly 0 when P = d.
    """
    if not (0 < k < 1):
        raise InputError(f"k must lie in (0, 1), got {k}")
    gap = _checked_gap(P, d, "P")
    if gap == 0:
        return 0.0
    C, q = consts.C, consts.q
    return P / (1 - k ** (2.0 / q)) * (gap / (C * d)) ** (1.0 / q) * k ** (1.0 / q)


def apriori_steps_needed(D, d, k, consts: PowerTypeConstants, eps) -> int:
    """Smallest even step 2n (n >= 1) whose a priori bound is below eps.

    Solved in closed form from the logarithm of the geometric tail, then
    verified by direct evaluation at n and n - 1 to absorb floating-point
    drift.  Returns 2 when the bound at n = 1 is already below eps.
    """
    if not eps > 0:
        raise InputError(f"eps must be positive, got {eps}")
    if not (0 < k < 1):
        raise InputError(f"k must lie in (0, 1), got {k}")
    gap = _checked_gap(D, d, "D")
    if gap == 0:
        return 2
    C, q = consts.C, consts.q
    prefactor = D / (1 - k ** (2.0 / q)) * (gap / (C * d)) ** (1.0 / q)

    def bound(m: int):
        return prefactor * k ** (2.0 * m / q)

    if bound(1) < eps:
        return 2
    n = math.floor(q * math.log(float(prefactor / eps)) / (2.0 * math.log(1.0 / float(k)))) + 1
    n = max(n, 1)
    while bound(n) >= eps:
        n += 1
    while n > 1 and bound(n - 1) < eps:
        n -= 1
    return 2 * n


def _start_trace(spec: CyclicMapSpec, x0: Vector, store_iterates: bool) -> IterationTrace:
    if len(x0) != spec.space.dim:
        raise InputError(
            f"x0 has {len(x0)} coordinates, space has dim {spec.space.dim}"
        )
    if not spec.in_a(x0):
        raise InputError(f"x0={x0} is not in A (runs must start in A)")
    return IterationTrace(
        x0=tuple(x0),
        k=spec.k,
        d=spec.d,
        constants=power_type_constants(spec.space.p),
        iterates=[tuple(x0)],
        last=tuple(x0),
        store_iterates=store_iterates,
    )


def _advance(spec: CyclicMapSpec, trace: IterationTrace, current: Vector):
    """One Picard step: extend the trace and fill the budget on even steps."""
    nxt = apply_map(spec, current)
    trace.displacements.append(
        lp_norm(spec.space, [a - b for a, b in zip(current, nxt)])
    )
    if trace.store_iterates:
        trace.iterates.append(nxt)
    trace.last = nxt
    step = len(trace.displacements)
    if step >= 2 and step % 2 == 0:
        trace.budgets.append(
            ErrorBudget(
                step=step,
                apriori=apriori_bound(
                    trace.displacements[0], spec.d, spec.k, trace.constants, step // 2
                ),
                aposteriori=aposteriori_bound(
                    trace.displacements[step - 1], spec.d, spec.k, trace.constants
                ),
            )
        )
    return nxt


def picard_iterate(
    spec: CyclicMapSpec, x0: Vector, steps: int, store_iterates: bool = True
) -> IterationTrace:
    """Run exactly `steps` Picard steps from x0 in A.

    The trace holds steps + 1 points (or just x0 in displacement-only
    mode), all step displacements, and an ErrorBudget at every even step
    >= 2.
    """
    if steps < 1:
        raise InputError(f"steps must be >= 1, got {steps}")
    trace = _start_trace(spec, x0, store_iterates)
    current = trace.x0
    for _ in range(steps):
        current = _advance(spec, trace, current)
    return trace


def run_with_stop(
    spec: CyclicMapSpec, x0: Vector, rule: StopRule, store_iterates: bool = True
):
    """Iterate until the rule fires; returns (approx, stopped_at, trace).

    APOSTERIORI stops at the first even step 2n whose a posteriori bound
    is strictly below eps.  APRIORI predicts the step count from the
    initial displacement and runs exactly that many steps.  MAX_STEPS
    runs to the cap.  Hitting the cap before a criterion fires raises
    BudgetExhaustedError carrying the partial trace.
    """
    trace = _start_trace(spec, x0, store_iterates)
    current = trace.x0

    if rule.kind is StopKind.APRIORI:
        current = _advance(spec, trace, current)  # need D = ||x0 - Tx0||
        target = apriori_steps_needed(
            trace.displacements[0], spec.d, spec.k, trace.constants, rule.epsilon
        )
        if target > rule.max_steps:
            for _ in range(rule.max_steps - 1):
                current = _advance(spec, trace, current)
            raise BudgetExhaustedError(
                f"a priori criterion needs {target} steps, cap is {rule.max_steps}",
                trace=trace,
            )
        for _ in range(target - 1):
            current = _advance(spec, trace, current)
        return current, target, trace

    if rule.kind is StopKind.APOSTERIORI:
        while trace.steps < rule.max_steps:
            current = _advance(spec, trace, current)
            step = trace.steps
            if step % 2 == 0 and trace.budgets[-1].aposteriori < rule.epsilon:
                return current, step, trace
        raise BudgetExhaustedError(
            f"a posteriori bound did not reach eps={rule.epsilon} "
            f"within {rule.max_steps} steps",
            trace=trace,
        )

    # MAX_STEPS: run to the cap by design.
    for _ in range(rule.max_steps):
        current = _advance(spec, trace, current)
    return current, rule.max_steps, trace


def error_budget_at(trace: IterationTrace, n: int) -> ErrorBudget:
    """Both bounds at even step 2n, recomputed from the stored displacements."""
    if n < 1:
        raise InputError(f"n must be >= 1, got {n}")
    if trace.steps < 2 * n:
        raise InputError(f"trace has {trace.steps} steps, need at least {2 * n}")
    return ErrorBudget(
        step=2 * n,
        apriori=apriori_bound(trace.displacements[0], trace.d, trace.k, trace.constants, n),
        aposteriori=aposteriori_bound(
            trace.displacements[2 * n - 1], trace.d, trace.k, trace.constants
        ),
    )
