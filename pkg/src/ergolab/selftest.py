"""Fast closed-form checks runnable from the CLI.

Each check is an exactly computable example (no Monte Carlo, no tolerance
games); together they exercise every module's entry points in milliseconds.
"""

import math
from fractions import Fraction

from .observables import (
    DistToPoint,
    PushforwardDist,
    RadiusLadder,
    estimate_measure,
    evaluate,
    mollifier,
)
from .hitting import hitting_time, power_law_radii
from .observed import Constant, CoordinateProjection, LinearMap, jacobian_rank
from .points import FloatPoint, FractionPoint, torus_distance
from .returns import ReturnCurve, exp_law_distance
from .systems import CAT_MATRIX, CircleRotation, Doubling, ToralAutomorphism


def _checks():
    doubling = Doubling(engine="fraction")
    cat = ToralAutomorphism(CAT_MATRIX)
    quarter = CircleRotation.from_fraction("1/4")

    yield "doubling step 3/8 -> 3/4", lambda: (
        doubling.step(FractionPoint(("3/8",))).coords[0] == Fraction(3, 4)
    )
    yield "cat map step (1/2,1/2) -> (1/2,0)", lambda: (
        cat.step(FractionPoint(("1/2", "1/2"))).coords
        == (Fraction(1, 2), Fraction(0))
    )
    yield "rotation step 7/8 + 1/4 -> 1/8", lambda: (
        quarter.step(FractionPoint(("7/8",))).coords[0] == Fraction(1, 8)
    )
    yield "quotient metric dist(0.9, 0) = 0.1", lambda: (
        abs(torus_distance([0.9], [0.0]) - 0.1) < 1e-12
    )
    yield "interval measure mu{dist<=0.1} = 0.2", lambda: (
        estimate_measure(DistToPoint((0.5,)), 0.1, doubling, 0, 100).estimate == 0.2
    )
    yield "disc measure = pi r^2", lambda: (
        abs(estimate_measure(DistToPoint((0.0, 0.0)), 0.1, cat, 0, 100).estimate
            - math.pi * 0.01) < 1e-12
    )
    yield "mollifier midpoint value 1/2", lambda: (
        abs(mollifier(DistToPoint((0.0,)), 0.2, 0.1, FloatPoint((0.15,))) - 0.5) < 1e-12
    )
    yield "hitting 1/5 -> tau = 2 at r = 0.25", lambda: (
        hitting_time(doubling, FractionPoint(("1/5",)), DistToPoint((0.0,)),
                     0.25, cap=100).tau == 2
    )
    yield "rotation hitting 0 -> 1/2 in two steps", lambda: (
        hitting_time(quarter, FractionPoint((0,)), DistToPoint((0.5,)),
                     0.1, cap=100).tau == 2
    )
    yield "shrinking radii start at r_0 = 1", lambda: (
        power_law_radii(0.5, 4).tolist()[0] == 1.0
    )
    yield "ladder gap condition accepted", lambda: (
        len(RadiusLadder.dyadic(3, 14)) == 12
    )
    yield "sup distance of exact exponential curve is 0", lambda: (
        exp_law_distance(ReturnCurve(
            0.1, 0.2, (0.0, 1.0, 2.0),
            (1.0, math.exp(-1.0), math.exp(-2.0)), 10, 100, 0,
            (False, False, False),
        )) == 0.0
    )
    yield "rank: identity projection has rank 2", lambda: (
        jacobian_rank(CoordinateProjection((0, 1), 2), FloatPoint((0.3, 0.8))).rank == 2
    )
    yield "rank: (x, 2x) has rank 1", lambda: (
        jacobian_rank(LinearMap(((1, 0), (2, 0))), FloatPoint((0.3, 0.8))).rank == 1
    )
    yield "rank: constant map has rank 0", lambda: (
        jacobian_rank(Constant((0.5,)), FloatPoint((0.3, 0.8))).rank == 0
    )
    yield "observed constant map is everywhere at its value", lambda: (
        evaluate(PushforwardDist(Constant((0.5,)), (0.5,)), FloatPoint((0.1, 0.2))) == 0.0
    )


def run_selftest(stream):
    failures = 0
    for label, check in _checks():
        try:
            ok = bool(check())
        except Exception as exc:  # a crashing check is a failing check
            ok = False
            label = f"{label} ({type(exc).__name__}: {exc})"
        stream.write(f"{'PASS' if ok else 'FAIL'}  {label}\n")
        failures += not ok
    stream.write(f"{'all checks passed' if not failures else f'{failures} failures'}\n")
    return 0 if failures == 0 else 1
