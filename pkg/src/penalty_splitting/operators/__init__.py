"""Monotone operators, convex sets, conjugate pairs and Fitzpatrick functions."""

from .catalog import (
    AbsValue,
    AffineGradient,
    AffineMonotone,
    CouplingOperator,
    DistanceGradient,
    Identity,
    MonotoneOperator,
    NormalCone,
    NormalConeBall,
    NormalConeBox,
    NormalConeSingleton,
    NormalConeSubspace,
    PenaltyLift,
    ProductOperator,
    Quadratic,
    ScaledIdentity,
    SkewLinear,
    UserResolvent,
    Zero,
    check_moduli,
    evaluate,
    fitzpatrick,
    inverse_resolvent,
    resolvent,
    selection,
)
from .functions import (
    ConvexFunction,
    HalfSquaredDistance,
    HalfSquaredNorm,
    L1Norm,
    SquaredNormComposite,
    fitzpatrick_upper_bound,
)
from .penalty import PenaltyGap, penalty_gap
from .sets import (
    Ball,
    Box,
    ConvexSet,
    Singleton,
    Subspace,
    WholeSpace,
    project,
    project_intersection,
    support_function,
)

# long-form names
SubdifferentialAbsValue = AbsValue
SubdifferentialQuadratic = Quadratic
