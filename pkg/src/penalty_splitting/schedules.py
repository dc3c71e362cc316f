"""Polynomial step-size and penalty schedules with analytic hypothesis checks.

``lambda_n = lambda0 * n**(-p)`` and ``beta_n = beta0 * n**q`` for ``n >= 1``.
Every classification below is decided from the exponents by p-series rules,
never by truncated summation, since a finite partial sum cannot certify
divergence.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

from .errors import UsageError

__all__ = [
    "PolynomialSchedule",
    "ScheduleReport",
    "Admissibility",
    "SOLVER_KINDS",
    "make_schedule",
    "classify",
    "admissible_for",
]

SOLVER_KINDS = ("fb_setvalued", "fb", "fbf", "fbf_composite")

REASON_L2_L1 = "(λ_n) ∈ ℓ²∖ℓ¹ violated"
REASON_RATIO = "Σ λ_n/β_n < +∞ violated"
REASON_FB = "limsup λ_nβ_n < 2μ violated"
REASON_FBF = "limsup(λ_nβ_n/μ + λ_n/η) < 1 violated"
REASON_COMPOSITE = "limsup(λ_nβ_n/μ + λ_n·√(2(1/η² + ‖K‖²))) < 1 violated"
WARN_UNVERIFIED = "unverified hypothesis (ii)"


@dataclass(frozen=True)
class PolynomialSchedule:
    lambda0: float
    p: float
    beta0: float
    q: float

    def __post_init__(self):
        for name in ("lambda0", "beta0"):
            v = getattr(self, name)
            if not (isinstance(v, (int, float)) and math.isfinite(v) and v > 0):
                sym = "λ₀" if name == "lambda0" else "β₀"
                raise UsageError(f"{sym} must be positive")
        for name in ("p", "q"):
            if not math.isfinite(getattr(self, name)):
                raise UsageError(f"exponent {name} must be finite")

    def lam(self, n: int) -> float:
        return self.lambda0 * n ** (-self.p)

    def beta(self, n: int) -> float:
        return self.beta0 * n**self.q

    def __call__(self, n: int):
        return self.lam(n), self.beta(n)


def make_schedule(lambda0, p, beta0, q) -> PolynomialSchedule:
    return PolynomialSchedule(float(lambda0), float(p), float(beta0), float(q))


def _power_limit(coef: float, exponent: float) -> float:
    """Limit of ``coef * n**exponent`` as n grows, for ``coef > 0``."""
    if exponent < 0:
        return 0.0
    if exponent == 0:
        return coef
    return math.inf


def _scaled(limit: float, factor: float) -> float:
    # 0 * inf never arises as a product of limits here: factor is finite
    if factor == 0.0:
        return 0.0
    return limit * factor


@dataclass(frozen=True)
class ScheduleReport:
    """Analytic classification of a polynomial schedule.

    The ``*_bound_ok`` methods evaluate the limsup step-size conditions
    of each kernel for given moduli; ``eta = math.inf`` encodes ``D = 0``.
    """

    lambda0: float
    p: float
    beta0: float
    q: float
    in_l2: bool
    in_l1: bool
    l2_not_l1: bool
    penalty_ratio_summable: bool
    lambda_limit: float
    lambda_beta_limsup: float

    def fb_bound_ok(self, mu: float) -> bool:
        return self.lambda_beta_limsup < 2.0 * mu

    def fbf_limit(self, mu: float, eta: float) -> float:
        return _scaled(self.lambda_beta_limsup, 1.0 / mu) + _scaled(self.lambda_limit, 1.0 / eta)

    def fbf_bound_ok(self, mu: float, eta: float) -> bool:
        return self.fbf_limit(mu, eta) < 1.0

    @staticmethod
    def composite_lipschitz(eta: float, knorm: float) -> float:
        """``sqrt(2 (1/eta^2 + ||K||^2))``, the Lipschitz constant of the coupled forward operator."""
        return math.sqrt(2.0 * ((1.0 / eta) ** 2 + knorm**2))

    def composite_limit(self, mu: float, eta: float, knorm: float) -> float:
        return _scaled(self.lambda_beta_limsup, 1.0 / mu) + _scaled(
            self.lambda_limit, self.composite_lipschitz(eta, knorm)
        )

    def composite_bound_ok(self, mu: float, eta: float, knorm: float) -> bool:
        return self.composite_limit(mu, eta, knorm) < 1.0

    def to_dict(self, mu=None, eta=None, knorm=None) -> dict:
        out = asdict(self)
        if mu is not None:
            out["fb_bound_ok"] = self.fb_bound_ok(mu)
            if eta is not None:
                out["fbf_bound_ok"] = self.fbf_bound_ok(mu, eta)
                if knorm is not None:
                    out["composite_bound_ok"] = self.composite_bound_ok(mu, eta, knorm)
        return out


def classify(s: PolynomialSchedule) -> ScheduleReport:
    """Classify ``s`` by p-series rules.

    ``sum n^{-a}`` converges iff ``a > 1``; hence (lambda_n) is in l2 iff
    ``2p > 1``, in l1 iff ``p > 1``, and ``sum lambda_n / beta_n`` converges
    iff ``p + q > 1``.
    """
    in_l2 = 2.0 * s.p > 1.0
    in_l1 = s.p > 1.0
    return ScheduleReport(
        lambda0=s.lambda0,
        p=s.p,
        beta0=s.beta0,
        q=s.q,
        in_l2=in_l2,
        in_l1=in_l1,
        l2_not_l1=in_l2 and not in_l1,
        penalty_ratio_summable=s.p + s.q > 1.0,
        lambda_limit=_power_limit(s.lambda0, -s.p),
        lambda_beta_limsup=_power_limit(s.lambda0 * s.beta0, s.q - s.p),
    )


@dataclass(frozen=True)
class Admissibility:
    ok: bool
    reasons: tuple = ()
    warnings: tuple = ()

    def __bool__(self):
        return self.ok


def _require(value, name, solver_kind):
    if value is None:
        raise UsageError(f"solver {solver_kind!r} requires the modulus {name}")
    value = float(value)
    if not value > 0:
        raise UsageError(f"modulus {name} must be positive")
    return value


def admissible_for(s: PolynomialSchedule, solver_kind: str, mu=None, eta=None, knorm=None,
                   penalty: str = "quadratic") -> Admissibility:
    """Check every analytically decidable hypothesis for ``solver_kind``.

    Parameters
    ----------
    s : PolynomialSchedule
    solver_kind : {"fb_setvalued", "fb", "fbf", "fbf_composite"}
    mu, eta, knorm : float, optional
        Cocoercivity (fb) or inverse Lipschitz (fbf) moduli of B and D, and
        the norm of K. ``eta = inf`` stands for ``D = 0``.
    penalty : {"quadratic", "trivial", "unverified"}
        How the penalty-gap hypothesis is certified. ``"quadratic"`` applies
        the sufficient condition ``sum lambda_n/beta_n < inf`` valid for
        penalty potentials with quadratic growth away from C; ``"trivial"``
        means ``C`` is the whole space; ``"unverified"`` adds a warning.

    Returns
    -------
    Admissibility
        ``ok`` plus one reason string per failed condition.
    """
    if solver_kind not in SOLVER_KINDS:
        raise UsageError(f"unknown solver {solver_kind!r}")
    report = classify(s)
    reasons, warnings = [], []
    if not report.l2_not_l1:
        reasons.append(REASON_L2_L1)
    if penalty == "quadratic":
        if not report.penalty_ratio_summable:
            reasons.append(REASON_RATIO)
    elif penalty == "unverified":
        warnings.append(WARN_UNVERIFIED)
    elif penalty != "trivial":
        raise UsageError(f"unknown penalty certification {penalty!r}")

    if solver_kind == "fb":
        mu = _require(mu, "mu", solver_kind)
        if not report.fb_bound_ok(mu):
            reasons.append(REASON_FB)
    elif solver_kind == "fbf":
        mu = _require(mu, "mu", solver_kind)
        eta = _require(eta, "eta", solver_kind)
        if not report.fbf_bound_ok(mu, eta):
            reasons.append(REASON_FBF)
    elif solver_kind == "fbf_composite":
        mu = _require(mu, "mu", solver_kind)
        eta = _require(eta, "eta", solver_kind)
        if knorm is None:
            raise UsageError("solver 'fbf_composite' requires the modulus knorm")
        if not report.composite_bound_ok(mu, eta, float(knorm)):
            reasons.append(REASON_COMPOSITE)
    return Admissibility(not reasons, tuple(reasons), tuple(warnings))
