import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from catalog_fixtures import catalog, user_identity
from penalty_splitting.errors import ContractViolation, DomainError, UnsupportedError, UsageError
from penalty_splitting.hilbert import LinearMap
from penalty_splitting.operators import (
    AbsValue,
    AffineGradient,
    AffineMonotone,
    Ball,
    Box,
    CouplingOperator,
    DistanceGradient,
    HalfSquaredDistance,
    HalfSquaredNorm,
    Identity,
    L1Norm,
    NormalCone,
    NormalConeBox,
    NormalConeSingleton,
    PenaltyLift,
    Quadratic,
    ScaledIdentity,
    Singleton,
    SkewLinear,
    SquaredNormComposite,
    SubdifferentialAbsValue,
    SubdifferentialQuadratic,
    Subspace,
    UserResolvent,
    WholeSpace,
    Zero,
    check_moduli,
    evaluate,
    fitzpatrick,
    fitzpatrick_upper_bound,
    inverse_resolvent,
    penalty_gap,
    project,
    project_intersection,
    resolvent,
    selection,
    support_function,
)

GRID = np.linspace(-10.0, 10.0, 400_001)  # step 5e-5


def grid_prox_abs(lam, x):
    """Scalar prox of lam*|.| by brute-force minimization on a fine grid."""
    return GRID[np.argmin(0.5 * (GRID - x) ** 2 + lam * np.abs(GRID))]


# ---------------------------------------------------------------- resolvent

def test_resolvent_examples():
    assert resolvent(NormalConeBox(0.0, math.inf, 1), 1.0, [-2.0]).tolist() == [0.0]
    assert resolvent(SubdifferentialAbsValue(1), 1.0, [3.0])[0] == pytest.approx(grid_prox_abs(1.0, 3.0), abs=1e-4)
    assert resolvent(SubdifferentialAbsValue(1), 1.0, [3.0]).tolist() == [2.0]
    for lam in (0.1, 1.0, 7.0):
        assert resolvent(Zero(2), lam, [1.5, -2.0]).tolist() == [1.5, -2.0]


@pytest.mark.parametrize("x", [-3.0, -0.4, 0.0, 0.2, 5.0])
@pytest.mark.parametrize("lam", [0.3, 1.0, 2.5])
def test_soft_threshold_matches_grid_oracle(lam, x):
    assert resolvent(AbsValue(1), lam, [x])[0] == pytest.approx(grid_prox_abs(lam, x), abs=1e-4)


def test_resolvent_rejects_bad_step():
    for lam in (0.0, -1.0, math.inf, math.nan):
        with pytest.raises(UsageError):
            resolvent(Identity(1), lam, [1.0])


def test_user_resolvent_contract():
    bad = UserResolvent(lambda lam, x: np.zeros(3), 2)
    with pytest.raises(ContractViolation):
        resolvent(bad, 1.0, [1.0, 2.0])
    assert resolvent(user_identity(), 1.0, [2.0, 4.0]).tolist() == [1.0, 2.0]


def test_quadratic_resolvent_solves_linear_system():
    Q = np.array([[2.0, 1.0], [1.0, 3.0]])
    b = np.array([1.0, -2.0])
    x = np.array([0.7, 0.2])
    expected = np.linalg.solve(np.eye(2) + 0.5 * Q, x - 0.5 * b)
    assert np.allclose(resolvent(SubdifferentialQuadratic(Q, b), 0.5, x), expected, atol=1e-14)


@pytest.mark.parametrize("name, M", catalog())
def test_firm_nonexpansiveness(name, M):
    rng = np.random.default_rng(1)
    for _ in range(200):
        lam = 10.0 ** rng.uniform(-1, 1)
        x, y = 3.0 * rng.standard_normal((2, M.dim))
        jx, jy = M.resolvent(lam, x), M.resolvent(lam, y)
        d = jx - jy
        assert d @ d <= (x - y) @ d + 1e-10


@pytest.mark.parametrize("name, M", [c for c in catalog() if c[0] != "product"])
def test_resolvent_inclusion_certificate(name, M):
    """(x - J x)/lam belongs to M(J x)."""
    rng = np.random.default_rng(2)
    for _ in range(50):
        lam = 10.0 ** rng.uniform(-1, 1)
        x = 3.0 * rng.standard_normal(M.dim)
        y = M.resolvent(lam, x)
        g = (x - y) / lam
        if isinstance(M, NormalCone):
            assert M.C.contains(y)
            # variational inequality over sampled points of C
            for c in (M.C.project(5.0 * rng.standard_normal(M.dim)) for _ in range(100)):
                assert g @ (c - y) <= 1e-10
        elif isinstance(M, AbsValue):
            for gi, yi in zip(g, y):
                if yi != 0:
                    assert gi == pytest.approx(np.sign(yi), abs=1e-12)
                else:
                    assert abs(gi) <= 1 + 1e-12
        else:
            assert np.allclose(g, M.eval(y), atol=1e-10)


# ------------------------------------------------------- inverse resolvent

def test_inverse_resolvent_examples():
    # (d|.|)^{-1} is the normal cone of [-1, 1]: its resolvent clamps
    assert inverse_resolvent(AbsValue(1), 2.0, [5.0]).tolist() == [1.0]
    assert np.clip(5.0, -1.0, 1.0) == 1.0
    moreau = inverse_resolvent(Identity(1), 1.0, [4.0])
    direct = resolvent(Identity(1), 1.0, [4.0])
    assert moreau.tolist() == [2.0] and direct.tolist() == [2.0]


@pytest.mark.parametrize("name, M", catalog())
@pytest.mark.parametrize("gamma", [0.1, 1.0, 10.0])
def test_moreau_path_matches_direct_inverse(name, M, gamma):
    rng = np.random.default_rng(3)
    for _ in range(50):
        x = 4.0 * rng.standard_normal(M.dim)
        direct = M.inverse_resolvent_direct(gamma, x)
        assert np.allclose(inverse_resolvent(M, gamma, x), direct, rtol=0, atol=1e-10 * max(1.0, gamma))


def test_user_resolvent_has_no_direct_inverse():
    with pytest.raises(UnsupportedError):
        user_identity().inverse_resolvent_direct(1.0, np.zeros(2))


# ------------------------------------------------------- eval / selection

def test_eval_examples():
    assert evaluate(AffineGradient(2.0 * np.eye(2), [1.0, 0.0]), [3.0, 0.0]).tolist() == [4.0, 0.0]
    assert evaluate(SkewLinear([[0.0, 1.0], [-1.0, 0.0]]), [1.0, 0.0]).tolist() == [0.0, -1.0]
    assert evaluate(Zero(1), [7.0]).tolist() == [0.0]


@pytest.mark.parametrize("M", [AbsValue(1), NormalConeBox(0.0, 1.0, 1), user_identity()])
def test_eval_of_setvalued_kind_points_to_selection(M):
    with pytest.raises(UsageError, match="selection"):
        evaluate(M, np.zeros(M.dim))


def test_selection_examples():
    assert selection(AbsValue(1), [0.0]).tolist() == [0.0]
    assert selection(AbsValue(1), [-3.0]).tolist() == [-1.0]
    assert selection(NormalConeBox(0.0, 1.0, 1), [1.0]).tolist() == [0.0]
    with pytest.raises(DomainError):
        selection(NormalConeBox(0.0, 1.0, 1), [2.0])


@pytest.mark.parametrize("name, M", [c for c in catalog() if c[0] != "product"])
def test_selection_is_monotone(name, M):
    rng = np.random.default_rng(4)
    for _ in range(200):
        if isinstance(M, NormalCone):
            x, y = (M.C.project(3.0 * rng.standard_normal(M.dim)) for _ in range(2))
        else:
            x, y = 3.0 * rng.standard_normal((2, M.dim))
        assert (x - y) @ (M.selection(x) - M.selection(y)) >= -1e-12


# ---------------------------------------------------------------- moduli

@pytest.mark.parametrize("name, M", [c for c in catalog() if c[1].single_valued and c[0] != "product"])
def test_declared_moduli_pass_audit(name, M):
    assert check_moduli(M, np.random.default_rng(5))


def test_cocoercive_moduli_declare_consistent_lipschitz():
    for _, M in catalog():
        if M.cocoercivity is not None and M.lipschitz is not None and M.cocoercivity != math.inf:
            assert M.lipschitz <= 1.0 / M.cocoercivity * (1 + 1e-12)


def test_audit_catches_overstated_modulus():
    M = Quadratic(np.diag([1.0, 4.0]))
    assert M.cocoercivity == pytest.approx(0.25)
    M.cocoercivity = 1.0
    assert not check_moduli(M, np.random.default_rng(6))


def test_skew_linear_is_orthogonal_to_its_argument():
    S = SkewLinear(np.array([[0.0, 1.5, -2.0], [-1.5, 0.0, 0.5], [2.0, -0.5, 0.0]]))
    rng = np.random.default_rng(7)
    for _ in range(100):
        x = rng.standard_normal(3)
        assert abs(x @ S.eval(x)) <= 1e-12 * max(1.0, x @ x)
    assert S.cocoercivity is None


def test_constructors_reject_bad_data():
    with pytest.raises(UsageError):
        AffineMonotone(np.diag([1.0, -1.0]))
    with pytest.raises(UsageError):
        SkewLinear(np.eye(2))
    with pytest.raises(UsageError):
        Quadratic(np.array([[1.0, 2.0], [0.0, 1.0]]))
    with pytest.raises(UsageError):
        ScaledIdentity(0.0)


def test_coupling_and_lift_moduli():
    K = LinearMap(np.array([[1.0, 2.0], [0.0, 1.0], [1.0, 0.0]]))
    D = Quadratic(np.diag([1.0, 3.0]))
    cpl = CouplingOperator(D, K)
    assert check_moduli(cpl, np.random.default_rng(8))
    lift = PenaltyLift(DistanceGradient(Box(0.0, 1.0, 2)), 3)
    assert check_moduli(lift, np.random.default_rng(9))


# ---------------------------------------------------------------- sets

def test_project_examples():
    assert project(Box(0.0, 1.0, 2), [2.0, -1.0]).tolist() == [1.0, 0.0]
    assert project(Singleton([5.0]), [-9.0]).tolist() == [5.0]
    L = np.array([[1.0, 0.0]])
    x = np.array([2.0, 3.0])
    # normal-equations oracle: x - L^T (L L^T)^{-1} L x
    oracle = x - L.T @ np.linalg.solve(L @ L.T, L @ x)
    assert np.allclose(project(Subspace(L), x), oracle, atol=1e-15)
    assert np.allclose(oracle, [0.0, 3.0])


@pytest.mark.parametrize(
    "C", [Box([0.0, -1.0], [1.0, math.inf]), Subspace([[1.0, -2.0]]), Singleton([1.0, 2.0]),
          Ball([0.0, 1.0], 1.5), WholeSpace(2)],
)
def test_projection_idempotent_nonexpansive(C):
    rng = np.random.default_rng(10)
    for _ in range(100):
        x, y = 4.0 * rng.standard_normal((2, 2))
        px, py = C.project(x), C.project(y)
        assert np.allclose(C.project(px), px, atol=1e-12)
        assert np.linalg.norm(px - py) <= np.linalg.norm(x - y) + 1e-12
        assert C.contains(px)


def test_support_function_examples():
    assert support_function(Ball([0.0, 0.0], 1.0), [3.0, 4.0]) == 5.0
    sub = Subspace([[1.0, 0.0]])
    assert support_function(sub, [2.0, 0.0]) == 0.0
    assert support_function(sub, [0.0, 1.0]) == math.inf
    assert support_function(Box(0.0, 1.0, 2), [1.0, -1.0]) == 1.0


def test_support_function_against_sampling():
    rng = np.random.default_rng(11)
    box = Box([-1.0, 0.0], [2.0, 0.5])
    corners = np.array([[a, b] for a in (-1.0, 2.0) for b in (0.0, 0.5)])
    for _ in range(50):
        u = rng.standard_normal(2)
        assert support_function(box, u) == pytest.approx(np.max(corners @ u), abs=1e-14)
    ball = Ball([1.0, -1.0], 2.0)
    angles = np.linspace(0, 2 * np.pi, 100_001)
    boundary = ball.center + 2.0 * np.stack([np.cos(angles), np.sin(angles)], axis=1)
    for _ in range(20):
        u = rng.standard_normal(2)
        assert support_function(ball, u) == pytest.approx(np.max(boundary @ u), abs=1e-8)


@pytest.mark.parametrize(
    "C", [Box([0.0, -1.0], [1.0, 2.0]), Ball([1.0, 0.0], 2.0), Singleton([0.5, -0.5]),
          Subspace([[1.0, 1.0]]), WholeSpace(2)],
)
def test_support_prox_moreau_decomposition(C):
    """prox of s*sigma_C equals x - s P_C(x/s)."""
    rng = np.random.default_rng(12)
    for _ in range(100):
        s = 10.0 ** rng.uniform(-1, 1)
        x = 4.0 * rng.standard_normal(2)
        assert np.allclose(C.support_prox(s, x), x - s * C.project(x / s), atol=1e-12)


def test_dykstra_against_grid_search():
    box = Box(0.0, 1.0, 2)
    line = Subspace([[1.0, -1.0]])  # the diagonal x1 = x2
    rng = np.random.default_rng(13)
    t = np.linspace(0.0, 1.0, 100_001)
    pts = np.stack([t, t], axis=1)
    for _ in range(20):
        x = 3.0 * rng.standard_normal(2)
        got = project_intersection([box, line], x)
        best = pts[np.argmin(np.sum((pts - x) ** 2, axis=1))]
        assert np.allclose(got, best, atol=2e-5)


def test_box_rejects_inverted_bounds():
    with pytest.raises(UsageError):
        Box(1.0, 0.0, 1)


# ----------------------------------------------------------- Fitzpatrick

def test_fitzpatrick_examples():
    assert fitzpatrick(Identity(1), [2.0], [2.0]) == pytest.approx(4.0, abs=1e-14)
    grid = np.linspace(-10, 10, 200_001)
    sup = np.max(2.0 * grid + grid * 2.0 - grid**2)
    assert sup == pytest.approx(4.0, abs=1e-8)
    S = SkewLinear([[0.0, 1.0], [-1.0, 0.0]])
    x = np.array([1.0, 2.0])
    assert fitzpatrick(S, x, S.eval(x)) == pytest.approx(0.0, abs=1e-14)
    assert fitzpatrick(S, x, S.eval(x) + [0.1, 0.0]) == math.inf
    single = NormalConeSingleton([0.0, 0.0])
    assert fitzpatrick(single, [0.0, 0.0], [3.0, -1.0]) == 0.0
    assert fitzpatrick(single, [1.0, 0.0], [3.0, -1.0]) == math.inf


def test_fitzpatrick_unsupported_kind():
    with pytest.raises(UnsupportedError):
        fitzpatrick(AbsValue(1), [0.0], [0.5])


@pytest.mark.parametrize("x, u", [(0.5, -1.0), (-2.0, 3.0), (1.0, 1.0), (0.0, 0.0)])
def test_fitzpatrick_scaled_identity_against_grid(x, u):
    M = ScaledIdentity(2.0, center=[0.5])
    grid = np.linspace(-20, 20, 400_001)
    v = 2.0 * (grid - 0.5)
    sup = np.max(x * v + grid * u - grid * v)
    assert fitzpatrick(M, [x], [u]) == pytest.approx(sup, abs=1e-6)


@settings(max_examples=200)
@given(
    st.lists(st.floats(-3, 3), min_size=4, max_size=4),
    st.floats(-2, 2),
    st.lists(st.floats(-5, 5), min_size=6, max_size=6),
)
def test_fitzpatrick_affine_lower_bound(entries, skew, xu):
    a = np.array(entries).reshape(2, 2)
    w = np.linalg.eigvalsh(a @ a.T)
    # eigenvalues near the 1e-10 relative rank cutoff make the range test ambiguous
    assume(all(v <= 1e-14 * w[-1] or v >= 1e-6 * w[-1] for v in w))
    M = AffineMonotone(a @ a.T + np.array([[0.0, skew], [-skew, 0.0]]), xu[4:])
    x, u = np.array(xu[:2]), np.array(xu[2:4])
    assert M.fitzpatrick(x, u) >= x @ u - 1e-9 * max(1.0, abs(x @ u))
    y = np.array(xu[2:4])
    assert M.fitzpatrick(y, M.eval(y)) == pytest.approx(y @ M.eval(y), abs=1e-8 * max(1.0, abs(y @ M.eval(y))))


# ------------------------------------------------- conjugate-pair bound

def test_fitzpatrick_upper_bound_examples():
    assert fitzpatrick_upper_bound(HalfSquaredNorm(1), [1.0], [1.0]) == 1.0
    psi = SquaredNormComposite([[1.0, 0.0]])
    assert fitzpatrick_upper_bound(psi, [0.0, 3.0], [2.0, 0.0]) == pytest.approx(1.0, abs=1e-14)
    # scalar maximization oracle for psi*: sup_y 2 y1 - y1^2
    grid = np.linspace(-5, 5, 100_001)
    assert np.max(2.0 * grid - grid**2) == pytest.approx(1.0, abs=1e-8)
    assert fitzpatrick_upper_bound(L1Norm(1), [0.0], [2.0]) == math.inf


def test_squared_norm_conjugate_off_range_is_infinite():
    psi = SquaredNormComposite([[1.0, 0.0]])
    assert psi.conjugate(np.array([0.0, 1.0])) == math.inf


@pytest.mark.parametrize(
    "f", [SquaredNormComposite([[1.0, -1.0], [0.0, 2.0]]), SquaredNormComposite([[1.0, 1.0]]),
          HalfSquaredNorm(2), L1Norm(2), HalfSquaredDistance(Box(0.0, 1.0, 2)),
          HalfSquaredDistance(Ball([0.0, 0.0], 1.0))],
)
def test_fenchel_young_on_subdifferential_graph(f):
    rng = np.random.default_rng(14)
    op = f.subdifferential()
    for _ in range(100):
        x = 2.0 * rng.standard_normal(2)
        x[rng.random(2) < 0.2] = 0.0
        u = op.sample_graph_element(x, rng)
        bound = fitzpatrick_upper_bound(f, x, u)
        assert bound >= x @ u - 1e-10
        assert bound == pytest.approx(x @ u, abs=1e-10 * max(1.0, abs(x @ u)))


# ----------------------------------------------------------- penalty gap

def test_penalty_gap_examples():
    gap = penalty_gap(Identity(1), Singleton([0.0]), [1.0], 2.0)
    assert gap.exact and gap.value == pytest.approx(0.0625, abs=1e-15)
    # closed form phi_Id(0, s) = s^2/4 at s = 0.5
    assert 0.5**2 / 4 == 0.0625
    psi = SquaredNormComposite([[1.0, 0.0]])
    C = Subspace([[1.0, 0.0]])
    bound = penalty_gap(psi, C, [4.0, 0.0], 8.0)
    assert not bound.exact and bound.value == pytest.approx(0.0625, abs=1e-15)
    exact = penalty_gap(psi.subdifferential(), C, [4.0, 0.0], 8.0)
    assert exact.exact and exact.value == pytest.approx(0.0625 / 2, abs=1e-15)


@pytest.mark.parametrize(
    "B, C",
    [(Identity(2), Singleton([0.0, 0.0])),
     (SquaredNormComposite([[1.0, 2.0]]).subdifferential(), Subspace([[1.0, 2.0]])),
     (DistanceGradient(Box(0.0, 1.0, 2)), Box(0.0, 1.0, 2)),
     (NormalConeBox(0.0, 1.0, 2), Box(0.0, 1.0, 2))],
)
def test_penalty_gap_zero_dual_vector(B, C):
    for beta in (0.5, 1.0, 100.0):
        assert penalty_gap(B, C, np.zeros(2), beta).value == 0.0


def test_penalty_gap_nonnegative_when_exact():
    rng = np.random.default_rng(15)
    L = np.array([[1.0, 2.0]])
    B = SquaredNormComposite(L).subdifferential()
    C = Subspace(L)
    for _ in range(100):
        p = rng.standard_normal() * L[0]
        gap = penalty_gap(B, C, p, 10.0 ** rng.uniform(-1, 2))
        assert gap.exact and gap.value >= -1e-12


def test_penalty_gap_rejects_p_outside_normal_range():
    with pytest.raises(DomainError):
        penalty_gap(Identity(2), Subspace([[1.0, 0.0]]), [0.0, 1.0], 1.0)


def test_penalty_gap_distance_gradient_is_bound():
    C = Box(0.0, 1.0, 1)
    gap = penalty_gap(DistanceGradient(C), C, [2.0], 4.0)
    # sigma_C(s) + s^2/2 - sigma_C(s) with s = 0.5
    assert not gap.exact and gap.value == pytest.approx(0.125)


def test_long_form_aliases():
    assert SubdifferentialAbsValue is AbsValue
    assert SubdifferentialQuadratic is Quadratic
    assert isinstance(Ball([0.0], 1.0), Ball)
