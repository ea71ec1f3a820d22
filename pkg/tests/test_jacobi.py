import math

import numpy as np
import pytest

import gaplab as G
from gaplab.errors import ValidationError
from gaplab.jacobi import sturm_count


def dense_tridiagonal(J, N):
    T = np.diag(J.b[:N])
    if N > 1:
        T += np.diag(J.a[: N - 1], 1) + np.diag(J.a[: N - 1], -1)
    return T


def hankel_coefficients(moments, n):
    """Moment-determinant oracle (fine for small n): Gram on monomials."""
    k = n + 1
    M = np.array([[moments[i + j] for j in range(k)] for i in range(k)], dtype=float)
    L = np.linalg.cholesky(M)
    # recurrence from the Cholesky factor of the moment matrix
    a = np.array([L[i + 1, i + 1] / L[i, i] for i in range(n)])
    b = np.empty(n)
    b[0] = L[1, 0] / L[0, 0]
    for i in range(1, n):
        b[i] = L[i + 1, i] / L[i, i] - L[i, i - 1] / L[i - 1, i - 1]
    return a, b


# ---------------------------------------------------------------------------
# coefficients from measures


def test_arcsine_coefficients(mu_arcsine):
    J = G.coefficients_from_measure(mu_arcsine, 12, quad_order=256)
    assert J.a[0] == pytest.approx(math.sqrt(2), abs=1e-12)
    assert np.max(np.abs(J.a[1:] - 1)) <= 1e-10
    assert np.max(np.abs(J.b)) <= 1e-10


def test_semicircle_coefficients(mu_semicircle):
    J = G.coefficients_from_measure(mu_semicircle, 12, quad_order=256)
    assert np.max(np.abs(J.a - 1)) <= 1e-10
    assert np.max(np.abs(J.b)) <= 1e-10


def test_semicircle_against_moment_oracle(mu_semicircle):
    # semicircle even moments are the Catalan numbers
    catalan = [1, 1, 2, 5, 14, 42, 132]
    moments = []
    for k in range(11):
        moments.append(0.0 if k % 2 else float(catalan[k // 2]))
    a_or, b_or = hankel_coefficients(moments, 5)
    J = G.coefficients_from_measure(mu_semicircle, 5, quad_order=200)
    assert np.allclose(J.a, a_or, atol=1e-10)
    assert np.allclose(J.b, b_or, atol=1e-10)


def test_two_atoms():
    model = G.solve_green(G.make_gapset(-0.5, 0.5))
    mu = G.make_measure(
        model, G.WeightSpec("const", {"value": 0.0}),
        point_masses=[(-1.0, 0.5), (1.0, 0.5)],
    )
    J = G.coefficients_from_measure(mu, 1)
    assert J.b[0] == pytest.approx(0.0, abs=1e-14)
    assert J.a[0] == pytest.approx(1.0, abs=1e-14)


def test_atomic_measure_exact_vs_dense():
    # measure with 12 atoms: Lanczos must reproduce its Jacobi matrix exactly
    rng = np.random.RandomState(3)
    x = np.sort(rng.uniform(2.0, 5.0, 12))
    w = rng.uniform(0.1, 1.0, 12)
    w /= w.sum()
    model = G.solve_green(G.make_gapset(-1, 1))
    mu = G.make_measure(model, G.WeightSpec("const", {"value": 0.0}),
                        point_masses=list(zip(x, w)))
    J = G.coefficients_from_measure(mu, 6)
    # oracle: orthonormalize monomials in the discrete inner product
    V = np.vander(x, 7, increasing=True) * np.sqrt(w)[:, None]
    Q, R = np.linalg.qr(V)
    a_or = np.array([R[i + 1, i + 1] / R[i, i] for i in range(6)])
    b_or = np.array(
        [R[i, i + 1] / R[i, i] - (R[i - 1, i] / R[i - 1, i - 1] if i else 0.0) for i in range(6)]
    )
    assert np.allclose(J.a, np.abs(a_or), atol=1e-10)
    assert np.allclose(J.b, b_or, atol=1e-10)


def test_coefficients_invariant_under_mass_rescaling(model_m22):
    w1 = G.WeightSpec("poly", {"coef": [1.0, 0.0, 0.25]})
    w9 = G.WeightSpec("poly", {"coef": [9.0, 0.0, 2.25]})
    j1 = G.coefficients_from_measure(G.make_measure(model_m22, w1), 10)
    j9 = G.coefficients_from_measure(G.make_measure(model_m22, w9), 10)
    assert np.max(np.abs(j1.a - j9.a)) <= 1e-8
    assert np.max(np.abs(j1.b - j9.b)) <= 1e-8


def test_coefficient_stability_under_order_doubling(mu_semicircle):
    assert G.coefficient_stability(mu_semicircle, 20, 300) <= 1e-10


def test_degenerate_measure_errors(model_m22):
    mu = G.make_measure(model_m22, None)
    with pytest.raises(ValidationError):
        G.coefficients_from_measure(mu, 500, quad_order=64)


def test_point_mass_validation(model_m22):
    with pytest.raises(ValidationError):
        G.make_measure(model_m22, None, point_masses=[(0.5, 0.1)])  # inside set
    with pytest.raises(ValidationError):
        G.make_measure(model_m22, None, point_masses=[(3.0, -0.1)])
    with pytest.raises(ValidationError):
        G.make_measure(model_m22, None, point_masses=[(3.0, 0.6), (4.0, 0.7)])


# ---------------------------------------------------------------------------
# strip and glue


def test_strip_basic(j_chebyshev):
    s1 = G.strip(j_chebyshev, 1)
    assert np.max(np.abs(s1.a[:50] - 1)) <= 1e-10
    assert len(s1) == len(j_chebyshev) - 1
    s0 = G.strip(j_chebyshev, 0)
    assert np.array_equal(s0.a, j_chebyshev.a)
    with pytest.raises(ValidationError):
        G.strip(j_chebyshev, len(j_chebyshev))


def test_strip_composition(j_perturbed):
    twice = G.strip(G.strip(j_perturbed, 2), 3)
    once = G.strip(j_perturbed, 5)
    assert np.array_equal(twice.a, once.a) and np.array_equal(twice.b, once.b)


def test_glue_round_trip(j_perturbed, je_pm12):
    head = G.JacobiCoeffs(j_perturbed.a[:7], j_perturbed.b[:7])
    glued = G.glue_head(head, 0.8, je_pm12)
    back = G.strip(glued, 7)
    assert np.array_equal(back.a, je_pm12.a)
    assert np.array_equal(back.b, je_pm12.b)
    assert glued.a[6] == 0.8
    with pytest.raises(ValidationError):
        G.glue_head(head, -1.0, je_pm12)


def test_glue_empty_head(je_pm12):
    head = G.JacobiCoeffs(np.empty(0), np.empty(0))
    assert G.glue_head(head, 1.0, je_pm12) is je_pm12


# ---------------------------------------------------------------------------
# eigenvalues


def test_truncation_eigenvalues_closed_forms():
    assert G.truncation_eigenvalues(G.JacobiCoeffs(np.ones(1), np.zeros(2)), 2) == pytest.approx(
        [-1.0, 1.0], abs=1e-12
    )
    got = G.truncation_eigenvalues(G.JacobiCoeffs(np.ones(2), np.zeros(3)), 3)
    assert got == pytest.approx([-math.sqrt(2), 0.0, math.sqrt(2)], abs=1e-12)
    assert G.truncation_eigenvalues(G.JacobiCoeffs(np.ones(1), np.array([5.0])), 1) == pytest.approx(
        [5.0], abs=1e-12
    )


def test_truncation_eigenvalues_vs_dense():
    rng = np.random.RandomState(7)
    J = G.JacobiCoeffs(rng.uniform(0.3, 1.5, 50), rng.uniform(-1, 1, 50))
    for N in (13, 50):
        dense = np.linalg.eigvalsh(dense_tridiagonal(J, N))
        assert np.max(np.abs(dense - G.truncation_eigenvalues(J, N))) <= 1e-11


def test_sturm_counts_match_dense(model_pm12, je_pm12):
    for N in (20, 50):
        dense = np.linalg.eigvalsh(dense_tridiagonal(je_pm12, N))
        for x in (-1.0, 1.0, 0.0, -2.0, 2.0):
            assert int(sturm_count(je_pm12, N, np.array([x]))[0]) == int(np.sum(dense < x))


def test_gap_eigenvalue_perturbed(model_m22, j_perturbed):
    eigs = G.gap_eigenvalues(j_perturbed, model_m22, 250)
    assert len(eigs) == 1
    value, loc = eigs[0]
    assert loc.kind == "right"
    assert value == pytest.approx(2.9, abs=1e-6)
    assert G.eigenvalue_green_sum([value], model_m22) == pytest.approx(math.log(2.5), abs=1e-6)


def test_gap_eigenvalues_free_empty(model_m22, j_free):
    assert G.gap_eigenvalues(j_free, model_m22, 200) == []


def test_gap_eigenvalue_single_site(model_m22):
    J = G.JacobiCoeffs(np.ones(1), np.array([3.0]))
    eigs = G.gap_eigenvalues(J, model_m22, 1)
    assert len(eigs) == 1 and eigs[0][0] == pytest.approx(3.0, abs=1e-12)


def test_eigenvalue_green_sum_validation(model_m22):
    assert G.eigenvalue_green_sum([], model_m22) == 0.0
    assert G.eigenvalue_green_sum([2.9, -2.9], model_m22) == pytest.approx(
        2 * math.log(2.5), abs=1e-6
    )
    with pytest.raises(ValidationError):
        G.eigenvalue_green_sum([0.5], model_m22)


def test_gap_count_lemma_two_interval(model_pm12, je_pm12):
    """Corner and strip sections inherit the one-per-gap bound whenever the
    double-size section is clean, and the counts match a dense eigensolver."""
    for N in (25, 50, 100):
        full = G.gap_eigenvalues(je_pm12, model_pm12, 2 * N)
        if any(loc.kind == "gap" for _, loc in full):
            continue
        corner = [v for v, loc in G.gap_eigenvalues(je_pm12, model_pm12, N) if loc.kind == "gap"]
        stripped = G.strip(je_pm12, N)
        tail = [v for v, loc in G.gap_eigenvalues(stripped, model_pm12, N) if loc.kind == "gap"]
        assert len(corner) <= 1
        assert len(tail) <= 1
    # dense oracle at size 50
    dense = np.linalg.eigvalsh(dense_tridiagonal(je_pm12, 50))
    in_gap = dense[(dense > -1) & (dense < 1)]
    ours = [v for v, loc in G.gap_eigenvalues(je_pm12, model_pm12, 50) if loc.kind == "gap"]
    assert len(in_gap) == len(ours)
    if len(ours):
        assert np.max(np.abs(np.sort(in_gap) - np.sort(ours))) <= 1e-10


def test_stable_filtering_drops_wall_states(model_pm12, je_pm12):
    stripped = G.strip(je_pm12, 25)
    raw = [v for v, loc in G.gap_eigenvalues(stripped, model_pm12, 180) if loc.kind == "gap"]
    certified = G.stable_gap_eigenvalues(stripped, model_pm12, 180)
    assert len(raw) == 2  # genuine left state plus truncation-wall state
    assert len(certified) == 1


# ---------------------------------------------------------------------------
# m-functions


def test_m_function_free_closed_form(j_free):
    assert G.m_function(j_free, 3.0) == pytest.approx((-3 + math.sqrt(5)) / 2, abs=1e-10)
    got = G.m_function(j_free, 1j)
    assert got == pytest.approx(1j * (math.sqrt(5) - 1) / 2, abs=1e-10)


def semicircle_m(x):
    """Free-matrix m-function; branch fixed by |m| < 1 (the roots multiply to 1)."""
    s = complex(x * x - 4) ** 0.5
    m1, m2 = (-x + s) / 2, (-x - s) / 2
    return m1 if abs(m1) < abs(m2) else m2


def test_m_function_periodic_seed_exact():
    # the periodic extension of (a, b) = (1, 0) is the free matrix, so the
    # seeded fraction is exact at every depth, including near the band edge
    # where a truncated fraction would converge hopelessly slowly
    J = G.JacobiCoeffs(np.ones(3), np.zeros(3), tail="periodic")
    for x in (3.0, 2.0001, -5.0, 1 + 1j):
        for depth in (1, 3):
            assert abs(G.m_function(J, x, depth) - semicircle_m(x)) <= 1e-12


def test_m_function_equilibrium_seed(mu_arcsine):
    # the equilibrium seed at depth d stands for the arcsine matrix glued on
    # beyond position d; cross-check against an explicit long glue
    head = G.JacobiCoeffs(np.array([0.9, 1.1]), np.array([0.3, -0.2]),
                          tail="equilibrium", tail_interval=(-2.0, 2.0))
    tail = G.coefficients_from_measure(mu_arcsine, 400, quad_order=1000)
    explicit = G.glue_head(G.JacobiCoeffs(head.a, head.b), float(head.a[1]), tail)
    for x in (2.5 + 0.3j, -0.4 + 1.2j, 4.0):
        got = G.m_function(head, x, 2)
        ref = G.m_function(explicit, x)
        assert abs(got - ref) <= 1e-10


def test_m_function_herglotz_and_conjugate(j_perturbed):
    for x in (0.4 + 0.7j, -1.2 + 0.05j, 3 + 1j):
        m = G.m_function(j_perturbed, x, 300)
        assert m.imag > 0
        assert G.m_function(j_perturbed, x.conjugate(), 300) == pytest.approx(m.conjugate())


def test_m_function_resolvent_quadrature(j_perturbed):
    # spectral-decomposition oracle for the depth-truncation
    N = 120
    T = dense_tridiagonal(j_perturbed, N)
    w, V = np.linalg.eigh(T)
    for x in (0.3 + 0.1j, -1.5 + 0.25j, 2.2 + 0.1j):
        oracle = complex(np.sum(V[0, :] ** 2 / (w - x)))
        assert abs(G.m_function(j_perturbed, x, N) - oracle) <= 1e-10


def test_m_function_tail_expansion(j_free):
    for x in (40.0, -55.0, 30j):
        assert abs(x * G.m_function(j_free, x) + 1) <= 2.0 / abs(x)


def test_m_function_stripping_identity(j_perturbed):
    x = 0.7 + 0.9j
    m0 = G.m_function(j_perturbed, x, 300)
    m1_direct = G.m_function(G.strip(j_perturbed, 1), x, 299)
    m1_mobius = (j_perturbed.b[0] - x - 1 / m0) / j_perturbed.a[0] ** 2
    assert abs(m1_direct - m1_mobius) <= 1e-10


def test_m_function_random_battery():
    # seeded sweep: Herglotz property and the stripping identity hold for
    # arbitrary coefficient data, not just the structured examples
    rng = np.random.RandomState(42)
    for _ in range(5):
        J = G.JacobiCoeffs(rng.uniform(0.2, 2.0, 80), rng.uniform(-1.5, 1.5, 80))
        for x in (rng.uniform(-3, 3) + 1j * rng.uniform(0.05, 1.0),):
            m0 = G.m_function(J, x)
            assert m0.imag > 0
            m1 = G.m_function(G.strip(J, 1), x)
            mobius = (J.b[0] - x - 1 / m0) / J.a[0] ** 2
            assert abs(m1 - mobius) <= 1e-10


def test_m_function_validation(j_free):
    with pytest.raises(ValidationError):
        G.m_function(j_free, 1.5)  # real point inside the spectral bound
    with pytest.raises(ValidationError):
        G.m_function(j_free, 1j, 0)


# ---------------------------------------------------------------------------
# boundary values and stripping


def test_stripped_boundary_density_chebyshev():
    m1, f1 = G.stripped_boundary_density(0.5j, math.sqrt(2), 0.0, 0.0)
    assert m1 == pytest.approx(1j, abs=1e-14)
    assert f1 == pytest.approx(1 / math.pi, abs=1e-14)
    _, f1b = G.stripped_boundary_density(1j / math.sqrt(3), math.sqrt(2), 0.0, 1.0)
    assert f1b == pytest.approx(math.sqrt(3) / (2 * math.pi), abs=1e-14)


def test_stripped_boundary_density_mass_identity():
    # a1^2 |m|^2 f1 = f for purely imaginary boundary values
    m = 0.37j
    a1 = 1.3
    m1, f1 = G.stripped_boundary_density(m, a1, 0.2, 0.0)
    f = m.imag / math.pi
    assert a1 * a1 * abs(m) ** 2 * f1 == pytest.approx(f, abs=1e-14)


def test_stripped_boundary_density_requires_ac_point():
    with pytest.raises(ValidationError):
        G.stripped_boundary_density(0.3 + 0j, 1.0, 0.0, 0.0)


def test_measure_m_boundary_semicircle(mu_semicircle):
    for t in (0.0, 1.0, -1.3):
        got = G.measure_m_boundary(mu_semicircle, t)
        want = complex(-t / 2, math.sqrt(4 - t * t) / 2)
        assert abs(got - want) <= 1e-10


def test_measure_m_boundary_lebesgue_absolute(model_m22):
    mu = G.make_measure(model_m22, G.WeightSpec("const", {"value": 1.0}), mode="absolute")
    for t in (0.5, -1.2):
        got = G.measure_m_boundary(mu, t)
        want = complex(0.25 * math.log((2 - t) / (2 + t)), math.pi / 4)
        assert abs(got - want) <= 1e-10


def test_measure_m_boundary_point_mass(model_m22):
    mu0 = G.make_measure(model_m22, None)
    mu1 = G.make_measure(model_m22, None, point_masses=[(3.0, 0.25)])
    t = 0.75
    got = G.measure_m_boundary(mu1, t)
    base = G.measure_m_boundary(mu0, t)
    assert got.real == pytest.approx(0.75 * base.real + 0.25 / (3.0 - t), abs=1e-10)
    assert got.imag == pytest.approx(0.75 * base.imag, abs=1e-12)


# ---------------------------------------------------------------------------
# interlacing profile


def test_interlacing_profile_free(model_m22, j_free):
    prof = G.interlacing_profile(j_free, model_m22, 150)
    assert len(prof.poles) == 0
    assert prof.psi(np.array([0.3]))[0] == 1.0


def test_interlacing_profile_perturbed(model_m22, j_perturbed):
    prof = G.interlacing_profile(j_perturbed, model_m22, 300)
    assert len(prof.poles) == 1
    assert prof.poles[0] == pytest.approx(2.9, abs=1e-6)
    assert prof.zeros[0] > prof.poles[0]
    xs = np.linspace(-1.9, 1.9, 9)
    assert np.all(prof.psi(xs) > 0)


def test_interlacing_profile_alternation(model_pm12):
    # two poles: one in the gap (from b-defect), one above the set
    b = np.zeros(300)
    b[0] = 1.8
    b[1] = -0.3
    J = G.JacobiCoeffs(np.concatenate([[0.7], np.ones(299)]), b)
    prof = G.interlacing_profile(J, model_pm12, 260)
    assert len(prof.poles) >= 1
    for xk, yk in zip(prof.poles, prof.zeros):
        assert yk > xk
    order = np.argsort(prof.poles)
    inter = np.ravel(np.column_stack([prof.poles[order], prof.zeros[order]]))
    assert np.all(np.diff(inter) >= -1e-12)
    assert np.all(prof.psi(np.array([1.5, -1.5])) > 0)  # positive on band interiors


def test_interlacing_zeros_confined_to_components(model_pm12, je_pm12):
    # every paired zero stays within the closure of its pole's component,
    # even when the next truncation pole lies inside a band
    rng = np.random.RandomState(5)
    for _ in range(6):
        b = np.zeros(300)
        b[0] = rng.uniform(-2.2, 2.2)
        b[1] = rng.uniform(-1.0, 1.0)
        a = np.ones(300)
        a[0] = rng.uniform(0.5, 1.6)
        J = G.JacobiCoeffs(a, b)
        prof = G.interlacing_profile(J, model_pm12, 240)
        for y, loc in zip(prof.zeros, prof.locations):
            if loc.kind == "gap":
                lo, hi = model_pm12.set.gaps[loc.index]
                assert lo < y <= hi
            elif loc.kind == "left":
                assert y <= model_pm12.set.alpha
            else:
                assert y > model_pm12.set.beta


# ---------------------------------------------------------------------------
# exchange formats


def test_coeffs_csv_and_json_round_trip(je_pm12):
    J = G.JacobiCoeffs(je_pm12.a[:4], je_pm12.b[:4], tail="equilibrium",
                       tail_interval=(-2.0, 2.0))
    text = G.coeffs_to_csv(J)
    lines = text.strip().split("\n")
    assert lines[0] == "n,a_n,b_n"
    assert len(lines) == 5
    back = G.coeffs_from_json(G.coeffs_to_json(J))
    assert np.array_equal(back.a, J.a) and np.array_equal(back.b, J.b)
    assert back.tail == "equilibrium" and back.tail_interval == (-2.0, 2.0)


def test_measure_json(model_m22):
    mu = G.make_measure(model_m22, G.WeightSpec("poly", {"coef": [1.0, 0.5]}),
                        point_masses=[(2.5, 0.125)])
    obj = G.measure_to_json(mu)
    assert '"form": "poly"' in obj
    assert '"masses": [[2.5, 0.125]]' in obj
