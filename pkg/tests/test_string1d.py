import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nodal_lab import DomainError, ResolutionError
from nodal_lab import string1d as s1
from nodal_lab.string1d import CombinationSpec, SLProblem


def sampled_nodes(spec: CombinationSpec, points: int = 100_000) -> int:
    """Independent oracle: sign changes on a dense open-interval grid."""
    a, b = spec.interval
    x = np.linspace(a, b, points + 2)[1:-1]
    f = spec(x)
    # a sample landing on a double zero evaluates to rounding noise of either sign
    floor = 64 * np.finfo(float).eps * sum(abs(c) for c in spec.coefficients)
    return s1.sign_changes(f[np.abs(f) > floor])


# eigenpairs -------------------------------------------------------------------


def test_dirichlet_eigenpair():
    p = s1.string_eigenpair("dirichlet", 3)
    assert p.eigenvalue == 9 and p.multiplicity == 1
    assert p.modes[0].kind == "sin" and p.modes[0].freq == 3


def test_neumann_ground_state_is_constant():
    p = s1.string_eigenpair("neumann", 1)
    assert p.eigenvalue == 0
    assert np.all(p.modes[0](np.linspace(0, math.pi, 7)) == 1.0)


def test_periodic_second_eigenvalue_is_double():
    p = s1.string_eigenpair("periodic", 2)
    assert p.eigenvalue == 1 and p.multiplicity == 2
    assert {(m.kind, m.freq) for m in p.modes} == {("sin", 1), ("cos", 1)}
    assert s1.string_eigenpair("periodic", 1).multiplicity == 1


@pytest.mark.parametrize("bc", s1.BCS)
def test_eigenfunctions_solve_their_problem(bc):
    x = np.linspace(0, 2 * math.pi if bc == "periodic" else math.pi, 801)
    h = x[1] - x[0]
    for n in range(1, 7):
        p = s1.string_eigenpair(bc, n)
        for m in p.modes:
            u = m(x)
            upp = (u[2:] - 2 * u[1:-1] + u[:-2]) / h**2
            assert np.max(np.abs(-upp - p.eigenvalue * u[1:-1])) < 1e-3 * max(1, p.eigenvalue**2)
            if bc == "dirichlet":
                assert abs(u[0]) < 1e-12 and abs(u[-1]) < 1e-12
            elif bc == "periodic":
                assert abs(u[0] - u[-1]) < 1e-12


def test_eigenpair_errors():
    with pytest.raises(DomainError):
        s1.string_eigenpair("dirichlet", 0)
    with pytest.raises(DomainError):
        s1.string_eigenpair("robin", 1)


# expansions -------------------------------------------------------------------


def test_sin2x_expansion():
    e = s1.chebyshev_expand(2, "dirichlet")
    assert e.sin_factor
    np.testing.assert_allclose(e.coefficients, [0.0, 2.0], atol=1e-15)


def test_sin_x_expansion_is_trivial():
    e = s1.chebyshev_expand(1, "dirichlet")
    np.testing.assert_allclose(e.coefficients, [1.0])


def test_neumann_cos4x_expansion():
    e = s1.chebyshev_expand(5, "neumann")
    x = np.linspace(0, math.pi, 1000)
    assert np.max(np.abs(e(x) - np.cos(4 * x))) <= 1e-12
    # cos 4x = 8c^4 - 8c^2 + 1
    np.testing.assert_allclose(e.coefficients, [1, 0, -8, 0, 8], atol=1e-12)


@pytest.mark.parametrize("n", range(1, 13))
def test_expansion_consistency(n):
    x = np.linspace(0, math.pi, 997)
    d = s1.chebyshev_expand(n, "dirichlet")
    assert d.degree == n - 1
    assert np.max(np.abs(d(x) - np.sin(n * x))) <= 1e-12 * max(1, 2 ** (n - 8))
    if n >= 2:
        nm = s1.chebyshev_expand(n, "neumann")
        assert nm.degree == n - 1
        assert np.max(np.abs(nm(x) - np.cos((n - 1) * x))) <= 1e-12 * max(1, 2 ** (n - 8))


def test_expansion_domain_errors():
    with pytest.raises(DomainError):
        s1.chebyshev_expand(0, "dirichlet")
    with pytest.raises(DomainError):
        s1.chebyshev_expand(1, "neumann")


# node counting ----------------------------------------------------------------


@pytest.mark.parametrize(
    "bc, coeffs, nodes",
    [
        ("dirichlet", (1, 1), 1),
        ("neumann", (2, 1), 0),
        ("dirichlet", (0, 0, 0, 0, 1), 4),
        ("neumann", (0, 0, 1), 2),
        ("periodic", (0, 0, 1), 1),  # sin x: interior zero at pi only
        ("periodic", (0, 1, 0), 2),  # cos x: pi/2 and 3 pi/2
        ("periodic", (0, 0, 0, 0, 1), 3),  # sin 2x
    ],
)
def test_node_examples(bc, coeffs, nodes):
    spec = CombinationSpec(bc, coeffs)
    assert s1.count_combination_nodes(spec) == nodes
    assert sampled_nodes(spec) == nodes


def test_touching_zero_is_not_a_node():
    # 1 + cos x stays positive on (0, pi)
    assert s1.count_combination_nodes(CombinationSpec("neumann", (1, 1))) == 0
    # cos^2 x = (1 + cos 2x)/2 touches zero at pi/2
    assert s1.count_combination_nodes(CombinationSpec("neumann", (0.5, 0.0, 0.5))) == 0
    # sin x cos^2 x = (sin x + sin 3x)/4 also only touches zero at pi/2
    assert s1.count_combination_nodes(CombinationSpec("dirichlet", (0.25, 0.0, 0.25))) == 0
    # sin 2x + sin 3x + sin 4x = sin 3x (1 + 2 cos x): node at pi/3, touching zero at 2pi/3
    spec = CombinationSpec("dirichlet", (0.0, 1.0, 1.0, 1.0))
    assert s1.count_combination_nodes(spec) == 1
    assert sampled_nodes(spec, 20_000) == 1


def test_zero_combination_rejected():
    with pytest.raises(DomainError):
        CombinationSpec("dirichlet", (0.0, 0.0))


coeff_lists = st.lists(st.floats(-1, 1, allow_nan=False), min_size=1, max_size=8).filter(
    lambda c: max(abs(v) for v in c) > 1e-3
)


@given(coeff_lists, st.sampled_from(["dirichlet", "neumann"]))
@settings(max_examples=150, deadline=None)
def test_exact_count_matches_dense_sampling(coeffs, bc):
    spec = CombinationSpec(bc, tuple(coeffs))
    exact = s1.count_combination_nodes(spec)
    assert exact <= len(coeffs) - 1
    # dense sampling can only miss sign changes, never invent them
    assert sampled_nodes(spec, 20_000) <= exact


def test_exact_count_agrees_with_sampling_on_random_draws():
    rng = np.random.default_rng(7)
    for bc in s1.BCS:
        for n in (2, 4, 7):
            length = s1.combination_length(bc, n)
            for c in s1.random_coefficients(rng, 40, length):
                spec = CombinationSpec(bc, tuple(c))
                exact = s1.count_combination_nodes(spec)
                assert exact == sampled_nodes(spec), (bc, c)


def test_batch_counts_match_scalar_path():
    rng = np.random.default_rng(3)
    for bc in s1.BCS:
        length = s1.combination_length(bc, 5)
        coeffs = s1.random_coefficients(rng, 200, length)
        batch = s1._batch_counts(bc, coeffs)
        scalar = [s1.count_combination_nodes(CombinationSpec(bc, tuple(c))) for c in coeffs]
        assert list(batch) == scalar


def test_random_coefficients_uniform_and_nonzero():
    c = s1.random_coefficients(np.random.default_rng(0), 1000, 4)
    assert c.shape == (1000, 4)
    assert np.all(np.abs(c) <= 1) and np.all(np.any(c != 0, axis=1))


# Herrmann scans ---------------------------------------------------------------


def test_herrmann_dirichlet_example():
    rep = s1.herrmann_scan("dirichlet", 4, 10_000, seed=11)
    assert rep.passed and rep.results["max_nodes"] <= 3
    assert rep.config["seed"] == 11


def test_herrmann_periodic_example():
    rep = s1.herrmann_scan("periodic", 3, 10_000, seed=5)
    assert rep.passed and rep.results["max_nodes"] <= 4


def test_herrmann_neumann_constant():
    rep = s1.herrmann_scan("neumann", 1, 10, seed=0)
    assert rep.results["max_nodes"] == 0


@pytest.mark.parametrize("bc", s1.BCS)
def test_herrmann_bound_all_n(bc):
    for n in range(1, 13):
        rep = s1.herrmann_scan(bc, n, 2000, seed=100 + n)
        assert rep.passed, rep.verdicts
        assert rep.results["max_nodes"] <= s1.herrmann_bound(bc, n)


def test_herrmann_scan_is_deterministic():
    a = s1.herrmann_scan("neumann", 6, 500, seed=9).to_json(timestamps=False)
    b = s1.herrmann_scan("neumann", 6, 500, seed=9).to_json(timestamps=False)
    assert a == b


def test_herrmann_scan_errors():
    with pytest.raises(DomainError):
        s1.herrmann_scan("robin", 2, 10)
    with pytest.raises(DomainError):
        s1.herrmann_scan("dirichlet", 0, 10)


# thresholds -------------------------------------------------------------------


@pytest.mark.parametrize("bc, t", [("dirichlet", 2.0), ("neumann", 1.0)])
def test_threshold_sharpness(bc, t):
    rep = s1.threshold_sweep(bc, step=1e-3)
    assert rep.passed
    assert rep.results["threshold"] == t
    # direct spot checks on either side
    assert s1.count_combination_nodes(CombinationSpec(bc, (t - 1e-3, 1.0))) == 1
    assert s1.count_combination_nodes(CombinationSpec(bc, (t, 1.0))) == 0
    assert s1.count_combination_nodes(CombinationSpec(bc, (t + 1e-3, 1.0))) == 0


def test_threshold_without_second_term():
    # C2 = 0: sin x alone, resp. a constant, has no node
    assert s1.count_combination_nodes(CombinationSpec("dirichlet", (1.0, 0.0))) == 0
    assert s1.count_combination_nodes(CombinationSpec("neumann", (1.0, 0.0))) == 0


# Sturm-Liouville --------------------------------------------------------------


def test_sl_free_string():
    pairs = s1.solve_sl(SLProblem(lambda x: np.zeros_like(x), math.pi, 2000), 3, check_positive=False)
    for p, ref in zip(pairs, (1, 4, 9)):
        assert abs(p.eigenvalue - ref) <= 0.005 * ref


def test_sl_constant_shift():
    base = s1.solve_sl(SLProblem(lambda x: np.zeros_like(x), 2.0, 1000), 5, check_positive=False)
    shifted = s1.solve_sl(SLProblem(lambda x: np.full_like(x, 3.5), 2.0, 1000), 5)
    for a, b in zip(base, shifted):
        assert abs(b.eigenvalue - a.eigenvalue - 3.5) < 1e-9


def test_sl_quadratic_richardson():
    q = lambda x: 1 + x**2
    coarse = s1.solve_sl(SLProblem(q, 1.0, 999), 2)
    fine = s1.solve_sl(SLProblem(q, 1.0, 3999), 2)
    finer = s1.solve_sl(SLProblem(q, 1.0, 1999), 2)
    for c, m, f in zip(coarse, finer, fine):
        ex = s1.richardson(m.eigenvalue, f.eigenvalue)
        assert abs(ex - s1.richardson(c.eigenvalue, m.eigenvalue)) < 1e-6 * ex
        assert abs(f.eigenvalue - ex) < 1e-5 * ex


@pytest.mark.parametrize("q", [lambda x: 1 + x**2, lambda x: 2 + np.cos(5 * x), lambda x: np.exp(x)])
def test_sturm_oscillation(q):
    pairs = s1.solve_sl(SLProblem(q, 1.5, 1500), 8)
    lam = [p.eigenvalue for p in pairs]
    assert np.all(np.diff(lam) > 0)
    for p in pairs:
        assert s1.sign_changes(p.eigenfunction[1]) == p.index - 1


def test_sl_resolution_flag():
    # 100 points cannot separate eigenvalues near the top of the discrete spectrum
    with pytest.raises(ResolutionError):
        s1.solve_sl(SLProblem(lambda x: np.ones_like(x), 1.0, 100), 90)


def test_sl_preconditions():
    with pytest.raises(DomainError):
        SLProblem(lambda x: x, 1.0, 50)
    with pytest.raises(DomainError):
        SLProblem(lambda x: x, -1.0)
    with pytest.raises(DomainError):
        s1.solve_sl(SLProblem(lambda x: -np.ones_like(x), 1.0), 2)


def test_sl_experiment_report():
    rep = s1.sl_experiment("cosine", 1.0, 6, 1000)
    assert rep.passed
    assert rep.verdict("herrmann_bound_for_sl").status == "OBSERVED"
