import numpy as np
import pytest

import mtikh


def scalar_problem():
    return mtikh.Problem(np.array([[1.0]]), np.array([1.0]), 0.5, u_true=np.array([1.0]))


def test_scalar_quadratic_closed_form():
    p = scalar_problem()
    sol = mtikh.solve(p, "quad-quad", (0.5, 0.5))
    # (1 + eta1 + eta2) u = 1
    assert sol.u[0] == pytest.approx(0.5, abs=1e-12)
    assert sol.phi == pytest.approx(0.125, abs=1e-12)


def test_scalar_broyden_hits_balanced_point():
    res = mtikh.select_broyden(scalar_problem(), "quad-quad", tol=1e-10)
    assert res.converged
    assert res.eta[0] == pytest.approx(0.5, abs=1e-6)
    assert res.eta[1] == pytest.approx(0.5, abs=1e-6)
    assert len(res.trace) == res.iterations + 1


def test_value_function_matches_objective():
    p = mtikh.make_test_problem("ex42", 5e-3, seed=3, n=40)
    eta = (1e-3, 1e-4)
    sol = mtikh.solve(p, "elastic-net", eta)
    F = mtikh.value_function(p, "elastic-net", eta)
    assert F == pytest.approx(sol.phi + eta[0] * sol.psi[0] + eta[1] * sol.psi[1], rel=1e-8)


def test_ex41_selection_and_oracle():
    p = mtikh.make_test_problem("ex41", 5e-2, seed=1)
    model = mtikh.default_model("ex41", p)
    assert model == "h1-tv"
    res = mtikh.select_broyden(p, model)
    assert res.converged
    T = mtikh.residual_bdp(p, model, res.eta)
    # converged means |T| <= tol * delta^2 / 2; the recomputation uses the looser default inner tolerance
    assert np.linalg.norm(T) <= 1e-4 * 0.5 * p.delta**2
    err = mtikh.relative_error(res.solution.u, p.u_true)
    assert 0 < err < 0.5
    (eta_opt, e_opt) = mtikh.oracle_grid(p, model, 1e-8, 1e0, 5)
    assert min(eta_opt) >= 1e-8 and max(eta_opt) <= 1.0
    assert 0 < e_opt < 1.0


def test_errors_map_to_python_exceptions():
    with pytest.raises(ValueError):
        mtikh.make_test_problem("ex99", 1e-2)
    with pytest.raises(ValueError):
        mtikh.solve(scalar_problem(), "quad-quad", (-1.0, 1.0))
    with pytest.raises(mtikh.MissingTruth):
        p = mtikh.Problem(np.eye(2), np.ones(2), 0.1)
        mtikh.oracle_grid(p, "quad-quad", 1e-2, 1e0, 3)
