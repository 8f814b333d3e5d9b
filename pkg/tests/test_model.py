import math

import pytest
from hypothesis import given

from conftest import valid_params
from kscompete.model import (
    PARAM_KEYS,
    ModelParams,
    ParameterError,
    compute_equilibrium,
    validate_params,
)


def test_defaults_are_the_short_interval_set():
    p = ModelParams()
    assert (p.d1, p.d2, p.a1, p.a2, p.mu1, p.mu2, p.lam, p.xi, p.L) == (1, 0.1, 0.5, 0.5, 1, 1, 0.5, 0.5, 0.5)


def test_valid_defaults():
    assert validate_params(ModelParams()).ok


def test_a1_at_one_is_an_equilibrium_violation():
    res = validate_params(ModelParams(a1=1.0))
    assert res.ok_for_simulation and not res.ok
    assert [v.message for v in res.equilibrium] == ["a1 must be < 1 for positive equilibrium"]


def test_negative_d2_is_a_simulation_violation():
    res = validate_params(ModelParams(d2=-0.1))
    assert not res.ok_for_simulation
    assert "d2 must be positive" in [v.message for v in res.simulation]


def test_zero_kinetics_mode():
    p = ModelParams(mu1=0.0, mu2=0.0, lam=0.0)
    assert not validate_params(p).ok_for_simulation
    res = validate_params(p, allow_zero_kinetics=True)
    assert res.ok_for_simulation and not res.ok


@pytest.mark.parametrize(
    "a1, a2, lam, expected",
    [
        (0.0, 0.0, 1.0, (1.0, 1.0, 2.0)),
        (0.5, 0.5, 0.5, (2 / 3, 2 / 3, 8 / 3)),
        (0.5, 0.25, 1.0, (4 / 7, 6 / 7, 10 / 7)),
    ],
)
def test_equilibrium_examples(a1, a2, lam, expected):
    eq = compute_equilibrium(ModelParams(a1=a1, a2=a2, lam=lam))
    assert (eq.u_bar, eq.v_bar, eq.w_bar) == pytest.approx(expected, rel=1e-14)


def test_equilibrium_rejects_strong_competition():
    with pytest.raises(ParameterError):
        compute_equilibrium(ModelParams(a1=1.5))


@given(valid_params())
def test_equilibrium_residuals_vanish(p):
    eq = compute_equilibrium(p)
    assert max(abs(r) for r in eq.residuals(p)) <= 1e-12 * max(1.0, eq.w_bar * p.lam)
    assert eq.u_bar > 0 and eq.v_bar > 0 and eq.w_bar > 0


@given(valid_params())
def test_symmetric_competition_gives_equal_densities(p):
    p = p.with_(a2=p.a1)
    eq = compute_equilibrium(p)
    assert eq.u_bar == eq.v_bar


def test_dict_round_trip_uses_lambda_key():
    p = ModelParams(lam=0.7, chi=3.0)
    d = p.to_dict()
    assert set(d) == set(PARAM_KEYS) and d["lambda"] == 0.7
    assert ModelParams.from_dict(d) == p
    assert p.with_(**{"lambda": 2.0}).lam == 2.0


def test_nonfinite_values_rejected():
    res = validate_params(ModelParams(chi=math.nan))
    assert not res.ok_for_simulation
