"""Likelihood assembly and the multi-start simplex fitter."""
import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from mlphase import (
    FitConfig,
    MMLDist,
    PMMLDist,
    RandomStream,
    ValidationError,
    dist_from_json,
    fit_pmml,
    make_erlang,
    make_mixture_erlang,
    nll,
    pmml_logpdf,
    profile_shapes,
    sample_pmml,
)
from mlphase.fitting import _decode, _n_params


def _expconfig(**kw):
    base = dict(structure="exponential", fit_alpha=False, fit_nu=False)
    base.update(kw)
    return FitConfig(**base)


# ---------------------------------------------------------------------------
# negative log-likelihood


def test_nll_single_exponential_point():
    model = PMMLDist(MMLDist(1.0, make_erlang(1, 1.0)), 1.0)
    assert abs(nll(model, [1.0]) - 1.0) < 1e-12


def test_nll_additivity():
    model = PMMLDist(MMLDist(0.7, make_erlang(2, 1.5)), 1.3)
    data = np.array([0.4, 1.1, 2.7, 9.0])
    single = nll(model, data)
    double = nll(model, np.concatenate([data, data]))
    assert abs(double - 2.0 * single) < 1e-9


def test_nll_matches_logpdf_sum():
    model = PMMLDist(MMLDist(0.8, make_mixture_erlang((0.5, 0.5), (1, 2), (2.0, 0.3))), 2.0)
    data = np.geomspace(0.05, 40.0, 25)
    assert abs(nll(model, data) + pmml_logpdf(model, data).sum()) < 1e-9


def test_nll_validates_data():
    model = PMMLDist(MMLDist(0.5, make_erlang(1, 1.0)), 1.0)
    with pytest.raises(ValidationError):
        nll(model, [1.0, -2.0])
    with pytest.raises(ValidationError):
        nll(model, [np.nan])
    with pytest.raises(ValidationError):
        nll(model, [])


def test_objective_rejection_sentinel():
    # infeasible iterates (here: colliding Coxian rates) must score +inf
    # instead of raising, so the simplex can step away from them
    from mlphase.fitting import _objective

    config = FitConfig(structure="coxian", dimension=2, fit_alpha=False, fit_nu=False)
    obj = _objective(np.array([0.5, 1.5]), config)
    theta_bad = np.array([0.0, math.log(2.0), math.log(2.0)])
    assert obj(theta_bad) == np.inf
    theta_ok = np.array([0.0, math.log(1.0), math.log(2.0)])
    assert np.isfinite(obj(theta_ok))


# ---------------------------------------------------------------------------
# configuration


def test_config_validation():
    with pytest.raises(ValidationError):
        FitConfig(structure="bogus")
    with pytest.raises(ValidationError):
        FitConfig(structure="mixture_erlang", shapes=(1, 2), restarts=0)
    with pytest.raises(ValidationError):
        FitConfig(structure="exponential", convergence_tol=1e-3)
    with pytest.raises(ValidationError):
        FitConfig(structure="mixture_erlang", shapes=(0, 2))
    with pytest.raises(ValidationError):
        FitConfig(structure="coxian", dimension=0)


@settings(max_examples=80, deadline=None)
@given(
    seed=st.integers(0, 2 ** 31),
    structure=st.sampled_from(["exponential", "mixture_erlang", "coxian"]),
    fit_alpha=st.booleans(),
    fit_nu=st.booleans(),
)
def test_reparametrization_soundness(seed, structure, fit_alpha, fit_nu):
    # every unconstrained iterate must decode to a valid model
    if structure == "mixture_erlang":
        config = FitConfig(structure=structure, shapes=(2, 1), fit_alpha=fit_alpha, fit_nu=fit_nu)
    elif structure == "coxian":
        config = FitConfig(structure=structure, dimension=3, fit_alpha=fit_alpha, fit_nu=fit_nu)
    else:
        config = FitConfig(structure=structure, fit_alpha=fit_alpha, fit_nu=fit_nu)
    rng = np.random.default_rng(seed)
    theta = rng.normal(0.0, 3.0, _n_params(config))
    try:
        model = _decode(theta, config)
    except ValidationError:
        return  # legal rejection (e.g. colliding Coxian rates)
    assert 0.0 < model.alpha <= 1.0
    assert model.nu > 0.0
    assert np.all(np.diag(model.ph.T) < 0.0)
    assert abs(model.ph.pi.sum() - 1.0) < 1e-9
    if not fit_alpha:
        assert model.alpha == 1.0
    if not fit_nu:
        assert model.nu == 1.0


# ---------------------------------------------------------------------------
# fitting


def test_exponential_mle():
    data = RandomStream(900).generator.standard_exponential(10_000)
    res = fit_pmml(data, _expconfig(restarts=2), RandomStream(901))
    assert res.converged
    lam_hat = res.model.ph.params["rate"]
    assert abs(lam_hat - 1.0 / data.mean()) < 1e-6
    assert res.model.alpha == 1.0 and res.model.nu == 1.0


def test_monotone_restarts():
    truth = PMMLDist(MMLDist(0.8, make_mixture_erlang((0.6, 0.4), (2, 1), (3.0, 0.2))), 1.0)
    data = sample_pmml(truth, RandomStream(902), size=250)
    config = lambda r: FitConfig(structure="mixture_erlang", shapes=(2, 1), restarts=r,
                                 max_iterations=250)
    nlls = [fit_pmml(data, config(r), RandomStream(903)).nll for r in (1, 3, 5)]
    assert nlls[1] <= nlls[0] + 1e-9
    assert nlls[2] <= nlls[1] + 1e-9
    res = fit_pmml(data, config(3), RandomStream(903))
    assert len(res.restart_nlls) == 3
    assert abs(res.nll - min(res.restart_nlls)) < 1e-9


def test_seeded_determinism():
    truth = PMMLDist(MMLDist(0.7, make_erlang(1, 1.0)), 2.0)
    data = sample_pmml(truth, RandomStream(904), size=300)
    config = _expconfig(fit_alpha=True, fit_nu=True, restarts=2, max_iterations=250)
    a = fit_pmml(data, config, RandomStream(905))
    b = fit_pmml(data, config, RandomStream(905))
    assert a.to_json() == b.to_json()
    assert a.nll == b.nll


def test_canonical_component_order():
    truth = PMMLDist(MMLDist(0.9, make_mixture_erlang((0.5, 0.5), (1, 1), (8.0, 0.5))), 1.0)
    data = sample_pmml(truth, RandomStream(906), size=400)
    config = FitConfig(structure="mixture_erlang", shapes=(1, 1), restarts=2,
                       max_iterations=400)
    res = fit_pmml(data, config, RandomStream(907))
    rates = np.asarray(res.model.ph.params["rates"])
    assert np.all(np.diff(rates) > 0.0)


def test_consistency_at_scale():
    truth = PMMLDist(MMLDist(0.7, make_erlang(1, 2.0)), 1.5)
    config = _expconfig(fit_alpha=True, fit_nu=True, restarts=1, max_iterations=800)
    hits = 0
    for seed in range(5):
        data = sample_pmml(truth, RandomStream(910 + seed), size=100_000)
        res = fit_pmml(data, config, RandomStream(920 + seed))
        ok = (
            abs(res.model.alpha - 0.7) < 0.07
            and abs(res.model.ph.params["rate"] - 2.0) < 0.2
            and abs(res.model.nu - 1.5) < 0.15
        )
        hits += bool(res.converged and ok)
    assert hits >= 4


def test_fit_result_json_fields():
    data = RandomStream(930).generator.standard_exponential(400)
    res = fit_pmml(data, _expconfig(restarts=2), RandomStream(931))
    doc = json.loads(res.to_json())
    assert {"model", "nll", "tail_index", "tail_index_reciprocal", "restart_nlls",
            "converged", "config", "seed"} <= set(doc)
    back = dist_from_json(json.dumps(doc["model"]))
    assert abs(back.ph.params["rate"] - res.model.ph.params["rate"]) < 1e-15
    assert doc["config"]["structure"] == "exponential"
    assert abs(doc["tail_index"] * doc["tail_index_reciprocal"] - 1.0) < 1e-12


# ---------------------------------------------------------------------------
# shape profiling


def test_profile_singleton_matches_fit():
    data = RandomStream(940).generator.standard_exponential(300)
    base = FitConfig(structure="mixture_erlang", shapes=(2,), restarts=2,
                     max_iterations=400, shape_grid=((2,),))
    ranked = profile_shapes(data, base, RandomStream(941))
    assert len(ranked) == 1
    direct = fit_pmml(data, FitConfig(structure="mixture_erlang", shapes=(2,),
                                      restarts=2, max_iterations=400),
                      RandomStream(941).child(0))
    assert abs(ranked[0].nll - direct.nll) < 1e-12


def test_profile_infeasible_candidate_flagged():
    data = RandomStream(942).generator.standard_exponential(200)
    base = FitConfig(structure="mixture_erlang", shapes=(1,), restarts=1,
                     max_iterations=200, shape_grid=((1,), (70,)))
    ranked = profile_shapes(data, base, RandomStream(943))
    assert len(ranked) == 2
    good = [r for r in ranked if r.model is not None]
    bad = [r for r in ranked if r.model is None]
    assert len(good) == 1 and len(bad) == 1
    assert bad[0].error is not None and not np.isfinite(bad[0].nll)
    assert ranked[0] is good[0]  # feasible candidate ranks first


def test_profile_recovers_shape():
    # data generated from a shape-2 component: the grid should rank (2)
    # first in a majority of seeds
    truth = PMMLDist(MMLDist(0.75, make_erlang(2, 1.0)), 1.0)
    base = FitConfig(structure="mixture_erlang", shapes=(2,), restarts=1,
                     max_iterations=600, shape_grid=((1,), (2,), (3,)))
    wins = 0
    for seed in range(5):
        data = sample_pmml(truth, RandomStream(950 + seed), size=10_000)
        ranked = profile_shapes(data, base, RandomStream(960 + seed))
        shapes = ranked[0].model.ph.params["shapes"]
        wins += tuple(shapes) == (2,)
    assert wins >= 3
