import numpy as np
import pytest

from ltdrbm.baselines import BaselineConfig, ltm_gibbs, majority_voting, mle_em, two_estimates
from ltdrbm.claims import binarize, from_binary_claims
from ltdrbm.discovery import ALGORITHMS, estimate
from ltdrbm.evaluation import accuracy
from ltdrbm.rbm import model_to_rbm, plausibility
from ltdrbm.synthgen import SynthConfig, generate
from conftest import random_model
from oracles import all_claim_vectors


def unanimous(n_sources=4, n_facts=6):
    return from_binary_claims([(s, f, 1) for s in range(n_sources) for f in range(n_facts)])


def rotating_majority(n_sources=7, n_attributes=21):
    # every source is in the minority on the same number of attributes
    claims = []
    for a in range(n_attributes):
        wrong = {a % n_sources, (a + 1) % n_sources}
        claims += [(s, a, 1 if s in wrong else 0) for s in range(n_sources)]
    return binarize(claims)


# ---------------------------------------------------------------- majority

def test_majority_three_to_one():
    ds = from_binary_claims([(0, 0, 1), (1, 0, 1), (2, 0, 1), (3, 0, 0)])
    assert majority_voting(ds).plausibility[0] == 0.75


def test_majority_unanimous():
    assert np.all(majority_voting(unanimous()).plausibility == 1.0)


def test_majority_tie_goes_to_lowest_value():
    ds = binarize([(0, 0, 4), (1, 0, 4), (2, 0, 9), (3, 0, 9)])
    est = majority_voting(ds)
    assert list(est.plausibility) == [0.5, 0.5]
    assert est.winners(ds)[0] == 0
    assert ds.fact_value[0] == 4


def test_majority_unclaimed_fact():
    ds = from_binary_claims([(0, 0, 1)], n_facts=2)
    est = majority_voting(ds)
    assert est.plausibility[1] == 0.5
    assert est.unclaimed[1] and not est.unclaimed[0]


# ---------------------------------------------------------------- MLE

def test_mle_first_e_step_single_source():
    seen = []
    mle_em(from_binary_claims([(0, 0, 1)]), BaselineConfig(), callback=seen.append)
    assert seen[0][0] == pytest.approx(0.8, abs=1e-12)


def test_mle_unanimous_goes_to_certainty():
    seen = []
    est, _ = mle_em(unanimous(), BaselineConfig(), callback=lambda p: seen.append(p.copy()))
    trace = np.array(seen)
    assert np.all(np.diff(trace, axis=0) >= -1e-12)
    # fpr is unidentifiable here and EM parks at tpr = fpr, p = prevalence
    assert np.all(est.plausibility > 0.99)


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_mle_e_step_is_rbm_plausibility(n, rng):
    vectors = all_claim_vectors(n)
    ds = from_binary_claims([(s, f, v[s]) for f, v in enumerate(vectors) for s in range(n)])
    for _ in range(10):
        m = random_model(rng, n)
        seen = []
        mle_em(ds, BaselineConfig(initial_model=m), callback=seen.append)
        r = model_to_rbm(m)
        expected = [plausibility(r, range(n), v) for v in vectors]
        np.testing.assert_allclose(seen[0], expected, atol=1e-12, rtol=0)


def test_mle_holds_rates_of_silent_source():
    # source 2 never claims anything that is believed false
    ds = from_binary_claims([(0, 0, 1), (1, 0, 1), (2, 0, 1)], n_sources=4)
    _, model = mle_em(ds, BaselineConfig(init_tpr=0.7, init_fpr=0.3))
    assert model.tpr[3] == pytest.approx(0.7)
    assert model.fpr[3] == pytest.approx(0.3)


# ---------------------------------------------------------------- 2-Estimates

def test_two_estimates_agreement_wins():
    ds = binarize([(s, a, 1) for s in range(4) for a in range(3)]
                  + [(4, a, 2) for a in range(3)])
    est, _ = two_estimates(ds, BaselineConfig(algorithm="2est"))
    for a, f in enumerate(est.winners(ds)):
        lo, hi = ds.attr_ptr[a], ds.attr_ptr[a + 1]
        assert est.plausibility[f] == est.plausibility[lo:hi].max()
        assert ds.fact_value[f] == 1


def test_two_estimates_single_step_is_fixed_point():
    ds, _ = generate(SynthConfig(n_sources=6, n_attributes=80, rng_seed=2))
    cfg = BaselineConfig(algorithm="2est", lambda_steps=1, max_iterations=500, tolerance=1e-12)
    est, err = two_estimates(ds, cfg)
    # one more sweep with lambda = 1 must not move the scores
    again, _ = two_estimates(ds, BaselineConfig(algorithm="2est", lambda_steps=1,
                                                max_iterations=501, tolerance=1e-12))
    np.testing.assert_allclose(est.plausibility, again.plausibility, atol=1e-9)
    assert np.all((0 <= err) & (err <= 1))


def test_two_estimates_symmetric_tie():
    ds = binarize([(0, a, 0) for a in range(5)] + [(1, a, 1) for a in range(5)])
    est, _ = two_estimates(ds, BaselineConfig(algorithm="2est"))
    for a in range(5):
        lo = ds.attr_ptr[a]
        assert est.plausibility[lo] == pytest.approx(est.plausibility[lo + 1], abs=1e-12)
    assert list(est.winners(ds)) == list(ds.attr_ptr[:-1])


def test_two_estimates_needs_categories():
    with pytest.raises(ValueError):
        two_estimates(unanimous(), BaselineConfig())


# ---------------------------------------------------------------- LTM

def test_ltm_overwhelming_prior():
    # the truth prior is per fact, so it only dominates when the source priors
    # are also too strong to learn from and carry no signal
    ds, _ = generate(SynthConfig(n_sources=5, n_attributes=40, rng_seed=4))
    cfg = BaselineConfig(init_tpr=0.5, init_fpr=0.5, init_prevalence=0.3, tpr_strength=1e9,
                         fpr_strength=1e9, gibbs_iterations=400)
    est, _ = ltm_gibbs(ds, cfg)
    assert abs(est.plausibility.mean() - 0.3) < 0.03


def test_ltm_deterministic():
    ds, _ = generate(SynthConfig(n_sources=6, n_attributes=60, rng_seed=3))
    a, ma = ltm_gibbs(ds, BaselineConfig(rng_seed=9))
    b, mb = ltm_gibbs(ds, BaselineConfig(rng_seed=9))
    c, _ = ltm_gibbs(ds, BaselineConfig(rng_seed=10))
    assert np.array_equal(a.plausibility, b.plausibility)
    assert np.array_equal(ma.tpr, mb.tpr)
    assert not np.array_equal(a.plausibility, c.plausibility)


def test_ltm_close_to_mle():
    ltm, mle = [], []
    for seed in range(10):
        ds, _ = generate(SynthConfig(n_sources=20, n_attributes=300, source_accuracy=0.8,
                                     rng_seed=500 + seed))
        ltm.append(accuracy(ltm_gibbs(ds, BaselineConfig(rng_seed=seed))[0], ds))
        mle.append(accuracy(mle_em(ds, BaselineConfig())[0], ds))
    assert abs(np.mean(ltm) - np.mean(mle)) <= 0.03


def test_config_validation():
    with pytest.raises(ValueError):
        BaselineConfig(tpr_strength=0)
    with pytest.raises(ValueError):
        BaselineConfig(lambda_steps=0)


# ---------------------------------------------------------------- shared invariants

@pytest.mark.parametrize("algorithm", ALGORITHMS)
def test_scores_in_unit_interval(algorithm, small_synthetic):
    ds, _ = small_synthetic
    est = estimate(algorithm, ds, seed=1)
    assert np.all((est.plausibility >= 0) & (est.plausibility <= 1))
    assert np.all(np.isfinite(est.plausibility))


@pytest.mark.parametrize("algorithm", ALGORITHMS)
def test_deterministic(algorithm, small_synthetic):
    ds, _ = small_synthetic
    a, b = estimate(algorithm, ds, seed=3), estimate(algorithm, ds, seed=3)
    assert np.array_equal(a.plausibility, b.plausibility)


@pytest.mark.parametrize("algorithm", ALGORITHMS)
def test_strict_majority_winner_shared(algorithm):
    ds = rotating_majority()
    expected = majority_voting(ds).winners(ds)
    assert np.array_equal(estimate(algorithm, ds, seed=0).winners(ds), expected)
