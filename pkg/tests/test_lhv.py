import numpy as np
import pytest

from nlocal.inequalities import (
    linear_correlators,
    linear_value,
    nlocal_all,
    trilocal_all,
)
from nlocal.lhv import (
    ClassicalModel,
    certify,
    constant_model,
    mix_distributions,
    model_distribution,
    sample_model,
    structured_mixture,
)
from nlocal.network import check_no_signaling


def test_sample_model_determinism():
    m1 = sample_model("linear", 2, alphabet=2, seed=7)
    m2 = sample_model("linear", 2, alphabet=2, seed=7)
    assert np.array_equal(m1.source_dists, m2.source_dists)
    assert np.array_equal(m1.extreme_responses, m2.extreme_responses)
    assert np.array_equal(m1.intermediate_responses, m2.intermediate_responses)
    m3 = sample_model("linear", 2, alphabet=2, seed=8)
    assert not np.array_equal(m1.source_dists, m3.source_dists)


def test_sample_model_shapes_and_limits():
    m = sample_model("trilocal", 3, alphabet=4, seed=0)
    assert m.topology == "nonlinear" and m.n == 3
    assert m.source_dists.shape == (3, 4)
    assert m.extreme_responses.shape == (3, 2, 4)
    assert m.intermediate_responses.shape == (2, 4, 4, 4)
    assert np.allclose(m.source_dists.sum(axis=1), 1.0)
    with pytest.raises(ValueError):
        sample_model("linear", 6, seed=0)
    with pytest.raises(ValueError):
        sample_model("linear", 2, alphabet=9, seed=0)
    with pytest.raises(ValueError):
        sample_model("ring", 3, seed=0)


def test_constant_model_distribution():
    m = constant_model("trilocal", 3)
    d = model_distribution(m)
    for x in d.input_combinations():
        assert d.prob(x, (0, 0, 0), (0, 0)) == 1.0
    # Saturation is exact: |I_{00,0}| = 1 paired with a zero input-parity term.
    report = trilocal_all(d)
    assert report.lhs_values["00|00"] == 1.0
    assert report.max_lhs == 1.0
    assert not report.violated


def test_constant_model_linear_saturation():
    d = model_distribution(constant_model("linear", 2))
    i_corr, j_corr = linear_correlators(d)
    assert abs(i_corr) == 1.0
    assert j_corr == 0.0
    assert linear_value(i_corr, j_corr) == 1.0


def test_model_distribution_normalized_no_signaling():
    for topology, n in (("linear", 2), ("linear", 3), ("trilocal", 3)):
        for seed in range(5):
            d = model_distribution(sample_model(topology, n, alphabet=4, seed=seed))
            report = check_no_signaling(d)
            assert report.ok, (topology, n, seed, report)


def test_degenerate_alphabet_is_constant_output():
    m = sample_model("trilocal", 3, alphabet=1, seed=5)
    d = model_distribution(m)
    for x in d.input_combinations():
        assert np.max(d.table[x]) == pytest.approx(1.0)


def test_trilocal_models_respect_bound():
    worst = 0.0
    for seed in range(200):
        d = model_distribution(sample_model("trilocal", 3, alphabet=4, seed=seed))
        worst = max(worst, trilocal_all(d).max_lhs)
    assert worst <= 1.0 + 1e-9


def test_linear_models_respect_inequality():
    worst = 0.0
    for seed in range(200):
        d = model_distribution(sample_model("linear", 3, alphabet=4, seed=seed))
        worst = max(worst, linear_value(*linear_correlators(d)))
    assert worst <= 1.0 + 1e-9


def test_nlocal4_models_respect_bound():
    worst = 0.0
    for seed in range(50):
        d = model_distribution(sample_model("nonlinear", 4, alphabet=3, seed=seed))
        worst = max(worst, nlocal_all(d, 4).max_lhs)
    assert worst <= 1.0 + 1e-9


def test_mix_distributions_weights():
    d1 = model_distribution(sample_model("trilocal", 3, seed=1))
    d2 = model_distribution(sample_model("trilocal", 3, seed=2))
    mixed = mix_distributions([d1, d2], [0.25, 0.75])
    assert np.allclose(mixed.table, 0.25 * d1.table + 0.75 * d2.table)
    with pytest.raises(ValueError):
        mix_distributions([d1, d2], [0.5, 0.6])
    with pytest.raises(ValueError):
        mix_distributions([d1], [0.5, 0.5])


def test_structured_mixture_stays_in_model_class():
    for seed in range(40):
        d = structured_mixture("trilocal", 3, alphabet=3, seed=seed)
        assert check_no_signaling(d).ok
        assert trilocal_all(d).max_lhs <= 1.0 + 1e-9
    for seed in range(20):
        d = structured_mixture("linear", 2, alphabet=3, seed=seed)
        assert linear_value(*linear_correlators(d)) <= 1.0 + 1e-9


def test_certify_reports():
    report = certify("trilocal", 3, trials=60, seed=3, alphabet=3)
    assert report.ok
    assert report.failures == ()
    assert 0.0 < report.max_lhs <= 1.0 + 1e-9
    assert report.trials == 60
    data = report.to_dict()
    assert data["topology"] == "nonlinear"
    assert data["failures"] == []


def test_certify_linear():
    report = certify("linear", 2, trials=60, seed=4, alphabet=4)
    assert report.ok
    assert report.max_lhs <= 1.0 + 1e-9


def test_certify_validation():
    with pytest.raises(ValueError):
        certify("trilocal", 3, trials=0)


def test_model_to_dict_roundtrippable():
    m = sample_model("linear", 2, alphabet=2, seed=9)
    data = m.to_dict()
    clone = ClassicalModel(
        topology=data["topology"],
        n=data["n"],
        alphabet=data["alphabet"],
        source_dists=np.array(data["source_dists"]),
        extreme_responses=np.array(data["extreme_responses"]),
        intermediate_responses=np.array(data["intermediate_responses"]),
    )
    assert np.allclose(
        model_distribution(m).table, model_distribution(clone).table
    )
