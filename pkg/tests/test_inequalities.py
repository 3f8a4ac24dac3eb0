import math
from itertools import product

import numpy as np
import pytest

from nlocal import states
from nlocal.inequalities import (
    coarse_graining_consistency,
    linear_correlators,
    linear_value,
    nlocal_all,
    parity,
    symmetric_parity,
    trilocal_all,
    trilocal_correlator,
)
from nlocal.measurements import Direction
from nlocal.network import build_linear, build_nonlinear, joint_distribution, make_distribution

Z = Direction(0.0, 0.0)
ZX0 = Direction(math.pi / 4, 0.0)
ZX1 = Direction(math.pi / 4, math.pi)
PHI_PLUS = states.pure_schmidt(1 / math.sqrt(2))


def _uniform(topology, n_extreme, n_intermediate, arity):
    cells = 2**n_extreme * (2**arity) ** n_intermediate
    shape = (2,) * (2 * n_extreme) + (2**arity,) * n_intermediate
    return make_distribution(
        topology, n_extreme, n_intermediate, arity, np.full(shape, 1.0 / cells)
    )


def _constant_zero(topology, n_extreme, n_intermediate, arity):
    shape = (2,) * (2 * n_extreme) + (2**arity,) * n_intermediate
    table = np.zeros(shape)
    table[(Ellipsis,) + (0,) * (n_extreme + n_intermediate)] = 0.0
    idx = (slice(None),) * n_extreme + (0,) * (n_extreme + n_intermediate)
    table[idx] = 1.0
    return make_distribution(topology, n_extreme, n_intermediate, arity, table)


def test_parity_trilocal_convention():
    # Three-bit labels: s0 = x+y+z+1, s1 = xy+yz+xz (mod 2).
    assert parity(0, (0, 0, 0)) == 1
    assert parity(0, (1, 0, 0)) == 0
    assert parity(1, (1, 1, 0)) == 1
    assert parity(1, (1, 0, 0)) == 0
    assert parity(1, (1, 1, 1)) == 1


def test_parity_general_convention():
    # Other arities use plain elementary symmetric polynomials.
    assert parity(0, (1, 0, 0, 0)) == 1
    assert parity(0, (0, 0, 0, 0)) == 0
    assert parity(1, (1, 1, 0, 0)) == 1
    assert parity(1, (1, 1, 1, 0)) == 1  # C(3,2)=3 odd
    assert parity(3, (1, 1, 1, 1)) == 1


def test_symmetric_parity_matches_bruteforce():
    from itertools import combinations

    for arity in (2, 3, 4):
        for bits in product((0, 1), repeat=arity):
            for level in range(arity):
                brute = sum(
                    math.prod(sub) for sub in combinations(bits, level + 1)
                ) % 2
                assert symmetric_parity(level, bits) == brute


def test_parity_level_out_of_range():
    with pytest.raises(ValueError):
        symmetric_parity(3, (0, 1, 0))


def test_linear_correlators_swapped_bells():
    net = build_linear([PHI_PLUS, PHI_PLUS])
    d = joint_distribution(net, [(Z, Z), (Z, Z)])
    i_corr, j_corr = linear_correlators(d)
    assert i_corr == pytest.approx(1.0)
    assert j_corr == pytest.approx(0.0, abs=1e-12)


def test_linear_correlators_uniform():
    d = _uniform("linear", 2, 1, 2)
    i_corr, j_corr = linear_correlators(d)
    assert i_corr == pytest.approx(0.0, abs=1e-12)
    assert j_corr == pytest.approx(0.0, abs=1e-12)


def test_linear_correlators_constant_table():
    d = _constant_zero("linear", 2, 1, 2)
    i_corr, j_corr = linear_correlators(d)
    assert abs(i_corr) == pytest.approx(1.0)
    assert j_corr == pytest.approx(0.0, abs=1e-12)
    assert linear_value(i_corr, j_corr) == 1.0


def test_linear_value():
    assert linear_value(1.0, 0.0) == pytest.approx(1.0)
    assert linear_value(0.5, 0.5) == pytest.approx(math.sqrt(2.0))
    assert linear_value(0.0, 0.0) == 0.0
    with pytest.raises(ValueError):
        linear_value(1.5, 0.0)


def test_linear_canonical_settings_reach_sqrt2():
    net = build_linear([PHI_PLUS, PHI_PLUS])
    d = joint_distribution(net, [(ZX0, ZX1), (ZX0, ZX1)])
    i_corr, j_corr = linear_correlators(d)
    assert i_corr == pytest.approx(0.5)
    assert j_corr == pytest.approx(0.5)
    assert linear_value(i_corr, j_corr) == pytest.approx(math.sqrt(2.0))


def test_trilocal_correlator_uniform_and_constant():
    d = _uniform("nonlinear", 3, 2, 3)
    for m1, m2, par in product((0, 1), repeat=3):
        assert trilocal_correlator(d, m1, m2, par) == pytest.approx(0.0, abs=1e-12)
    d = _constant_zero("nonlinear", 3, 2, 3)
    # All outputs zero: h = s_m1(000) + s_m2(000); level 0 contributes 1 each.
    assert trilocal_correlator(d, 0, 0, 0) == pytest.approx(1.0)
    assert trilocal_correlator(d, 1, 1, 0) == pytest.approx(1.0)
    assert trilocal_correlator(d, 0, 1, 0) == pytest.approx(-1.0)
    assert trilocal_correlator(d, 0, 0, 1) == pytest.approx(0.0, abs=1e-12)


def test_trilocal_all_report():
    d = _constant_zero("nonlinear", 3, 2, 3)
    report = trilocal_all(d)
    assert report.family == "trilocal"
    assert len(report.lhs_values) == 16
    assert report.max_lhs == pytest.approx(1.0)
    assert not report.violated
    assert report.to_dict()["family"] == "trilocal"
    assert "max lhs" in report.to_text()


def test_trilocal_violation_for_gghz():
    sources = [states.gghz(b) for b in (0.72, 0.75, 0.70)]
    net = build_nonlinear(sources, (1, 1, 1))
    # Settings found by the optimizer; frozen here to keep the test fast.
    settings = [
        (Direction(1.0472, 0.0), Direction(2.0944, 0.0)),
        (Direction(1.0472, 0.0), Direction(2.0944, 0.0)),
        (Direction(1.0472, 0.0), Direction(2.0944, 0.0)),
    ]
    d = joint_distribution(net, settings)
    report = trilocal_all(d)
    assert report.max_lhs > 1.0  # genuine violation at finite settings
    assert report.violated


def test_nlocal_equals_trilocal_at_three_sources():
    sources = [states.gghz(b) for b in (0.72, 0.75, 0.70)]
    net = build_nonlinear(sources, (1, 1, 1))
    rng = np.random.default_rng(31)
    settings = [
        (
            Direction(rng.random() * np.pi, rng.random() * 2 * np.pi),
            Direction(rng.random() * np.pi, rng.random() * 2 * np.pi),
        )
        for _ in range(3)
    ]
    d = joint_distribution(net, settings)
    tri = trilocal_all(d)
    nlo = nlocal_all(d, 3)
    for key, val in tri.lhs_values.items():
        assert nlo.lhs_values[key] == pytest.approx(val, abs=1e-12)
    assert nlo.max_lhs == pytest.approx(tri.max_lhs, abs=1e-12)
    # Correlators agree up to the sign of each complemented level-0 factor.
    for m1, m2, i in product((0, 1), repeat=3):
        sign = (-1.0) ** ((m1 == 0) + (m2 == 0))
        assert tri.correlators[f"{m1}{m2},{i}"] == pytest.approx(
            sign * nlo.correlators[f"{m1}{m2},{i}"], abs=1e-12
        )


def test_nlocal_n4_uniform():
    d = _uniform("nonlinear", 4, 3, 4)
    report = nlocal_all(d, 4)
    assert len(report.lhs_values) == 64
    assert report.max_lhs == pytest.approx(0.0, abs=1e-12)


def test_nlocal_shape_mismatch():
    d = _uniform("nonlinear", 3, 2, 3)
    with pytest.raises(ValueError):
        nlocal_all(d, 4)
    net = build_linear([PHI_PLUS, PHI_PLUS])
    dl = joint_distribution(net, [(Z, Z), (Z, Z)])
    with pytest.raises(ValueError):
        trilocal_all(dl)
    with pytest.raises(ValueError):
        linear_correlators(_uniform("nonlinear", 3, 2, 3))


def test_output_relabel_flips_correlators():
    sources = [states.gghz(b) for b in (0.72, 0.75, 0.70)]
    net = build_nonlinear(sources, (1, 1, 1))
    settings = [(ZX0, ZX1)] * 3
    d = joint_distribution(net, settings)
    flipped_table = d.table[:, :, :, ::-1, :, :, :, :]
    d2 = make_distribution("nonlinear", 3, 2, 3, flipped_table)
    r1, r2 = trilocal_all(d), trilocal_all(d2)
    for key, val in r1.correlators.items():
        assert r2.correlators[key] == pytest.approx(-val, abs=1e-12)
    for key, val in r1.lhs_values.items():
        assert r2.lhs_values[key] == pytest.approx(val, abs=1e-12)


def test_coarse_graining_identity_quantum():
    sources = [states.gghz(0.72), states.w_state(0.5, 0.3), states.gghz(0.70)]
    net = build_nonlinear(sources, (1, 2, 1))
    d = joint_distribution(net, [(ZX0, ZX1)] * 3)
    assert coarse_graining_consistency(d) < 1e-12


def test_coarse_graining_identity_random_tables():
    rng = np.random.default_rng(41)
    for _ in range(5):
        raw = rng.random((2, 2, 2, 2, 2, 2, 8, 8))
        raw /= raw.reshape(8, -1).sum(axis=1).reshape(2, 2, 2, 1, 1, 1, 1, 1)
        d = make_distribution("nonlinear", 3, 2, 3, raw)
        assert coarse_graining_consistency(d) < 1e-12
