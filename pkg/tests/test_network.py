import io
import math

import numpy as np
import pytest

from nlocal import linalg, states
from nlocal.measurements import Direction
from nlocal.network import (
    RegisterSizeError,
    build_linear,
    build_nonlinear,
    check_no_signaling,
    joint_distribution,
    joint_distribution_reference,
    make_distribution,
)

Z = Direction(0.0, 0.0)
X = Direction(math.pi / 2, 0.0)
ZX0 = Direction(math.pi / 4, 0.0)
ZX1 = Direction(math.pi / 4, math.pi)

PHI_PLUS = states.pure_schmidt(1 / math.sqrt(2))


def test_build_linear_validation():
    net = build_linear([PHI_PLUS, PHI_PLUS])
    assert net.n == 2 and net.n_qubits == 4 and not net.has_mixed_source
    net = build_linear([states.werner(0.5), PHI_PLUS])
    assert net.has_mixed_source
    with pytest.raises(ValueError):
        build_linear([PHI_PLUS])
    with pytest.raises(ValueError):
        build_linear([PHI_PLUS] * 6)
    with pytest.raises(ValueError):
        build_linear([np.array([1.0, 1.0, 0.0, 0.0]), PHI_PLUS])
    with pytest.raises(ValueError):
        build_linear([np.eye(4), PHI_PLUS])


def test_build_nonlinear_validation():
    g = states.gghz(0.5)
    net = build_nonlinear([g, g, g], (1, 1, 1))
    assert net.n == 3 and net.n_qubits == 9
    assert net.intermediate_order == ((2, 3), (2, 3), (2, 3))
    net = build_nonlinear([g, g, g], (2, 2, 2))
    assert net.intermediate_order == ((1, 3), (1, 3), (1, 3))
    with pytest.raises(ValueError):
        build_nonlinear([g, g], (1, 1))
    with pytest.raises(ValueError):
        build_nonlinear([g, g, g], (1, 4, 1))
    with pytest.raises(ValueError):
        build_nonlinear([g, g, g], (1, 1, 1), [(2, 3), (2, 3), (1, 3)])
    custom = build_nonlinear([g, g, g], (1, 1, 1), [(3, 2), (2, 3), (2, 3)])
    assert custom.intermediate_order[0] == (3, 2)


def test_register_guard():
    # A 5-source nonlinear network would need 25 qubits.
    g5 = np.zeros(32)
    g5[0] = 1.0
    with pytest.raises(RegisterSizeError):
        build_nonlinear([g5] * 5, (1, 1, 1, 1, 1))


def test_entanglement_swapping_marginals():
    # Two maximally entangled pairs: every Bell outcome has probability 1/4
    # regardless of the extreme inputs.
    net = build_linear([PHI_PLUS, PHI_PLUS])
    d = joint_distribution(net, [(Z, X), (Z, X)])
    for x in d.input_combinations():
        marginal = d.table[x].sum(axis=(0, 1))
        assert np.allclose(marginal, 0.25)


def test_swapping_correlates_extremes():
    # Conditioned on the Bell outcome, z-measured extremes agree up to the
    # zz-parity bit of the label.
    net = build_linear([PHI_PLUS, PHI_PLUS])
    d = joint_distribution(net, [(Z, Z), (Z, Z)])
    for label in range(4):
        b0 = label >> 1
        for a1 in (0, 1):
            for a2 in (0, 1):
                p = d.prob((0, 0), (a1, a2), (label,))
                if (a1 + a2) % 2 == b0:
                    assert p == pytest.approx(1 / 8)
                else:
                    assert p == pytest.approx(0.0, abs=1e-12)


def test_normalization_every_input():
    net = build_nonlinear([states.gghz(0.6)] * 3, (1, 2, 3))
    d = joint_distribution(net, [(Z, X)] * 3)
    assert d.table.shape == (2, 2, 2, 2, 2, 2, 8, 8)
    sums = d.table.reshape(8, -1).sum(axis=1)
    assert np.allclose(sums, 1.0, atol=1e-9)
    # 2^3 inputs x (2^3 * 8^2) outcomes = 4096 cells.
    assert d.table.size == 4096


def test_reference_agreement_linear_pure():
    rng = np.random.default_rng(21)
    for _ in range(3):
        sources = [states.pure_schmidt(rng.random()) for _ in range(3)]
        settings = [
            (
                Direction(rng.random() * np.pi, rng.random() * 2 * np.pi),
                Direction(rng.random() * np.pi, rng.random() * 2 * np.pi),
            )
            for _ in range(2)
        ]
        net = build_linear(sources)
        fast = joint_distribution(net, settings)
        ref = joint_distribution_reference(net, settings)
        assert np.max(np.abs(fast.table - ref.table)) < 1e-12


def test_reference_agreement_linear_mixed():
    rng = np.random.default_rng(22)
    sources = [states.werner(0.7), states.random_two_qubit_dm(rng)]
    settings = [(ZX0, ZX1), (X, Z)]
    net = build_linear(sources)
    fast = joint_distribution(net, settings)
    ref = joint_distribution_reference(net, settings)
    assert np.max(np.abs(fast.table - ref.table)) < 1e-12


def test_reference_agreement_nonlinear():
    rng = np.random.default_rng(23)
    sources = [
        states.gghz(0.7),
        states.w_state(0.6, 0.4),
        states.biseparable("13|2", 0.8, 0.6),
    ]
    settings = [
        (
            Direction(rng.random() * np.pi, rng.random() * 2 * np.pi),
            Direction(rng.random() * np.pi, rng.random() * 2 * np.pi),
        )
        for _ in range(3)
    ]
    net = build_nonlinear(sources, (2, 1, 3))
    fast = joint_distribution(net, settings)
    ref = joint_distribution_reference(net, settings)
    assert np.max(np.abs(fast.table - ref.table)) < 1e-12


def test_mixed_and_pure_paths_agree():
    # Promoting pure sources to density matrices must not change anything.
    sources = [states.pure_schmidt(0.8), states.pure_schmidt(0.6)]
    settings = [(ZX0, ZX1), (ZX0, ZX1)]
    pure = joint_distribution(build_linear(sources), settings)
    as_dm = [linalg.projector(s) for s in sources]
    mixed = joint_distribution(build_linear(as_dm), settings)
    assert np.max(np.abs(pure.table - mixed.table)) < 1e-12


def test_intermediate_swap_invariance():
    # Swapping the two qubits an intermediate holds, together with the
    # matching reordering of its measurement basis, leaves the outcome
    # table invariant: recompute by hand with the qubit-swapped joint
    # state and the qubit-swapped Bell vectors.
    from nlocal.measurements import bell_basis, qubit_basis

    net = build_linear([states.pure_schmidt(0.9), states.pure_schmidt(0.7)])
    settings = [(ZX0, ZX1), (X, Z)]
    d = joint_distribution(net, settings)

    psi = linalg.tensor_product(*net.sources).reshape((2,) * 4)
    psi_swapped = psi.transpose(0, 2, 1, 3).reshape(-1)
    bb = bell_basis()
    swapped_vectors = bb.vectors.reshape(4, 2, 2).transpose(0, 2, 1).reshape(4, 4)
    d2_table = np.empty_like(d.table)
    for x1 in (0, 1):
        for x2 in (0, 1):
            v1 = qubit_basis(settings[0][x1]).vectors
            v2 = qubit_basis(settings[1][x2]).vectors
            for a1 in (0, 1):
                for a2 in (0, 1):
                    for k in range(4):
                        phi = linalg.tensor_product(
                            v1[a1], swapped_vectors[k], v2[a2]
                        )
                        amp = np.vdot(phi, psi_swapped)
                        d2_table[x1, x2, a1, a2, k] = abs(amp) ** 2
    assert np.max(np.abs(d.table - d2_table)) < 1e-12


def test_check_no_signaling_quantum():
    net = build_nonlinear([states.gghz(0.72)] * 3, (1, 1, 1))
    d = joint_distribution(net, [(ZX0, ZX1)] * 3)
    report = check_no_signaling(d)
    assert report.ok
    assert report.max_deviation < 1e-12


def test_check_no_signaling_detects_signaling():
    # Hand-built table: the first party's output copies the second party's
    # input, which is blatantly signaling but normalized.
    table = np.zeros((2, 2, 2, 2, 4))
    for x1 in (0, 1):
        for x2 in (0, 1):
            table[x1, x2, x2, 0, 0] = 1.0
    d = make_distribution("linear", 2, 1, 2, table)
    report = check_no_signaling(d)
    assert not report.ok
    assert report.max_deviation == pytest.approx(1.0)


def test_make_distribution_validation():
    bad = np.full((2, 2, 2, 2, 4), -1e-6)
    with pytest.raises(ValueError):
        make_distribution("linear", 2, 1, 2, bad)
    unnormalized = np.full((2, 2, 2, 2, 4), 0.9 / 16)
    with pytest.raises(ValueError):
        make_distribution("linear", 2, 1, 2, unnormalized)
    # Tiny negatives clip to zero.
    table = np.zeros((2, 2, 2, 2, 4))
    table[..., 0, 0, 0] = 1.0 + 1e-13
    table[..., 1, 1, 3] = -1e-13
    d = make_distribution("linear", 2, 1, 2, table)
    assert d.table.min() == 0.0
    assert d.table.max() == 1.0


def test_product_sources_factorize():
    # With three product-state sources the extreme outputs are independent
    # of the intermediate labels and of each other.
    rng = np.random.default_rng(17)
    pairs = [
        [(math.cos(a), math.sin(a)) for a in rng.random(3) * math.pi]
        for _ in range(3)
    ]
    sources = [states.product3(p) for p in pairs]
    net = build_nonlinear(sources, (1, 2, 3))
    d = joint_distribution(net, [(ZX0, ZX1)] * 3)
    for x in d.input_combinations():
        block = d.table[x]
        p_a = block.sum(axis=(3, 4))
        p_b = block.sum(axis=(0, 1, 2))
        rebuilt = np.einsum("abc,de->abcde", p_a, p_b)
        assert np.max(np.abs(block - rebuilt)) < 1e-9
        # Extreme outputs factorize across parties as well.
        p1 = p_a.sum(axis=(1, 2))
        p2 = p_a.sum(axis=(0, 2))
        p3 = p_a.sum(axis=(0, 1))
        assert np.max(np.abs(p_a - np.einsum("a,b,c->abc", p1, p2, p3))) < 1e-9


def test_csv_roundtrip():
    net = build_linear([PHI_PLUS, PHI_PLUS])
    d = joint_distribution(net, [(Z, Z), (Z, Z)])
    buf = io.StringIO()
    d.to_csv(buf)
    lines = buf.getvalue().strip().splitlines()
    assert lines[0] == "x1,x2,a1,a2,b1,probability"
    assert len(lines) == 1 + 4 * 16
    total = sum(float(line.rsplit(",", 1)[1]) for line in lines[1:])
    assert total == pytest.approx(4.0)  # one unit of mass per input pair


def test_to_text_mentions_topology():
    net = build_linear([PHI_PLUS, PHI_PLUS])
    d = joint_distribution(net, [(Z, Z), (Z, Z)])
    text = d.to_text(max_rows=4)
    assert "linear" in text
    assert text.count("p=") == 4


def test_distribution_prob_accepts_bitstring_labels():
    net = build_linear([PHI_PLUS, PHI_PLUS])
    d = joint_distribution(net, [(Z, Z), (Z, Z)])
    assert d.prob((0, 0), (0, 0), ("00",)) == d.prob((0, 0), (0, 0), (0,))
