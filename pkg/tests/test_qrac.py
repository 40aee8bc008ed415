import itertools
import math

import numpy as np
import pytest

from qrelax import qrac

ALL = list(itertools.product((0, 1), repeat=3))


def test_success_probability_value():
    assert qrac.SUCCESS_PROBABILITY == pytest.approx(0.788675, abs=1e-6)
    assert math.cos(qrac.THETA) ** 2 == pytest.approx(qrac.SUCCESS_PROBABILITY)


@pytest.mark.parametrize("bits", ALL)
def test_statevector_matches_density(bits):
    st = qrac.encode(bits)
    assert np.linalg.norm(st.statevector) == pytest.approx(1.0)
    assert np.allclose(np.outer(st.statevector, st.statevector.conj()), st.density, atol=1e-12)
    assert st.statevector[0].imag == 0 and st.statevector[0].real >= 0


@pytest.mark.parametrize("bits", ALL)
def test_bloch_vector_signs(bits):
    r = qrac.encode(bits).bloch
    assert np.allclose(r, [(-1) ** b / math.sqrt(3) for b in bits])
    assert np.linalg.norm(r) == pytest.approx(1.0)


@pytest.mark.parametrize("bits", ALL)
def test_every_bit_decodes_with_success_probability(bits):
    st = qrac.encode(bits)
    for axis, b in zip("XYZ", bits):
        assert qrac.decode_probability(st, axis, b) == pytest.approx(qrac.SUCCESS_PROBABILITY)
        assert qrac.decode_probability(st.density, axis, 1 - b) == pytest.approx(1 - qrac.SUCCESS_PROBABILITY)


def test_gram_matrix_of_code_states():
    vecs = np.column_stack([qrac.statevector(b) for b in ALL])
    gram = np.abs(vecs.conj().T @ vecs) ** 2
    for i, a in enumerate(ALL):
        for j, b in enumerate(ALL):
            d = sum(x != y for x, y in zip(a, b))
            # |<a|b>|^2 = (1 + r_a . r_b) / 2 with r_a . r_b = (3 - 2d) / 3
            assert gram[i, j] == pytest.approx((1 + (3 - 2 * d) / 3) / 2, abs=1e-12)


@pytest.mark.parametrize("axis", "XYZ")
def test_povm_is_complete_and_positive(axis):
    e0, e1 = qrac.povm(axis).effects
    assert np.allclose(e0 + e1, np.eye(2))
    for e in (e0, e1):
        assert np.allclose(e, e.conj().T)
        assert np.linalg.eigvalsh(e).min() >= -1e-12


def test_magic_bases_are_orthonormal_antipodal_pairs():
    bases = qrac.magic_bases()
    assert len(bases) == 4
    assert sorted(b.label for b in bases) == [b for b in ALL if b[0] == 0]
    covered = set()
    for mb in bases:
        assert np.allclose(mb.vectors.conj().T @ mb.vectors, np.eye(2), atol=1e-12)
        for outcome in (0, 1):
            bits = mb.decode(outcome)
            covered.add(bits)
            assert np.allclose(mb.vectors[:, outcome], qrac.statevector(bits))
    assert covered == set(ALL)


def test_magic_measurement_recovers_encoded_bits_most_likely():
    for bits in ALL:
        psi = qrac.statevector(bits)
        for mb in qrac.magic_bases():
            p = np.abs(mb.vectors.conj().T @ psi) ** 2
            assert p.sum() == pytest.approx(1.0)
            if bits in (mb.label, mb.decode(1)):
                assert p[0 if bits == mb.label else 1] == pytest.approx(1.0)


def test_rejects_bad_bits():
    with pytest.raises(ValueError):
        qrac.encode((0, 1))
    with pytest.raises(ValueError):
        qrac.encode((0, 1, 2))
