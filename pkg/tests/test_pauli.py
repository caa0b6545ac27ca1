import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from vqos import PauliString, PauliSum, pauli_product, pauli_sum_to_dense, pauli_to_dense
from vqos.experiments import build_heisenberg_hamiltonian
from vqos.pauli import DenseLimitError, MAX_DENSE_QUBITS

from conftest import SINGLE, kron_pauli


def labels(n):
    return st.text(alphabet="IXYZ", min_size=n, max_size=n)


phased = st.integers(1, 4).flatmap(
    lambda n: st.tuples(st.just(n), st.lists(st.tuples(labels(n), st.integers(0, 3)), min_size=3, max_size=3))
)


def test_self_inverse():
    assert pauli_product(PauliString.from_label("X"), PauliString.from_label("X")) == PauliString.from_label("I")


def test_xy_is_iz():
    assert PauliString.from_label("X") @ PauliString.from_label("Y") == PauliString.from_label("iZ")


def test_two_qubit_product_phase():
    # frozen from kron(X,Z) @ kron(Y,Z) = i kron(Z,I)
    a, b = PauliString.from_label("XZ"), PauliString.from_label("YZ")
    prod = a @ b
    assert prod.letters == "ZI" and prod.phase == 1
    np.testing.assert_allclose(kron_pauli("XZ") @ kron_pauli("YZ"), 1j * kron_pauli("ZI"))


def test_product_dimension_mismatch():
    with pytest.raises(ValueError):
        PauliString.from_label("X") @ PauliString.from_label("XX")


def test_dense_single_qubit():
    np.testing.assert_array_equal(pauli_to_dense(PauliString.from_label("I")), np.eye(2))
    np.testing.assert_array_equal(pauli_to_dense(PauliString.from_label("Z")), np.diag([1, -1]))


def test_dense_xz_by_hand():
    expected = np.array([[0, 0, 1, 0], [0, 0, 0, -1], [1, 0, 0, 0], [0, -1, 0, 0]])
    np.testing.assert_array_equal(pauli_to_dense(PauliString.from_label("XZ")), expected)


def test_dense_limit():
    p = PauliString.identity(MAX_DENSE_QUBITS + 1)
    with pytest.raises(DenseLimitError):
        pauli_to_dense(p)
    with pytest.raises(DenseLimitError):
        pauli_sum_to_dense(PauliSum(MAX_DENSE_QUBITS + 1, ((1.0, p),)))


def test_label_roundtrip_with_phase():
    for label in ["XYZ", "-iXX", "iZ", "-Y"]:
        assert PauliString.from_label(label).label == label


def test_bad_letters():
    with pytest.raises(ValueError):
        PauliString.from_label("XQ")


def test_empty_sum_dense_is_zero():
    np.testing.assert_array_equal(PauliSum(2).to_dense(), np.zeros((4, 4)))


def test_half_x():
    np.testing.assert_array_equal(PauliSum.from_terms([(0.5, "X")]).to_dense(), [[0, 0.5], [0.5, 0]])


def test_duplicates_merge_and_sorted():
    h = PauliSum.from_terms([(1.0, "ZI"), (0.5, "XX"), (0.25, "ZI")])
    assert [(c, s.letters) for c, s in h] == [(1.25, "ZI"), (0.5, "XX")]
    assert [s.letters for _, s in PauliSum.from_terms([(1, "IX"), (1, "XI"), (1, "ZI")])] == ["ZI", "IX", "XI"]


def test_sum_rejects_phase_and_mixed_sizes():
    with pytest.raises(ValueError):
        PauliSum.from_terms([(1.0, "iX")])
    with pytest.raises(ValueError):
        PauliSum.from_terms([(1.0, "X"), (1.0, "XX")])


def test_heisenberg_dense_matches_definition():
    n = 3
    expected = np.zeros((8, 8), dtype=complex)

    def site_op(letter, site):
        ops = [SINGLE["I"]] * n
        ops[site] = SINGLE[letter]
        out = ops[0]
        for o in ops[1:]:
            out = np.kron(out, o)
        return out

    for j in range(n):
        expected -= 0.5 * site_op("X", j)
        for letter in "XYZ":
            expected -= 0.5 * site_op(letter, j) @ site_op(letter, (j + 1) % n)
    got = build_heisenberg_hamiltonian(n).to_dense()
    np.testing.assert_allclose(got, expected, atol=1e-15)
    assert np.trace(got) == 0


def test_text_roundtrip():
    h = PauliSum.from_terms([(-0.5, "XXI"), (0.125, "IZZ"), (1e-3, "YIY")])
    assert PauliSum.from_text(h.to_text()) == h
    parsed = PauliSum.from_text("# comment\n-0.5 XXI\n\n0.25 ZZI  # trailing\n")
    assert len(parsed) == 2 and parsed.n_qubits == 3


def test_text_errors():
    with pytest.raises(ValueError):
        PauliSum.from_text("abc XX")
    with pytest.raises(ValueError):
        PauliSum.from_text("1.0 XX extra")


def test_tensor_identity():
    h = PauliSum.from_terms([(0.3, "XZ")]).tensor_identity(2)
    assert h.terms[0][1].letters == "XZII"
    np.testing.assert_allclose(h.to_dense(), 0.3 * np.kron(kron_pauli("XZ"), np.eye(4)))


@settings(max_examples=200, deadline=None)
@given(phased)
def test_associativity(data):
    n, items = data
    a, b, c = (PauliString(n, *_bits(s), k) for s, k in items)
    assert (a @ b) @ c == a @ (b @ c)


def _bits(label):
    p = PauliString.from_label(label)
    return p.x, p.z


@settings(max_examples=150, deadline=None)
@given(st.integers(1, 4).flatmap(lambda n: st.tuples(labels(n), labels(n), st.integers(0, 3), st.integers(0, 3))))
def test_dense_product_matches_matrix_product(data):
    la, lb, ka, kb = data
    a = PauliString(len(la), *_bits(la), ka)
    b = PauliString(len(lb), *_bits(lb), kb)
    np.testing.assert_allclose(pauli_to_dense(a @ b), pauli_to_dense(a) @ pauli_to_dense(b), atol=1e-15)
    np.testing.assert_allclose(pauli_to_dense(a), (1j**ka) * kron_pauli(la), atol=1e-15)


@settings(max_examples=150, deadline=None)
@given(st.integers(1, 4).flatmap(lambda n: st.tuples(labels(n), labels(n))))
def test_commutation_matches_dense(data):
    la, lb = data
    a, b = PauliString.from_label(la), PauliString.from_label(lb)
    A, B = kron_pauli(la), kron_pauli(lb)
    commutator_zero = np.allclose(A @ B - B @ A, 0)
    anticommutator_zero = np.allclose(A @ B + B @ A, 0)
    assert commutator_zero != anticommutator_zero
    assert a.commutes_with(b) == commutator_zero


@given(st.integers(1, 5).flatmap(labels))
def test_square_and_trace(label):
    p = PauliString.from_label(label)
    assert p @ p == PauliString.identity(len(label))
    tr = np.trace(pauli_to_dense(p))
    assert tr == (2 ** len(label) if p.is_identity else 0)


@given(st.integers(1, 4).flatmap(lambda n: st.tuples(labels(n), labels(n))))
def test_apply_left_right(data):
    la, lb = data
    p = PauliString.from_label(la)
    m = np.random.default_rng(len(lb)).normal(size=(2 ** len(la),) * 2) + 0j
    np.testing.assert_allclose(p.apply_left(m), kron_pauli(la) @ m, atol=1e-14)
    np.testing.assert_allclose(p.apply_right(m), m @ kron_pauli(la), atol=1e-14)
