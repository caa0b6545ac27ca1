"""Symplectic Pauli strings and real-weighted Pauli sums.

A string on ``n`` qubits is stored as two integer bit masks ``x`` and ``z``
plus a phase exponent ``k`` so that the operator is ``i**k`` times the tensor
product of single-qubit letters, with ``(x, z)`` per qubit mapping
``(0,0)->I, (1,0)->X, (1,1)->Y, (0,1)->Z``.  Qubit 0 is the leftmost letter
and the most significant bit of a computational-basis index, which matches
``np.kron`` ordering.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Iterator

import numpy as np

MAX_DENSE_QUBITS = 12

_LETTER_BITS = {"I": (0, 0), "X": (1, 0), "Y": (1, 1), "Z": (0, 1)}
_BITS_LETTER = {bits: letter for letter, bits in _LETTER_BITS.items()}
_PHASE_PREFIX = {"": 0, "+": 0, "i": 1, "+i": 1, "-": 2, "-i": 3}
_PHASE_TEXT = {0: "", 1: "i", 2: "-", 3: "-i"}


class DenseLimitError(ValueError):
    """Raised when a dense materialization would exceed ``MAX_DENSE_QUBITS``."""


def check_dense_limit(n_qubits: int) -> None:
    if n_qubits > MAX_DENSE_QUBITS:
        raise DenseLimitError(
            f"{n_qubits} qubits exceeds the dense limit of {MAX_DENSE_QUBITS}"
        )


def _single_qubit_phase(x1: int, z1: int, x2: int, z2: int) -> int:
    """Exponent of ``i`` picked up by ``sigma(x1,z1) @ sigma(x2,z2)``."""
    if x1 == 0 and z1 == 0:
        return 0
    if x1 == 1 and z1 == 1:
        return z2 - x2
    if x1 == 1:
        return z2 * (2 * x2 - 1)
    return x2 * (1 - 2 * z2)


@dataclass(frozen=True)
class PauliString:
    n_qubits: int
    x: int
    z: int
    phase: int = 0

    def __post_init__(self):
        if self.n_qubits < 1:
            raise ValueError("n_qubits must be positive")
        limit = 1 << self.n_qubits
        if not (0 <= self.x < limit and 0 <= self.z < limit):
            raise ValueError("bit masks do not fit in n_qubits")
        object.__setattr__(self, "phase", self.phase % 4)

    @classmethod
    def from_label(cls, label: str) -> PauliString:
        """Parse labels such as ``"XZI"``, ``"-iYY"`` or ``"+X"``."""
        label = label.strip()
        body = label.lstrip("+-i")
        prefix = label[: len(label) - len(body)]
        if prefix not in _PHASE_PREFIX:
            raise ValueError(f"bad phase prefix in {label!r}")
        if not body:
            raise ValueError(f"empty Pauli label {label!r}")
        n = len(body)
        x = z = 0
        for q, letter in enumerate(body.upper()):
            try:
                bx, bz = _LETTER_BITS[letter]
            except KeyError:
                raise ValueError(f"unknown Pauli letter {letter!r} in {label!r}") from None
            shift = n - 1 - q
            x |= bx << shift
            z |= bz << shift
        return cls(n, x, z, _PHASE_PREFIX[prefix])

    @classmethod
    def identity(cls, n_qubits: int) -> PauliString:
        return cls(n_qubits, 0, 0)

    @classmethod
    def single(cls, n_qubits: int, letters: dict[int, str]) -> PauliString:
        """Build a string from ``{qubit: letter}``, identity elsewhere."""
        chars = ["I"] * n_qubits
        for q, letter in letters.items():
            chars[q] = letter
        return cls.from_label("".join(chars))

    @property
    def letters(self) -> str:
        n = self.n_qubits
        return "".join(
            _BITS_LETTER[((self.x >> (n - 1 - q)) & 1, (self.z >> (n - 1 - q)) & 1)]
            for q in range(n)
        )

    @property
    def label(self) -> str:
        return _PHASE_TEXT[self.phase] + self.letters

    def __str__(self) -> str:
        return self.label

    @property
    def is_identity(self) -> bool:
        return self.x == 0 and self.z == 0

    @property
    def weight(self) -> int:
        return (self.x | self.z).bit_count()

    @property
    def n_y(self) -> int:
        return (self.x & self.z).bit_count()

    def without_phase(self) -> PauliString:
        return PauliString(self.n_qubits, self.x, self.z, 0)

    def commutes_with(self, other: PauliString) -> bool:
        _check_same_size(self, other)
        return ((self.x & other.z).bit_count() + (self.z & other.x).bit_count()) % 2 == 0

    def __matmul__(self, other: PauliString) -> PauliString:
        return pauli_product(self, other)

    def tensor(self, other: PauliString) -> PauliString:
        """``self ⊗ other``; ``other`` occupies the trailing qubits."""
        m = other.n_qubits
        return PauliString(
            self.n_qubits + m,
            (self.x << m) | other.x,
            (self.z << m) | other.z,
            self.phase + other.phase,
        )

    # -- action on dense arrays --------------------------------------------

    @cached_property
    def _column_values(self) -> np.ndarray:
        # P|b> = val[b] |b ^ x>
        check_dense_limit(self.n_qubits)
        b = np.arange(1 << self.n_qubits)
        signs = 1 - 2 * (np.bitwise_count(b & self.z) & 1).astype(np.int64)
        return (1j ** ((self.phase + self.n_y) % 4)) * signs.astype(complex)

    @cached_property
    def _flip(self) -> np.ndarray:
        return np.arange(1 << self.n_qubits) ^ self.x

    def apply_left(self, m: np.ndarray) -> np.ndarray:
        """Return ``P @ m`` for a vector or matrix ``m`` in O(size) time."""
        flip = self._flip
        vals = self._column_values[flip]
        if m.ndim == 1:
            return vals * m[flip]
        return vals[:, None] * m[flip]

    def apply_right(self, m: np.ndarray) -> np.ndarray:
        """Return ``m @ P``."""
        return m[:, self._flip] * self._column_values[None, :]

    def to_dense(self) -> np.ndarray:
        return pauli_to_dense(self)


def _check_same_size(a: PauliString, b: PauliString) -> None:
    if a.n_qubits != b.n_qubits:
        raise ValueError(f"qubit count mismatch: {a.n_qubits} vs {b.n_qubits}")


def pauli_product(a: PauliString, b: PauliString) -> PauliString:
    """Product ``a @ b`` with the accumulated phase."""
    _check_same_size(a, b)
    n = a.n_qubits
    k = a.phase + b.phase
    for q in range(n):
        k += _single_qubit_phase((a.x >> q) & 1, (a.z >> q) & 1, (b.x >> q) & 1, (b.z >> q) & 1)
    return PauliString(n, a.x ^ b.x, a.z ^ b.z, k)


def pauli_to_dense(p: PauliString) -> np.ndarray:
    check_dense_limit(p.n_qubits)
    d = 1 << p.n_qubits
    out = np.zeros((d, d), dtype=complex)
    cols = np.arange(d)
    out[cols ^ p.x, cols] = p._column_values
    return out


@dataclass(frozen=True)
class PauliSum:
    """Real linear combination of phase-free Pauli strings.

    Terms are merged on construction and kept sorted by ``(x, z)``.
    """

    n_qubits: int
    terms: tuple[tuple[float, PauliString], ...] = field(default=())

    def __post_init__(self):
        if self.n_qubits < 1:
            raise ValueError("n_qubits must be positive")
        merged: dict[tuple[int, int], float] = {}
        for coeff, string in self.terms:
            if string.n_qubits != self.n_qubits:
                raise ValueError("all terms must act on n_qubits qubits")
            if string.phase != 0:
                raise ValueError(f"PauliSum terms must be phase-free, got {string.label}")
            c = float(coeff)
            if not np.isfinite(c):
                raise ValueError("coefficients must be finite reals")
            key = (string.x, string.z)
            merged[key] = merged.get(key, 0.0) + c
        terms = tuple(
            (merged[key], PauliString(self.n_qubits, *key)) for key in sorted(merged)
        )
        object.__setattr__(self, "terms", terms)

    @classmethod
    def from_terms(cls, terms: Iterable[tuple[float, str | PauliString]]) -> PauliSum:
        parsed = [
            (c, PauliString.from_label(s) if isinstance(s, str) else s) for c, s in terms
        ]
        if not parsed:
            raise ValueError("cannot infer n_qubits from an empty term list")
        return cls(parsed[0][1].n_qubits, tuple(parsed))

    @classmethod
    def from_text(cls, text: str, n_qubits: int | None = None) -> PauliSum:
        """Parse one ``<coefficient> <letters>`` term per line.

        Blank lines and ``#`` comments are ignored.
        """
        terms = []
        for lineno, raw in enumerate(text.splitlines(), start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            if len(parts) != 2:
                raise ValueError(f"line {lineno}: expected '<coefficient> <letters>', got {raw!r}")
            try:
                coeff = float(parts[0])
            except ValueError:
                raise ValueError(f"line {lineno}: bad coefficient {parts[0]!r}") from None
            string = PauliString.from_label(parts[1])
            if string.phase != 0:
                raise ValueError(f"line {lineno}: letters must not carry a phase")
            terms.append((coeff, string))
        if not terms:
            if n_qubits is None:
                raise ValueError("empty Pauli sum text needs an explicit n_qubits")
            return cls(n_qubits)
        out = cls(terms[0][1].n_qubits, tuple(terms))
        if n_qubits is not None and out.n_qubits != n_qubits:
            raise ValueError(f"expected {n_qubits} qubits, text has {out.n_qubits}")
        return out

    def to_text(self) -> str:
        return "".join(f"{c!r} {s.letters}\n" for c, s in self.terms)

    def __len__(self) -> int:
        return len(self.terms)

    def __iter__(self) -> Iterator[tuple[float, PauliString]]:
        return iter(self.terms)

    def __add__(self, other: PauliSum) -> PauliSum:
        if other.n_qubits != self.n_qubits:
            raise ValueError("qubit count mismatch")
        return PauliSum(self.n_qubits, self.terms + other.terms)

    @property
    def identity_coefficient(self) -> float:
        for c, s in self.terms:
            if s.is_identity:
                return c
        return 0.0

    @property
    def is_traceless(self) -> bool:
        return self.identity_coefficient == 0.0

    def without_identity(self) -> PauliSum:
        return PauliSum(self.n_qubits, tuple((c, s) for c, s in self.terms if not s.is_identity))

    def tensor_identity(self, n_extra: int) -> PauliSum:
        """Embed as ``self ⊗ I`` on ``n_qubits + n_extra`` qubits."""
        pad = PauliString.identity(n_extra)
        return PauliSum(self.n_qubits + n_extra, tuple((c, s.tensor(pad)) for c, s in self.terms))

    def apply_left(self, m: np.ndarray) -> np.ndarray:
        out = np.zeros(m.shape, dtype=complex)
        for c, s in self.terms:
            out += c * s.apply_left(m)
        return out

    def to_dense(self) -> np.ndarray:
        return pauli_sum_to_dense(self)


def pauli_sum_to_dense(h: PauliSum) -> np.ndarray:
    check_dense_limit(h.n_qubits)
    d = 1 << h.n_qubits
    out = np.zeros((d, d), dtype=complex)
    cols = np.arange(d)
    for c, s in h.terms:
        out[cols ^ s.x, cols] += c * s._column_values
    return out
