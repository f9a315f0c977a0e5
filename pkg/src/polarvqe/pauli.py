"""Pauli-string algebra on bitmasks.

A Pauli string on n qubits is stored as a pair of integer masks
(x_mask, z_mask) plus a unit phase: bit q of x_mask / z_mask says
whether the string acts with X / Z on qubit q, and a qubit where both
bits are set carries Y.  The *labelled* operator (the literal tensor
product of I/X/Y/Z characters) relates to the mask form through

    label(x, z) = i**nY(x, z) * X^x * Z^z,   nY = popcount(x & z),

so that e.g. Y = i * XZ.  Products then reduce to XOR on the masks and
a mod-4 phase exponent.

Conventions used throughout the package:

* qubit 0 is the leftmost character of a label and the most significant
  bit of a computational-basis index (big-endian), so |q0 q1 ... ⟩
  maps to index q0*2^(n-1) + ... ;
* mask bit q refers to qubit q (mask 1 = qubit 0), which is the
  opposite bit order from basis indices; helpers below convert.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

_PHASE_VALUES = (1.0 + 0.0j, 1.0j, -1.0 + 0.0j, -1.0j)

_SINGLE_QUBIT = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}

_DENSE_QUBIT_LIMIT = 12


def _popcount(v: int) -> int:
    return v.bit_count()


def index_mask(mask: int, n_qubits: int) -> int:
    """Convert a qubit-numbered mask (bit q = qubit q) to a basis-index mask.

    Basis indices are big-endian in qubit number, so qubit q sits at bit
    position n_qubits - 1 - q of an index.
    """
    out = 0
    for q in range(n_qubits):
        if mask >> q & 1:
            out |= 1 << (n_qubits - 1 - q)
    return out


@dataclass(frozen=True)
class PauliString:
    """One signed Pauli string: phase_exponent runs over i**k, k in 0..3.

    The operator represented is i**phase_exponent * label(x_mask, z_mask)
    where label() is the plain tensor product of I/X/Y/Z factors.
    """

    n_qubits: int
    x_mask: int = 0
    z_mask: int = 0
    phase_exponent: int = 0

    def __post_init__(self) -> None:
        if self.n_qubits < 1:
            raise ValueError("need at least one qubit")
        full = (1 << self.n_qubits) - 1
        if self.x_mask & ~full or self.z_mask & ~full:
            raise ValueError("mask exceeds register size")
        object.__setattr__(self, "phase_exponent", self.phase_exponent % 4)

    @classmethod
    def from_label(cls, label: str, phase_exponent: int = 0) -> "PauliString":
        x = z = 0
        for q, ch in enumerate(label):
            if ch in ("X", "Y"):
                x |= 1 << q
            if ch in ("Z", "Y"):
                z |= 1 << q
            if ch not in "IXYZ":
                raise ValueError(f"bad Pauli character {ch!r}")
        return cls(len(label), x, z, phase_exponent)

    @property
    def phase(self) -> complex:
        return _PHASE_VALUES[self.phase_exponent]

    def label(self) -> str:
        chars = []
        for q in range(self.n_qubits):
            xb = self.x_mask >> q & 1
            zb = self.z_mask >> q & 1
            chars.append("IXZY"[xb + 2 * zb])
        return "".join(chars)

    def weight(self) -> int:
        return _popcount(self.x_mask | self.z_mask)

    def commutes_with(self, other: "PauliString") -> bool:
        if self.n_qubits != other.n_qubits:
            raise ValueError("qubit-count mismatch")
        anti = _popcount(self.x_mask & other.z_mask) + _popcount(self.z_mask & other.x_mask)
        return anti % 2 == 0

    def __mul__(self, other: "PauliString") -> "PauliString":
        if self.n_qubits != other.n_qubits:
            raise ValueError("qubit-count mismatch")
        # Work in X^x Z^z form: commuting Z^za past X^xb costs
        # (-1)^{|za & xb|}; the labelled phases convert via nY counts.
        ny_a = _popcount(self.x_mask & self.z_mask)
        ny_b = _popcount(other.x_mask & other.z_mask)
        x = self.x_mask ^ other.x_mask
        z = self.z_mask ^ other.z_mask
        ny_c = _popcount(x & z)
        k = (
            self.phase_exponent
            + other.phase_exponent
            + ny_a
            + ny_b
            - ny_c
            + 2 * _popcount(self.z_mask & other.x_mask)
        )
        return PauliString(self.n_qubits, x, z, k % 4)

    def hermitian_conjugate(self) -> "PauliString":
        # labelled strings are Hermitian; only the phase conjugates
        return PauliString(self.n_qubits, self.x_mask, self.z_mask, (-self.phase_exponent) % 4)

    def to_dense(self) -> np.ndarray:
        if self.n_qubits > _DENSE_QUBIT_LIMIT:
            raise ValueError(f"dense form limited to {_DENSE_QUBIT_LIMIT} qubits")
        out = np.array([[self.phase]], dtype=complex)
        for ch in self.label():
            out = np.kron(out, _SINGLE_QUBIT[ch])
        return out


def _term_label(n_qubits: int, x: int, z: int) -> str:
    return PauliString(n_qubits, x, z).label()


class PauliSum:
    """Real- or complex-weighted sum of labelled Pauli strings.

    Terms are keyed by (x_mask, z_mask); any stored PauliString phase is
    folded into the coefficient, so the key set is canonical.  Instances
    are treated as immutable: every operation returns a new sum.
    """

    __slots__ = ("n_qubits", "_terms")

    drop_tolerance = 1e-12

    def __init__(self, n_qubits: int, terms: dict[tuple[int, int], complex] | None = None):
        if n_qubits < 1:
            raise ValueError("need at least one qubit")
        self.n_qubits = n_qubits
        clean: dict[tuple[int, int], complex] = {}
        for key, coeff in (terms or {}).items():
            c = complex(coeff)
            if abs(c) > self.drop_tolerance:
                clean[key] = c
        self._terms = clean

    # -- construction -------------------------------------------------

    @classmethod
    def zero(cls, n_qubits: int) -> "PauliSum":
        return cls(n_qubits, {})

    @classmethod
    def identity(cls, n_qubits: int, coeff: complex = 1.0) -> "PauliSum":
        return cls(n_qubits, {(0, 0): complex(coeff)})

    @classmethod
    def from_string(cls, string: PauliString, coeff: complex = 1.0) -> "PauliSum":
        return cls(string.n_qubits, {(string.x_mask, string.z_mask): coeff * string.phase})

    @classmethod
    def from_label(cls, label: str, coeff: complex = 1.0) -> "PauliSum":
        return cls.from_string(PauliString.from_label(label), coeff)

    # -- inspection ---------------------------------------------------

    def terms(self) -> dict[tuple[int, int], complex]:
        return dict(self._terms)

    def coefficient(self, x_mask: int, z_mask: int) -> complex:
        return self._terms.get((x_mask, z_mask), 0.0 + 0.0j)

    def n_terms(self) -> int:
        return len(self._terms)

    def labels(self) -> dict[str, complex]:
        return {_term_label(self.n_qubits, x, z): c for (x, z), c in sorted(self._terms.items())}

    def is_hermitian(self, tol: float = 1e-10) -> bool:
        return all(abs(c.imag) <= tol for c in self._terms.values())

    def max_abs_imag(self) -> float:
        return max((abs(c.imag) for c in self._terms.values()), default=0.0)

    def real_part(self) -> "PauliSum":
        return PauliSum(self.n_qubits, {k: complex(c.real) for k, c in self._terms.items()})

    def __len__(self) -> int:
        return len(self._terms)

    def __repr__(self) -> str:
        parts = [f"({c:+.6g}) {_term_label(self.n_qubits, x, z)}" for (x, z), c in sorted(self._terms.items())]
        return "PauliSum[" + " + ".join(parts[:8]) + (" + ..." if len(parts) > 8 else "") + "]"

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, PauliSum):
            return NotImplemented
        return self.n_qubits == other.n_qubits and (self - other).n_terms() == 0

    # -- algebra ------------------------------------------------------

    def __add__(self, other: "PauliSum") -> "PauliSum":
        if self.n_qubits != other.n_qubits:
            raise ValueError("qubit-count mismatch")
        acc = dict(self._terms)
        for key, c in other._terms.items():
            acc[key] = acc.get(key, 0.0) + c
        return PauliSum(self.n_qubits, acc)

    def __sub__(self, other: "PauliSum") -> "PauliSum":
        return self + other * (-1.0)

    def __mul__(self, scalar: complex) -> "PauliSum":
        s = complex(scalar)
        return PauliSum(self.n_qubits, {k: c * s for k, c in self._terms.items()})

    __rmul__ = __mul__

    def __matmul__(self, other: "PauliSum") -> "PauliSum":
        """Operator product, expanding term-by-term."""
        if self.n_qubits != other.n_qubits:
            raise ValueError("qubit-count mismatch")
        acc: dict[tuple[int, int], complex] = {}
        for (xa, za), ca in self._terms.items():
            ny_a = _popcount(xa & za)
            for (xb, zb), cb in other._terms.items():
                ny_b = _popcount(xb & zb)
                x, z = xa ^ xb, za ^ zb
                k = (ny_a + ny_b - _popcount(x & z) + 2 * _popcount(za & xb)) % 4
                key = (x, z)
                acc[key] = acc.get(key, 0.0) + ca * cb * _PHASE_VALUES[k]
        return PauliSum(self.n_qubits, acc)

    def hermitian_conjugate(self) -> "PauliSum":
        return PauliSum(self.n_qubits, {k: c.conjugate() for k, c in self._terms.items()})

    def commutes_with(self, other: "PauliSum", tol: float = 1e-10) -> bool:
        comm = self @ other - other @ self
        return max((abs(c) for c in comm._terms.values()), default=0.0) <= tol

    # -- dense forms ----------------------------------------------------

    def to_dense_matrix(self) -> np.ndarray:
        if self.n_qubits > _DENSE_QUBIT_LIMIT:
            raise ValueError(f"dense form limited to {_DENSE_QUBIT_LIMIT} qubits")
        dim = 1 << self.n_qubits
        out = np.zeros((dim, dim), dtype=complex)
        for (x, z), c in self._terms.items():
            out += c * PauliString(self.n_qubits, x, z).to_dense()
        return out

    # -- expectation values -------------------------------------------

    def expectation(self, state: "DenseState", hermitian_tol: float = 1e-10) -> float:
        """Term-wise ⟨state|self|state⟩ without forming the dense matrix.

        Raises for non-Hermitian observables and register-size mismatch.
        """
        if not self.is_hermitian(hermitian_tol):
            raise ValueError("observable has non-real Pauli coefficients")
        if state.n_qubits != self.n_qubits:
            raise ValueError("state/operator qubit-count mismatch")
        value = 0.0 + 0.0j
        for (x, z), c in self._terms.items():
            value += c * state.pauli_expectation(x, z)
        return float(value.real)


def format_pauli_sum(op: PauliSum) -> str:
    """Serialize one term per line as 'coeff_real coeff_imag LABEL'.

    Qubit 0 is the leftmost label character.  Round-trips exactly via
    parse_pauli_sum because floats are printed with repr precision.
    """
    lines = [f"{op.n_qubits}"]
    for (x, z), c in sorted(op.terms().items()):
        lines.append(f"{c.real!r} {c.imag!r} {_term_label(op.n_qubits, x, z)}")
    return "\n".join(lines) + "\n"


def parse_pauli_sum(text: str) -> PauliSum:
    lines = [ln for ln in (s.strip() for s in text.splitlines()) if ln and not ln.startswith("#")]
    if not lines:
        raise ValueError("empty Pauli-sum text")
    n_qubits = int(lines[0])
    acc: dict[tuple[int, int], complex] = {}
    for ln in lines[1:]:
        fields = ln.split()
        if len(fields) != 3:
            raise ValueError(f"bad term line: {ln!r}")
        re_c, im_c, label = float(fields[0]), float(fields[1]), fields[2]
        if len(label) != n_qubits:
            raise ValueError(f"label {label!r} does not match register size {n_qubits}")
        ps = PauliString.from_label(label)
        key = (ps.x_mask, ps.z_mask)
        acc[key] = acc.get(key, 0.0) + complex(re_c, im_c)
    return PauliSum(n_qubits, acc)


class DenseState:
    """A pure statevector or density matrix over the big-endian basis."""

    __slots__ = ("n_qubits", "vector", "density")

    def __init__(self, n_qubits: int, vector: np.ndarray | None, density: np.ndarray | None):
        self.n_qubits = n_qubits
        self.vector = vector
        self.density = density

    @classmethod
    def from_statevector(cls, vec: np.ndarray, atol: float = 1e-8) -> "DenseState":
        vec = np.asarray(vec, dtype=complex).ravel()
        n = int(np.log2(vec.size))
        if 1 << n != vec.size:
            raise ValueError("statevector length is not a power of two")
        if abs(np.linalg.norm(vec) - 1.0) > atol:
            raise ValueError("statevector is not normalized")
        return cls(n, vec, None)

    @classmethod
    def from_density_matrix(cls, rho: np.ndarray, atol: float = 1e-8) -> "DenseState":
        rho = np.asarray(rho, dtype=complex)
        if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
            raise ValueError("density matrix must be square")
        n = int(np.log2(rho.shape[0]))
        if 1 << n != rho.shape[0]:
            raise ValueError("density dimension is not a power of two")
        if abs(np.trace(rho) - 1.0) > atol:
            raise ValueError("density matrix trace differs from 1")
        if np.max(np.abs(rho - rho.conj().T)) > atol:
            raise ValueError("density matrix is not Hermitian")
        return cls(n, None, rho)

    @classmethod
    def from_bits(cls, bits: int, n_qubits: int) -> "DenseState":
        """Computational basis state; bit q of `bits` is qubit q."""
        vec = np.zeros(1 << n_qubits, dtype=complex)
        vec[index_mask(bits, n_qubits)] = 1.0
        return cls(n_qubits, vec, None)

    def pauli_expectation(self, x_mask: int, z_mask: int) -> complex:
        """⟨label(x,z)⟩ for this state, via index arithmetic."""
        n = self.n_qubits
        xm = index_mask(x_mask, n)
        zm = index_mask(z_mask, n)
        dim = 1 << n
        idx = np.arange(dim)
        signs = 1.0 - 2.0 * (np.bitwise_count(idx & zm) & 1)
        phase = _PHASE_VALUES[_popcount(x_mask & z_mask) % 4]
        if self.vector is not None:
            # label|i⟩ = phase * (-1)^{|i & zm|} |i ^ xm⟩
            flipped = self.vector[idx ^ xm]
            return phase * np.vdot(flipped, signs * self.vector)
        rho = self.density
        return phase * np.sum(rho[idx, idx ^ xm] * signs)
