"""Second-quantized operators mixing fermionic modes and one boson mode.

A term is a complex coefficient times a product of fermionic ladder
operators and bosonic ladder operators, written left to right in
operator-product order.  Fermions and the boson commute, so the two
factors are stored separately.  No normal ordering is performed: the
qubit mappings are algebra homomorphisms, so products map exactly.
"""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class MixedTerm:
    coeff: complex
    fermion_ops: tuple[tuple[int, bool], ...] = ()  # (mode index, is_creation)
    boson_ops: tuple[bool, ...] = ()  # is_creation, product order

    def dagger(self) -> "MixedTerm":
        f = tuple((i, not c) for i, c in reversed(self.fermion_ops))
        b = tuple(not c for c in reversed(self.boson_ops))
        return MixedTerm(self.coeff.conjugate(), f, b)


@dataclass(frozen=True)
class MixedOperator:
    terms: tuple[MixedTerm, ...] = ()

    @classmethod
    def scalar(cls, value: complex) -> "MixedOperator":
        return cls((MixedTerm(complex(value)),))

    @classmethod
    def fermion(cls, coeff: complex, ops: tuple[tuple[int, bool], ...]) -> "MixedOperator":
        return cls((MixedTerm(complex(coeff), ops),))

    @classmethod
    def boson(cls, coeff: complex, ops: tuple[bool, ...]) -> "MixedOperator":
        return cls((MixedTerm(complex(coeff), boson_ops=ops),))

    def __add__(self, other: "MixedOperator") -> "MixedOperator":
        return MixedOperator(self.terms + other.terms)

    def __mul__(self, scalar: complex) -> "MixedOperator":
        return MixedOperator(tuple(MixedTerm(t.coeff * scalar, t.fermion_ops, t.boson_ops) for t in self.terms))

    __rmul__ = __mul__

    def dagger(self) -> "MixedOperator":
        return MixedOperator(tuple(t.dagger() for t in self.terms))

    def n_fermion_modes(self) -> int:
        return 1 + max((i for t in self.terms for i, _ in t.fermion_ops), default=-1)

    def max_boson_rank(self) -> int:
        return max((len(t.boson_ops) for t in self.terms), default=0)


def number_operator_boson() -> MixedOperator:
    """b_dagger b."""
    return MixedOperator.boson(1.0, (True, False))


def fermion_number_operator(n_modes: int) -> MixedOperator:
    acc = MixedOperator()
    for j in range(n_modes):
        acc = acc + MixedOperator.fermion(1.0, ((j, True), (j, False)))
    return acc
