"""Minimal gate-level circuit IR: X/H/S/Sdg/RZ/CNOT gates, linear symbolic
rotation angles, parameter binding, CNOT folding for noise amplification,
and resource counting.

Gates in a circuit are applied to the state in list order.  RZ(phi) is
exp(-i phi Z / 2); angles may be numeric or a linear expression in named
parameters so that proportional rotation generators can share slots.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping

GATE_KINDS = ("X", "H", "S", "SDG", "RZ", "CNOT")
_ARITY = {"X": 1, "H": 1, "S": 1, "SDG": 1, "RZ": 1, "CNOT": 2}


@dataclass(frozen=True)
class AngleExpr:
    """Angle of the form const + sum_k coeff_k * theta_k."""

    terms: tuple[tuple[str, float], ...] = ()
    const: float = 0.0

    def __post_init__(self) -> None:
        names = [n for n, _ in self.terms]
        if len(set(names)) != len(names):
            raise ValueError("duplicate parameter in angle expression")

    @classmethod
    def of(cls, name: str, coeff: float = 1.0) -> "AngleExpr":
        return cls(terms=((name, float(coeff)),))

    def plus(self, name: str, coeff: float) -> "AngleExpr":
        merged = dict(self.terms)
        merged[name] = merged.get(name, 0.0) + float(coeff)
        return AngleExpr(terms=tuple(sorted(merged.items())), const=self.const)

    def parameter_names(self) -> tuple[str, ...]:
        return tuple(n for n, _ in self.terms)

    def evaluate(self, values: Mapping[str, float]) -> float:
        acc = self.const
        for name, coeff in self.terms:
            if name not in values:
                raise KeyError(f"unbound parameter {name!r}")
            acc += coeff * values[name]
        return acc

    def format(self) -> str:
        parts = [f"{coeff:+g}*{name}" for name, coeff in self.terms]
        if self.const or not parts:
            parts.append(f"{self.const:+g}")
        return "".join(parts).lstrip("+")


@dataclass(frozen=True)
class Gate:
    kind: str
    qubits: tuple[int, ...]
    angle: AngleExpr | float | None = None

    def __post_init__(self) -> None:
        if self.kind not in GATE_KINDS:
            raise ValueError(f"unknown gate kind {self.kind!r}")
        if len(self.qubits) != _ARITY[self.kind]:
            raise ValueError(f"{self.kind} takes {_ARITY[self.kind]} qubit(s)")
        if len(set(self.qubits)) != len(self.qubits):
            raise ValueError("gate qubits must be distinct")
        if any(q < 0 for q in self.qubits):
            raise ValueError("negative qubit index")
        if (self.kind == "RZ") != (self.angle is not None):
            raise ValueError("only RZ gates carry an angle")


def x(q: int) -> Gate:
    return Gate("X", (q,))


def h(q: int) -> Gate:
    return Gate("H", (q,))


def s(q: int) -> Gate:
    return Gate("S", (q,))


def sdg(q: int) -> Gate:
    return Gate("SDG", (q,))


def rz(q: int, angle: AngleExpr | float) -> Gate:
    return Gate("RZ", (q,), angle)


def cnot(control: int, target: int) -> Gate:
    return Gate("CNOT", (control, target))


@dataclass(frozen=True)
class Circuit:
    """Ordered gate list on a fixed register with named rotation parameters."""

    n_qubits: int
    gates: tuple[Gate, ...] = ()
    params: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if self.n_qubits < 1:
            raise ValueError("circuit needs at least one qubit")
        if len(set(self.params)) != len(self.params):
            raise ValueError("duplicate parameter names")
        declared = set(self.params)
        for g in self.gates:
            if any(q >= self.n_qubits for q in g.qubits):
                raise ValueError("gate qubit index out of range")
            if isinstance(g.angle, AngleExpr):
                missing = set(g.angle.parameter_names()) - declared
                if missing:
                    raise ValueError(f"undeclared parameters {sorted(missing)}")

    def is_bound(self) -> bool:
        return not any(isinstance(g.angle, AngleExpr) for g in self.gates)

    def bind(self, values: Mapping[str, float]) -> "Circuit":
        """Substitute numeric values for every parameter."""
        missing = set(self.params) - set(values)
        if missing:
            raise KeyError(f"missing bindings for {sorted(missing)}")
        bound = tuple(
            Gate(g.kind, g.qubits, g.angle.evaluate(values))
            if isinstance(g.angle, AngleExpr)
            else g
            for g in self.gates
        )
        return Circuit(self.n_qubits, bound, ())

    def dump(self) -> str:
        """One gate per line: KIND q[,q] [angle]; stable golden format."""
        lines = []
        for g in self.gates:
            entry = f"{g.kind} {','.join(str(q) for q in g.qubits)}"
            if g.angle is not None:
                entry += " " + (
                    g.angle.format() if isinstance(g.angle, AngleExpr) else repr(float(g.angle))
                )
            lines.append(entry)
        return "\n".join(lines) + ("\n" if lines else "")


@dataclass(frozen=True)
class ResourceCount:
    n_qubits: int
    n_cnots: int
    n_params: int


def count_resources(c: Circuit) -> ResourceCount:
    n_cnots = sum(1 for g in c.gates if g.kind == "CNOT")
    return ResourceCount(c.n_qubits, n_cnots, len(c.params))


def fold_cnots(c: Circuit, m: int) -> Circuit:
    """Replace every CNOT with m identical CNOTs; m odd keeps the unitary
    action unchanged while amplifying two-qubit gate noise."""
    if m < 1 or m % 2 == 0:
        raise ValueError("noise factor must be odd and positive")
    if m == 1:
        return c
    gates: list[Gate] = []
    for g in c.gates:
        gates.extend([g] * m if g.kind == "CNOT" else [g])
    return Circuit(c.n_qubits, tuple(gates), c.params)
