"""Unitary product ansatz: excitation generator pools and gate synthesis.

The ansatz state is the ordered product of exp(theta_k G_k) applied to
the reference, with anti-Hermitian generators G_k = T_k - T_k' drawn
from five excitation classes: spin-adapted electronic singles, photon
creation, mixed singles (single excitation plus photon), paired
electronic doubles, and mixed doubles.  Alpha and beta spin channels
share one amplitude (closed-shell reference), and the mixed classes
share one amplitude across their factors.

Synthesis emits, for each generator, the standard realization of each
Pauli exponential: single-qubit basis changes, a CNOT staircase onto
the last support qubit, one RZ, and the inverse.  That realization is
exact only when the generator's Pauli terms commute pairwise.  Two
situations need more care:

* On registers with an explicit photon qubit, the photon-creation
  quadratures X and Y inside a mixed single anticommute, so the class
  is emitted as two commuting factors, (T - T')(b' + b)/2 and
  (T + T')(b' - b)/2, sharing one amplitude.  Each factor then has a
  pairwise-commuting image and synthesizes exactly.
* On the tapered two-qubit register the mixed single survives as a
  single noncommuting generator, but the ordered two-generator product
  acting on the reference has a closed form: a rotation between the
  reference and the symmetric single-excitation state, followed by a
  rotation toward the double excitation.  synthesize() recognizes that
  structure and emits an exact two-CNOT preparation (one RY, an RY
  sandwich between CNOT(0,1), and a final CNOT(1,0)), with every
  rotation angle linear in the pool parameters.

Circuits produced here satisfy, at any parameter values, state fidelity
1 (to numerical precision) against the dense matrix-exponential product
applied to the reference.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .chemistry import CavityParams, IntegralSet
from .circuits import AngleExpr, Circuit, Gate, cnot, h, rz, s, sdg, x
from .hamiltonian import EncodingPlan
from .operators import MixedOperator, MixedTerm
from .pauli import PauliSum, index_mask

_TOL = 1e-12


@dataclass(frozen=True)
class PoolEntry:
    """One generator of the product ansatz.  Entries of a shared
    excitation class (spin channels, photon quadratures) carry the same
    param name and are rotated by the same amplitude."""

    label: str
    param: str
    generator: PauliSum

    def __post_init__(self) -> None:
        if not self.label or not self.param:
            raise ValueError("pool entry needs a label and a param name")
        if not self.generator.terms():
            raise ValueError(f"pool entry {self.label} has an empty generator")
        max_real = max(abs(c.real) for c in self.generator.terms().values())
        if max_real > 1e-10:
            raise ValueError(f"pool entry {self.label} is not anti-Hermitian")


@dataclass(frozen=True)
class GeneratorPool:
    """Ordered anti-Hermitian generators over one qubit register.

    prep_mask marks the qubits the state-preparation X layer must set
    (zero when the encoding plan absorbed the reference into a sign
    flip).  dropped records excitation classes removed because they
    take tapered states out of the symmetry sector."""

    n_qubits: int
    prep_mask: int
    entries: tuple[PoolEntry, ...]
    dropped: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if self.n_qubits < 1:
            raise ValueError("pool needs at least one qubit")
        if not 0 <= self.prep_mask < (1 << self.n_qubits):
            raise ValueError("prep_mask outside the register")
        for e in self.entries:
            if e.generator.n_qubits != self.n_qubits:
                raise ValueError(f"entry {e.label} acts on a different register size")
        labels = [e.label for e in self.entries]
        if len(set(labels)) != len(labels):
            raise ValueError("duplicate entry labels")

    def labels(self) -> tuple[str, ...]:
        return tuple(e.label for e in self.entries)

    def params(self) -> tuple[str, ...]:
        return tuple(dict.fromkeys(e.param for e in self.entries))


# -- pool construction -------------------------------------------------------


def _spin_single(i: int, a: int, n: int) -> MixedOperator:
    acc = MixedOperator()
    for sigma in (0, 1):
        acc = acc + MixedOperator.fermion(1.0, ((a + sigma * n, True), (i + sigma * n, False)))
    return acc


def _pair_double(i: int, a: int, n: int) -> MixedOperator:
    return MixedOperator.fermion(1.0, ((a, True), (a + n, True), (i + n, False), (i, False)))


def _with_boson(op: MixedOperator, create: bool) -> MixedOperator:
    return MixedOperator(
        tuple(MixedTerm(t.coeff, t.fermion_ops, t.boson_ops + (create,)) for t in op.terms)
    )


def _anti(op: MixedOperator) -> MixedOperator:
    return op + (-1.0) * op.dagger()


def _mixed_quadratures(t_ferm: MixedOperator) -> tuple[MixedOperator, MixedOperator]:
    """T b' - T' b  =  (T - T')(b' + b)/2 + (T + T')(b' - b)/2.

    The two factors are separately anti-Hermitian and, unlike the sum,
    each maps to a pairwise-commuting set of Pauli terms."""
    t_minus = _anti(t_ferm)
    t_plus = t_ferm + t_ferm.dagger()
    q_x = 0.5 * (_with_boson(t_minus, True) + _with_boson(t_minus, False))
    q_y = 0.5 * (_with_boson(t_plus, True) + (-1.0) * _with_boson(t_plus, False))
    return q_x, q_y


def build_pucc_pool(ints: IntegralSet, cav: CavityParams, plan: EncodingPlan) -> GeneratorPool:
    """Map the five excitation classes onto the plan's register.

    Classes are emitted in a fixed order (singles, photon, mixed
    singles, doubles, mixed doubles) for reproducible synthesis.  Under
    a tapered plan, classes that move the reference out of the symmetry
    sector are dropped: their in-sector amplitude is zero by symmetry.
    """
    if plan.n_spatial != ints.n_spatial:
        raise ValueError("plan was built for a different orbital count")
    if plan.n_photon_max != cav.n_photon_max:
        raise ValueError("plan was built for a different photon cutoff")

    n = ints.n_spatial
    occ = list(ints.reference_occupation)
    virt = [p for p in range(n) if p not in occ]
    drop = plan.taper == "parity"
    # on the tapered two-qubit register the noncommuting mixed single is
    # kept whole; synthesize() has an exact closed form for it there
    split_mixed = plan.n_qubits > 2 or plan.taper != "parity"

    requested: list[tuple[str, str, MixedOperator]] = []
    for i in occ:
        for a in virt:
            requested.append((f"single_{i}_{a}", f"t1_{i}_{a}", _anti(_spin_single(i, a, n))))
    requested.append(("photon", "tp", _anti(MixedOperator.boson(1.0, (True,)))))
    for i in occ:
        for a in virt:
            if split_mixed:
                q_x, q_y = _mixed_quadratures(_spin_single(i, a, n))
                requested.append((f"mixed_single_{i}_{a}_x", f"tm1_{i}_{a}", q_x))
                requested.append((f"mixed_single_{i}_{a}_y", f"tm1_{i}_{a}", q_y))
            else:
                requested.append(
                    (f"mixed_single_{i}_{a}", f"tm1_{i}_{a}", _anti(_with_boson(_spin_single(i, a, n), True)))
                )
    for i in occ:
        for a in virt:
            requested.append((f"double_{i}_{a}", f"t2_{i}_{a}", _anti(_pair_double(i, a, n))))
    for i in occ:
        for a in virt:
            requested.append(
                (f"mixed_double_{i}_{a}", f"tm2_{i}_{a}", _anti(_with_boson(_pair_double(i, a, n), True)))
            )

    entries: list[PoolEntry] = []
    dropped: list[str] = []
    for label, param, op in requested:
        g = plan.map_antihermitian(op, drop_sector_breaking=drop)
        if g is None:
            dropped.append(label)
            continue
        entries.append(PoolEntry(label, param, g))
    return GeneratorPool(
        n_qubits=plan.n_qubits,
        prep_mask=plan.prep_bits,
        entries=tuple(entries),
        dropped=tuple(dropped),
    )


# -- synthesis ----------------------------------------------------------------


@dataclass(frozen=True)
class _Group:
    """Entries merged into one rotation: generator = rep, rotation
    angle = sum of ratio * theta_param over angle terms."""

    rep: PauliSum
    angle: tuple[tuple[str, float], ...]


def _merge_proportional(entries: Sequence[PoolEntry]) -> list[_Group]:
    """Merge runs of adjacent entries whose generators are proportional
    (same Pauli terms, one real ratio); exp factors of proportional
    generators combine exactly, so the merged rotation is still the
    ordered product."""
    groups: list[_Group] = []
    for e in entries:
        terms = e.generator.terms()
        if groups:
            prev = groups[-1]
            ratio = _proportionality(prev.rep.terms(), terms)
            if ratio is not None:
                merged = dict(prev.angle)
                merged[e.param] = merged.get(e.param, 0.0) + ratio
                groups[-1] = _Group(prev.rep, tuple(merged.items()))
                continue
        groups.append(_Group(e.generator, ((e.param, 1.0),)))
    return groups


def _proportionality(
    ref: dict[tuple[int, int], complex], other: dict[tuple[int, int], complex]
) -> float | None:
    if set(ref) != set(other):
        return None
    key = next(iter(ref))
    ratio = other[key] / ref[key]
    if abs(ratio.imag) > _TOL:
        return None
    for k, c in ref.items():
        if abs(other[k] - ratio * c) > _TOL * max(1.0, abs(c)):
            return None
    return float(ratio.real)


def _scaled_angle(angle: tuple[tuple[str, float], ...], factor: float, const: float = 0.0) -> AngleExpr:
    return AngleExpr(terms=tuple((p, factor * r) for p, r in angle), const=const)


def _ry(q: int, expr: AngleExpr) -> list[Gate]:
    """exp(-i expr Y/2) over the X,H,S,RZ gate set."""
    return [sdg(q), h(q), rz(q, expr), h(q), s(q)]


def _all_commute(ps: PauliSum) -> bool:
    keys = list(ps.terms().keys())
    for i in range(len(keys)):
        x1, z1 = keys[i]
        for j in range(i + 1, len(keys)):
            x2, z2 = keys[j]
            if ((x1 & z2).bit_count() + (z1 & x2).bit_count()) % 2:
                return False
    return True


def _staircase_group(group: _Group) -> list[Gate]:
    """Exact product-formula gates for exp(angle * rep) with pairwise
    commuting terms."""
    if not _all_commute(group.rep):
        raise ValueError(
            "generator terms do not commute pairwise; no exact staircase synthesis exists"
        )
    gates: list[Gate] = []
    for (xm, zm), coeff in sorted(group.rep.terms().items()):
        if xm == 0 and zm == 0:
            continue  # identity term: a global phase
        w = coeff.imag
        support = [q for q in range(group.rep.n_qubits) if (xm | zm) >> q & 1]
        pre: list[Gate] = []
        post: list[Gate] = []
        for q in support:
            xb, zb = xm >> q & 1, zm >> q & 1
            if xb and zb:  # Y
                pre += [sdg(q), h(q)]
                post = [h(q), s(q)] + post
            elif xb:  # X
                pre.append(h(q))
                post = [h(q)] + post
        chain = [cnot(support[k], support[k + 1]) for k in range(len(support) - 1)]
        gates += pre
        gates += chain
        gates.append(rz(support[-1], _scaled_angle(group.angle, -2.0 * w)))
        gates += reversed(chain)
        gates += post
    return gates


def _tapered_template(pool: GeneratorPool, groups: list[_Group]) -> list[Gate] | None:
    """Exact two-CNOT preparation for the two-qubit, two-generator pool
    shape produced by the tapered encoding.

    Writing r for the prepared reference, s+ for the symmetric single
    excitation (|r^01> + |r^10>)/sqrt(2) and f for the double
    excitation |r^11>, the pool's ordered product sends r to

        cos(ka t1) cos(kb t2) r + sin(ka t1) s+ + cos(ka t1) sin(kb t2) f

    (up to the orientation signs detected below), because the first
    generator rotates r toward s+ and the second rotates r toward f
    while leaving s+ fixed.  A CNOT(1,0) maps that family onto a
    product-angle form, so one RY on qubit 0 and a CNOT-sandwiched RY
    pair on qubit 1 prepare it exactly with angles linear in t1, t2."""
    if pool.n_qubits != 2 or len(groups) != 2:
        return None
    r0, r1 = pool.prep_mask & 1, pool.prep_mask >> 1 & 1
    if r0 != r1:
        return None
    ga = groups[0].rep.to_dense_matrix()
    gb = groups[1].rep.to_dense_matrix()
    if max(np.max(np.abs(ga.imag)), np.max(np.abs(gb.imag))) > 1e-9:
        return None
    ga, gb = ga.real, gb.real
    ridx = index_mask(pool.prep_mask, 2)
    e = np.zeros(4)
    e[ridx] = 1.0
    va = ga @ e
    vb = gb @ e
    i01, i10, ifl = ridx ^ 1, ridx ^ 2, ridx ^ 3
    ka = float(np.linalg.norm(va))
    kb = float(np.linalg.norm(vb))
    ok = (
        ka > 1e-9
        and kb > 1e-9
        and abs(va[ridx]) < 1e-9
        and abs(va[ifl]) < 1e-9
        and abs(va[i01] - va[i10]) < 1e-9
        and abs(vb[ridx]) < 1e-9
        and abs(vb[i01]) < 1e-9
        and abs(vb[i10]) < 1e-9
        # each generator closes a plane rotation through the reference,
        # and the second fixes the first's image
        and np.linalg.norm(ga @ va + ka * ka * e) < 1e-9
        and np.linalg.norm(gb @ vb + kb * kb * e) < 1e-9
        and np.linalg.norm(gb @ va) < 1e-9
    )
    if not ok:
        return None
    sig = 1.0 if va[i01] > 0 else -1.0
    tau = 1.0 if vb[ifl] > 0 else -1.0
    a1, a2 = groups[0].angle, groups[1].angle

    gates: list[Gate] = []
    if ridx == 0:
        gates += _ry(0, _scaled_angle(a1, 2.0 * sig * ka))
        gates += _ry(1, _scaled_angle(a2, tau * kb, const=math.pi / 4))
        gates.append(cnot(0, 1))
        gates += _ry(1, _scaled_angle(a2, tau * kb, const=-math.pi / 4))
        gates.append(cnot(1, 0))
    else:
        delta = math.pi / 4 if sig > 0 else -3 * math.pi / 4
        gates += [x(0), x(1)]
        gates += _ry(0, _scaled_angle(a1, 2.0 * ka, const=-math.pi))
        gates += _ry(1, _scaled_angle(a2, -tau * kb, const=-delta))
        gates.append(cnot(0, 1))
        gates += _ry(1, _scaled_angle(a2, -tau * kb, const=delta))
        gates.append(cnot(1, 0))
    return gates


def synthesize(pool: GeneratorPool, order: Sequence[str] | None = None) -> Circuit:
    """Build the ansatz circuit: reference-preparation X gates, then one
    rotation block per generator in pool order (or the given label
    order).  The circuit's statevector at bound parameters equals the
    ordered product of matrix exponentials applied to the reference."""
    if not pool.entries:
        raise ValueError("empty generator pool")
    entries = pool.entries
    if order is not None:
        by_label = {e.label: e for e in entries}
        if sorted(order) != sorted(by_label):
            raise ValueError("order must be a permutation of the pool labels")
        entries = tuple(by_label[lab] for lab in order)

    groups = _merge_proportional(entries)
    gates = _tapered_template(pool, groups)
    if gates is None:
        gates = [x(q) for q in range(pool.n_qubits) if pool.prep_mask >> q & 1]
        for group in groups:
            gates += _staircase_group(group)

    params = tuple(dict.fromkeys(e.param for e in entries))
    return Circuit(n_qubits=pool.n_qubits, params=params, gates=tuple(gates))
