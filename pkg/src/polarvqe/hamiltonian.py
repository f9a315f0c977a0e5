"""Pauli-Fierz Hamiltonian construction and qubit encodings.

The light-matter Hamiltonian in the dipole approximation and the
coherent-state frame is

    H = H_elec + omega b'b - sqrt(omega/2) (lambda.(d - <d>)) (b' + b)
        + 1/2 (lambda.(d - <d>))^2

with d the total (nuclear + electronic) dipole operator and <d> its
mean-field expectation; the coherent shift makes the bilinear term
fluctuation-only.  Spin orbitals are blocked: alpha spatial orbitals
first (indices 0..n-1), then beta (n..2n-1); occupied spin orbitals map
to |1> qubits.  The photon register is appended after the electronic
qubits.

Supported encodings:
* fermions: Jordan-Wigner, or Bravyi-Kitaev realized as the exact
  GF(2) basis change b = B.n (occupations to cumulative parities),
  which sends X^x Z^z to X^(Bx) Z^(B^-T z) with only a real sign;
* boson: a single qubit (cutoff 1), or a one-hot register with one
  qubit per occupation number 0..cutoff;
* optional removal of the two fixed-parity qubits of the 4-spin-orbital
  Bravyi-Kitaev register, and optional tapering of the conserved
  (electron inversion parity x photon parity) Z2 symmetry;
* optional sign-flip frame that conjugates by X on every reference-1
  qubit so the circuit reference becomes |0...0>.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass

import numpy as np

from .chemistry import CavityParams, IntegralSet, qed_hf_reference
from .operators import MixedOperator, MixedTerm, number_operator_boson
from .pauli import PauliString, PauliSum, index_mask

_PHASES = (1.0 + 0.0j, 1.0j, -1.0 + 0.0j, -1.0j)


# -- Pauli-Fierz builder --------------------------------------------------


def build_pauli_fierz(ints: IntegralSet, cav: CavityParams) -> MixedOperator:
    """Mixed fermion-boson Hamiltonian; scalars (nuclear repulsion,
    coherent-shift constants) are folded into the identity term."""
    n = ints.n_spatial
    ref = qed_hf_reference(ints, cav)
    lam = np.asarray(cav.lambda_vec, dtype=float)
    lam_mo = np.einsum("c,cpq->pq", lam, ints.dip)
    # lambda.(d - <d>) = A + s0 with A = -sum lam_mo[p,q] a'_ps a_qs
    s0 = float(lam @ (ints.d_nuc - ref.d_expectation))
    # the one-electron piece of 1/2 (lambda.Delta d)^2 needs true second
    # moments <p|(lambda.r)^2|q>; the product A^2/2 below only reproduces
    # their projection onto the orbital basis, so the remainder is added
    # as an explicit one-body correction
    lam_quad = np.einsum("a,b,abpq->pq", lam, lam, ints.quad)
    dse_deficit = 0.5 * (lam_quad - lam_mo @ lam_mo)

    def so(p: int, sigma: int) -> int:
        return p + sigma * n

    terms: list[MixedTerm] = [MixedTerm(complex(ints.e_nuc + 0.5 * s0 * s0))]

    # one-electron block; the s0 cross term of the squared coupling is
    # one-body and is folded in here along with the second-moment remainder
    for p in range(n):
        for q in range(n):
            c = ints.h[p, q] - s0 * lam_mo[p, q] + dse_deficit[p, q]
            if abs(c) < 1e-14:
                continue
            for sigma in (0, 1):
                terms.append(MixedTerm(complex(c), ((so(p, sigma), True), (so(q, sigma), False))))

    # two-electron block, chemists' ordering: 1/2 (pq|rs) a'_ps a'_rt a_st a_qs
    for p in range(n):
        for q in range(n):
            for r in range(n):
                for s_ in range(n):
                    c = 0.5 * ints.g[p, q, r, s_]
                    if abs(c) < 1e-14:
                        continue
                    for sigma in (0, 1):
                        for tau in (0, 1):
                            terms.append(
                                MixedTerm(
                                    complex(c),
                                    (
                                        (so(p, sigma), True),
                                        (so(r, tau), True),
                                        (so(s_, tau), False),
                                        (so(q, sigma), False),
                                    ),
                                )
                            )

    # photon energy
    terms.append(MixedTerm(complex(cav.omega), (), (True, False)))

    # bilinear coupling -sqrt(omega/2) (A + s0)(b' + b)
    pref = -np.sqrt(cav.omega / 2.0)
    for create in (True, False):
        if abs(s0) > 1e-14:
            terms.append(MixedTerm(complex(pref * s0), (), (create,)))
        for p in range(n):
            for q in range(n):
                c = -pref * lam_mo[p, q]
                if abs(c) < 1e-14:
                    continue
                for sigma in (0, 1):
                    terms.append(
                        MixedTerm(complex(c), ((so(p, sigma), True), (so(q, sigma), False)), (create,))
                    )

    # squared coupling fluctuation part A^2 / 2, kept as a product of
    # one-body factors (the mappings are homomorphisms, so no normal
    # ordering is required)
    for p in range(n):
        for q in range(n):
            if abs(lam_mo[p, q]) < 1e-14:
                continue
            for r in range(n):
                for s_ in range(n):
                    c = 0.5 * lam_mo[p, q] * lam_mo[r, s_]
                    if abs(c) < 1e-14:
                        continue
                    for sigma in (0, 1):
                        for tau in (0, 1):
                            terms.append(
                                MixedTerm(
                                    complex(c),
                                    (
                                        (so(p, sigma), True),
                                        (so(q, sigma), False),
                                        (so(r, tau), True),
                                        (so(s_, tau), False),
                                    ),
                                )
                            )
    return MixedOperator(tuple(terms))


# -- Jordan-Wigner --------------------------------------------------------


@functools.lru_cache(maxsize=None)
def _jw_ladder(n_qubits: int, index: int, create: bool) -> PauliSum:
    # a'_j = 1/2 (X_j - i Y_j) Z_{j-1} ... Z_0 ; occupied orbital = |1>
    zstring = (1 << index) - 1
    x = PauliString(n_qubits, x_mask=1 << index, z_mask=zstring)
    y = PauliString(n_qubits, x_mask=1 << index, z_mask=zstring | (1 << index))
    sign = -0.5j if create else 0.5j
    return PauliSum.from_string(x, 0.5) + PauliSum.from_string(y, sign)


def map_fermion_term(ops: tuple[tuple[int, bool], ...], coeff: complex, n_qubits: int) -> PauliSum:
    acc = PauliSum.identity(n_qubits, coeff)
    for index, create in ops:
        acc = acc @ _jw_ladder(n_qubits, index, create)
    return acc


# -- GF(2) basis-change machinery (Bravyi-Kitaev) --------------------------


def fenwick_matrix(n: int) -> np.ndarray:
    """Occupations-to-parities matrix B (b = B n mod 2), built by block
    doubling and truncated to n modes."""
    size = 1
    b = np.array([[1]], dtype=np.uint8)
    while size < n:
        top = np.hstack([b, np.zeros((size, size), dtype=np.uint8)])
        a = np.zeros((size, size), dtype=np.uint8)
        a[-1, :] = 1
        bottom = np.hstack([a, b])
        b = np.vstack([top, bottom])
        size *= 2
    return b[:n, :n]


def gf2_inverse(m: np.ndarray) -> np.ndarray:
    n = m.shape[0]
    aug = np.hstack([m.astype(np.uint8) % 2, np.eye(n, dtype=np.uint8)])
    for col in range(n):
        pivot = next(r for r in range(col, n) if aug[r, col])
        if pivot != col:
            aug[[col, pivot]] = aug[[pivot, col]]
        for r in range(n):
            if r != col and aug[r, col]:
                aug[r] ^= aug[col]
    return aug[:, n:]


def _matrix_columns_as_masks(m: np.ndarray) -> tuple[int, ...]:
    n = m.shape[0]
    return tuple(int(sum((int(m[i, j]) & 1) << i for i in range(n))) for j in range(m.shape[1]))


def _apply_mask_map(cols: tuple[int, ...], mask: int) -> int:
    out = 0
    j = 0
    while mask:
        if mask & 1:
            out ^= cols[j]
        mask >>= 1
        j += 1
    return out


def conjugate_basis_change(ps: PauliSum, b: np.ndarray, n_sub: int) -> PauliSum:
    """Conjugate ps by the permutation |n> -> |B n> acting on the first
    n_sub qubits; remaining qubits are untouched.

    In X^x Z^z form the map is exact and phase-free: x -> B x,
    z -> B^-T z.  The labelled-coefficient convention picks up the real
    sign i^(nY - nY')."""
    bcols = _matrix_columns_as_masks(b)
    binv_t_cols = _matrix_columns_as_masks(gf2_inverse(b).T)
    sub_mask = (1 << n_sub) - 1
    out: dict[tuple[int, int], complex] = {}
    for (x, z), c in ps.terms().items():
        x2 = _apply_mask_map(bcols, x & sub_mask) | (x & ~sub_mask)
        z2 = _apply_mask_map(binv_t_cols, z & sub_mask) | (z & ~sub_mask)
        k = ((x & z).bit_count() - (x2 & z2).bit_count()) % 4
        out[(x2, z2)] = out.get((x2, z2), 0.0) + c * _PHASES[k]
    return PauliSum(ps.n_qubits, out)


# -- boson encodings -------------------------------------------------------


def _lowering(n_qubits: int, qubit: int) -> PauliSum:
    """|0><1| = (X + iY)/2."""
    return PauliSum.from_string(PauliString(n_qubits, x_mask=1 << qubit), 0.5) + PauliSum.from_string(
        PauliString(n_qubits, x_mask=1 << qubit, z_mask=1 << qubit), 0.5j
    )


def _raising(n_qubits: int, qubit: int) -> PauliSum:
    """|1><0| = (X - iY)/2."""
    return PauliSum.from_string(PauliString(n_qubits, x_mask=1 << qubit), 0.5) + PauliSum.from_string(
        PauliString(n_qubits, x_mask=1 << qubit, z_mask=1 << qubit), -0.5j
    )


def _boson_ladder(n_qubits: int, offset: int, cutoff: int, encoding: str, create: bool) -> PauliSum:
    if encoding == "single":
        return _raising(n_qubits, offset) if create else _lowering(n_qubits, offset)
    # one-hot register: b' = sum_j sqrt(j+1) |j+1><j|, i.e. clear qubit
    # offset+j and set qubit offset+j+1
    acc = PauliSum.zero(n_qubits)
    for j in range(cutoff):
        hop = _lowering(n_qubits, offset + j) @ _raising(n_qubits, offset + j + 1)
        acc = acc + hop * np.sqrt(j + 1.0)
    return acc if create else acc.hermitian_conjugate()


def _boson_number_direct(n_qubits: int, offset: int, cutoff: int, encoding: str) -> PauliSum:
    # sum_j j (I - Z_j)/2 over the one-hot register; one qubit: (I - Z)/2
    acc = PauliSum.zero(n_qubits)
    rng = [(1, offset)] if encoding == "single" else [(j, offset + j) for j in range(1, cutoff + 1)]
    for weight, qubit in rng:
        acc = acc + PauliSum.identity(n_qubits, 0.5 * weight)
        acc = acc + PauliSum.from_string(PauliString(n_qubits, z_mask=1 << qubit), -0.5 * weight)
    return acc


def encode_boson_sequence(
    seq: tuple[bool, ...], n_qubits: int, offset: int, cutoff: int, encoding: str
) -> PauliSum:
    if not seq:
        return PauliSum.identity(n_qubits)
    if seq == (True, False):
        # the number operator is encoded directly so it stays diagonal
        # on the one-hot register instead of picking up off-subspace
        # ladder products
        return _boson_number_direct(n_qubits, offset, cutoff, encoding)
    acc = PauliSum.identity(n_qubits)
    for create in seq:
        acc = acc @ _boson_ladder(n_qubits, offset, cutoff, encoding, create)
    return acc


# -- fixed-qubit substitution, tapering, sign flips -------------------------


def _drop_bit(mask: int, q: int) -> int:
    return (mask & ((1 << q) - 1)) | ((mask >> (q + 1)) << q)


def substitute_fixed_qubit(ps: PauliSum, qubit: int, value: int, basis: str) -> PauliSum:
    """Replace the Z (basis='z') or X (basis='x') operator on `qubit` by
    the eigenvalue `value` (+1/-1) and remove the qubit.  Raises if any
    term acts on the qubit outside the allowed algebra."""
    if value not in (1, -1):
        raise ValueError("eigenvalue must be +1 or -1")
    out: dict[tuple[int, int], complex] = {}
    bit = 1 << qubit
    for (x, z), c in ps.terms().items():
        if basis == "z":
            if x & bit:
                raise ValueError(f"term acts with X/Y on fixed qubit {qubit}")
            if z & bit:
                c = c * value
        else:
            if z & bit:
                raise ValueError(f"term acts with Z/Y on tapered qubit {qubit}")
            if x & bit:
                c = c * value
        key = (_drop_bit(x, qubit), _drop_bit(z, qubit))
        out[key] = out.get(key, 0.0) + c
    return PauliSum(ps.n_qubits - 1, out)


def _taper_apply(
    h: PauliSum, z_mask: int, sign: int, target: int, sector: int, *, drop_anticommuting: bool = False
) -> PauliSum:
    """Conjugate by U = (X_target + S)/sqrt(2) for S = sign * Z^z_mask,
    then substitute X_target -> sector and drop the qubit.  Every term
    of h must commute with S (checked term-by-term).  With
    drop_anticommuting, an operator whose terms all anticommute with S
    (a sector-changing excitation) is mapped to zero instead; an
    operator mixing both behaviours is still an error."""
    if not (z_mask >> target) & 1:
        raise ValueError("target qubit outside symmetry support")
    n_bad = sum(1 for (x, _z) in h.terms() if (x & z_mask).bit_count() % 2)
    if n_bad:
        if not drop_anticommuting:
            raise ValueError("hamiltonian term anticommutes with the symmetry")
        if n_bad != len(h.terms()):
            raise ValueError("operator mixes symmetry sectors")
        return PauliSum.zero(h.n_qubits - 1)
    sym = PauliSum(h.n_qubits, {(0, z_mask): complex(sign)})
    xq = PauliSum.from_string(PauliString(h.n_qubits, x_mask=1 << target))
    u = (xq + sym) * (1.0 / np.sqrt(2.0))
    rotated = u @ h @ u
    return substitute_fixed_qubit(rotated, target, sector, basis="x")


def taper_symmetry(
    h: PauliSum, sym: PauliSum, reference_bits: int, target_qubit: int | None = None
) -> tuple[PauliSum, int, int]:
    """Remove one qubit using the Z2 symmetry `sym` (a single signed
    Z-type Pauli string squaring to identity).

    The sector is the symmetry eigenvalue on |reference_bits>.  Returns
    (tapered h, target qubit, sector)."""
    terms = sym.terms()
    if len(terms) != 1:
        raise ValueError("symmetry must be a single Pauli string")
    (sx, sz), sc = next(iter(terms.items()))
    if sx != 0 or sz == 0:
        raise ValueError("symmetry must be a nonempty Z-type string")
    if abs(sc.imag) > 1e-12 or abs(abs(sc.real) - 1.0) > 1e-12:
        raise ValueError("symmetry coefficient must be +1 or -1")
    sign = 1 if sc.real > 0 else -1
    if target_qubit is None:
        target_qubit = sz.bit_length() - 1  # highest-index supported qubit
    sector = sign * (1 if (reference_bits & sz).bit_count() % 2 == 0 else -1)
    return _taper_apply(h, sz, sign, target_qubit, sector), target_qubit, sector


def flip_reference_signs(ps: PauliSum, flip_mask: int) -> PauliSum:
    """Conjugate by X on every qubit set in flip_mask: coefficients of
    terms acting with Z or Y there change sign; masks are unchanged."""
    out = {}
    for (x, z), c in ps.terms().items():
        if (z & flip_mask).bit_count() % 2:
            c = -c
        out[(x, z)] = c
    return PauliSum(ps.n_qubits, out)


# -- encoding plan ----------------------------------------------------------


@dataclass(frozen=True)
class EncodingPlan:
    """Frozen description of one route from the mixed operator algebra
    to the final qubit register.  map_observable replays the route on
    any operator, so every observable lives in the same frame as H."""

    fermion_mapping: str  # "jw" | "bk"
    boson_encoding: str  # "single" | "unary"
    taper: str  # "none" | "parity"
    sign_flip: bool
    n_spatial: int
    n_photon_max: int
    n_fermion_qubits: int  # electronic qubits before any reduction
    n_photon_qubits: int
    n_qubits: int  # final register width
    reference_bits: int  # mapped reference occupation on the final register
    prep_bits: int  # qubits the state-prep X layer must set (0 under sign_flip)
    bk_reduction: tuple[tuple[int, int], ...]  # (qubit, eigenvalue), descending
    taper_generator_z: int  # z-mask of the symmetry on the post-reduction register
    taper_generator_sign: int
    taper_qubit: int
    taper_sector: int
    sign_flip_mask: int

    def _map_raw(self, op: MixedOperator, *, drop_sector_breaking: bool = False) -> PauliSum:
        n_f = self.n_fermion_qubits
        n_raw = n_f + self.n_photon_qubits
        if op.n_fermion_modes() > n_f:
            raise ValueError("operator touches more fermionic modes than the plan")

        parts: dict[tuple[bool, ...], PauliSum] = {}
        for term in op.terms:
            ps = map_fermion_term(term.fermion_ops, term.coeff, n_raw)
            parts[term.boson_ops] = parts.get(term.boson_ops, PauliSum.zero(n_raw)) + ps

        if self.fermion_mapping == "bk":
            b = fenwick_matrix(n_f)
            parts = {k: conjugate_basis_change(v, b, n_f) for k, v in parts.items()}

        acc = PauliSum.zero(n_raw)
        for boson_seq, elec_ps in parts.items():
            ph = encode_boson_sequence(boson_seq, n_raw, n_f, self.n_photon_max, self.boson_encoding)
            acc = acc + elec_ps @ ph

        for qubit, value in self.bk_reduction:
            acc = substitute_fixed_qubit(acc, qubit, value, basis="z")

        if self.taper == "parity":
            acc = _taper_apply(
                acc,
                self.taper_generator_z,
                self.taper_generator_sign,
                self.taper_qubit,
                self.taper_sector,
                drop_anticommuting=drop_sector_breaking,
            )

        if self.sign_flip:
            acc = flip_reference_signs(acc, self.sign_flip_mask)
        return acc

    def map_observable(self, op: MixedOperator) -> PauliSum:
        acc = self._map_raw(op)
        if acc.max_abs_imag() > 1e-10:
            raise ValueError("mapped observable has residual imaginary coefficients")
        return acc.real_part()

    def map_antihermitian(self, op: MixedOperator, *, drop_sector_breaking: bool = False) -> PauliSum | None:
        """Pipeline for T - T' generators: coefficients must come out
        purely imaginary.  With drop_sector_breaking, a generator that
        moves tapered states out of the symmetry sector (its in-sector
        amplitude is zero by symmetry) returns None instead of raising."""
        acc = self._map_raw(op, drop_sector_breaking=drop_sector_breaking)
        if drop_sector_breaking and not acc.terms():
            return None
        max_real = max((abs(c.real) for c in acc.terms().values()), default=0.0)
        if max_real > 1e-10:
            raise ValueError("generator mapped with residual real coefficients")
        return acc


def build_plan(
    ints: IntegralSet,
    cav: CavityParams,
    fermion_mapping: str = "bk",
    boson_encoding: str = "single",
    taper: str = "parity",
    sign_flip: bool = True,
) -> EncodingPlan:
    if fermion_mapping not in ("jw", "bk"):
        raise ValueError("fermion_mapping must be 'jw' or 'bk'")
    if boson_encoding not in ("single", "unary"):
        raise ValueError("boson_encoding must be 'single' or 'unary'")
    if taper not in ("none", "parity"):
        raise ValueError("taper must be 'none' or 'parity'")
    if boson_encoding == "single" and cav.n_photon_max != 1:
        raise ValueError("single-qubit boson encoding requires a cutoff of 1")

    n = ints.n_spatial
    n_f = 2 * n
    n_ph = 1 if boson_encoding == "single" else cav.n_photon_max + 1

    occ_mask = 0
    for i in ints.reference_occupation:
        occ_mask |= (1 << i) | (1 << (i + n))

    if fermion_mapping == "bk":
        elec_ref = _apply_mask_map(_matrix_columns_as_masks(fenwick_matrix(n_f)), occ_mask)
    else:
        elec_ref = occ_mask

    # photon vacuum: single-qubit |0> is the all-zero state; the one-hot
    # register encodes |0> by setting its first qubit
    ph_ref = (1 << n_f) if boson_encoding == "unary" else 0
    reference = elec_ref | ph_ref
    n_qubits = n_f + n_ph

    reduction: list[tuple[int, int]] = []
    if fermion_mapping == "bk":
        if n_f != 4:
            raise ValueError("fixed-parity reduction implemented for 4 spin orbitals")
        # qubits 1 and 3 hold the alpha-block and total occupation parities
        for q in (3, 1):
            reduction.append((q, -1 if (reference >> q) & 1 else 1))
        for q, _ in reduction:
            reference = _drop_bit(reference, q)
        n_qubits -= 2

    taper_z = 0
    taper_sign = 1
    taper_qubit = -1
    taper_sector = 0
    if taper == "parity":
        taper_z, taper_sign = _parity_symmetry_mask(ints, fermion_mapping, boson_encoding, cav, reduction)
        taper_qubit = taper_z.bit_length() - 1
        taper_sector = taper_sign * (1 if (reference & taper_z).bit_count() % 2 == 0 else -1)
        reference = _drop_bit(reference, taper_qubit)
        n_qubits -= 1

    return EncodingPlan(
        fermion_mapping=fermion_mapping,
        boson_encoding=boson_encoding,
        taper=taper,
        sign_flip=sign_flip,
        n_spatial=n,
        n_photon_max=cav.n_photon_max,
        n_fermion_qubits=n_f,
        n_photon_qubits=n_ph,
        n_qubits=n_qubits,
        reference_bits=reference,
        prep_bits=0 if sign_flip else reference,
        bk_reduction=tuple(reduction),
        taper_generator_z=taper_z,
        taper_generator_sign=taper_sign,
        taper_qubit=taper_qubit,
        taper_sector=taper_sector,
        sign_flip_mask=reference if sign_flip else 0,
    )


def _parity_symmetry_mask(
    ints: IntegralSet,
    fermion_mapping: str,
    boson_encoding: str,
    cav: CavityParams,
    reduction: list[tuple[int, int]],
) -> tuple[int, int]:
    """Z-mask and sign of the conserved (inversion parity x photon
    parity) string on the post-reduction register.

    Electronic inversion parity is (-1)^(electrons in ungerade
    orbitals); for the symmetric dimer the odd-index MOs are ungerade.
    """
    n = ints.n_spatial
    n_f = 2 * n
    z_occ = 0
    for p in range(1, n, 2):
        z_occ |= (1 << p) | (1 << (p + n))
    if z_occ == 0:
        raise ValueError("no odd-parity orbitals; nothing to taper")

    if fermion_mapping == "bk":
        binv_t = gf2_inverse(fenwick_matrix(n_f)).T
        z_elec = _apply_mask_map(_matrix_columns_as_masks(binv_t), z_occ)
    else:
        z_elec = z_occ

    if boson_encoding == "single":
        z_ph = 1 << n_f
    else:
        z_ph = 0
        for j in range(1, cav.n_photon_max + 1, 2):
            z_ph |= 1 << (n_f + j)

    z_full = z_elec | z_ph
    sign = 1
    for q, value in reduction:  # descending qubit order
        if (z_full >> q) & 1:
            sign *= value
        z_full = _drop_bit(z_full, q)
    return z_full, sign


def encode_hamiltonian(ints: IntegralSet, cav: CavityParams, plan: EncodingPlan) -> PauliSum:
    """Map the Pauli-Fierz Hamiltonian through the plan.  All Pauli
    coefficients of the result are real."""
    return plan.map_observable(build_pauli_fierz(ints, cav))


def photon_number_observable(plan: EncodingPlan) -> PauliSum:
    return plan.map_observable(number_operator_boson())


def physical_state_indices(plan: EncodingPlan, n_alpha: int = 1, n_beta: int = 1) -> list[int]:
    """Computational-basis indices (big-endian) spanning the physical
    sector: fixed alpha/beta electron counts and a valid photon state.

    After tapering, the whole register is physical: the symmetry
    rotation mixes basis states, so no occupation filter applies.
    """
    if plan.taper == "parity":
        return list(range(1 << plan.n_qubits))

    n = plan.n_spatial
    n_f = plan.n_fermion_qubits
    occups = []
    for bits in range(1 << n_f):
        na = sum((bits >> p) & 1 for p in range(n))
        nb = sum((bits >> p) & 1 for p in range(n, 2 * n))
        if na == n_alpha and nb == n_beta:
            occups.append(bits)

    if plan.boson_encoding == "single":
        ph_states = [0, 1]
    else:
        ph_states = [1 << j for j in range(plan.n_photon_qubits)]

    bcols = _matrix_columns_as_masks(fenwick_matrix(n_f)) if plan.fermion_mapping == "bk" else None
    indices = []
    for occ in occups:
        bits_e = _apply_mask_map(bcols, occ) if bcols else occ
        for ph in ph_states:
            bits = bits_e | (ph << n_f)
            for q, _ in plan.bk_reduction:
                bits = _drop_bit(bits, q)
            if plan.sign_flip:
                bits ^= plan.sign_flip_mask
            indices.append(index_mask(bits, plan.n_qubits))
    return sorted(set(indices))
