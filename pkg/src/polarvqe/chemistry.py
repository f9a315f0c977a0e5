"""Analytic STO-3G integrals for H2, restricted Hartree-Fock, and the
photon-dressed (QED-HF) reference energy.

All quantities are in Hartree atomic units.  Dipole integrals dip[c][p][q]
store raw position matrix elements ⟨p|r_c|q⟩ and quad[a][b][p][q] the raw
second moments ⟨p|r_a r_b|q⟩; the electron's negative charge is applied by
consumers.  Two-electron integrals use chemists' ordering
(pq|rs) = ∫ p(1)q(1) r12^-1 r(2)s(2).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

BOHR_PER_ANGSTROM = 1.8897259886
EV_PER_HARTREE = 27.211386245988

# H 1s STO-3G: exponents for zeta = 1.24, coefficients for normalized
# primitives (Hehre, Stewart, Pople contraction).
_STO3G_H_EXPONENTS = (3.42525091, 0.62391373, 0.16885540)
_STO3G_H_COEFFS = (0.15432897, 0.53532814, 0.44463454)


@dataclass(frozen=True)
class Geometry:
    """Point nuclei: charges[i] at coords[i] (Bohr)."""

    charges: tuple[float, ...]
    coords: tuple[tuple[float, float, float], ...]

    def __post_init__(self) -> None:
        if len(self.charges) != len(self.coords):
            raise ValueError("charges/coords length mismatch")
        if not self.charges:
            raise ValueError("empty geometry")

    @classmethod
    def h2(cls, r_angstrom: float) -> "Geometry":
        """H2 with the bond along the x axis, centered at the origin.

        The x alignment matters: the cavity polarization used throughout
        is lambda_x, which couples to the bond-axis dipole.
        """
        if r_angstrom <= 0:
            raise ValueError("bond length must be positive")
        half = 0.5 * r_angstrom * BOHR_PER_ANGSTROM
        return cls(charges=(1.0, 1.0), coords=((-half, 0.0, 0.0), (half, 0.0, 0.0)))

    def nuclear_repulsion(self) -> float:
        e = 0.0
        for a in range(len(self.charges)):
            for b in range(a + 1, len(self.charges)):
                r = math.dist(self.coords[a], self.coords[b])
                e += self.charges[a] * self.charges[b] / r
        return e

    def nuclear_dipole(self) -> np.ndarray:
        return np.einsum("a,ac->c", np.array(self.charges), np.array(self.coords))


@dataclass(frozen=True)
class CavityParams:
    """Single cavity mode: frequency omega (Hartree), coupling vector
    lambda_vec (a.u.), and the photon-number cutoff of the simulation."""

    omega: float
    lambda_vec: tuple[float, float, float]
    n_photon_max: int = 1

    def __post_init__(self) -> None:
        if self.omega <= 0:
            raise ValueError("cavity frequency must be positive")
        if self.n_photon_max < 1:
            raise ValueError("photon cutoff must be at least 1")
        if len(self.lambda_vec) != 3:
            raise ValueError("lambda_vec must have three components")

    @classmethod
    def from_ev(
        cls,
        omega_ev: float,
        lambda_x: float = 0.0,
        lambda_y: float = 0.0,
        lambda_z: float = 0.0,
        n_photon_max: int = 1,
    ) -> "CavityParams":
        return cls(omega_ev / EV_PER_HARTREE, (lambda_x, lambda_y, lambda_z), n_photon_max)


@dataclass(frozen=True)
class IntegralSet:
    """Molecular-orbital integrals for a closed-shell reference.

    h:    (n, n) one-electron core Hamiltonian, MO basis
    g:    (n, n, n, n) two-electron integrals, chemists' ordering (pq|rs)
    dip:  (3, n, n) position integrals ⟨p|r_c|q⟩
    quad: (3, 3, n, n) second-moment integrals ⟨p|r_a r_b|q⟩; needed because
          the one-electron part of the squared-dipole coupling term is not
          representable by products of dip within a finite orbital basis
    reference_occupation: indices of the doubly occupied spatial orbitals
    """

    n_spatial: int
    h: np.ndarray
    g: np.ndarray
    dip: np.ndarray
    quad: np.ndarray
    e_nuc: float
    d_nuc: np.ndarray
    mo_energies: np.ndarray
    reference_occupation: tuple[int, ...]
    scf_history: tuple[float, ...] = field(default=(), compare=False)
    scf_gradient_norm: float = field(default=0.0, compare=False)

    def __post_init__(self) -> None:
        n = self.n_spatial
        if self.h.shape != (n, n) or self.g.shape != (n, n, n, n) or self.dip.shape != (3, n, n):
            raise ValueError("integral array shape mismatch")
        if self.quad.shape != (3, 3, n, n):
            raise ValueError("integral array shape mismatch")
        if np.max(np.abs(self.h - self.h.T)) > 1e-10:
            raise ValueError("one-electron integrals must be symmetric")
        if np.max(np.abs(self.quad - np.transpose(self.quad, (1, 0, 2, 3)))) > 1e-10 or np.max(
            np.abs(self.quad - np.transpose(self.quad, (0, 1, 3, 2)))
        ) > 1e-10:
            raise ValueError("second-moment integrals must be symmetric")
        _check_g_symmetry(self.g)
        if any(i < 0 or i >= n for i in self.reference_occupation):
            raise ValueError("occupation index out of range")

    def n_electrons(self) -> int:
        return 2 * len(self.reference_occupation)

    def rhf_energy(self) -> float:
        """Closed-shell energy of the reference determinant from MO integrals."""
        occ = list(self.reference_occupation)
        e = 2.0 * sum(self.h[i, i] for i in occ)
        for i in occ:
            for j in occ:
                e += 2.0 * self.g[i, i, j, j] - self.g[i, j, j, i]
        return float(e + self.e_nuc)


def _check_g_symmetry(g: np.ndarray, tol: float = 1e-10) -> None:
    perms = (
        (1, 0, 2, 3),  # (qp|rs)
        (0, 1, 3, 2),  # (pq|sr)
        (2, 3, 0, 1),  # (rs|pq)
    )
    for perm in perms:
        if np.max(np.abs(g - np.transpose(g, perm))) > tol:
            raise ValueError("two-electron integrals violate 8-fold symmetry")


# -- primitive integrals -------------------------------------------------


def _boys_f0(t: float) -> float:
    if t < 1e-10:
        return 1.0 - t / 3.0
    return 0.5 * math.sqrt(math.pi / t) * math.erf(math.sqrt(t))


def _prim_norm(alpha: float) -> float:
    return (2.0 * alpha / math.pi) ** 0.75


class _ContractedS:
    """Contracted s-type Gaussian at a fixed center."""

    def __init__(self, center: tuple[float, float, float], exps, coeffs):
        self.center = np.asarray(center, dtype=float)
        self.exps = tuple(exps)
        self.coeffs = tuple(c * _prim_norm(a) for c, a in zip(coeffs, exps))


def _pair_quantities(a: float, av: np.ndarray, b: float, bv: np.ndarray):
    p = a + b
    mu = a * b / p
    ab2 = float(np.dot(av - bv, av - bv))
    k = math.exp(-mu * ab2)
    center = (a * av + b * bv) / p
    return p, mu, ab2, k, center


def _overlap_prim(a, av, b, bv) -> float:
    p, _, _, k, _ = _pair_quantities(a, av, b, bv)
    return (math.pi / p) ** 1.5 * k


def _kinetic_prim(a, av, b, bv) -> float:
    p, mu, ab2, k, _ = _pair_quantities(a, av, b, bv)
    return mu * (3.0 - 2.0 * mu * ab2) * (math.pi / p) ** 1.5 * k


def _nuclear_prim(a, av, b, bv, cv) -> float:
    p, _, _, k, center = _pair_quantities(a, av, b, bv)
    t = p * float(np.dot(center - cv, center - cv))
    return -(2.0 * math.pi / p) * k * _boys_f0(t)


def _dipole_prim(a, av, b, bv) -> np.ndarray:
    # ⟨a|r|b⟩ for s functions: overlap times the product-Gaussian center
    p, _, _, k, center = _pair_quantities(a, av, b, bv)
    return (math.pi / p) ** 1.5 * k * center


def _second_moment_prim(a, av, b, bv) -> np.ndarray:
    # ⟨a|r_i r_j|b⟩ for s functions: overlap times (P_i P_j + δ_ij / 2p)
    p, _, _, k, center = _pair_quantities(a, av, b, bv)
    s = (math.pi / p) ** 1.5 * k
    return s * (np.outer(center, center) + np.eye(3) / (2.0 * p))


def _eri_prim(a, av, b, bv, c, cv, d, dv) -> float:
    p, _, _, k_ab, pv = _pair_quantities(a, av, b, bv)
    q, _, _, k_cd, qv = _pair_quantities(c, cv, d, dv)
    t = p * q / (p + q) * float(np.dot(pv - qv, pv - qv))
    return 2.0 * math.pi**2.5 / (p * q * math.sqrt(p + q)) * k_ab * k_cd * _boys_f0(t)


def _contract2(fn, bra: _ContractedS, ket: _ContractedS):
    acc = None
    for ca, a in zip(bra.coeffs, bra.exps):
        for cb, b in zip(ket.coeffs, ket.exps):
            val = fn(a, bra.center, b, ket.center)
            acc = ca * cb * np.asarray(val) if acc is None else acc + ca * cb * np.asarray(val)
    return acc


def ao_integrals(geometry: Geometry):
    """AO-basis S, T, V, dip, quad, ERI for one s-type STO-3G shell per H atom."""
    if any(z != 1.0 for z in geometry.charges):
        raise ValueError("built-in basis covers hydrogen only")
    shells = [
        _ContractedS(xyz, _STO3G_H_EXPONENTS, _STO3G_H_COEFFS) for xyz in geometry.coords
    ]
    n = len(shells)
    s = np.zeros((n, n))
    t = np.zeros((n, n))
    v = np.zeros((n, n))
    dip = np.zeros((3, n, n))
    quad = np.zeros((3, 3, n, n))
    for i in range(n):
        for j in range(n):
            s[i, j] = _contract2(_overlap_prim, shells[i], shells[j])
            t[i, j] = _contract2(_kinetic_prim, shells[i], shells[j])
            dip[:, i, j] = _contract2(_dipole_prim, shells[i], shells[j])
            quad[:, :, i, j] = _contract2(_second_moment_prim, shells[i], shells[j])
            for z, cv in zip(geometry.charges, geometry.coords):
                v[i, j] += z * _contract2(
                    lambda a, av, b, bv: _nuclear_prim(a, av, b, bv, np.asarray(cv)),
                    shells[i],
                    shells[j],
                )
    eri = np.zeros((n, n, n, n))
    for i in range(n):
        for j in range(n):
            for k in range(n):
                for l in range(n):
                    acc = 0.0
                    for ci, ai in zip(shells[i].coeffs, shells[i].exps):
                        for cj, aj in zip(shells[j].coeffs, shells[j].exps):
                            for ck, ak in zip(shells[k].coeffs, shells[k].exps):
                                for cl, al in zip(shells[l].coeffs, shells[l].exps):
                                    acc += ci * cj * ck * cl * _eri_prim(
                                        ai, shells[i].center, aj, shells[j].center,
                                        ak, shells[k].center, al, shells[l].center,
                                    )
                    eri[i, j, k, l] = acc
    return s, t, v, dip, quad, eri


# -- restricted Hartree-Fock ---------------------------------------------


def _rhf(s, h_core, eri, n_occ, e_nuc, max_iter=200, e_tol=1e-10, d_tol=1e-8):
    """Roothaan SCF from the core-Hamiltonian guess; returns C, orbital
    energies, the per-iteration total energies, and the final orbital
    gradient norm ||FDS - SDF||."""
    evals, evecs = np.linalg.eigh(s)
    if np.min(evals) < 1e-8:
        raise ValueError("overlap matrix is near singular")
    x = evecs @ np.diag(evals**-0.5) @ evecs.T

    def solve(f):
        fp = x.T @ f @ x
        eps, cp = np.linalg.eigh(fp)
        c = x @ cp
        # deterministic sign: first component of significant size positive
        for k in range(c.shape[1]):
            col = c[:, k]
            lead = col[np.argmax(np.abs(col) > 1e-8)]
            if lead < 0:
                c[:, k] = -col
        return eps, c

    def density(c):
        cocc = c[:, :n_occ]
        return 2.0 * cocc @ cocc.T

    eps, c = solve(h_core)
    d = density(c)
    energies = []
    e_old = None
    for _ in range(max_iter):
        j = np.einsum("pqrs,rs->pq", eri, d)
        k = np.einsum("prqs,rs->pq", eri, d)
        f = h_core + j - 0.5 * k
        e_total = 0.5 * np.sum(d * (h_core + f)) + e_nuc
        energies.append(float(e_total))
        grad = f @ d @ s - s @ d @ f
        eps, c = solve(f)
        d_new = density(c)
        d_rms = np.sqrt(np.mean((d_new - d) ** 2))
        converged = e_old is not None and abs(e_total - e_old) < e_tol and d_rms < d_tol
        d, e_old = d_new, e_total
        if converged:
            return c, eps, energies, float(np.linalg.norm(grad))
    raise RuntimeError("SCF failed to converge")


def compute_sto3g_h2(geometry: Geometry) -> IntegralSet:
    """Full pipeline: analytic AO integrals, RHF, and the MO transform."""
    if len(geometry.charges) != 2:
        raise ValueError("expected an H2 geometry")
    s, t, v, dip_ao, quad_ao, eri_ao = ao_integrals(geometry)
    h_core = t + v
    e_nuc = geometry.nuclear_repulsion()
    c, eps, energies, grad_norm = _rhf(s, h_core, eri_ao, n_occ=1, e_nuc=e_nuc)
    h_mo = c.T @ h_core @ c
    dip_mo = np.einsum("pi,cpq,qj->cij", c, dip_ao, c)
    quad_mo = np.einsum("pi,abpq,qj->abij", c, quad_ao, c)
    g_mo = np.einsum("pi,qj,pqrs,rk,sl->ijkl", c, c, eri_ao, c, c, optimize=True)
    return IntegralSet(
        n_spatial=2,
        h=h_mo,
        g=g_mo,
        dip=dip_mo,
        quad=quad_mo,
        e_nuc=e_nuc,
        d_nuc=geometry.nuclear_dipole(),
        mo_energies=eps,
        reference_occupation=(0,),
        scf_history=tuple(energies),
        scf_gradient_norm=grad_norm,
    )


# -- photon-dressed reference --------------------------------------------


@dataclass(frozen=True)
class QedHfReference:
    """Mean-field reference of the light-matter system in the
    coherent-state frame: the photon displacement removes the linear
    coupling at the reference, leaving the dipole self-energy
    fluctuation on top of the bare RHF energy."""

    e_ref: float
    d_expectation: np.ndarray  # total dipole ⟨d⟩ = d_nuc - ⟨r⟩_elec
    e_rhf: float
    e_dse: float


def qed_hf_reference(ints: IntegralSet, cav: CavityParams) -> QedHfReference:
    occ = list(ints.reference_occupation)
    lam = np.asarray(cav.lambda_vec, dtype=float)
    d_elec = -2.0 * np.einsum("cii->c", ints.dip[:, occ, :][:, :, occ])
    d_exp = ints.d_nuc + d_elec

    lam_mo = np.einsum("c,cpq->pq", lam, ints.dip)
    virt = [p for p in range(ints.n_spatial) if p not in occ]
    # 1/2 ⟨(lambda.(d - ⟨d⟩))^2⟩ over the determinant: the mean vanishes by
    # construction, leaving the one-body dipole variance plus the part of
    # ⟨(lambda.r)^2⟩ that dipole products cannot represent in a finite basis
    lam_quad = np.einsum("a,b,abpq->pq", lam, lam, ints.quad)
    deficit = 0.5 * (lam_quad - lam_mo @ lam_mo)
    e_dse = float(
        sum(lam_mo[i, a] ** 2 for i in occ for a in virt)
        + 2.0 * sum(deficit[i, i] for i in occ)
    )
    e_rhf = ints.rhf_energy()
    return QedHfReference(
        e_ref=e_rhf + e_dse,
        d_expectation=d_exp,
        e_rhf=e_rhf,
        e_dse=e_dse,
    )


# -- integral file I/O ----------------------------------------------------

_QUAD_SECTIONS = ("quad_xx", "quad_xy", "quad_xz", "quad_yy", "quad_yz", "quad_zz")
_QUAD_COMPONENTS = ((0, 0), (0, 1), (0, 2), (1, 1), (1, 2), (2, 2))
_KNOWN_SECTIONS = (
    "meta", "h", "g", "dip_x", "dip_y", "dip_z", *_QUAD_SECTIONS, "scalars", "cavity",
)


def format_integrals(ints: IntegralSet, cav: CavityParams | None = None) -> str:
    n = ints.n_spatial
    lines = ["[meta]", f"n_spatial = {n}", "ordering = chemists", ""]
    lines.append("[h]")
    for p in range(n):
        for q in range(n):
            lines.append(f"{p} {q} {float(ints.h[p, q])!r}")
    lines.append("")
    lines.append("[g]")
    for p in range(n):
        for q in range(n):
            for r in range(n):
                for s_ in range(n):
                    lines.append(f"{p} {q} {r} {s_} {float(ints.g[p, q, r, s_])!r}")
    lines.append("")
    for ci, cname in enumerate(("dip_x", "dip_y", "dip_z")):
        lines.append(f"[{cname}]")
        for p in range(n):
            for q in range(n):
                lines.append(f"{p} {q} {float(ints.dip[ci, p, q])!r}")
        lines.append("")
    for (ca, cb), cname in zip(_QUAD_COMPONENTS, _QUAD_SECTIONS):
        lines.append(f"[{cname}]")
        for p in range(n):
            for q in range(n):
                lines.append(f"{p} {q} {float(ints.quad[ca, cb, p, q])!r}")
        lines.append("")
    lines.append("[scalars]")
    lines.append(f"e_nuc = {float(ints.e_nuc)!r}")
    lines.append("d_nuc = " + " ".join(repr(float(v)) for v in ints.d_nuc))
    lines.append("mo_energies = " + " ".join(repr(float(v)) for v in ints.mo_energies))
    lines.append("occupation = " + " ".join(str(i) for i in ints.reference_occupation))
    if cav is not None:
        lines.append("")
        lines.append("[cavity]")
        lines.append(f"omega = {cav.omega!r}")
        lines.append("lambda = " + " ".join(repr(float(v)) for v in cav.lambda_vec))
        lines.append(f"n_photon_max = {cav.n_photon_max}")
    return "\n".join(lines) + "\n"


def parse_integrals(text: str) -> tuple[IntegralSet, CavityParams | None]:
    sections: dict[str, list[str]] = {}
    current = None
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith("[") and line.endswith("]"):
            current = line[1:-1]
            if current not in _KNOWN_SECTIONS:
                raise ValueError(f"unknown section [{current}]")
            if current in sections:
                raise ValueError(f"duplicate section [{current}]")
            sections[current] = []
            continue
        if current is None:
            raise ValueError("content before first section header")
        sections[current].append(line)

    for required in ("meta", "h", "g", "dip_x", "dip_y", "dip_z", *_QUAD_SECTIONS, "scalars"):
        if required not in sections:
            raise ValueError(f"missing section [{required}]")

    meta = _parse_kv(sections["meta"])
    n = int(meta["n_spatial"])
    if meta.get("ordering", "chemists") != "chemists":
        raise ValueError("only chemists' two-electron ordering is supported")

    h = _parse_matrix(sections["h"], n)
    if np.max(np.abs(h - h.T)) > 1e-10:
        raise ValueError("one-electron block is not symmetric")
    g = np.zeros((n, n, n, n))
    seen = np.zeros((n, n, n, n), dtype=bool)
    for line in sections["g"]:
        f = line.split()
        if len(f) != 5:
            raise ValueError(f"bad [g] line: {line!r}")
        p, q, r, s_ = (int(v) for v in f[:4])
        g[p, q, r, s_] = float(f[4])
        seen[p, q, r, s_] = True
    if not seen.all():
        raise ValueError("incomplete [g] block")
    _check_g_symmetry(g)

    dip = np.stack([_parse_matrix(sections[f"dip_{c}"], n) for c in "xyz"])
    quad = np.zeros((3, 3, n, n))
    for (ca, cb), cname in zip(_QUAD_COMPONENTS, _QUAD_SECTIONS):
        block = _parse_matrix(sections[cname], n)
        quad[ca, cb] = block
        quad[cb, ca] = block
    scalars = _parse_kv(sections["scalars"])
    ints = IntegralSet(
        n_spatial=n,
        h=h,
        g=g,
        dip=dip,
        quad=quad,
        e_nuc=float(scalars["e_nuc"]),
        d_nuc=np.array([float(v) for v in scalars["d_nuc"].split()]),
        mo_energies=np.array([float(v) for v in scalars["mo_energies"].split()]),
        reference_occupation=tuple(int(v) for v in scalars["occupation"].split()),
    )
    cav = None
    if "cavity" in sections:
        ckv = _parse_kv(sections["cavity"])
        lam = tuple(float(v) for v in ckv["lambda"].split())
        cav = CavityParams(float(ckv["omega"]), lam, int(ckv["n_photon_max"]))
    return ints, cav


def _parse_kv(lines: list[str]) -> dict[str, str]:
    out = {}
    for line in lines:
        if "=" not in line:
            raise ValueError(f"expected key = value, got {line!r}")
        key, _, val = line.partition("=")
        out[key.strip()] = val.strip()
    return out


def _parse_matrix(lines: list[str], n: int) -> np.ndarray:
    m = np.zeros((n, n))
    seen = np.zeros((n, n), dtype=bool)
    for line in lines:
        f = line.split()
        if len(f) != 3:
            raise ValueError(f"bad matrix line: {line!r}")
        p, q = int(f[0]), int(f[1])
        m[p, q] = float(f[2])
        seen[p, q] = True
    if not seen.all():
        raise ValueError("incomplete matrix block")
    return m


def save_integrals(path: str, ints: IntegralSet, cav: CavityParams | None = None) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(format_integrals(ints, cav))


def load_integrals(path: str) -> tuple[IntegralSet, CavityParams | None]:
    with open(path, encoding="utf-8") as fh:
        return parse_integrals(fh.read())
