"""Integral engine checked against numerical quadrature and textbook values.

Oracles:
* overlap / kinetic / dipole: separable 1D trapezoid quadrature (the H2
  geometry lies on the x axis, so each primitive pair factorizes);
* nuclear attraction / electron repulsion: the Gaussian transform
  1/r = (2/sqrt(pi)) * int_0^inf exp(-s^2 r^2) ds reduces both to 1D
  integrals evaluated with scipy.integrate.quad, independent of the
  erf-based closed forms used by the engine;
* Hartree-Fock at R = 1.4 bohr: published STO-3G values.
"""

import math

import numpy as np
import pytest
from scipy.integrate import quad

from polarvqe import chemistry as chem
from polarvqe.chemistry import (
    BOHR_PER_ANGSTROM,
    EV_PER_HARTREE,
    CavityParams,
    Geometry,
    compute_sto3g_h2,
    format_integrals,
    parse_integrals,
    qed_hf_reference,
)

EXPS = chem._STO3G_H_EXPONENTS
COEFFS = chem._STO3G_H_COEFFS


def prim_pairs(ax, bx):
    """Yield (weight, alpha, beta) over normalized primitive pairs."""
    for ca, a in zip(COEFFS, EXPS):
        for cb, b in zip(COEFFS, EXPS):
            w = ca * cb * chem._prim_norm(a) * chem._prim_norm(b)
            yield w, a, b


GRID = np.linspace(-15.0, 15.0, 60001)


def moment_1d(alpha, a, beta, b, center, power):
    f = (GRID - center) ** power * np.exp(-alpha * (GRID - a) ** 2 - beta * (GRID - b) ** 2)
    return np.trapezoid(f, GRID)


def overlap_quad(ax, bx):
    acc = 0.0
    for w, a, b in prim_pairs(ax, bx):
        acc += w * moment_1d(a, ax, b, bx, 0, 0) * moment_1d(a, 0, b, 0, 0, 0) ** 2
    return acc


def dipole_x_quad(ax, bx):
    acc = 0.0
    for w, a, b in prim_pairs(ax, bx):
        acc += w * moment_1d(a, ax, b, bx, 0.0, 1) * moment_1d(a, 0, b, 0, 0, 0) ** 2
    return acc


def second_moment_xx_quad(ax, bx):
    acc = 0.0
    for w, a, b in prim_pairs(ax, bx):
        acc += w * moment_1d(a, ax, b, bx, 0.0, 2) * moment_1d(a, 0, b, 0, 0, 0) ** 2
    return acc


def second_moment_yy_quad(ax, bx):
    acc = 0.0
    for w, a, b in prim_pairs(ax, bx):
        acc += w * moment_1d(a, ax, b, bx, 0, 0) * moment_1d(a, 0, b, 0, 0, 2) * moment_1d(
            a, 0, b, 0, 0, 0
        )
    return acc


def kinetic_quad(ax, bx):
    # -1/2 <a|lap|b>, with lap e^{-b(r-B)^2} = (4 b^2 |r-B|^2 - 6 b) e^{...}
    acc = 0.0
    for w, a, b in prim_pairs(ax, bx):
        g0x = moment_1d(a, ax, b, bx, 0, 0)
        g2x = moment_1d(a, ax, b, bx, bx, 2)
        g0t = moment_1d(a, 0, b, 0, 0, 0)
        g2t = moment_1d(a, 0, b, 0, 0, 2)
        lap = 4 * b * b * (g2x * g0t * g0t + 2 * g0x * g2t * g0t) - 6 * b * g0x * g0t * g0t
        acc += -0.5 * w * lap
    return acc


def nuclear_quad(ax, bx, cx, charge=1.0):
    """-Z <a|1/|r-C||b> via the Gaussian transform (1D integral in s)."""
    acc = 0.0
    for w, a, b in prim_pairs(ax, bx):
        p = a + b
        mu = a * b / p
        k = math.exp(-mu * (ax - bx) ** 2)
        px = (a * ax + b * bx) / p
        d2 = (px - cx) ** 2

        def f(s, p=p, d2=d2):
            return (math.pi / (p + s * s)) ** 1.5 * math.exp(-p * s * s / (p + s * s) * d2)

        val, _ = quad(f, 0.0, np.inf, limit=200)
        acc += -charge * w * k * (2.0 / math.sqrt(math.pi)) * val
    return acc


def eri_quad(ax, bx, cx, dx):
    """(ab|cd) via the Gaussian transform (1D integral in s)."""
    acc = 0.0
    for wab, a, b in prim_pairs(ax, bx):
        p = a + b
        kab = math.exp(-a * b / p * (ax - bx) ** 2)
        px = (a * ax + b * bx) / p
        for wcd, c, d in prim_pairs(cx, dx):
            q = c + d
            kcd = math.exp(-c * d / q * (cx - dx) ** 2)
            qx = (c * cx + d * dx) / q
            d2 = (px - qx) ** 2

            def f(s, p=p, q=q, d2=d2):
                det = p * q + s * s * (p + q)
                return (math.pi**2 / det) ** 1.5 * math.exp(-p * q * s * s / det * d2)

            val, _ = quad(f, 0.0, np.inf, limit=200)
            acc += wab * wcd * kab * kcd * (2.0 / math.sqrt(math.pi)) * val
    return acc


GEOM = Geometry.h2(0.9)
AX, BX = GEOM.coords[0][0], GEOM.coords[1][0]


def test_overlap_against_quadrature():
    s, *_ = chem.ao_integrals(GEOM)
    assert s[0, 0] == pytest.approx(overlap_quad(AX, AX), abs=1e-6)
    assert s[0, 1] == pytest.approx(overlap_quad(AX, BX), abs=1e-6)
    assert s[0, 0] == pytest.approx(1.0, abs=1e-6)  # normalized contraction


def test_kinetic_against_quadrature():
    _, t, *_ = chem.ao_integrals(GEOM)
    assert t[0, 0] == pytest.approx(kinetic_quad(AX, AX), abs=1e-6)
    assert t[0, 1] == pytest.approx(kinetic_quad(AX, BX), abs=1e-6)


def test_dipole_against_quadrature():
    s, t, v, dip, quad_m, eri = chem.ao_integrals(GEOM)
    assert dip[0, 0, 0] == pytest.approx(dipole_x_quad(AX, AX), abs=1e-6)
    assert dip[0, 0, 1] == pytest.approx(dipole_x_quad(AX, BX), abs=1e-6)
    # y and z moments vanish on the x axis
    assert np.max(np.abs(dip[1:])) < 1e-12


def test_second_moments_against_quadrature():
    *_, quad_m, _ = chem.ao_integrals(GEOM)
    assert quad_m[0, 0, 0, 0] == pytest.approx(second_moment_xx_quad(AX, AX), abs=1e-6)
    assert quad_m[0, 0, 0, 1] == pytest.approx(second_moment_xx_quad(AX, BX), abs=1e-6)
    assert quad_m[1, 1, 0, 0] == pytest.approx(second_moment_yy_quad(AX, AX), abs=1e-6)
    assert quad_m[1, 1, 0, 1] == pytest.approx(second_moment_yy_quad(AX, BX), abs=1e-6)
    assert quad_m[2, 2, 0, 0] == pytest.approx(quad_m[1, 1, 0, 0], abs=1e-12)
    # off-axis cross moments vanish on the x axis
    assert abs(quad_m[0, 1, 0, 1]) < 1e-12


def test_second_moment_exceeds_projected_square():
    # <p|x^2|p> >= sum_r <p|x|r><r|x|p>: completeness deficit is positive
    ints = compute_sto3g_h2(Geometry.h2(0.735))
    proj = ints.dip[0] @ ints.dip[0]
    deficit = ints.quad[0, 0] - proj
    evals = np.linalg.eigvalsh(deficit)
    assert evals[0] > 0.0
    assert deficit[0, 0] == pytest.approx(0.1534, abs=5e-4)


def test_nuclear_attraction_against_gaussian_transform():
    s, t, v, dip, quad_m, eri = chem.ao_integrals(GEOM)
    v00 = nuclear_quad(AX, AX, AX) + nuclear_quad(AX, AX, BX)
    v01 = nuclear_quad(AX, BX, AX) + nuclear_quad(AX, BX, BX)
    assert v[0, 0] == pytest.approx(v00, abs=1e-7)
    assert v[0, 1] == pytest.approx(v01, abs=1e-7)


def test_eri_against_gaussian_transform():
    *_, eri = chem.ao_integrals(GEOM)
    assert eri[0, 0, 0, 0] == pytest.approx(eri_quad(AX, AX, AX, AX), abs=1e-7)
    assert eri[0, 0, 1, 1] == pytest.approx(eri_quad(AX, AX, BX, BX), abs=1e-7)
    assert eri[0, 1, 0, 1] == pytest.approx(eri_quad(AX, BX, AX, BX), abs=1e-7)
    assert eri[0, 0, 0, 1] == pytest.approx(eri_quad(AX, AX, AX, BX), abs=1e-7)


def test_published_sto3g_values_at_r14():
    # Standard STO-3G H2 benchmarks at R = 1.4 bohr
    geom = Geometry.h2(1.4 / BOHR_PER_ANGSTROM)
    s, t, v, dip, quad_m, eri = chem.ao_integrals(geom)
    assert s[0, 1] == pytest.approx(0.6593, abs=2e-4)
    assert t[0, 0] == pytest.approx(0.7600, abs=2e-4)
    assert t[0, 1] == pytest.approx(0.2365, abs=2e-4)
    assert eri[0, 0, 0, 0] == pytest.approx(0.7746, abs=2e-4)
    ints = compute_sto3g_h2(geom)
    assert ints.scf_history[-1] == pytest.approx(-1.1167, abs=5e-4)


def test_scf_convergence_properties():
    ints = compute_sto3g_h2(Geometry.h2(0.735))
    hist = np.array(ints.scf_history)
    assert np.all(np.diff(hist) <= 1e-12), "SCF energy must not increase"
    assert ints.scf_gradient_norm < 1e-8
    assert ints.rhf_energy() == pytest.approx(hist[-1], abs=1e-9)
    assert ints.mo_energies[0] < ints.mo_energies[1]


def test_mo_integral_symmetries():
    ints = compute_sto3g_h2(Geometry.h2(0.735))
    g = ints.g
    for perm in [(1, 0, 2, 3), (0, 1, 3, 2), (2, 3, 0, 1), (3, 2, 1, 0)]:
        assert np.max(np.abs(g - np.transpose(g, perm))) < 1e-10
    assert np.max(np.abs(ints.h - ints.h.T)) < 1e-12
    # gerade/ungerade parity: diagonal position elements vanish for
    # symmetric H2, the off-diagonal bond-axis element does not
    assert abs(ints.dip[0, 0, 0]) < 1e-10
    assert abs(ints.dip[0, 0, 1]) > 0.5


def test_qed_hf_reference():
    ints = compute_sto3g_h2(Geometry.h2(0.735))
    cav = CavityParams.from_ev(2.0, lambda_x=0.1)
    ref = qed_hf_reference(ints, cav)
    assert np.allclose(ref.d_expectation, 0.0, atol=1e-10)  # symmetric molecule
    # with a vanishing diagonal dipole the determinant expectation of the
    # squared coupling reduces to lambda^2 <g|x^2|g>
    assert ref.e_dse == pytest.approx(0.1**2 * ints.quad[0, 0, 0, 0], abs=1e-14)
    assert ref.e_ref == pytest.approx(ref.e_rhf + ref.e_dse, abs=1e-14)
    assert 0.005 < ref.e_dse < 0.012  # mHa-scale dipole self-energy
    zero = qed_hf_reference(ints, CavityParams.from_ev(2.0))
    assert zero.e_ref == pytest.approx(zero.e_rhf, abs=1e-15)


def test_cavity_params():
    cav = CavityParams.from_ev(2.0, lambda_x=0.1)
    assert cav.omega == pytest.approx(2.0 / EV_PER_HARTREE)
    with pytest.raises(ValueError):
        CavityParams(-1.0, (0, 0, 0))
    with pytest.raises(ValueError):
        CavityParams(0.1, (0, 0, 0), n_photon_max=0)


def test_geometry():
    geom = Geometry.h2(0.735)
    r = 0.735 * BOHR_PER_ANGSTROM
    assert geom.nuclear_repulsion() == pytest.approx(1.0 / r)
    assert np.allclose(geom.nuclear_dipole(), 0.0)
    with pytest.raises(ValueError):
        Geometry.h2(-0.1)


def test_integral_file_round_trip():
    ints = compute_sto3g_h2(Geometry.h2(0.735))
    cav = CavityParams.from_ev(2.0, lambda_x=0.1)
    text = format_integrals(ints, cav)
    back, cav_back = parse_integrals(text)
    assert np.array_equal(back.h, ints.h)
    assert np.array_equal(back.g, ints.g)
    assert np.array_equal(back.dip, ints.dip)
    assert np.array_equal(back.quad, ints.quad)
    assert back.e_nuc == ints.e_nuc
    assert np.array_equal(back.d_nuc, ints.d_nuc)
    assert np.array_equal(back.mo_energies, ints.mo_energies)
    assert back.reference_occupation == ints.reference_occupation
    assert cav_back == cav
    no_cav = parse_integrals(format_integrals(ints))
    assert no_cav[1] is None


def test_integral_file_rejects_bad_input():
    ints = compute_sto3g_h2(Geometry.h2(0.735))
    text = format_integrals(ints)
    with pytest.raises(ValueError, match="unknown section"):
        parse_integrals(text + "\n[extra]\nfoo = 1\n")
    broken = text.replace("[h]\n0 0 ", "[h]\n0 0 9.99e9_", 1)
    with pytest.raises(ValueError):
        parse_integrals(broken)
    # asymmetric h
    lines = text.splitlines()
    idx = lines.index("[h]") + 2  # the 0 1 element
    p, q, val = lines[idx].split()
    lines[idx] = f"{p} {q} {float(val) + 0.5!r}"
    with pytest.raises(ValueError, match="not symmetric"):
        parse_integrals("\n".join(lines))
