"""Experiment scans: dissociation curves over bond length, coupling
sweeps at the per-coupling equilibrium geometry, and the parabolic
equilibrium-bond-length finder they share.

Points are independent: each owns its integrals, encoding, noise seeds,
and optimizer state, so grid points can run on a worker pool; results
are merged back in grid order regardless of completion order.  A point
that raises is recorded as a NaN row plus an error entry in the run
manifest, and the scan continues.
"""

from __future__ import annotations

import csv
import dataclasses
import json
import platform
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
import scipy

from .ansatz import build_pucc_pool, synthesize
from .chemistry import CavityParams, Geometry, compute_sto3g_h2
from .hamiltonian import build_plan, encode_hamiltonian, photon_number_observable
from .simulator import NoiseModel
from .vqe import VqeConfig, fci_solve, measure_photon_number, vqe_minimize


@dataclass(frozen=True)
class EncodingChoice:
    """Qubit-encoding selection shared by scans, the CLI, and the service."""

    fermion_mapping: str = "bk"
    boson_encoding: str = "single"
    taper: str = "parity"
    sign_flip: bool = True

    def plan_for(self, ints, cav):
        return build_plan(
            ints,
            cav,
            fermion_mapping=self.fermion_mapping,
            boson_encoding=self.boson_encoding,
            taper=self.taper,
            sign_flip=self.sign_flip,
        )


@dataclass(frozen=True)
class EquilibriumFit:
    """Parabolic minimum of the exact-diagonalization bond-length curve."""

    r_eq: float
    e_eq: float
    curvature: float


def equilibrium_bond_length(
    omega_ev: float,
    lambda_x: float,
    r_lo: float = 0.60,
    r_hi: float = 0.90,
    spacing: float = 0.005,
    encoding: EncodingChoice = EncodingChoice(),
) -> EquilibriumFit:
    """Exact ground energy on a uniform bond-length grid, refined by a
    parabola through the minimum and its two neighbors."""
    n_steps = int(round((r_hi - r_lo) / spacing))
    grid = r_lo + spacing * np.arange(n_steps + 1)
    cav = CavityParams.from_ev(omega_ev, lambda_x=lambda_x)
    energies = []
    for r in grid:
        ints = compute_sto3g_h2(Geometry.h2(float(r)))
        plan = encoding.plan_for(ints, cav)
        h = encode_hamiltonian(ints, cav, plan)
        energies.append(fci_solve(h, photon_number_observable(plan)).energy)
    energies = np.asarray(energies)
    i = int(np.argmin(energies))
    if i == 0 or i == len(grid) - 1:
        raise ValueError(
            f"energy minimum sits at the grid edge (R={grid[i]:.3f}); widen [r_lo, r_hi]"
        )
    # parabola through the three bracketing points
    e_m, e_0, e_p = energies[i - 1], energies[i], energies[i + 1]
    denom = e_p - 2.0 * e_0 + e_m
    shift = 0.5 * spacing * (e_m - e_p) / denom
    r_eq = float(grid[i] + shift)
    e_eq = float(e_0 - 0.125 * (e_m - e_p) ** 2 / denom)
    return EquilibriumFit(r_eq=r_eq, e_eq=e_eq, curvature=float(denom / spacing**2))


_STAGE_SHORT = (
    ("raw", "raw"),
    ("readout_corrected", "ro"),
    ("zne", "zne"),
    ("rs", "rs"),
    ("rzne", "rzne"),
)

CSV_COLUMNS = (
    "R",
    "lambda_x",
    "E_fci",
    "E_raw",
    "E_ro",
    "E_zne",
    "E_rs",
    "E_rzne",
    "rmse_raw",
    "rmse_ro",
    "rmse_zne",
    "rmse_rs",
    "rmse_rzne",
    "n_fci",
    "n_raw",
    "n_ro",
    "n_zne",
    "n_rs",
    "n_rzne",
    "iterations_mean",
    "iterations_std",
)


@dataclass(frozen=True)
class ScanRow:
    """One grid point; energy/photon cells are None when the stage was
    not requested, and every numeric cell is NaN when the point failed."""

    r_angstrom: float
    lambda_x: float
    e_fci: float
    e_raw: float | None
    e_ro: float | None
    e_zne: float | None
    e_rs: float | None
    e_rzne: float | None
    rmse_raw: float | None
    rmse_ro: float | None
    rmse_zne: float | None
    rmse_rs: float | None
    rmse_rzne: float | None
    n_fci: float | None
    n_raw: float | None
    n_ro: float | None
    n_zne: float | None
    n_rs: float | None
    n_rzne: float | None
    iterations_mean: float
    iterations_std: float
    error: str | None = None

    def csv_cells(self) -> tuple:
        return (
            self.r_angstrom,
            self.lambda_x,
            self.e_fci,
            self.e_raw,
            self.e_ro,
            self.e_zne,
            self.e_rs,
            self.e_rzne,
            self.rmse_raw,
            self.rmse_ro,
            self.rmse_zne,
            self.rmse_rs,
            self.rmse_rzne,
            self.n_fci,
            self.n_raw,
            self.n_ro,
            self.n_zne,
            self.n_rs,
            self.n_rzne,
            self.iterations_mean,
            self.iterations_std,
        )


@dataclass(frozen=True)
class ScanResult:
    rows: tuple[ScanRow, ...]
    manifest: dict


def _failed_row(r: float, lambda_x: float, message: str) -> ScanRow:
    nan = float("nan")
    return ScanRow(
        r_angstrom=r,
        lambda_x=lambda_x,
        e_fci=nan,
        e_raw=nan,
        e_ro=nan,
        e_zne=nan,
        e_rs=nan,
        e_rzne=nan,
        rmse_raw=nan,
        rmse_ro=nan,
        rmse_zne=nan,
        rmse_rs=nan,
        rmse_rzne=nan,
        n_fci=nan,
        n_raw=nan,
        n_ro=nan,
        n_zne=nan,
        n_rs=nan,
        n_rzne=nan,
        iterations_mean=nan,
        iterations_std=nan,
        error=message,
    )


def run_point(
    r: float,
    lambda_x: float,
    omega_ev: float,
    noise: NoiseModel,
    cfg: VqeConfig,
    encoding: EncodingChoice = EncodingChoice(),
    measure_photon: bool = True,
) -> ScanRow:
    """Full single-point pipeline: integrals, encoding, exact baseline,
    optimization, and (optionally) the photon number at the optimum."""
    ints = compute_sto3g_h2(Geometry.h2(r))
    cav = CavityParams.from_ev(omega_ev, lambda_x=lambda_x)
    plan = encoding.plan_for(ints, cav)
    h = encode_hamiltonian(ints, cav, plan)
    nop = photon_number_observable(plan)
    fci = fci_solve(h, nop)
    circuit = synthesize(build_pucc_pool(ints, cav, plan))
    result = vqe_minimize(h, circuit, noise, cfg)

    energy = {short: getattr(result.energy, field) for field, short in _STAGE_SHORT}
    rmse = {short: result.rmse.get(field) for field, short in _STAGE_SHORT}
    photon = {short: None for _, short in _STAGE_SHORT}
    if measure_photon:
        mean, _, _ = measure_photon_number(nop, circuit, result.params_opt, noise, cfg)
        photon = {short: getattr(mean, field) for field, short in _STAGE_SHORT}

    iters = np.asarray(result.iterations, dtype=float)
    return ScanRow(
        r_angstrom=float(r),
        lambda_x=float(lambda_x),
        e_fci=fci.energy,
        e_raw=energy["raw"],
        e_ro=energy["ro"],
        e_zne=energy["zne"],
        e_rs=energy["rs"],
        e_rzne=energy["rzne"],
        rmse_raw=rmse["raw"],
        rmse_ro=rmse["ro"],
        rmse_zne=rmse["zne"],
        rmse_rs=rmse["rs"],
        rmse_rzne=rmse["rzne"],
        n_fci=fci.photon_number if measure_photon else None,
        n_raw=photon["raw"],
        n_ro=photon["ro"],
        n_zne=photon["zne"],
        n_rs=photon["rs"],
        n_rzne=photon["rzne"],
        iterations_mean=float(iters.mean()),
        iterations_std=float(iters.std(ddof=1)) if len(iters) > 1 else 0.0,
        error=None,
    )


def _package_version() -> str:
    try:
        from importlib.metadata import version

        return version("polarvqe")
    except Exception:
        return "unknown"


def _manifest(kind: str, points, noise: NoiseModel, cfg: VqeConfig,
              encoding: EncodingChoice, omega_ev: float) -> dict:
    return {
        "kind": kind,
        "omega_ev": omega_ev,
        "points": points,
        "config": dataclasses.asdict(cfg),
        "noise": dataclasses.asdict(noise),
        "encoding": dataclasses.asdict(encoding),
        "seed": cfg.seed,
        "versions": {
            "python": platform.python_version(),
            "numpy": np.__version__,
            "scipy": scipy.__version__,
            "polarvqe": _package_version(),
        },
        "errors": [],
    }


def _run_grid(jobs, manifest, max_workers):
    """Run per-point callables, preserving grid order and isolating
    per-point failures as NaN rows plus manifest error entries."""

    def guarded(index_job):
        index, (r, lam, job) = index_job
        try:
            return index, job()
        except Exception as exc:  # noqa: BLE001 - the row records the cause
            manifest["errors"].append(
                {"index": index, "R": r, "lambda_x": lam, "message": str(exc)}
            )
            return index, _failed_row(r, lam, str(exc))

    with ThreadPoolExecutor(max_workers=max_workers) as pool:
        indexed = list(pool.map(guarded, enumerate(jobs)))
    rows = tuple(row for _, row in sorted(indexed, key=lambda t: t[0]))
    # pool.map with a late error entry is unordered in time but the sort
    # restores grid order; errors keep their grid index for the same reason
    manifest["errors"].sort(key=lambda e: e["index"])
    return rows


def scan_dissociation(
    r_values,
    omega_ev: float = 2.0,
    lambda_x: float = 0.1,
    noise: NoiseModel = NoiseModel.ideal(),
    cfg: VqeConfig = VqeConfig(),
    encoding: EncodingChoice = EncodingChoice(),
    measure_photon: bool = True,
    max_workers: int | None = None,
) -> ScanResult:
    """Ground-state pipeline at fixed coupling across bond lengths."""
    r_values = [float(r) for r in r_values]
    manifest = _manifest("dissociation", {"R": r_values, "lambda_x": lambda_x},
                         noise, cfg, encoding, omega_ev)
    jobs = [
        (r, lambda_x,
         lambda r=r: run_point(r, lambda_x, omega_ev, noise, cfg, encoding, measure_photon))
        for r in r_values
    ]
    rows = _run_grid(jobs, manifest, max_workers)
    return ScanResult(rows=rows, manifest=manifest)


def scan_coupling(
    lambda_values,
    omega_ev: float = 20.0,
    noise: NoiseModel = NoiseModel.ideal(),
    cfg: VqeConfig = VqeConfig(),
    encoding: EncodingChoice = EncodingChoice(),
    measure_photon: bool = True,
    max_workers: int | None = None,
) -> ScanResult:
    """Ground-state pipeline across coupling strengths, each point at
    the equilibrium bond length of its own coupling."""
    lambda_values = [float(lam) for lam in lambda_values]
    manifest = _manifest("coupling", {"lambda_x": lambda_values}, noise, cfg,
                         encoding, omega_ev)

    def point(lam: float) -> ScanRow:
        r_eq = equilibrium_bond_length(omega_ev, lam, encoding=encoding).r_eq
        return run_point(r_eq, lam, omega_ev, noise, cfg, encoding, measure_photon)

    jobs = [(float("nan"), lam, lambda lam=lam: point(lam)) for lam in lambda_values]
    rows = _run_grid(jobs, manifest, max_workers)
    return ScanResult(rows=rows, manifest=manifest)


# -- output files ---------------------------------------------------------------


def _cell(value) -> str:
    if value is None:
        return ""
    return repr(float(value))


def write_csv(rows, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_COLUMNS)
        for row in rows:
            writer.writerow([_cell(v) for v in row.csv_cells()])


def write_manifest(manifest: dict, path) -> None:
    with open(path, "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
