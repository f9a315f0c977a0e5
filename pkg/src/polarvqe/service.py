"""HTTP service exposing the pipeline.

Handlers are plain functions from request models to response models; the
FastAPI app is a thin routing layer over them, and the command-line
client calls the same handlers in process when no server is configured,
so both entry points run identical code paths.
"""

from __future__ import annotations

from typing import Literal

from fastapi import FastAPI, HTTPException
from pydantic import BaseModel, Field

from .ansatz import build_pucc_pool, synthesize
from .chemistry import CavityParams, Geometry, compute_sto3g_h2, format_integrals
from .circuits import count_resources
from .hamiltonian import build_plan, encode_hamiltonian, photon_number_observable
from .scans import (
    CSV_COLUMNS,
    EncodingChoice,
    ScanRow,
    scan_coupling,
    scan_dissociation,
)
from .simulator import NoiseModel, symmetric_confusion
from .vqe import (
    VqeConfig,
    fci_solve,
    measure_photon_number,
    vqe_minimize,
    xgate_ablation,
)


def _package_version() -> str:
    try:
        from importlib.metadata import version

        return version("polarvqe")
    except Exception:
        return "unknown"


# -- request models -------------------------------------------------------------


class MoleculeSpec(BaseModel):
    r_angstrom: float = 0.735


class CavitySpec(BaseModel):
    omega_ev: float = 2.0
    lambda_x: float = 0.0
    lambda_y: float = 0.0
    lambda_z: float = 0.0
    n_photon_max: int = 1

    def to_params(self) -> CavityParams:
        return CavityParams.from_ev(
            self.omega_ev,
            lambda_x=self.lambda_x,
            lambda_y=self.lambda_y,
            lambda_z=self.lambda_z,
            n_photon_max=self.n_photon_max,
        )


class EncodingSpec(BaseModel):
    mapping: Literal["jw", "bk"] = "bk"
    boson_encoding: Literal["single", "unary"] = "single"
    taper: Literal["none", "parity"] = "parity"
    sign_flip: bool = True

    def to_choice(self) -> EncodingChoice:
        return EncodingChoice(
            fermion_mapping=self.mapping,
            boson_encoding=self.boson_encoding,
            taper=self.taper,
            sign_flip=self.sign_flip,
        )


class NoiseSpec(BaseModel):
    p2: float = 0.0
    p1: float = 0.0
    gamma_ad: float = 0.0
    readout_flip: float = 0.0

    @classmethod
    def device_default(cls) -> "NoiseSpec":
        return cls(p2=0.01, p1=0.0005, gamma_ad=0.0005, readout_flip=0.01)

    def to_model(self) -> NoiseModel:
        readout = (symmetric_confusion(self.readout_flip),) if self.readout_flip > 0 else ()
        return NoiseModel(p2=self.p2, p1=self.p1, gamma_ad=self.gamma_ad, readout=readout)


class ProtocolSpec(BaseModel):
    shots: int | None = 20000
    repeats: int = 10
    ref_repeats: int = 50
    zne_factors: tuple[int, ...] = (1, 3, 5, 51, 101, 201)
    mitigation: tuple[str, ...] = ("readout", "zne", "rs", "rzne")
    maxiter: int = 500
    initial_step: float = 0.1
    n_restarts: int = 1
    seed: int = 2026

    def to_config(self) -> VqeConfig:
        return VqeConfig(
            shots=self.shots,
            n_repeats=self.repeats,
            ref_repeats=self.ref_repeats,
            zne_factors=self.zne_factors,
            mitigation=self.mitigation,
            maxiter=self.maxiter,
            initial_step=self.initial_step,
            n_restarts=self.n_restarts,
            seed=self.seed,
        )


class IntegralsRequest(BaseModel):
    molecule: MoleculeSpec = MoleculeSpec()
    cavity: CavitySpec | None = None


class FciRequest(BaseModel):
    molecule: MoleculeSpec = MoleculeSpec()
    cavity: CavitySpec = CavitySpec()
    encoding: EncodingSpec = EncodingSpec()


class VqeRequest(BaseModel):
    molecule: MoleculeSpec = MoleculeSpec()
    cavity: CavitySpec = CavitySpec()
    encoding: EncodingSpec = EncodingSpec()
    noise: NoiseSpec = NoiseSpec()
    protocol: ProtocolSpec = ProtocolSpec()
    measure_photon: bool = True


class ScanDissociationRequest(BaseModel):
    r_values: list[float] = Field(min_length=1)
    omega_ev: float = 2.0
    lambda_x: float = 0.1
    encoding: EncodingSpec = EncodingSpec()
    noise: NoiseSpec = NoiseSpec()
    protocol: ProtocolSpec = ProtocolSpec()
    measure_photon: bool = True


class ScanCouplingRequest(BaseModel):
    lambda_values: list[float] = Field(min_length=1)
    omega_ev: float = 20.0
    encoding: EncodingSpec = EncodingSpec()
    noise: NoiseSpec = NoiseSpec()
    protocol: ProtocolSpec = ProtocolSpec()
    measure_photon: bool = True


class AblationRequest(BaseModel):
    molecule: MoleculeSpec = MoleculeSpec()
    cavity: CavitySpec = CavitySpec()
    noise: NoiseSpec = NoiseSpec()
    protocol: ProtocolSpec = ProtocolSpec()


class ResourcesRequest(BaseModel):
    molecule: MoleculeSpec = MoleculeSpec()
    cavity: CavitySpec = CavitySpec()


# -- response models ------------------------------------------------------------


class HealthResponse(BaseModel):
    status: str
    version: str


class IntegralsResponse(BaseModel):
    n_spatial: int
    rhf_energy: float
    nuclear_repulsion: float
    text: str


class FciResponse(BaseModel):
    energy: float
    photon_number: float
    n_qubits: int


class StageValues(BaseModel):
    raw: float | None = None
    ro: float | None = None
    zne: float | None = None
    rs: float | None = None
    rzne: float | None = None


class VqeResponse(BaseModel):
    fci_energy: float
    fci_photon_number: float
    energy: StageValues
    rmse: StageValues
    photon: StageValues | None
    iterations: list[int]
    flags: list[str]
    params: list[float]


class ScanRowModel(BaseModel):
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
    error: str | None

    def to_row(self) -> ScanRow:
        return ScanRow(**self.model_dump())


class ScanResponse(BaseModel):
    columns: list[str]
    rows: list[ScanRowModel]
    manifest: dict


class AblationVariantModel(BaseModel):
    label: str
    fci_energy: float
    mean_energy: float
    std_energy: float
    percent_error: float
    energies: list[float]


class AblationResponse(BaseModel):
    sign_flipped: AblationVariantModel
    x_initialized: AblationVariantModel


class ResourceRow(BaseModel):
    mapping: str
    boson_encoding: str
    taper: str
    n_qubits: int
    n_cnots: int
    n_params: int


class ResourcesResponse(BaseModel):
    rows: list[ResourceRow]


# -- handlers -------------------------------------------------------------------


def handle_health() -> HealthResponse:
    return HealthResponse(status="ok", version=_package_version())


def handle_integrals(req: IntegralsRequest) -> IntegralsResponse:
    ints = compute_sto3g_h2(Geometry.h2(req.molecule.r_angstrom))
    cav = req.cavity.to_params() if req.cavity is not None else None
    return IntegralsResponse(
        n_spatial=ints.n_spatial,
        rhf_energy=ints.rhf_energy(),
        nuclear_repulsion=ints.e_nuc,
        text=format_integrals(ints, cav),
    )


def _problem(molecule: MoleculeSpec, cavity: CavitySpec, encoding: EncodingSpec):
    ints = compute_sto3g_h2(Geometry.h2(molecule.r_angstrom))
    cav = cavity.to_params()
    plan = encoding.to_choice().plan_for(ints, cav)
    h = encode_hamiltonian(ints, cav, plan)
    nop = photon_number_observable(plan)
    return ints, cav, plan, h, nop


def handle_fci(req: FciRequest) -> FciResponse:
    _, _, _, h, nop = _problem(req.molecule, req.cavity, req.encoding)
    fci = fci_solve(h, nop)
    return FciResponse(energy=fci.energy, photon_number=fci.photon_number,
                       n_qubits=h.n_qubits)


def _stage_values(obj, fields=("raw", "readout_corrected", "zne", "rs", "rzne")) -> StageValues:
    raw, ro, zne, rs, rzne = (getattr(obj, f, None) for f in fields)
    return StageValues(raw=raw, ro=ro, zne=zne, rs=rs, rzne=rzne)


def handle_vqe(req: VqeRequest) -> VqeResponse:
    ints, cav, plan, h, nop = _problem(req.molecule, req.cavity, req.encoding)
    fci = fci_solve(h, nop)
    circuit = synthesize(build_pucc_pool(ints, cav, plan))
    noise = req.noise.to_model()
    cfg = req.protocol.to_config()
    result = vqe_minimize(h, circuit, noise, cfg)
    photon = None
    if req.measure_photon:
        mean, _, _ = measure_photon_number(nop, circuit, result.params_opt, noise, cfg)
        photon = _stage_values(mean)
    rmse = StageValues(
        raw=result.rmse.get("raw"),
        ro=result.rmse.get("readout_corrected"),
        zne=result.rmse.get("zne"),
        rs=result.rmse.get("rs"),
        rzne=result.rmse.get("rzne"),
    )
    return VqeResponse(
        fci_energy=fci.energy,
        fci_photon_number=fci.photon_number,
        energy=_stage_values(result.energy),
        rmse=rmse,
        photon=photon,
        iterations=list(result.iterations),
        flags=list(result.flags),
        params=list(result.params_opt),
    )


def _scan_response(result) -> ScanResponse:
    rows = [ScanRowModel(**{f: getattr(r, f) for f in ScanRowModel.model_fields}) for r in result.rows]
    return ScanResponse(columns=list(CSV_COLUMNS), rows=rows, manifest=result.manifest)


def handle_scan_dissociation(req: ScanDissociationRequest) -> ScanResponse:
    result = scan_dissociation(
        req.r_values,
        omega_ev=req.omega_ev,
        lambda_x=req.lambda_x,
        noise=req.noise.to_model(),
        cfg=req.protocol.to_config(),
        encoding=req.encoding.to_choice(),
        measure_photon=req.measure_photon,
    )
    return _scan_response(result)


def handle_scan_coupling(req: ScanCouplingRequest) -> ScanResponse:
    result = scan_coupling(
        req.lambda_values,
        omega_ev=req.omega_ev,
        noise=req.noise.to_model(),
        cfg=req.protocol.to_config(),
        encoding=req.encoding.to_choice(),
        measure_photon=req.measure_photon,
    )
    return _scan_response(result)


def handle_ablation(req: AblationRequest) -> AblationResponse:
    ints = compute_sto3g_h2(Geometry.h2(req.molecule.r_angstrom))
    cav = req.cavity.to_params()
    result = xgate_ablation(ints, cav, req.noise.to_model(), req.protocol.to_config())

    def variant(v) -> AblationVariantModel:
        return AblationVariantModel(
            label=v.label,
            fci_energy=v.fci_energy,
            mean_energy=v.mean_energy,
            std_energy=v.std_energy,
            percent_error=v.percent_error,
            energies=list(v.energies),
        )

    return AblationResponse(
        sign_flipped=variant(result.sign_flipped),
        x_initialized=variant(result.x_initialized),
    )


_RESOURCE_PLANS = (
    ("jw", "single", "none", False),
    ("bk", "single", "none", False),
    ("bk", "single", "parity", True),
)


def handle_resources(req: ResourcesRequest) -> ResourcesResponse:
    ints = compute_sto3g_h2(Geometry.h2(req.molecule.r_angstrom))
    cav = req.cavity.to_params()
    rows = []
    for mapping, boson, taper, sign_flip in _RESOURCE_PLANS:
        plan = build_plan(ints, cav, fermion_mapping=mapping, boson_encoding=boson,
                          taper=taper, sign_flip=sign_flip)
        counts = count_resources(synthesize(build_pucc_pool(ints, cav, plan)))
        rows.append(
            ResourceRow(
                mapping=mapping,
                boson_encoding=boson,
                taper=taper,
                n_qubits=counts.n_qubits,
                n_cnots=counts.n_cnots,
                n_params=counts.n_params,
            )
        )
    return ResourcesResponse(rows=rows)


# -- app ------------------------------------------------------------------------


def create_app() -> FastAPI:
    app = FastAPI(title="polarvqe", version=_package_version())

    def guarded(handler, req):
        try:
            return handler(req)
        except ValueError as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from exc

    @app.get("/health", response_model=HealthResponse)
    def health() -> HealthResponse:
        return handle_health()

    @app.post("/integrals", response_model=IntegralsResponse)
    def integrals(req: IntegralsRequest) -> IntegralsResponse:
        return guarded(handle_integrals, req)

    @app.post("/fci", response_model=FciResponse)
    def fci(req: FciRequest) -> FciResponse:
        return guarded(handle_fci, req)

    @app.post("/vqe", response_model=VqeResponse)
    def vqe(req: VqeRequest) -> VqeResponse:
        return guarded(handle_vqe, req)

    @app.post("/scan/dissociation", response_model=ScanResponse)
    def scan_r(req: ScanDissociationRequest) -> ScanResponse:
        return guarded(handle_scan_dissociation, req)

    @app.post("/scan/coupling", response_model=ScanResponse)
    def scan_lambda(req: ScanCouplingRequest) -> ScanResponse:
        return guarded(handle_scan_coupling, req)

    @app.post("/ablate-xgate", response_model=AblationResponse)
    def ablate(req: AblationRequest) -> AblationResponse:
        return guarded(handle_ablation, req)

    @app.post("/resources", response_model=ResourcesResponse)
    def resources(req: ResourcesRequest) -> ResourcesResponse:
        return guarded(handle_resources, req)

    return app
