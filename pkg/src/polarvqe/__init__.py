"""Polaritonic VQE at desk scale.

Simulates the ground state of H2 coupled to a single optical cavity mode
on an emulated noisy quantum device: analytic STO-3G integrals, a
Pauli-Fierz Hamiltonian in the coherent-state basis, polaritonic unitary
coupled-cluster circuits, a density-matrix noise simulator, and a
composite error-mitigation stack (readout / ZNE / reference rescaling).
"""

from .ansatz import build_pucc_pool, synthesize
from .chemistry import (
    CavityParams,
    Geometry,
    IntegralSet,
    compute_sto3g_h2,
    load_integrals,
    qed_hf_reference,
    save_integrals,
)
from .config import RunSettings, load_settings, parse_settings
from .hamiltonian import (
    EncodingPlan,
    build_plan,
    encode_hamiltonian,
    photon_number_observable,
)
from .mitigation import MitigatedEstimate
from .pauli import PauliSum
from .scans import (
    EncodingChoice,
    ScanResult,
    ScanRow,
    equilibrium_bond_length,
    scan_coupling,
    scan_dissociation,
    write_csv,
    write_manifest,
)
from .simulator import NoiseModel, symmetric_confusion
from .vqe import (
    FciSolution,
    VqeConfig,
    VqeResult,
    fci_solve,
    measure_photon_number,
    vqe_minimize,
    xgate_ablation,
)

__version__ = "0.1.0"

__all__ = [
    "CavityParams",
    "EncodingChoice",
    "EncodingPlan",
    "FciSolution",
    "Geometry",
    "IntegralSet",
    "MitigatedEstimate",
    "NoiseModel",
    "PauliSum",
    "RunSettings",
    "ScanResult",
    "ScanRow",
    "VqeConfig",
    "VqeResult",
    "build_plan",
    "build_pucc_pool",
    "compute_sto3g_h2",
    "encode_hamiltonian",
    "equilibrium_bond_length",
    "fci_solve",
    "load_integrals",
    "load_settings",
    "measure_photon_number",
    "parse_settings",
    "photon_number_observable",
    "qed_hf_reference",
    "save_integrals",
    "scan_coupling",
    "scan_dissociation",
    "symmetric_confusion",
    "synthesize",
    "vqe_minimize",
    "write_csv",
    "write_manifest",
    "xgate_ablation",
]
