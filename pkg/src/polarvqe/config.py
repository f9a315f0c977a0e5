"""Run configuration from INI-style text.

Sections and keys:

    [molecule]  R_angstrom
    [cavity]    omega_ev, lambda_x, lambda_y, lambda_z, n_photon_max
    [encoding]  mapping, boson_encoding, taper, sign_flip
    [noise]     p2, p1, gamma_ad, readout_flip
    [vqe]       shots, repeats, ref_repeats, zne_factors, mitigation,
                maxiter, initial_step, n_restarts
    [output]    csv, json, seed

Every section and key is optional; omitted values fall back to the
library defaults (equilibrium geometry, 2 eV cavity, zero coupling,
tapered encoding, ideal device, default measurement protocol).  Unknown
sections or keys are rejected so typos fail loudly instead of silently
running the defaults.  `shots = exact` selects exact-shot mode.
"""

from __future__ import annotations

import configparser
import dataclasses
from dataclasses import dataclass

from .chemistry import CavityParams
from .scans import EncodingChoice
from .simulator import NoiseModel, symmetric_confusion
from .vqe import VqeConfig

_KNOWN_KEYS = {
    "molecule": {"r_angstrom"},
    "cavity": {"omega_ev", "lambda_x", "lambda_y", "lambda_z", "n_photon_max"},
    "encoding": {"mapping", "boson_encoding", "taper", "sign_flip"},
    "noise": {"p2", "p1", "gamma_ad", "readout_flip"},
    "vqe": {
        "shots",
        "repeats",
        "ref_repeats",
        "zne_factors",
        "mitigation",
        "maxiter",
        "initial_step",
        "n_restarts",
    },
    "output": {"csv", "json", "seed"},
}


@dataclass(frozen=True)
class RunSettings:
    """Everything one run needs, assembled from a config file."""

    r_angstrom: float
    cavity: CavityParams
    encoding: EncodingChoice
    noise: NoiseModel
    vqe: VqeConfig
    csv_path: str | None
    json_path: str | None


def _check_keys(parser: configparser.ConfigParser) -> None:
    for section in parser.sections():
        if section not in _KNOWN_KEYS:
            raise ValueError(f"unknown config section [{section}]")
        unknown = set(parser[section]) - _KNOWN_KEYS[section]
        if unknown:
            raise ValueError(
                f"unknown keys in [{section}]: {', '.join(sorted(unknown))}"
            )


def _int_tuple(text: str) -> tuple[int, ...]:
    return tuple(int(tok) for tok in text.replace(",", " ").split())


def _str_tuple(text: str) -> tuple[str, ...]:
    return tuple(tok for tok in text.replace(",", " ").split())


def parse_settings(text: str) -> RunSettings:
    parser = configparser.ConfigParser()
    parser.read_string(text)
    _check_keys(parser)

    def get(section: str, key: str, cast, default):
        if parser.has_option(section, key):
            return cast(parser.get(section, key))
        return default

    r_angstrom = get("molecule", "r_angstrom", float, 0.735)

    cavity = CavityParams.from_ev(
        get("cavity", "omega_ev", float, 2.0),
        lambda_x=get("cavity", "lambda_x", float, 0.0),
        lambda_y=get("cavity", "lambda_y", float, 0.0),
        lambda_z=get("cavity", "lambda_z", float, 0.0),
        n_photon_max=get("cavity", "n_photon_max", int, 1),
    )

    bool_of = configparser.ConfigParser.BOOLEAN_STATES.__getitem__
    encoding = EncodingChoice(
        fermion_mapping=get("encoding", "mapping", str, "bk"),
        boson_encoding=get("encoding", "boson_encoding", str, "single"),
        taper=get("encoding", "taper", str, "parity"),
        sign_flip=get("encoding", "sign_flip", lambda s: bool_of(s.lower()), True),
    )

    readout_flip = get("noise", "readout_flip", float, 0.0)
    noise = NoiseModel(
        p2=get("noise", "p2", float, 0.0),
        p1=get("noise", "p1", float, 0.0),
        gamma_ad=get("noise", "gamma_ad", float, 0.0),
        readout=(symmetric_confusion(readout_flip),) if readout_flip > 0 else (),
    )

    def shots_of(textval: str):
        return None if textval.strip().lower() == "exact" else int(textval)

    defaults = VqeConfig()
    vqe = VqeConfig(
        shots=get("vqe", "shots", shots_of, defaults.shots),
        n_repeats=get("vqe", "repeats", int, defaults.n_repeats),
        ref_repeats=get("vqe", "ref_repeats", int, defaults.ref_repeats),
        zne_factors=get("vqe", "zne_factors", _int_tuple, defaults.zne_factors),
        mitigation=get("vqe", "mitigation", _str_tuple, defaults.mitigation),
        maxiter=get("vqe", "maxiter", int, defaults.maxiter),
        initial_step=get("vqe", "initial_step", float, defaults.initial_step),
        n_restarts=get("vqe", "n_restarts", int, defaults.n_restarts),
        seed=get("output", "seed", int, defaults.seed),
    )

    return RunSettings(
        r_angstrom=r_angstrom,
        cavity=cavity,
        encoding=encoding,
        noise=noise,
        vqe=vqe,
        csv_path=get("output", "csv", str, None),
        json_path=get("output", "json", str, None),
    )


def load_settings(path) -> RunSettings:
    with open(path) as fh:
        return parse_settings(fh.read())


def settings_with_seed(settings: RunSettings, seed: int | None) -> RunSettings:
    """Settings with the seed overridden (CLI flags beat the file)."""
    if seed is None:
        return settings
    return dataclasses.replace(
        settings, vqe=dataclasses.replace(settings.vqe, seed=seed)
    )
