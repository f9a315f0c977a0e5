"""Command-line client for the pipeline.

Settings resolve in three layers: library defaults, then an optional
INI file (--config), then explicit flags.  Compute subcommands run in
process by default; --server URL posts the identical request to a
running service instead, so both paths produce the same numbers.
"""

from __future__ import annotations

import dataclasses
import json as jsonlib

import click

from . import service
from .chemistry import EV_PER_HARTREE, CavityParams
from .config import RunSettings, load_settings, parse_settings
from .scans import EncodingChoice, write_csv, write_manifest
from .simulator import NoiseModel, symmetric_confusion


def _options(*opts):
    def deco(f):
        for opt in reversed(opts):
            f = opt(f)
        return f

    return deco


common_options = _options(
    click.option("--config", "config_path", default=None,
                 type=click.Path(exists=True, dir_okay=False),
                 help="INI settings file; explicit flags override it."),
    click.option("--server", default=None, metavar="URL",
                 help="POST to a running service instead of computing in process."),
)

molecule_options = _options(
    click.option("--r", "r_angstrom", type=float, default=None,
                 help="H-H bond length in angstrom."),
)

cavity_options = _options(
    click.option("--omega-ev", type=float, default=None,
                 help="Cavity photon energy in eV."),
    click.option("--lambda-x", type=float, default=None,
                 help="Light-matter coupling along the bond axis."),
    click.option("--lambda-y", type=float, default=None),
    click.option("--lambda-z", type=float, default=None),
    click.option("--n-photon-max", type=int, default=None,
                 help="Photon number cutoff."),
)

encoding_options = _options(
    click.option("--mapping", type=click.Choice(["jw", "bk"]), default=None,
                 help="Fermion-to-qubit mapping."),
    click.option("--boson-encoding", type=click.Choice(["single", "unary"]),
                 default=None, help="Photon mode encoding."),
    click.option("--taper", type=click.Choice(["none", "parity"]), default=None,
                 help="Symmetry tapering of the qubit register."),
    click.option("--sign-flip/--no-sign-flip", "sign_flip", default=None,
                 help="Fold the reference X gates into Hamiltonian signs."),
)

noise_options = _options(
    click.option("--device-noise", is_flag=True, default=False,
                 help="Noisy-device preset: p2=0.01, p1=5e-4, gamma=5e-4, "
                      "readout flip 0.01.  Individual flags still override."),
    click.option("--p2", type=float, default=None,
                 help="Two-qubit depolarizing probability per CNOT."),
    click.option("--p1", type=float, default=None,
                 help="One-qubit depolarizing probability per gate."),
    click.option("--gamma-ad", type=float, default=None,
                 help="Amplitude-damping strength per one-qubit gate."),
    click.option("--readout-flip", type=float, default=None,
                 help="Symmetric readout bit-flip probability."),
)

protocol_options = _options(
    click.option("--shots", default=None,
                 help="Shots per circuit evaluation, or 'exact'."),
    click.option("--repeats", type=int, default=None,
                 help="Independent repeats at the optimum."),
    click.option("--ref-repeats", type=int, default=None,
                 help="Repeats for the rescaling reference."),
    click.option("--zne-factors", default=None,
                 help="Comma-separated odd CNOT folding factors."),
    click.option("--mitigation", default=None,
                 help="Comma-separated stages from readout,zne,rs,rzne; "
                      "'none' disables mitigation."),
    click.option("--maxiter", type=int, default=None,
                 help="Optimizer iteration cap per restart leg."),
    click.option("--initial-step", type=float, default=None,
                 help="Initial simplex edge length."),
    click.option("--n-restarts", type=int, default=None,
                 help="Optimizer restart legs from the best point."),
    click.option("--seed", type=int, default=None, help="Base RNG seed."),
)

output_options = _options(
    click.option("--csv", "csv_path", default=None,
                 type=click.Path(dir_okay=False), help="Write result rows as CSV."),
    click.option("--json", "json_path", default=None,
                 type=click.Path(dir_okay=False),
                 help="Write the run manifest (or full response) as JSON."),
)


def _resolve(config_path: str | None, flags: dict) -> RunSettings:
    """Layer explicit flags over the config file over the defaults."""
    try:
        return _resolve_inner(config_path, flags)
    except ValueError as exc:
        raise click.ClickException(str(exc)) from exc


def _resolve_inner(config_path: str | None, flags: dict) -> RunSettings:
    settings = load_settings(config_path) if config_path else parse_settings("")

    def pick(name, current):
        value = flags.get(name)
        return current if value is None else value

    if flags.get("r_angstrom") is not None:
        settings = dataclasses.replace(settings, r_angstrom=flags["r_angstrom"])

    cav = settings.cavity
    if any(flags.get(k) is not None
           for k in ("omega_ev", "lambda_x", "lambda_y", "lambda_z", "n_photon_max")):
        settings = dataclasses.replace(
            settings,
            cavity=CavityParams.from_ev(
                pick("omega_ev", cav.omega * EV_PER_HARTREE),
                lambda_x=pick("lambda_x", cav.lambda_vec[0]),
                lambda_y=pick("lambda_y", cav.lambda_vec[1]),
                lambda_z=pick("lambda_z", cav.lambda_vec[2]),
                n_photon_max=pick("n_photon_max", cav.n_photon_max),
            ),
        )

    enc = settings.encoding
    if any(flags.get(k) is not None
           for k in ("mapping", "boson_encoding", "taper", "sign_flip")):
        settings = dataclasses.replace(
            settings,
            encoding=EncodingChoice(
                fermion_mapping=pick("mapping", enc.fermion_mapping),
                boson_encoding=pick("boson_encoding", enc.boson_encoding),
                taper=pick("taper", enc.taper),
                sign_flip=pick("sign_flip", enc.sign_flip),
            ),
        )

    noi = settings.noise
    # config only ever builds symmetric confusion matrices, so the flip
    # probability can be read back off the first off-diagonal
    flip = float(noi.readout[0][0][1]) if noi.readout else 0.0
    base = {"p2": noi.p2, "p1": noi.p1, "gamma_ad": noi.gamma_ad, "flip": flip}
    if flags.get("device_noise"):
        base = {"p2": 0.01, "p1": 5e-4, "gamma_ad": 5e-4, "flip": 0.01}
    if flags.get("device_noise") or any(
        flags.get(k) is not None for k in ("p2", "p1", "gamma_ad", "readout_flip")
    ):
        flip = pick("readout_flip", base["flip"])
        settings = dataclasses.replace(
            settings,
            noise=NoiseModel(
                p2=pick("p2", base["p2"]),
                p1=pick("p1", base["p1"]),
                gamma_ad=pick("gamma_ad", base["gamma_ad"]),
                readout=(symmetric_confusion(flip),) if flip > 0 else (),
            ),
        )

    vq = settings.vqe
    protocol_keys = ("shots", "repeats", "ref_repeats", "zne_factors", "mitigation",
                     "maxiter", "initial_step", "n_restarts", "seed")
    if any(flags.get(k) is not None for k in protocol_keys):
        shots = vq.shots
        if flags.get("shots") is not None:
            text = flags["shots"].strip().lower()
            shots = None if text == "exact" else int(text)
        mitigation = vq.mitigation
        if flags.get("mitigation") is not None:
            text = flags["mitigation"].strip().lower()
            mitigation = () if text == "none" else tuple(text.replace(",", " ").split())
        zne_factors = vq.zne_factors
        if flags.get("zne_factors") is not None:
            zne_factors = tuple(
                int(tok) for tok in flags["zne_factors"].replace(",", " ").split()
            )
        settings = dataclasses.replace(
            settings,
            vqe=dataclasses.replace(
                vq,
                shots=shots,
                n_repeats=pick("repeats", vq.n_repeats),
                ref_repeats=pick("ref_repeats", vq.ref_repeats),
                zne_factors=zne_factors,
                mitigation=mitigation,
                maxiter=pick("maxiter", vq.maxiter),
                initial_step=pick("initial_step", vq.initial_step),
                n_restarts=pick("n_restarts", vq.n_restarts),
                seed=pick("seed", vq.seed),
            ),
        )

    for key in ("csv_path", "json_path"):
        if flags.get(key) is not None:
            settings = dataclasses.replace(settings, **{key: flags[key]})
    return settings


def _specs(settings: RunSettings):
    """Scalar request specs from resolved settings."""
    cav = settings.cavity
    cavity = service.CavitySpec(
        omega_ev=cav.omega * EV_PER_HARTREE,
        lambda_x=cav.lambda_vec[0],
        lambda_y=cav.lambda_vec[1],
        lambda_z=cav.lambda_vec[2],
        n_photon_max=cav.n_photon_max,
    )
    encoding = service.EncodingSpec(
        mapping=settings.encoding.fermion_mapping,
        boson_encoding=settings.encoding.boson_encoding,
        taper=settings.encoding.taper,
        sign_flip=settings.encoding.sign_flip,
    )
    noi = settings.noise
    flip = float(noi.readout[0][0][1]) if noi.readout else 0.0
    noise = service.NoiseSpec(p2=noi.p2, p1=noi.p1, gamma_ad=noi.gamma_ad,
                              readout_flip=flip)
    vq = settings.vqe
    protocol = service.ProtocolSpec(
        shots=vq.shots,
        repeats=vq.n_repeats,
        ref_repeats=vq.ref_repeats,
        zne_factors=vq.zne_factors,
        mitigation=vq.mitigation,
        maxiter=vq.maxiter,
        initial_step=vq.initial_step,
        n_restarts=vq.n_restarts,
        seed=vq.seed,
    )
    return service.MoleculeSpec(r_angstrom=settings.r_angstrom), cavity, encoding, noise, protocol


def _dispatch(server: str | None, path: str, req, response_model, handler):
    if server is None:
        try:
            return handler(req)
        except ValueError as exc:
            raise click.ClickException(str(exc)) from exc
    import httpx

    resp = httpx.post(server.rstrip("/") + path,
                      json=req.model_dump(mode="json"), timeout=None)
    if resp.status_code != 200:
        raise click.ClickException(f"{path} returned {resp.status_code}: {resp.text}")
    return response_model.model_validate(resp.json())


_STAGE_LABELS = ("raw", "ro", "zne", "rs", "rzne")


def _echo_stages(title: str, values: service.StageValues,
                 reference: float, unit: str = "mHa") -> None:
    click.echo(title)
    for name in _STAGE_LABELS:
        value = getattr(values, name)
        if value is None:
            continue
        err = (value - reference) * (1000.0 if unit == "mHa" else 1.0)
        click.echo(f"  {name:>4}  {value:+.8f}   error {err:+9.3f} {unit}")


def _final_energy(row: service.ScanRowModel) -> float | None:
    for name in ("e_rzne", "e_rs", "e_zne", "e_ro", "e_raw"):
        value = getattr(row, name)
        if value is not None:
            return value
    return None


def _echo_scan(resp: service.ScanResponse) -> None:
    click.echo(f"{'R':>7} {'lambda_x':>9} {'E_fci':>13} {'E_final':>13} {'err_mHa':>9}")
    for row in resp.rows:
        if row.error is not None:
            click.echo(f"{row.r_angstrom:7.3f} {row.lambda_x:9.3f}   FAILED: {row.error}")
            continue
        final = _final_energy(row)
        err = (final - row.e_fci) * 1000.0 if final is not None else float("nan")
        final_text = f"{final:13.8f}" if final is not None else " " * 13
        click.echo(f"{row.r_angstrom:7.3f} {row.lambda_x:9.3f} {row.e_fci:13.8f} "
                   f"{final_text} {err:9.3f}")


def _write_scan_outputs(resp: service.ScanResponse, settings: RunSettings) -> None:
    if settings.csv_path:
        write_csv([row.to_row() for row in resp.rows], settings.csv_path)
        click.echo(f"wrote {settings.csv_path}")
    if settings.json_path:
        write_manifest(resp.manifest, settings.json_path)
        click.echo(f"wrote {settings.json_path}")


def _float_list(text: str) -> list[float]:
    values = [float(tok) for tok in text.replace(",", " ").split()]
    if not values:
        raise click.ClickException("expected a comma-separated list of numbers")
    return values


@click.group()
def main() -> None:
    """Polaritonic ground states of H2 in an optical cavity on a noisy
    emulated quantum device."""


@main.command()
@common_options
@molecule_options
@cavity_options
@click.option("--output", "output_path", default=None,
              type=click.Path(dir_okay=False), help="Write the integral file here.")
def integrals(config_path, server, output_path, **flags) -> None:
    """Compute electronic integrals and print or save the integral file."""
    settings = _resolve(config_path, flags)
    molecule, cavity, _, _, _ = _specs(settings)
    req = service.IntegralsRequest(molecule=molecule, cavity=cavity)
    resp = _dispatch(server, "/integrals", req, service.IntegralsResponse,
                     service.handle_integrals)
    if output_path:
        with open(output_path, "w") as fh:
            fh.write(resp.text)
        click.echo(f"n_spatial = {resp.n_spatial}")
        click.echo(f"E_rhf     = {resp.rhf_energy:+.10f}")
        click.echo(f"E_nuc     = {resp.nuclear_repulsion:+.10f}")
        click.echo(f"wrote {output_path}")
    else:
        click.echo(resp.text, nl=False)


@main.command()
@common_options
@molecule_options
@cavity_options
@encoding_options
def fci(config_path, server, **flags) -> None:
    """Exact ground-state energy and photon number of the mapped problem."""
    settings = _resolve(config_path, flags)
    molecule, cavity, encoding, _, _ = _specs(settings)
    req = service.FciRequest(molecule=molecule, cavity=cavity, encoding=encoding)
    resp = _dispatch(server, "/fci", req, service.FciResponse, service.handle_fci)
    click.echo(f"E_fci    = {resp.energy:+.10f}")
    click.echo(f"photons  = {resp.photon_number:.6e}")
    click.echo(f"qubits   = {resp.n_qubits}")


@main.command()
@common_options
@molecule_options
@cavity_options
@encoding_options
@noise_options
@protocol_options
@output_options
@click.option("--measure-photon/--no-measure-photon", default=True,
              help="Also estimate the photon number at the optimum.")
def vqe(config_path, server, measure_photon, **flags) -> None:
    """Run the variational optimization and report per-stage energies."""
    settings = _resolve(config_path, flags)
    molecule, cavity, encoding, noise, protocol = _specs(settings)
    req = service.VqeRequest(molecule=molecule, cavity=cavity, encoding=encoding,
                             noise=noise, protocol=protocol,
                             measure_photon=measure_photon)
    resp = _dispatch(server, "/vqe", req, service.VqeResponse, service.handle_vqe)
    click.echo(f"E_fci = {resp.fci_energy:+.10f}")
    _echo_stages("energy stages:", resp.energy, resp.fci_energy)
    if resp.photon is not None:
        _echo_stages("photon stages:", resp.photon, resp.fci_photon_number, unit="")
    click.echo(f"iterations = {list(resp.iterations)}")
    if resp.flags:
        click.echo(f"flags = {', '.join(resp.flags)}")
    if settings.json_path:
        with open(settings.json_path, "w") as fh:
            jsonlib.dump(resp.model_dump(mode="json"), fh, indent=2, sort_keys=True)
            fh.write("\n")
        click.echo(f"wrote {settings.json_path}")


@main.command("scan-r")
@common_options
@cavity_options
@encoding_options
@noise_options
@protocol_options
@output_options
@click.option("--r-values", default=None,
              help="Comma-separated bond lengths in angstrom.")
@click.option("--r-min", type=float, default=None, help="Uniform grid start.")
@click.option("--r-max", type=float, default=None, help="Uniform grid end.")
@click.option("--n-points", type=int, default=None, help="Uniform grid size.")
@click.option("--measure-photon/--no-measure-photon", default=True)
def scan_r(config_path, server, r_values, r_min, r_max, n_points,
           measure_photon, **flags) -> None:
    """Dissociation scan: one optimization per bond length."""
    if r_values is not None:
        grid = _float_list(r_values)
    elif r_min is not None and r_max is not None and n_points is not None:
        if n_points < 1:
            raise click.ClickException("--n-points must be at least 1")
        step = (r_max - r_min) / (n_points - 1) if n_points > 1 else 0.0
        grid = [r_min + i * step for i in range(n_points)]
    else:
        raise click.ClickException(
            "give --r-values or all of --r-min, --r-max, --n-points")
    settings = _resolve(config_path, flags)
    _, cavity, encoding, noise, protocol = _specs(settings)
    req = service.ScanDissociationRequest(
        r_values=grid, omega_ev=cavity.omega_ev, lambda_x=cavity.lambda_x,
        encoding=encoding, noise=noise, protocol=protocol,
        measure_photon=measure_photon)
    resp = _dispatch(server, "/scan/dissociation", req, service.ScanResponse,
                     service.handle_scan_dissociation)
    _echo_scan(resp)
    _write_scan_outputs(resp, settings)


@main.command("scan-lambda")
@common_options
@cavity_options
@encoding_options
@noise_options
@protocol_options
@output_options
@click.option("--lambda-values", default=None, required=True,
              help="Comma-separated coupling strengths along the bond axis.")
@click.option("--measure-photon/--no-measure-photon", default=True)
def scan_lambda(config_path, server, lambda_values, measure_photon, **flags) -> None:
    """Coupling scan at each coupling's own equilibrium bond length."""
    settings = _resolve(config_path, flags)
    _, cavity, encoding, noise, protocol = _specs(settings)
    req = service.ScanCouplingRequest(
        lambda_values=_float_list(lambda_values), omega_ev=cavity.omega_ev,
        encoding=encoding, noise=noise, protocol=protocol,
        measure_photon=measure_photon)
    resp = _dispatch(server, "/scan/coupling", req, service.ScanResponse,
                     service.handle_scan_coupling)
    _echo_scan(resp)
    _write_scan_outputs(resp, settings)


@main.command("ablate-xgate")
@common_options
@molecule_options
@cavity_options
@noise_options
@protocol_options
def ablate_xgate(config_path, server, **flags) -> None:
    """Compare sign-flipped against X-initialized state preparation."""
    settings = _resolve(config_path, flags)
    molecule, cavity, _, noise, protocol = _specs(settings)
    req = service.AblationRequest(molecule=molecule, cavity=cavity, noise=noise,
                                  protocol=protocol)
    resp = _dispatch(server, "/ablate-xgate", req, service.AblationResponse,
                     service.handle_ablation)
    for variant in (resp.sign_flipped, resp.x_initialized):
        click.echo(f"{variant.label}:")
        click.echo(f"  E_fci   = {variant.fci_energy:+.10f}")
        click.echo(f"  E_mean  = {variant.mean_energy:+.10f} "
                   f"+/- {variant.std_energy:.2e} ({len(variant.energies)} repeats)")
        click.echo(f"  error   = {variant.percent_error:.4f} %")
    better = (resp.sign_flipped
              if resp.sign_flipped.percent_error <= resp.x_initialized.percent_error
              else resp.x_initialized)
    click.echo(f"lower error: {better.label}")


@main.command()
@common_options
@molecule_options
@cavity_options
def resources(config_path, server, **flags) -> None:
    """Qubit, CNOT, and parameter counts for the standard encodings."""
    settings = _resolve(config_path, flags)
    molecule, cavity, _, _, _ = _specs(settings)
    req = service.ResourcesRequest(molecule=molecule, cavity=cavity)
    resp = _dispatch(server, "/resources", req, service.ResourcesResponse,
                     service.handle_resources)
    click.echo(f"{'mapping':>8} {'boson':>7} {'taper':>7} "
               f"{'qubits':>7} {'cnots':>6} {'params':>7}")
    for row in resp.rows:
        click.echo(f"{row.mapping:>8} {row.boson_encoding:>7} {row.taper:>7} "
                   f"{row.n_qubits:7d} {row.n_cnots:6d} {row.n_params:7d}")


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8000, type=int, show_default=True)
def serve(host: str, port: int) -> None:
    """Start the HTTP service."""
    import uvicorn

    uvicorn.run(service.create_app(), host=host, port=port)


if __name__ == "__main__":
    main()
