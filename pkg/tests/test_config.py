"""Config parsing tests: defaults, full round trip, strictness."""

import pytest

from polarvqe.config import load_settings, parse_settings, settings_with_seed

FULL = """
[molecule]
R_angstrom = 0.9

[cavity]
omega_ev = 20.0
lambda_x = 0.05
lambda_y = 0.01
lambda_z = 0.02
n_photon_max = 1

[encoding]
mapping = jw
boson_encoding = single
taper = none
sign_flip = false

[noise]
p2 = 0.01
p1 = 0.0005
gamma_ad = 0.0005
readout_flip = 0.02

[vqe]
shots = 5000
repeats = 4
ref_repeats = 10
zne_factors = 1, 3, 5
mitigation = readout, zne
maxiter = 120
initial_step = 0.2
n_restarts = 2

[output]
csv = out.csv
json = run.json
seed = 99
"""


class TestParsing:
    def test_full_file(self):
        s = parse_settings(FULL)
        assert s.r_angstrom == 0.9
        assert s.cavity.lambda_vec == (0.05, 0.01, 0.02)
        assert s.cavity.omega == pytest.approx(20.0 / 27.211386245988)
        assert s.encoding.fermion_mapping == "jw"
        assert s.encoding.taper == "none"
        assert s.encoding.sign_flip is False
        assert s.noise.p2 == 0.01
        assert s.noise.readout[0][0] == pytest.approx((0.98, 0.02))
        assert s.vqe.shots == 5000
        assert s.vqe.n_repeats == 4
        assert s.vqe.zne_factors == (1, 3, 5)
        assert s.vqe.mitigation == ("readout", "zne")
        assert s.vqe.maxiter == 120
        assert s.vqe.initial_step == 0.2
        assert s.vqe.n_restarts == 2
        assert s.vqe.seed == 99
        assert s.csv_path == "out.csv"
        assert s.json_path == "run.json"

    def test_empty_text_gives_defaults(self):
        s = parse_settings("")
        assert s.r_angstrom == 0.735
        assert s.cavity.lambda_vec == (0.0, 0.0, 0.0)
        assert s.encoding.fermion_mapping == "bk"
        assert s.noise.p2 == 0.0 and s.noise.readout == ()
        assert s.vqe.shots == 20000
        assert s.vqe.zne_factors == (1, 3, 5, 51, 101, 201)
        assert s.csv_path is None and s.json_path is None

    def test_exact_shots_keyword(self):
        s = parse_settings("[vqe]\nshots = exact\n")
        assert s.vqe.shots is None

    def test_unknown_section_rejected(self):
        with pytest.raises(ValueError, match=r"unknown config section \[molecules\]"):
            parse_settings("[molecules]\nR_angstrom = 0.7\n")

    def test_unknown_key_rejected(self):
        with pytest.raises(ValueError, match=r"unknown keys in \[vqe\]: shot"):
            parse_settings("[vqe]\nshot = 100\n")

    def test_invalid_values_propagate(self):
        with pytest.raises(ValueError):
            parse_settings("[noise]\np2 = 1.5\n")
        with pytest.raises(ValueError):
            parse_settings("[vqe]\nmitigation = rzne\n")

    def test_zero_readout_flip_means_no_confusion(self):
        s = parse_settings("[noise]\nreadout_flip = 0.0\np2 = 0.01\n")
        assert s.noise.readout == ()

    def test_load_from_file(self, tmp_path):
        path = tmp_path / "run.ini"
        path.write_text(FULL)
        assert load_settings(path) == parse_settings(FULL)

    def test_seed_override(self):
        s = parse_settings(FULL)
        assert settings_with_seed(s, 7).vqe.seed == 7
        assert settings_with_seed(s, None).vqe.seed == 99
