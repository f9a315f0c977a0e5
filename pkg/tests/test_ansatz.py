"""Generator pools and ansatz synthesis.

The binding contract checked throughout: the synthesized circuit's
statevector at bound parameters equals the ordered product of dense
matrix exponentials exp(theta_k G_k) applied to the reference state.
The circuit oracle here is an independent dense gate applier, not the
package simulator.
"""

import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings
from hypothesis import strategies as st

from polarvqe.ansatz import GeneratorPool, PoolEntry, build_pucc_pool, synthesize
from polarvqe.chemistry import CavityParams, Geometry, compute_sto3g_h2
from polarvqe.circuits import count_resources, fold_cnots
from polarvqe.hamiltonian import build_plan
from polarvqe.pauli import PauliSum, index_mask

# -- dense oracle -------------------------------------------------------------

_I2 = np.eye(2, dtype=complex)
_MATS = {
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "H": np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2.0),
    "S": np.diag([1.0, 1.0j]),
    "SDG": np.diag([1.0, -1.0j]),
}
_P0 = np.diag([1.0, 0.0]).astype(complex)
_P1 = np.diag([0.0, 1.0]).astype(complex)


def embed(n, ops):
    m = np.eye(1, dtype=complex)
    for q in range(n):  # qubit 0 is the most significant index bit
        m = np.kron(m, ops.get(q, _I2))
    return m


def apply_circuit(circuit, state):
    assert circuit.is_bound()
    n = circuit.n_qubits
    for g in circuit.gates:
        if g.kind == "CNOT":
            c, t = g.qubits
            u = embed(n, {c: _P0}) + embed(n, {c: _P1, t: _MATS["X"]})
        elif g.kind == "RZ":
            u = embed(n, {g.qubits[0]: np.diag([np.exp(-0.5j * g.angle), np.exp(0.5j * g.angle)])})
        else:
            u = embed(n, {g.qubits[0]: _MATS[g.kind]})
        state = u @ state
    return state


def exponential_product_state(pool, values):
    psi = np.zeros(2**pool.n_qubits, dtype=complex)
    psi[index_mask(pool.prep_mask, pool.n_qubits)] = 1.0
    for entry in pool.entries:
        psi = scipy.linalg.expm(values[entry.param] * entry.generator.to_dense_matrix()) @ psi
    return psi


def circuit_state(pool, circuit, values):
    zero = np.zeros(2**pool.n_qubits, dtype=complex)
    zero[0] = 1.0
    return apply_circuit(circuit.bind(values), zero)


def infidelity(pool, values, order=None):
    circuit = synthesize(pool, order=order)
    entries = pool.entries
    if order is not None:
        by_label = {e.label: e for e in pool.entries}
        entries = tuple(by_label[lab] for lab in order)
        pool = GeneratorPool(pool.n_qubits, pool.prep_mask, entries, pool.dropped)
    target = exponential_product_state(pool, values)
    got = circuit_state(pool, circuit, values)
    return 1.0 - abs(np.vdot(target, got)) ** 2


# -- fixtures -----------------------------------------------------------------


@pytest.fixture(scope="module")
def ints():
    return compute_sto3g_h2(Geometry.h2(0.735))


@pytest.fixture(scope="module")
def cav():
    return CavityParams.from_ev(2.0, lambda_x=0.1)


PLAN_VARIANTS = {
    "jw-single": dict(fermion_mapping="jw", boson_encoding="single", taper="none", sign_flip=False),
    "bk-single": dict(fermion_mapping="bk", boson_encoding="single", taper="none", sign_flip=False),
    "jw-unary": dict(fermion_mapping="jw", boson_encoding="unary", taper="none", sign_flip=False),
    "bk-unary": dict(fermion_mapping="bk", boson_encoding="unary", taper="none", sign_flip=False),
    "jw-tapered": dict(fermion_mapping="jw", boson_encoding="single", taper="parity", sign_flip=True),
    "tapered-signflip": dict(fermion_mapping="bk", boson_encoding="single", taper="parity", sign_flip=True),
    "tapered-xinit": dict(fermion_mapping="bk", boson_encoding="single", taper="parity", sign_flip=False),
}


def make_pool(ints, cav, variant):
    plan = build_plan(ints, cav, **PLAN_VARIANTS[variant])
    return build_pucc_pool(ints, cav, plan)


# -- pool content -------------------------------------------------------------


class TestPoolContent:
    def test_jw_pool_has_five_parameter_classes(self, ints, cav):
        pool = make_pool(ints, cav, "jw-single")
        assert pool.n_qubits == 5
        assert pool.params() == ("t1_0_1", "tp", "tm1_0_1", "t2_0_1", "tm2_0_1")
        assert pool.labels() == (
            "single_0_1",
            "photon",
            "mixed_single_0_1_x",
            "mixed_single_0_1_y",
            "double_0_1",
            "mixed_double_0_1",
        )
        assert pool.dropped == ()

    def test_generators_are_anti_hermitian(self, ints, cav):
        for variant in PLAN_VARIANTS:
            pool = make_pool(ints, cav, variant)
            for entry in pool.entries:
                g = entry.generator.to_dense_matrix()
                assert np.max(np.abs(g + g.conj().T)) < 1e-12, (variant, entry.label)

    def test_tapered_pool_drops_sector_breaking_classes(self, ints, cav):
        pool = make_pool(ints, cav, "tapered-signflip")
        assert pool.n_qubits == 2
        assert pool.labels() == ("mixed_single_0_1", "double_0_1")
        assert pool.dropped == ("single_0_1", "photon", "mixed_double_0_1")
        assert pool.params() == ("tm1_0_1", "t2_0_1")

    def test_tapered_generators_act_on_two_qubits(self, ints, cav):
        pool = make_pool(ints, cav, "tapered-signflip")
        for entry in pool.entries:
            assert entry.generator.n_qubits == 2

    def test_plan_mismatch_rejected(self, ints, cav):
        plan = build_plan(ints, cav)
        other = CavityParams.from_ev(2.0, lambda_x=0.1, n_photon_max=3)
        ints2 = compute_sto3g_h2(Geometry.h2(0.735))
        with pytest.raises(ValueError):
            build_pucc_pool(ints2, other, plan)


# -- synthesis against the exponential-product oracle -------------------------


class TestSynthesisExactness:
    @pytest.mark.parametrize("variant", sorted(PLAN_VARIANTS))
    def test_circuit_matches_exponential_product(self, ints, cav, variant):
        pool = make_pool(ints, cav, variant)
        rng = np.random.default_rng(42)
        for _ in range(4):
            values = {p: float(v) for p, v in zip(pool.params(), rng.uniform(-2.0, 2.0, len(pool.params())))}
            assert infidelity(pool, values) < 1e-12

    def test_zero_parameters_give_reference(self, ints, cav):
        for variant in ("tapered-signflip", "tapered-xinit", "jw-single"):
            pool = make_pool(ints, cav, variant)
            circuit = synthesize(pool)
            values = {p: 0.0 for p in pool.params()}
            state = circuit_state(pool, circuit, values)
            ref = np.zeros(2**pool.n_qubits, dtype=complex)
            ref[index_mask(pool.prep_mask, pool.n_qubits)] = 1.0
            assert 1.0 - abs(np.vdot(ref, state)) ** 2 < 1e-12

    def test_reordered_pool_matches_reordered_product(self, ints, cav):
        pool = make_pool(ints, cav, "jw-single")
        order = tuple(reversed(pool.labels()))
        rng = np.random.default_rng(3)
        values = {p: float(v) for p, v in zip(pool.params(), rng.uniform(-1.5, 1.5, len(pool.params())))}
        assert infidelity(pool, values, order=order) < 1e-12

    def test_bad_order_rejected(self, ints, cav):
        pool = make_pool(ints, cav, "jw-single")
        with pytest.raises(ValueError):
            synthesize(pool, order=("photon",))

    @settings(max_examples=60, deadline=None)
    @given(t1=st.floats(-3.0, 3.0), t2=st.floats(-3.0, 3.0))
    def test_tapered_template_exact_for_all_angles(self, t1, t2):
        ints = compute_sto3g_h2(Geometry.h2(0.735))
        cav = CavityParams.from_ev(2.0, lambda_x=0.1)
        for variant in ("tapered-signflip", "tapered-xinit"):
            pool = make_pool(ints, cav, variant)
            assert infidelity(pool, {"tm1_0_1": t1, "t2_0_1": t2}) < 1e-12


# -- resources ----------------------------------------------------------------


class TestResources:
    def test_tapered_circuit_uses_two_cnots(self, ints, cav):
        for variant in ("tapered-signflip", "tapered-xinit"):
            pool = make_pool(ints, cav, variant)
            res = count_resources(synthesize(pool))
            assert (res.n_qubits, res.n_cnots, res.n_params) == (2, 2, 2)

    def test_xinit_variant_has_x_layer_and_signflip_does_not(self, ints, cav):
        count = {
            v: sum(1 for g in synthesize(make_pool(ints, cav, v)).gates if g.kind == "X")
            for v in ("tapered-signflip", "tapered-xinit")
        }
        assert count["tapered-signflip"] == 0
        assert count["tapered-xinit"] == 2

    def test_register_widths_by_encoding(self, ints, cav):
        assert make_pool(ints, cav, "jw-single").n_qubits == 5
        assert make_pool(ints, cav, "bk-single").n_qubits == 3
        assert make_pool(ints, cav, "tapered-signflip").n_qubits == 2

    def test_gate_counts_deterministic(self, ints, cav):
        a = synthesize(make_pool(ints, cav, "jw-single")).dump()
        b = synthesize(make_pool(ints, cav, "jw-single")).dump()
        assert a == b


# -- folding on a real ansatz --------------------------------------------------


class TestFolding:
    def test_fold_preserves_prepared_state(self, ints, cav):
        pool = make_pool(ints, cav, "tapered-signflip")
        circuit = synthesize(pool)
        values = {"tm1_0_1": 0.31, "t2_0_1": -0.47}
        base = circuit_state(pool, circuit, values)
        for m in (3, 5, 9):
            folded = circuit_state(pool, fold_cnots(circuit, m), values)
            assert np.max(np.abs(folded - base)) < 1e-12


# -- proportional-generator merging --------------------------------------------


class TestMerging:
    def _pool(self):
        g = PauliSum(2, {(0b11, 0b01): -0.5j, (0b11, 0b10): -0.5j})  # -i/2 (YX + XY)
        return GeneratorPool(
            n_qubits=2,
            prep_mask=0,
            entries=(
                PoolEntry("rot_a", "ta", g),
                PoolEntry("rot_b", "tb", PauliSum(2, {k: 0.5 * c for k, c in g.terms().items()})),
            ),
        )

    def test_adjacent_proportional_entries_share_rotations(self):
        pool = self._pool()
        circuit = synthesize(pool)
        rz_gates = [g for g in circuit.gates if g.kind == "RZ"]
        assert len(rz_gates) == 2  # one per Pauli term, not per pool entry
        for g in rz_gates:
            assert dict(g.angle.terms).keys() == {"ta", "tb"}
        coeffs = dict(rz_gates[0].angle.terms)
        assert coeffs["tb"] == pytest.approx(0.5 * coeffs["ta"])

    def test_merged_circuit_matches_product(self):
        pool = self._pool()
        values = {"ta": 0.83, "tb": -0.29}
        assert infidelity(pool, values) < 1e-12
