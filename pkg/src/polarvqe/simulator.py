"""Noisy circuit simulation: exact density-matrix evolution under a
gate-local noise model, plus finite-shot Pauli measurement with readout
confusion.

Noise is Markovian and attached after each gate: a two-qubit
depolarizing channel of strength p2 follows every CNOT, and a
single-qubit depolarizing channel (p1) followed by amplitude damping
(gamma_ad, |1> decays toward |0>) follows every one-qubit gate.  There
is no idle or crosstalk noise.  Runs of identical consecutive CNOTs
(the shape produced by CNOT folding) are applied as one matrix power of
the combined gate-plus-noise superoperator, so strongly folded circuits
cost no more than unfolded ones.

Measurement works on qubit-wise commuting groups: all terms of an
observable whose per-qubit letters agree wherever both are non-identity
share one basis rotation.  Per-qubit readout confusion matrices are
applied to the exact outcome distribution before sampling, and sampling
is deterministic given a seed.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass

import numpy as np

from .circuits import Circuit
from .pauli import DenseState, PauliSum, index_mask

_MAX_QUBITS = 10

Confusion = tuple[tuple[float, float], tuple[float, float]]


def as_seed_sequence(seed) -> np.random.SeedSequence:
    """Accept either entropy (int or int sequence) or an existing
    SeedSequence, so spawned children can be passed straight through."""
    if isinstance(seed, np.random.SeedSequence):
        return seed
    return np.random.SeedSequence(seed)

_I2 = np.eye(2, dtype=complex)
_GATE_MATRICES = {
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "H": np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2.0),
    "S": np.diag([1.0, 1.0j]),
    "SDG": np.diag([1.0, -1.0j]),
}
_CNOT = np.array(
    [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex
)  # first tensor factor is the control


def _rz_matrix(angle: float) -> np.ndarray:
    return np.diag([np.exp(-0.5j * angle), np.exp(0.5j * angle)])


def _gate_matrix(kind: str, angle: float | None) -> np.ndarray:
    return _rz_matrix(float(angle)) if kind == "RZ" else _GATE_MATRICES[kind]


@dataclass(frozen=True)
class NoiseModel:
    """Gate-local channel strengths and per-qubit readout confusion.

    readout holds 2x2 row-stochastic matrices (rows: true state, cols:
    reported state).  Empty means ideal readout; a single entry is
    shared by every qubit; otherwise one entry per qubit is required.
    """

    p2: float = 0.0
    p1: float = 0.0
    gamma_ad: float = 0.0
    readout: tuple[Confusion, ...] = ()

    def __post_init__(self) -> None:
        for name in ("p2", "p1", "gamma_ad"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must be a probability, got {v}")
        for conf in self.readout:
            m = np.asarray(conf, dtype=float)
            if m.shape != (2, 2) or np.any(m < 0) or np.any(m > 1):
                raise ValueError("confusion matrices must be 2x2 with entries in [0,1]")
            if np.max(np.abs(m.sum(axis=1) - 1.0)) > 1e-12:
                raise ValueError("confusion rows must sum to 1")

    @classmethod
    def ideal(cls) -> "NoiseModel":
        return cls()

    @classmethod
    def device_default(cls) -> "NoiseModel":
        """Generic emulated-device strengths: strong enough that the raw
        equilibrium energy error is tens of mHa before mitigation."""
        return cls(p2=0.01, p1=0.0005, gamma_ad=0.0005, readout=(symmetric_confusion(0.01),))

    def confusion(self, qubit: int) -> np.ndarray | None:
        if not self.readout:
            return None
        if len(self.readout) == 1:
            return np.asarray(self.readout[0], dtype=float)
        if qubit >= len(self.readout):
            raise ValueError(f"no confusion matrix for qubit {qubit}")
        return np.asarray(self.readout[qubit], dtype=float)

    def gates_noiseless(self) -> bool:
        return self.p2 == 0.0 and self.p1 == 0.0 and self.gamma_ad == 0.0


def symmetric_confusion(p_flip: float) -> Confusion:
    return ((1.0 - p_flip, p_flip), (p_flip, 1.0 - p_flip))


# -- density-matrix evolution -------------------------------------------------


def _apply_rows(tensor: np.ndarray, op: np.ndarray, axes: list[int]) -> np.ndarray:
    """Contract op's input indices with the given tensor axes."""
    k = len(axes)
    op_t = op.reshape((2,) * (2 * k))
    out = np.tensordot(op_t, tensor, axes=(list(range(k, 2 * k)), axes))
    return np.moveaxis(out, list(range(k)), axes)


@functools.lru_cache(maxsize=1024)
def _oneq_channel_superop(kind: str, angle: float | None, p1: float, gamma: float) -> np.ndarray:
    """Gate unitary, depolarizing, then amplitude damping on one qubit as
    a 4x4 superoperator on the row-major vectorized 2x2 density."""
    u = _gate_matrix(kind, angle)
    s = np.kron(u, u.conj())
    if p1:
        # rho -> (1-p) rho + p tr(rho) I/2; <vec(I), vec(rho)> = tr(rho)
        vec_id = np.eye(2, dtype=complex).reshape(-1)
        s = ((1.0 - p1) * np.eye(4, dtype=complex) + (p1 / 2.0) * np.outer(vec_id, vec_id)) @ s
    if gamma:
        k0 = np.array([[1.0, 0.0], [0.0, np.sqrt(1.0 - gamma)]], dtype=complex)
        k1 = np.array([[0.0, np.sqrt(gamma)], [0.0, 0.0]], dtype=complex)
        s = (np.kron(k0, k0.conj()) + np.kron(k1, k1.conj())) @ s
    return s


def _apply_superop_single(rho: np.ndarray, s: np.ndarray, qubit: int, n: int) -> np.ndarray:
    axes = [qubit, n + qubit]
    out = np.tensordot(s.reshape((2,) * 4), rho, axes=([2, 3], axes))
    return np.moveaxis(out, [0, 1], axes)


@functools.lru_cache(maxsize=128)
def _folded_cnot_superop(p2: float, repeats: int) -> np.ndarray:
    """(depolarize o CNOT)^repeats as a 16x16 superoperator on the
    row-major vectorization of the two-qubit subsystem."""
    u_super = np.kron(_CNOT, _CNOT.conj())
    vec_id = np.eye(4, dtype=complex).reshape(-1)
    depol = (1.0 - p2) * np.eye(16, dtype=complex) + (p2 / 4.0) * np.outer(vec_id, vec_id)
    return np.linalg.matrix_power(depol @ u_super, repeats)


def _apply_superop_pair(rho: np.ndarray, s: np.ndarray, qubits: tuple[int, int], n: int) -> np.ndarray:
    c, t = qubits
    axes = [c, t, n + c, n + t]
    s_t = s.reshape((2,) * 8)
    out = np.tensordot(s_t, rho, axes=([4, 5, 6, 7], axes))
    return np.moveaxis(out, [0, 1, 2, 3], axes)


def statevector(circuit: Circuit) -> DenseState:
    """Exact noiseless statevector of a bound circuit from |0...0>."""
    if not circuit.is_bound():
        raise ValueError("circuit has unbound parameters")
    n = circuit.n_qubits
    if n > _MAX_QUBITS:
        raise ValueError(f"register too large to simulate ({n} > {_MAX_QUBITS})")
    psi = np.zeros((2,) * n, dtype=complex)
    psi[(0,) * n] = 1.0
    for g in circuit.gates:
        u = _CNOT if g.kind == "CNOT" else _gate_matrix(g.kind, g.angle)
        psi = _apply_rows(psi, u, list(g.qubits))
    return DenseState.from_statevector(psi.reshape(-1))


def evolve(circuit: Circuit, noise: NoiseModel, cnot_fold: int = 1) -> DenseState:
    """Run a bound circuit from |0...0><0...0| with each gate followed by
    its noise channel; returns the final density matrix.

    cnot_fold applies each CNOT (with its noise) that many times, odd so
    the unitary part is unchanged; it is equivalent to evolving the
    fold_cnots-expanded circuit but costs one matrix power instead."""
    if not circuit.is_bound():
        raise ValueError("circuit has unbound parameters")
    if cnot_fold < 1 or cnot_fold % 2 == 0:
        raise ValueError("cnot_fold must be odd and positive")
    n = circuit.n_qubits
    if n > _MAX_QUBITS:
        raise ValueError(f"register too large to simulate ({n} > {_MAX_QUBITS})")
    rho = np.zeros((2,) * (2 * n), dtype=complex)
    rho[(0,) * (2 * n)] = 1.0

    gates = circuit.gates
    i = 0
    while i < len(gates):
        g = gates[i]
        if g.kind == "CNOT":
            j = i
            while j < len(gates) and gates[j] == g:
                j += 1
            s = _folded_cnot_superop(float(noise.p2), (j - i) * cnot_fold)
            rho = _apply_superop_pair(rho, s, g.qubits, n)
            i = j
        else:
            s = _oneq_channel_superop(g.kind, g.angle, float(noise.p1), float(noise.gamma_ad))
            rho = _apply_superop_single(rho, s, g.qubits[0], n)
            i += 1

    dim = 1 << n
    return DenseState.from_density_matrix(rho.reshape(dim, dim))


def expectation_exact(obs: PauliSum, state: DenseState) -> float:
    """Exact expectation value; delegates to the Pauli algebra."""
    return obs.expectation(state)


# -- measurement --------------------------------------------------------------


@dataclass(frozen=True)
class MeasurementGroup:
    """Pauli terms measurable after one shared basis rotation.  basis_x
    and basis_z record the joint letter per qubit (identity where no
    member term acts)."""

    n_qubits: int
    basis_x: int
    basis_z: int
    terms: tuple[tuple[tuple[int, int], float], ...]


@dataclass(frozen=True)
class ShotResult:
    counts: dict[str, int]
    shots: int

    def __post_init__(self) -> None:
        if self.shots < 1:
            raise ValueError("shots must be positive")
        if sum(self.counts.values()) != self.shots:
            raise ValueError("counts do not sum to shots")


def qwc_groups(obs: PauliSum, coeff_tol: float = 1e-12) -> tuple[MeasurementGroup, ...]:
    """Greedy qubit-wise-commuting grouping, deterministic: terms are
    visited largest coefficient first and join the first compatible
    group.  The identity term is excluded (it needs no measurement)."""
    ordered = sorted(
        ((key, c) for key, c in obs.terms().items() if key != (0, 0)),
        key=lambda item: (-abs(item[1]), item[0]),
    )
    groups: list[list] = []  # [basis_x, basis_z, terms]
    for (x, z), c in ordered:
        if abs(c.imag) > 1e-10:
            raise ValueError("observable must have real coefficients")
        if abs(c) < coeff_tol:
            continue
        support = x | z
        placed = False
        for grp in groups:
            overlap = support & (grp[0] | grp[1])
            if ((x ^ grp[0]) | (z ^ grp[1])) & overlap:
                continue  # some shared qubit wants a different letter
            grp[0] |= x
            grp[1] |= z
            grp[2].append(((x, z), float(c.real)))
            placed = True
            break
        if not placed:
            groups.append([x, z, [((x, z), float(c.real))]])
    return tuple(
        MeasurementGroup(obs.n_qubits, bx, bz, tuple(terms)) for bx, bz, terms in groups
    )


_H_MAT = _GATE_MATRICES["H"]
_Y_ROT = _H_MAT @ _GATE_MATRICES["SDG"]  # maps the Y eigenbasis onto the Z eigenbasis


def basis_probabilities(group: MeasurementGroup, state: DenseState, noise: NoiseModel) -> np.ndarray:
    """Outcome distribution of a joint measurement in the group's basis,
    with per-qubit readout confusion applied."""
    n = group.n_qubits
    if state.n_qubits != n:
        raise ValueError("state and measurement group register sizes differ")
    if state.density is not None:
        rho = state.density.reshape((2,) * (2 * n))
        for q in range(n):
            xb, zb = group.basis_x >> q & 1, group.basis_z >> q & 1
            rot = _Y_ROT if (xb and zb) else _H_MAT if xb else None
            if rot is not None:
                rho = _apply_rows(rho, rot, [q])
                rho = _apply_rows(rho, rot.conj(), [n + q])
        dim = 1 << n
        probs = np.real(np.diag(rho.reshape(dim, dim))).copy()
    else:
        psi = state.vector.reshape((2,) * n)
        for q in range(n):
            xb, zb = group.basis_x >> q & 1, group.basis_z >> q & 1
            rot = _Y_ROT if (xb and zb) else _H_MAT if xb else None
            if rot is not None:
                psi = _apply_rows(psi, rot, [q])
        probs = np.abs(psi.reshape(-1)) ** 2

    probs = probs.reshape((2,) * n)
    for q in range(n):
        conf = noise.confusion(q)
        if conf is not None:
            # rows of the confusion matrix are the true state, so the
            # reported distribution is p_true @ C along this axis
            probs = np.tensordot(probs, conf, axes=([q], [0]))
            probs = np.moveaxis(probs, -1, q)
    probs = probs.reshape(-1)
    probs = np.clip(probs, 0.0, None)
    return probs / probs.sum()


def sample_counts(
    group: MeasurementGroup, state: DenseState, shots: int, noise: NoiseModel, seed
) -> ShotResult:
    """Multinomial sample of the group's confused outcome distribution;
    bitstring keys are qubit 0 first."""
    if shots < 1:
        raise ValueError("shots must be positive")
    probs = basis_probabilities(group, state, noise)
    rng = np.random.default_rng(seed)
    draws = rng.multinomial(shots, probs)
    n = group.n_qubits
    counts = {
        format(idx, f"0{n}b"): int(k) for idx, k in enumerate(draws) if k
    }
    return ShotResult(counts=counts, shots=shots)


def group_expectation(group: MeasurementGroup, distribution: np.ndarray) -> float:
    """Expectation of the group's terms given an outcome distribution in
    the group's measurement basis.  Works for quasi-distributions too
    (entries may leave [0,1] after readout correction)."""
    n = group.n_qubits
    if distribution.size != 1 << n:
        raise ValueError("distribution length does not match the register")
    idx = np.arange(distribution.size)
    acc = 0.0
    for (x, z), coeff in group.terms:
        support_idx = index_mask(x | z, n)
        signs = 1.0 - 2.0 * (np.bitwise_count(idx & support_idx) & 1)
        acc += coeff * float(signs @ distribution)
    return acc


def estimate_expectation(
    obs: PauliSum,
    state: DenseState,
    noise: NoiseModel,
    shots: int | None = None,
    seed=None,
) -> float:
    """Measurement-based expectation of a real-coefficient observable.

    shots=None uses the exact (infinite-shot) confused distributions,
    which keeps readout error but removes sampling noise; with shots
    set, each qubit-wise commuting group is sampled independently with
    a seed derived from `seed`."""
    const = obs.coefficient(0, 0).real
    groups = qwc_groups(obs)
    if shots is None:
        return const + sum(
            group_expectation(g, basis_probabilities(g, state, noise)) for g in groups
        )
    if seed is None:
        raise ValueError("sampling requires a seed")
    children = as_seed_sequence(seed).spawn(len(groups))
    acc = const
    for group, child in zip(groups, children):
        result = sample_counts(group, state, shots, noise, child)
        freq = np.zeros(1 << group.n_qubits)
        for bits, k in result.counts.items():
            freq[int(bits, 2)] = k / result.shots
        acc += group_expectation(group, freq)
    return acc
