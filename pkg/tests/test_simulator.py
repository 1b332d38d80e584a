import numpy as np
import pytest

from synq.ansatz import Circuit, Op, Symbol, iqp_ansatz
from synq.diagram import cup_at, word
from synq.params import ParameterStore, UnboundSymbol
from synq.simulator import (
    AllShotsDiscarded, ZeroNorm, evaluate, sample, statevector,
)
from synq.types import ts

EMPTY_PS = ParameterStore({})


def dense_oracle(circuit: Circuit, ps: ParameterStore) -> np.ndarray:
    """Independent statevector: full 2^n matrices by explicit kron products."""
    import synq.simulator as sim

    n = circuit.n_qubits
    state = np.zeros(2 ** n, dtype=complex)
    state[0] = 1.0

    def lift1(mat, q):
        out = np.ones((1, 1), dtype=complex)
        for k in range(n - 1, -1, -1):  # qubit n-1 is the most significant
            out = np.kron(out, mat if k == q else np.eye(2))
        return out

    def lift2(mat4, q0, q1):
        full = np.zeros((2 ** n, 2 ** n), dtype=complex)
        for col in range(2 ** n):
            b0, b1 = (col >> q0) & 1, (col >> q1) & 1
            for r0 in (0, 1):
                for r1 in (0, 1):
                    row = (col & ~(1 << q0) & ~(1 << q1)) \
                        | (r0 << q0) | (r1 << q1)
                    full[row, col] += mat4[(r0 << 1) | r1, (b0 << 1) | b1]
        return full

    for op in circuit.ops:
        if op.gate == "H":
            state = lift1(sim._H, op.qubits[0]) @ state
        elif op.gate == "Rx":
            state = lift1(sim._rx(sim._angle(op, ps)), op.qubits[0]) @ state
        elif op.gate == "Rz":
            state = lift1(sim._rz(sim._angle(op, ps)), op.qubits[0]) @ state
        elif op.gate == "CRz":
            state = lift2(sim._crz(sim._angle(op, ps)), *op.qubits) @ state
        elif op.gate == "CX":
            state = lift2(sim._CX, *op.qubits) @ state
    return state


def random_circuit(rng, n_qubits=3, n_gates=8):
    ops = []
    for _ in range(n_gates):
        kind = rng.integers(0, 5 if n_qubits >= 2 else 3)
        if kind == 0:
            ops.append(Op("H", (int(rng.integers(n_qubits)),)))
        elif kind == 1:
            ops.append(Op("Rx", (int(rng.integers(n_qubits)),),
                          float(rng.uniform(0, 2 * np.pi))))
        elif kind == 2:
            ops.append(Op("Rz", (int(rng.integers(n_qubits)),),
                          float(rng.uniform(0, 2 * np.pi))))
        else:
            q0, q1 = rng.choice(n_qubits, size=2, replace=False)
            gate = "CRz" if kind == 3 else "CX"
            param = float(rng.uniform(0, 2 * np.pi)) if gate == "CRz" else None
            ops.append(Op(gate, (int(q0), int(q1)), param))
    return Circuit(n_qubits, tuple(ops), (), tuple(range(n_qubits)))


class TestStatevector:
    def test_h_on_zero(self):
        c = Circuit(1, (Op("H", (0,)),), (), (0,))
        got = statevector(c, EMPTY_PS)
        assert np.allclose(got, [1 / np.sqrt(2), 1 / np.sqrt(2)])

    def test_bell_preparation(self):
        c = Circuit(2, (Op("H", (0,)), Op("CX", (0, 1))), (), (0, 1))
        got = statevector(c, EMPTY_PS)
        want = np.zeros(4)
        want[0] = want[3] = 1 / np.sqrt(2)  # |00> + |11>
        assert np.allclose(got, want)

    def test_gate_conventions(self):
        ps = EMPTY_PS
        theta = 1.3
        c = Circuit(1, (Op("Rx", (0,), theta),), (), (0,))
        got = statevector(c, ps)
        assert np.allclose(got, [np.cos(theta / 2), -1j * np.sin(theta / 2)])
        c = Circuit(1, (Op("Rz", (0,), theta),), (), (0,))
        assert np.allclose(statevector(c, ps), [np.exp(-1j * theta / 2), 0])

    def test_norm_preserved(self):
        rng = np.random.default_rng(0)
        for _ in range(20):
            c = random_circuit(rng)
            state = statevector(c, EMPTY_PS)
            assert abs(np.linalg.norm(state) - 1.0) < 1e-12

    def test_against_dense_oracle_100_random(self):
        rng = np.random.default_rng(42)
        worst = 0.0
        for _ in range(100):
            n = int(rng.integers(1, 4))
            c = random_circuit(rng, n_qubits=n, n_gates=int(rng.integers(1, 12)))
            got = statevector(c, EMPTY_PS)
            want = dense_oracle(c, EMPTY_PS)
            worst = max(worst, float(np.max(np.abs(got - want))))
        assert worst < 1e-12

    def test_unbound_symbol(self):
        c = Circuit(1, (Op("Rx", (0,), Symbol("missing")),), (), (0,))
        with pytest.raises(UnboundSymbol):
            statevector(c, EMPTY_PS)


class TestEvaluate:
    def test_bell_distribution(self):
        c = Circuit(2, (Op("H", (0,)), Op("CX", (0, 1))), (), (0, 1))
        probs = evaluate(c, EMPTY_PS)
        assert probs == pytest.approx(
            {"00": 0.5, "01": 0.0, "10": 0.0, "11": 0.5})

    def test_empty_circuit_one_open(self):
        c = Circuit(1, (), (), (0,))
        assert evaluate(c, EMPTY_PS) == pytest.approx({"0": 1.0, "1": 0.0})

    def test_cup_gadget_amplitude(self):
        # postselected amplitude on (a|0>+b|1>)(c|0>+d|1>) is (ac+bd)/sqrt 2
        import synq.simulator as sim
        rng = np.random.default_rng(3)
        for _ in range(5):
            a, b = rng.normal(size=2)
            c, d = rng.normal(size=2)
            a, b = (a, b) / np.hypot(a, b)
            c, d = (c, d) / np.hypot(c, d)
            full = np.zeros(4, dtype=complex)
            for i in (0, 1):  # qubit 0 is the LSB
                for j in (0, 1):
                    full[(j << 1) | i] = [a, b][i] * [c, d][j]
            post = sim._apply_2q(full, sim._CX, 0, 1, 2)
            post = sim._apply_1q(post, sim._H, 0, 2)
            assert abs(post[0] - (a * c + b * d) / np.sqrt(2)) < 1e-12

    def test_probabilities_sum_to_one(self):
        rng = np.random.default_rng(8)
        for _ in range(10):
            c = random_circuit(rng)
            probs = evaluate(c, EMPTY_PS)
            assert sum(probs.values()) == pytest.approx(1.0, abs=1e-12)
            assert all(p >= 0 for p in probs.values())

    def test_zero_norm(self):
        # postselect a qubit that is deterministically |1>
        c = Circuit(1, (Op("Rx", (0,), np.pi),), (0,), ())
        with pytest.raises(ZeroNorm):
            evaluate(c, EMPTY_PS)

    def test_postselected_sentence_circuit(self):
        d = cup_at(word("john", ts("n")) @ word("walks", ts("n.r", "s")), 0)
        circ = iqp_ansatz(d, {"n": 1, "s": 1})
        ps = ParameterStore.initialize(circ.symbols, seed=4)
        probs = evaluate(circ, ps)
        assert set(probs) == {"0", "1"}
        assert sum(probs.values()) == pytest.approx(1.0)


class TestSample:
    def bell(self):
        return Circuit(2, (Op("H", (0,)), Op("CX", (0, 1))), (), (0, 1))

    def test_bell_counts_within_3_sigma(self):
        counts = sample(self.bell(), EMPTY_PS, 10000, seed=1)
        sigma = np.sqrt(10000 * 0.25)
        assert set(counts) <= {"00", "11"}
        assert abs(counts["00"] - 5000) <= 3 * sigma

    def test_same_seed_identical(self):
        a = sample(self.bell(), EMPTY_PS, 500, seed=7)
        b = sample(self.bell(), EMPTY_PS, 500, seed=7)
        assert a == b

    def test_noise_zero_identical_to_noiseless(self):
        a = sample(self.bell(), EMPTY_PS, 500, seed=9, noise_p=0.0)
        b = sample(self.bell(), EMPTY_PS, 500, seed=9)
        assert a == b

    def test_tv_distance_to_evaluate(self):
        rng = np.random.default_rng(12)
        c = random_circuit(rng, n_qubits=3, n_gates=10)
        probs = evaluate(c, EMPTY_PS)
        counts = sample(c, EMPTY_PS, 100_000, seed=5)
        n = sum(counts.values())
        tv = 0.5 * sum(
            abs(counts.get(k, 0) / n - p) for k, p in probs.items())
        assert tv < 0.02

    def test_postselection_discards(self):
        d = cup_at(word("john", ts("n")) @ word("walks", ts("n.r", "s")), 0)
        circ = iqp_ansatz(d, {"n": 1, "s": 1})
        ps = ParameterStore.initialize(circ.symbols, seed=4)
        counts = sample(circ, ps, 4096, seed=3)
        assert sum(counts.values()) < 4096  # some shots must be discarded
        assert set(counts) <= {"0", "1"}

    def test_all_shots_discarded(self):
        c = Circuit(1, (Op("Rx", (0,), np.pi),), (0,), ())
        with pytest.raises(AllShotsDiscarded):
            sample(c, EMPTY_PS, 64, seed=0)

    def test_noisy_sampling_differs_but_normalizes(self):
        counts = sample(self.bell(), EMPTY_PS, 4096, seed=11, noise_p=0.05)
        assert sum(counts.values()) == 4096
        # depolarizing leaks probability into 01/10
        assert set(counts) - {"00", "11"}

    def test_noise_monotone_in_p(self):
        # the fraction of corrupted outcomes grows with p
        def corrupt_fraction(p, seed):
            counts = sample(self.bell(), EMPTY_PS, 8192, seed=seed, noise_p=p)
            bad = sum(v for k, v in counts.items() if k in ("01", "10"))
            return bad / sum(counts.values())

        lo = np.mean([corrupt_fraction(0.01, s) for s in range(3)])
        hi = np.mean([corrupt_fraction(0.10, s) for s in range(3)])
        assert hi > lo
