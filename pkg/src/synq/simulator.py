"""Statevector simulation with postselection, shot sampling and noise.

Conventions, fixed project-wide: qubit 0 is the least significant bit of a
basis index; H = (1/sqrt 2)[[1,1],[1,-1]]; Rx(t) = exp(-i t X / 2);
Rz(t) = exp(-i t Z / 2); CRz(t) = diag(1, 1, e^{-it/2}, e^{it/2}) over the
(control, target) pair; CX is the standard controlled flip.

The noise model is a Monte Carlo Pauli twirl: per shot, after every
two-qubit gate, each touched qubit independently suffers a uniformly random
Pauli with probability p. Shots sharing an insertion pattern share one
simulation, and with p = 0 the path is bit-identical to noiseless sampling.
"""
from __future__ import annotations

import numpy as np

from .ansatz import Circuit, Op, Symbol
from .params import ParameterStore, UnboundSymbol

ZERO_NORM_THRESHOLD = 1e-12


class ZeroNorm(Exception):
    """Postselection probability below threshold; parameters degenerate."""


class AllShotsDiscarded(Exception):
    """Every sampled shot violated the postselection condition."""


_H = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
_X = np.array([[0, 1], [1, 0]], dtype=complex)
_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
_Z = np.array([[1, 0], [0, -1]], dtype=complex)
_PAULIS = (_X, _Y, _Z)


def _rx(theta: float) -> np.ndarray:
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    return np.array([[c, -1j * s], [-1j * s, c]], dtype=complex)


def _rz(theta: float) -> np.ndarray:
    return np.array([[np.exp(-1j * theta / 2), 0],
                     [0, np.exp(1j * theta / 2)]], dtype=complex)


def _angle(op: Op, ps: ParameterStore) -> float:
    if isinstance(op.param, Symbol):
        value = np.asarray(ps[op.param.name])
        if value.shape != ():
            raise UnboundSymbol(f"{op.param.name} is not a scalar angle")
        return float(value)
    if op.param is None:
        raise UnboundSymbol(f"gate {op.gate} needs an angle")
    return float(op.param)


def _apply_1q(state: np.ndarray, mat: np.ndarray, q: int, n: int) -> np.ndarray:
    state = state.reshape([2] * n)
    axis = n - 1 - q  # little-endian: qubit 0 is the last axis
    state = np.tensordot(mat, state, axes=([1], [axis]))
    state = np.moveaxis(state, 0, axis)
    return state.reshape(-1)


def _apply_2q(state: np.ndarray, mat4: np.ndarray, q0: int, q1: int,
              n: int) -> np.ndarray:
    state = state.reshape([2] * n)
    a0, a1 = n - 1 - q0, n - 1 - q1
    mat = mat4.reshape(2, 2, 2, 2)  # out0 out1 in0 in1
    state = np.tensordot(mat, state, axes=([2, 3], [a0, a1]))
    state = np.moveaxis(state, [0, 1], [a0, a1])
    return state.reshape(-1)


_CX = np.array([[1, 0, 0, 0],
                [0, 1, 0, 0],
                [0, 0, 0, 1],
                [0, 0, 1, 0]], dtype=complex)


def _crz(theta: float) -> np.ndarray:
    return np.diag([1, 1,
                    np.exp(-1j * theta / 2),
                    np.exp(1j * theta / 2)]).astype(complex)


def _run(c: Circuit, ps: ParameterStore) -> np.ndarray:
    n = c.n_qubits
    state = np.zeros(2 ** n, dtype=complex)
    state[0] = 1.0
    for op in c.ops:
        mat = _op_matrix(op, ps)
        if len(op.qubits) == 1:
            state = _apply_1q(state, mat, op.qubits[0], n)
        else:
            state = _apply_2q(state, mat, op.qubits[0], op.qubits[1], n)
    return state


def statevector(c: Circuit, ps: ParameterStore) -> np.ndarray:
    """State after all gates on |0...0>, before any postselection."""
    return _run(c, ps)


def _postselect_probs(c: Circuit, state: np.ndarray) -> np.ndarray:
    """Joint |amplitude|^2 over open qubits after projecting postselects."""
    n = c.n_qubits
    amps = state.reshape([2] * n)
    for q in sorted(c.postselect, reverse=True):
        amps = np.take(amps, 0, axis=n - 1 - q)
        n -= 1  # axis removed; remaining qubits keep relative order
    remaining = [q for q in range(c.n_qubits) if q not in c.postselect]
    probs = np.abs(amps) ** 2
    # axes currently ordered most-significant first over ``remaining``
    order = [len(remaining) - 1 - remaining.index(q) for q in c.open]
    probs = np.transpose(probs, [order[i] for i in range(len(order))]) \
        if probs.ndim else probs
    return probs


def evaluate(c: Circuit, ps: ParameterStore) -> dict[str, float]:
    """Probability of each open-qubit bitstring after postselection.

    Keys are bitstrings with character i giving the bit of c.open[i].
    """
    state = statevector(c, ps)
    probs = _postselect_probs(c, state)
    total = float(probs.sum())
    if total < ZERO_NORM_THRESHOLD:
        raise ZeroNorm(f"postselection probability {total:.3e}")
    probs = probs / total
    out = {}
    k = len(c.open)
    for idx in np.ndindex(*probs.shape):
        out["".join(str(b) for b in idx)] = float(probs[idx])
    if k == 0:
        out = {"": 1.0}
    return out


def _two_qubit_indices(c: Circuit) -> list[int]:
    return [i for i, op in enumerate(c.ops) if len(op.qubits) == 2]


def _apply_1q_batch(states: np.ndarray, mat: np.ndarray, q: int,
                    n: int) -> np.ndarray:
    b = states.shape[0]
    states = states.reshape([b] + [2] * n)
    axis = 1 + (n - 1 - q)
    states = np.tensordot(mat, states, axes=([1], [axis]))
    states = np.moveaxis(states, 0, axis)
    return states.reshape(b, -1)


def _apply_2q_batch(states: np.ndarray, mat4: np.ndarray, q0: int, q1: int,
                    n: int) -> np.ndarray:
    b = states.shape[0]
    states = states.reshape([b] + [2] * n)
    a0, a1 = 1 + (n - 1 - q0), 1 + (n - 1 - q1)
    mat = mat4.reshape(2, 2, 2, 2)
    states = np.tensordot(mat, states, axes=([2, 3], [a0, a1]))
    states = np.moveaxis(states, [0, 1], [a0, a1])
    return states.reshape(b, -1)


def _op_matrix(op: Op, ps: ParameterStore) -> np.ndarray:
    if op.gate == "H":
        return _H
    if op.gate == "Rx":
        return _rx(_angle(op, ps))
    if op.gate == "Rz":
        return _rz(_angle(op, ps))
    if op.gate == "CRz":
        return _crz(_angle(op, ps))
    if op.gate == "CX":
        return _CX
    raise ValueError(f"unknown gate {op.gate!r}")


def _pattern_probs(c: Circuit, ps: ParameterStore,
                   patterns: list[tuple]) -> list[np.ndarray]:
    """Full-basis distribution for each non-empty insertion pattern.

    All patterns advance through the circuit together: a pattern's branch
    state is forked from the clean state at its first insertion and follows
    the remaining gates as one vectorized batch.
    """
    n = c.n_qubits
    due: dict[int, list[tuple[int, int]]] = {}
    first_at: dict[int, list[int]] = {}
    for pi, pattern in enumerate(patterns):
        first_at.setdefault(pattern[0][0], []).append(pi)
        for op_index, qubit, pauli in pattern:
            due.setdefault(op_index, []).append((pi, qubit, pauli))

    clean = np.zeros(2 ** n, dtype=complex)
    clean[0] = 1.0
    rows: dict[int, int] = {}  # pattern index -> batch row
    batch = np.empty((len(patterns), 2 ** n), dtype=complex)
    active = 0
    for i, op in enumerate(c.ops):
        mat = _op_matrix(op, ps)
        if len(op.qubits) == 1:
            clean = _apply_1q(clean, mat, op.qubits[0], n)
            if active:
                batch[:active] = _apply_1q_batch(batch[:active], mat,
                                                 op.qubits[0], n)
        else:
            clean = _apply_2q(clean, mat, op.qubits[0], op.qubits[1], n)
            if active:
                batch[:active] = _apply_2q_batch(batch[:active], mat,
                                                 op.qubits[0], op.qubits[1], n)
        for pi in first_at.get(i, ()):
            rows[pi] = active
            batch[active] = clean
            active += 1
        for pi, qubit, pauli in due.get(i, ()):
            row = rows[pi]
            batch[row] = _apply_1q(batch[row], _PAULIS[pauli], qubit, n)
    probs = np.abs(batch) ** 2
    probs /= probs.sum(axis=1, keepdims=True)
    return [probs[rows[pi]] for pi in range(len(patterns))]


def sample(c: Circuit, ps: ParameterStore, n_shots: int, seed: int,
           noise_p: float = 0.0) -> dict[str, int]:
    """Counts over open-qubit bitstrings; deterministic given seed.

    Shots draw from the full-basis distribution and any shot whose
    postselected qubits read nonzero is discarded. With noise_p > 0, each
    shot first samples Pauli insertions after every two-qubit gate (one
    chance per touched qubit); shots sharing an insertion pattern share one
    simulation. noise_p = 0 takes exactly the noiseless path.
    """
    if n_shots < 1:
        raise ValueError("n_shots must be at least 1")
    rng = np.random.default_rng(seed)
    n = c.n_qubits
    dim = 2 ** n

    counts_vec = np.zeros(dim, dtype=np.int64)
    if noise_p <= 0.0 or not _two_qubit_indices(c):
        state = _run(c, ps)
        p = np.abs(state) ** 2
        counts_vec = rng.multinomial(n_shots, p / p.sum())
    else:
        twoq = _two_qubit_indices(c)
        sites = [(i, q) for i in twoq for q in c.ops[i].qubits]
        hits = rng.random((n_shots, len(sites))) < noise_p
        paulis = rng.integers(0, 3, size=(n_shots, len(sites)))
        pattern_shots: dict[tuple, int] = {}
        shot_ids, site_ids = np.nonzero(hits)
        clean_shots = n_shots - len(np.unique(shot_ids))
        start = 0
        while start < len(shot_ids):
            end = start
            while end < len(shot_ids) and shot_ids[end] == shot_ids[start]:
                end += 1
            pattern = tuple(
                (sites[j][0], sites[j][1], int(paulis[shot_ids[start], j]))
                for j in site_ids[start:end])
            pattern_shots[pattern] = pattern_shots.get(pattern, 0) + 1
            start = end
        if clean_shots:
            state = _run(c, ps)
            p = np.abs(state) ** 2
            counts_vec += rng.multinomial(clean_shots, p / p.sum())
        patterns = list(pattern_shots)
        for pattern, probs in zip(patterns, _pattern_probs(c, ps, patterns)):
            counts_vec += rng.multinomial(pattern_shots[pattern], probs)

    post_mask = 0
    for q in c.postselect:
        post_mask |= 1 << q
    counts: dict[str, int] = {}
    kept = 0
    for basis in np.flatnonzero(counts_vec):
        if basis & post_mask:
            continue
        key = "".join(str((int(basis) >> q) & 1) for q in c.open)
        counts[key] = counts.get(key, 0) + int(counts_vec[basis])
        kept += int(counts_vec[basis])
    if kept == 0:
        raise AllShotsDiscarded(f"all {n_shots} shots violated postselection")
    return counts
