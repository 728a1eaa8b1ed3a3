"""Brute-force references for small systems.

Two tiers: dense ``2**n x 2**n`` matrices (``n <= 12``) for operator algebra and
exact Trotter conjugation, and state vectors (``n`` up to ~22) for zero-state
expectations and infinite-temperature correlations via random-state typicality.

Dense matrices use the Kronecker order with site 0 as the leftmost factor, so
site ``k`` is bit ``n - 1 - k`` of a basis index.  Nothing here reuses the
bit-level product rules of :mod:`spd.pauli_algebra`; terms are expanded letter
by letter from their labels.
"""

from __future__ import annotations

from functools import reduce
from typing import Iterator, Sequence

import numpy as np

from .evolution import PauliRotation, step_rotations
from .models import Hamiltonian
from .pauli_algebra import PauliTerm
from .pauli_sum import PauliSum

MAX_DENSE_SITES = 12
MAX_STATE_SITES = 24

_MATS = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


class OracleSizeError(ValueError):
    pass


def _raw_dense(term: PauliTerm) -> np.ndarray:
    # Expands (-i)^phase * prod_k Z_k^z X_k^x literally, without using the Y shortcut.
    factors = []
    for k in range(term.n):
        m = np.eye(2, dtype=complex)
        if (term.z_bits >> k) & 1:
            m = m @ _MATS["Z"]
        if (term.x_bits >> k) & 1:
            m = m @ _MATS["X"]
        factors.append(m)
    return ((-1j) ** term.phase) * term.coeff * reduce(np.kron, factors)


def dense(op: PauliTerm | PauliSum) -> np.ndarray:
    """Dense matrix of a term or sum."""
    if op.n > MAX_DENSE_SITES:
        raise OracleSizeError(f"dense expansion limited to {MAX_DENSE_SITES} sites, got {op.n}")
    if isinstance(op, PauliTerm):
        return _raw_dense(op)
    out = np.zeros((2**op.n, 2**op.n), dtype=complex)
    for t in op.terms():
        out += _raw_dense(t)
    return out


def dense_label(label: str) -> np.ndarray:
    """Dense matrix of a Hermitian Pauli string given by letters (site 0 first)."""
    return reduce(np.kron, [_MATS[c] for c in label])


def rotation_matrix(rot: PauliRotation) -> np.ndarray:
    """``exp(-i theta sigma / 2)`` for a Hermitian, involutory axis."""
    s = dense(rot.axis.with_coeff(1.0))
    d = s.shape[0]
    return np.cos(rot.angle / 2) * np.eye(d) - 1j * np.sin(rot.angle / 2) * s


def _gates(step: Hamiltonian | Sequence[PauliRotation], dt: float) -> list[PauliRotation]:
    return step_rotations(step, dt)


def iter_trotter_conjugation(
    op: PauliSum, step: Hamiltonian | Sequence[PauliRotation], dt: float, steps: int
) -> Iterator[np.ndarray]:
    """Yield ``U^k† O U^k`` for k = 0..steps, with ``U`` the ordered gate product.

    ``U = g_1 g_2 ... g_J``; ``U† O U`` conjugates by ``g_1`` first.
    """
    gates = _gates(step, dt)
    u = reduce(np.matmul, [rotation_matrix(g) for g in gates], np.eye(2**op.n, dtype=complex))
    m = dense(op)
    yield m
    for _ in range(steps):
        m = u.conj().T @ m @ u
        yield m


def exact_trotter_conjugation(
    op: PauliSum, step: Hamiltonian | Sequence[PauliRotation], dt: float, steps: int
) -> np.ndarray:
    """Dense ``U^K† O U^K`` with no truncation."""
    *_, last = iter_trotter_conjugation(op, step, dt, steps)
    return last


# ---------------------------------------------------------------- state vectors


def _apply_pauli_string(psi: np.ndarray, n: int, term: PauliTerm) -> np.ndarray:
    """Return ``P |psi>`` for the Hermitian string with ``term``'s key, psi shaped (2,)*n."""
    out = psi
    for k in range(n):
        z = (term.z_bits >> k) & 1
        x = (term.x_bits >> k) & 1
        if not (z or x):
            continue
        if x:
            out = np.flip(out, axis=k)
        if z:
            # Z acts after X for Z^z X^x; on a flipped axis index 0 carries the old |1>.
            sign = np.array([1.0, -1.0]).reshape([2 if a == k else 1 for a in range(n)])
            out = out * sign
        if z and x:
            out = out * (-1j)  # (-i) Z X = Y
    if out is psi:
        out = psi.copy()
    return out


def _diag_of_ztype(n: int, term: PauliTerm) -> np.ndarray:
    """Diagonal (+1/-1) of a Z-type string as a (2,)*n array."""
    d = np.ones([2] * n)
    for k in range(n):
        if (term.z_bits >> k) & 1:
            d = d * np.array([1.0, -1.0]).reshape([2 if a == k else 1 for a in range(n)])
    return d


def compile_gates(n: int, gates: Sequence[PauliRotation]) -> list:
    """Precompute a gate list for repeated application with :func:`apply_gates`.

    Runs of Z-type gates become one diagonal phase factor; other gates keep
    their axis with ``cos`` and ``sin`` of the half angle.
    """
    ops: list = []
    i = 0
    while i < len(gates):
        if gates[i].axis.x_bits == 0:
            phase = np.zeros([2] * n)
            while i < len(gates) and gates[i].axis.x_bits == 0:
                phase += (gates[i].angle / 2) * _diag_of_ztype(n, gates[i].axis)
                i += 1
            ops.append(np.exp(-1j * phase))
            continue
        g = gates[i]
        ops.append((np.cos(g.angle / 2), np.sin(g.angle / 2), g.axis))
        i += 1
    return ops


def apply_gates(psi: np.ndarray, n: int, gates: Sequence[PauliRotation] | list) -> np.ndarray:
    """Apply ``exp(-i theta_j sigma_j / 2)`` for each gate in list order.

    ``gates`` is a rotation list or the output of :func:`compile_gates`.
    """
    if gates and isinstance(gates[0], PauliRotation):
        gates = compile_gates(n, gates)
    for op in gates:
        if isinstance(op, np.ndarray):
            psi = psi * op
        else:
            c, s, axis = op
            psi = c * psi - 1j * s * _apply_pauli_string(psi, n, axis)
    return psi


def _check_state_size(n: int) -> None:
    if n > MAX_STATE_SITES:
        raise OracleSizeError(f"state-vector oracle limited to {MAX_STATE_SITES} sites, got {n}")


def exact_expectation_series(
    step: Hamiltonian | Sequence[PauliRotation],
    n: int,
    site: int,
    dt: float,
    steps: int,
) -> np.ndarray:
    """``<psi_k| Z_site |psi_k>`` for k = 0..steps, ``|psi_0> = |0...0>``.

    The state evolves as ``|psi_{k+1}> = U |psi_k>`` with ``U = g_1 ... g_J``,
    i.e. ``g_J`` acts on the state first.
    """
    _check_state_size(n)
    gates = compile_gates(n, list(reversed(_gates(step, dt))))
    psi = np.zeros([2] * n, dtype=complex)
    psi[(0,) * n] = 1.0
    zsite = _diag_of_ztype(n, PauliTerm.from_sites(n, {site: "Z"}))
    out = [float(np.real(np.vdot(psi, zsite * psi)))]
    for _ in range(steps):
        psi = apply_gates(psi, n, gates)
        out.append(float(np.real(np.vdot(psi, zsite * psi))))
    return np.array(out)


def _apply_sum(psi: np.ndarray, n: int, op: PauliSum) -> np.ndarray:
    out = np.zeros_like(psi)
    for t in op.terms():
        out += t.hermitian_coeff() * _apply_pauli_string(psi, n, t)
    return out


def typical_correlation_series(
    step: Hamiltonian | Sequence[PauliRotation],
    center: PauliSum,
    densities: Sequence[PauliSum],
    dt: float,
    steps: int,
    *,
    samples: int = 1,
    seed: int = 0,
    every: int = 1,
) -> np.ndarray:
    """Estimate ``Tr[q_j U^k† q_c U^k] / 2**n`` with Haar-like random states.

    Uses ``Tr[q_j U† q_c U] = Tr[q_c U q_j U†]`` and evolves ``U†|r>`` and
    ``U† q_c |r>``; ``U† = g_J† ... g_1†`` so ``g_1†`` acts first.  Returns an
    array of shape ``(steps // every + 1, len(densities))``.  The statistical
    error scales as ``2**(-n/2) / sqrt(samples)``.
    """
    n = center.n
    _check_state_size(n)
    inv = compile_gates(n, [PauliRotation(g.axis, -g.angle) for g in _gates(step, dt)])
    rng = np.random.default_rng(seed)
    acc = np.zeros((steps // every + 1, len(densities)))
    for _ in range(samples):
        r = rng.normal(size=2**n) + 1j * rng.normal(size=2**n)
        r = (r / np.linalg.norm(r)).reshape([2] * n)
        a = r
        b = _apply_sum(r, n, center)
        row = 0
        for k in range(steps + 1):
            if k:
                a = apply_gates(a, n, inv)
                b = apply_gates(b, n, inv)
            if k % every == 0:
                for j, q in enumerate(densities):
                    acc[row, j] += np.real(np.vdot(b, _apply_sum(a, n, q)))
                row += 1
    return acc / samples
