"""Heisenberg-picture time evolution of a :class:`PauliSum`.

One Trotter step for ``H = sum_j c_j H_j`` is the gate product
``U = g_1 g_2 ... g_J`` with ``g_j = exp(-i c_j dt H_j) = U_{H_j}(2 c_j dt)``.
The observable is updated as ``U† O U``, which conjugates by ``g_1`` first.
The threshold is applied after every single rotation; the optional X-weight
cutoff is applied after steps ``k = T, 2T, ...``.
"""

from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass, field
from functools import cached_property
from typing import Any, Callable, Mapping, Sequence, Union

import numpy as np

from . import kernels
from .pauli_algebra import InvalidArgumentsError, PauliTerm, canonical_phase, words_from_int
from .pauli_sum import DEFAULT_MAX_TERMS, PauliSum, TermLimitError, n_words_for

log = logging.getLogger(__name__)

__all__ = [
    "EvolutionConfig",
    "PauliRotation",
    "StepSpec",
    "Trajectory",
    "apply_rotation",
    "evolve",
    "step_rotations",
    "trotter_step",
]


@dataclass(frozen=True)
class PauliRotation:
    """``exp(-i angle axis / 2)`` for a unit Hermitian-canonical Pauli string."""

    axis: PauliTerm
    angle: float

    def __post_init__(self):
        a = self.axis
        if a.coeff != 1 or a.phase != canonical_phase(a.z_bits, a.x_bits):
            raise InvalidArgumentsError("rotation axis must be a unit, Hermitian-canonical string")

    @cached_property
    def row(self) -> np.ndarray:
        w = n_words_for(self.axis.n)
        return np.concatenate(
            [words_from_int(self.axis.x_bits, w), words_from_int(self.axis.z_bits, w)]
        )


# A Trotter step is either a Hamiltonian-like object exposing ``.terms`` or an
# explicit ordered list of (coefficient, unit term) factors.
StepSpec = Union[Any, Sequence[tuple[float, PauliTerm]]]


def step_rotations(step: StepSpec, dt: float) -> list[PauliRotation]:
    """Gates ``g_j = U_{H_j}(2 c_j dt)`` in product order."""
    if isinstance(step, Sequence) and step and isinstance(step[0], PauliRotation):
        return list(step)
    terms = step.terms if hasattr(step, "terms") else step
    return [PauliRotation(term, 2.0 * c * dt) for c, term in terms]


def apply_rotation(
    s: PauliSum,
    rot: PauliRotation,
    delta: float = 0.0,
    *,
    max_terms: int = DEFAULT_MAX_TERMS,
    threads: int = 1,
) -> PauliSum:
    """``U† s U`` for ``U = exp(-i theta sigma / 2)``, then drop ``|a| < delta``."""
    if rot.axis.n != s.n:
        raise InvalidArgumentsError(f"rotation on {rot.axis.n} sites, sum on {s.n}")
    if rot.angle == 0.0 and delta == 0.0:
        return s
    rows, coeffs = kernels.active().rotate(
        s.rows, s.coeffs, rot.row, math.cos(rot.angle), math.sin(rot.angle), float(delta), int(threads)
    )
    if len(coeffs) > max_terms:
        raise TermLimitError(len(coeffs), max_terms)
    return PauliSum(s.n, rows, coeffs)


def trotter_step(
    s: PauliSum,
    step: StepSpec,
    dt: float,
    delta: float = 0.0,
    *,
    max_terms: int = DEFAULT_MAX_TERMS,
    threads: int = 1,
) -> PauliSum:
    for rot in step_rotations(step, dt):
        s = apply_rotation(s, rot, delta, max_terms=max_terms, threads=threads)
    return s


@dataclass
class EvolutionConfig:
    """Parameters of an SPD / xSPD run.

    ``x_cutoff=None`` disables X-truncation (plain SPD).  ``x_period`` counts
    Trotter steps between X-truncations.
    """

    delta: float
    dt: float
    t_max: float
    x_cutoff: int | None = None
    x_period: int = 5
    max_terms: int = DEFAULT_MAX_TERMS
    record_every: int = 1
    threads: int = 1

    def __post_init__(self):
        if self.delta < 0:
            raise InvalidArgumentsError("delta must be >= 0")
        if not self.dt > 0:
            raise InvalidArgumentsError("dt must be > 0")
        if self.t_max < 0:
            raise InvalidArgumentsError("t_max must be >= 0")
        k = round(self.t_max / self.dt)
        if abs(k * self.dt - self.t_max) > 1e-9 * max(1.0, abs(self.t_max)):
            raise InvalidArgumentsError(f"t_max={self.t_max} is not a whole number of steps dt={self.dt}")
        if self.x_cutoff is not None and self.x_cutoff < 0:
            raise InvalidArgumentsError("x_cutoff must be >= 0")
        if self.x_period < 1:
            raise InvalidArgumentsError("x_period must be >= 1")
        if self.record_every < 1:
            raise InvalidArgumentsError("record_every must be >= 1")
        if self.max_terms < 1:
            raise InvalidArgumentsError("max_terms must be >= 1")

    @property
    def n_steps(self) -> int:
        return round(self.t_max / self.dt)


@dataclass
class Trajectory:
    """Recorded observables; ``final`` is the operator after the last completed step."""

    steps: list[int] = field(default_factory=list)
    times: list[float] = field(default_factory=list)
    n_terms: list[int] = field(default_factory=list)
    n_ztype: list[int] = field(default_factory=list)
    values: dict[str, list] = field(default_factory=dict)
    final: PauliSum | None = None
    final_step: int = 0
    peak_terms: int = 0
    error: str | None = None

    @property
    def truncated(self) -> bool:
        return self.error is not None

    def series(self, name: str) -> np.ndarray:
        return np.asarray(self.values[name])

    def _record(self, k: int, t: float, s: PauliSum, observers: Mapping[str, Callable]) -> None:
        self.steps.append(k)
        self.times.append(t)
        self.n_terms.append(len(s))
        self.n_ztype.append(s.count_ztype())
        for name, fn in observers.items():
            self.values.setdefault(name, []).append(fn(s))


def evolve(
    s0: PauliSum,
    step: StepSpec,
    cfg: EvolutionConfig,
    observers: Mapping[str, Callable[[PauliSum], Any]] | None = None,
    *,
    start_step: int = 0,
    on_step: Callable[[int, float, PauliSum], None] | None = None,
    on_record: Callable[[Trajectory, PauliSum], None] | None = None,
    record_initial: bool = True,
) -> Trajectory:
    """Run ``cfg.n_steps`` Trotter steps starting after step ``start_step``.

    Observers are called with the current sum at ``k = start_step`` (unless
    ``record_initial`` is false), every ``record_every`` steps and at the end.
    ``on_record`` sees the trajectory right after each record, which lets
    callers stream rows to disk.
    A :class:`TermLimitError` ends the run early; the partial trajectory is
    returned with ``error`` set.
    """
    observers = dict(observers or {})
    gates = step_rotations(step, cfg.dt)
    traj = Trajectory()
    s = s0
    k = start_step
    traj.peak_terms = len(s)
    if record_initial:
        traj._record(k, k * cfg.dt, s, observers)
        if on_record is not None:
            on_record(traj, s)
    wall0 = time.perf_counter()
    try:
        while k < cfg.n_steps:
            for rot in gates:
                s = apply_rotation(s, rot, cfg.delta, max_terms=cfg.max_terms, threads=cfg.threads)
                traj.peak_terms = max(traj.peak_terms, len(s))
            k += 1
            if cfg.x_cutoff is not None and k % cfg.x_period == 0:
                s = s.truncate_xweight(cfg.x_cutoff)
            t = k * cfg.dt
            if k % cfg.record_every == 0 or k == cfg.n_steps:
                traj._record(k, t, s, observers)
                if on_record is not None:
                    on_record(traj, s)
                log.info(
                    "step %d t=%.4f N=%d N_Z=%d wall=%.1fs mem~%.1fMB",
                    k, t, len(s), traj.n_ztype[-1], time.perf_counter() - wall0, s.nbytes() / 2**20,
                )
            if on_step is not None:
                on_step(k, t, s)
    except TermLimitError as exc:
        traj.error = f"resource-limit at step {k + 1}: {exc}"
        log.warning(traj.error)
    traj.final = s
    traj.final_step = k
    return traj
