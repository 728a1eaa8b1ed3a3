"""Built-in self checks against the brute-force oracles.

Each check returns a :class:`CheckResult` carrying the measured deviation and
its tolerance, so a report shows how close a pass was.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import kernels
from .evolution import EvolutionConfig, evolve, trotter_step
from .models import (
    H_CRITICAL_2D,
    LatticeSpec,
    build_tfim,
    build_tilted_ising,
    central_site,
    local_energy,
    tfim_symmetrized_sequence,
)
from .oracle import dense, exact_expectation_series, iter_trotter_conjugation
from .pauli_algebra import PauliTerm, multiply
from .pauli_sum import PauliSum


@dataclass
class CheckResult:
    name: str
    deviation: float
    tolerance: float
    detail: str = ""

    @property
    def passed(self) -> bool:
        return bool(np.isfinite(self.deviation) and self.deviation <= self.tolerance)

    def line(self) -> str:
        tag = "PASS" if self.passed else "FAIL"
        extra = f"  ({self.detail})" if self.detail else ""
        return f"{tag}  {self.name:<28s} max deviation {self.deviation:.3e}  tol {self.tolerance:.0e}{extra}"


def _single_site_terms(n: int = 1):
    for z, x in itertools.product((0, 1), repeat=2):
        yield PauliTerm(n, z, x, z & x, 1.0)


def convention_table(n_random: int = 500, seed: int = 0) -> CheckResult:
    """``dense(a*b) == dense(a) @ dense(b)`` over all one-site pairs and random 3-site pairs."""
    worst = 0.0
    for a, b in itertools.product(list(_single_site_terms()), repeat=2):
        worst = max(worst, np.abs(dense(multiply(a, b)) - dense(a) @ dense(b)).max())
    rng = np.random.default_rng(seed)
    for _ in range(n_random):
        za, xa, zb, xb = (int(v) for v in rng.integers(0, 8, size=4))
        pa, pb = (int(v) for v in rng.integers(0, 4, size=2))
        a = PauliTerm(3, za, xa, pa, 1.0)
        b = PauliTerm(3, zb, xb, pb, 1.0)
        worst = max(worst, np.abs(dense(multiply(a, b)) - dense(a) @ dense(b)).max())
    return CheckResult("convention table", float(worst), 1e-14, f"16 + {n_random} pairs")


def tilted_ising_vs_dense(L: int = 5, dt: float = 0.02, steps: int = 50) -> CheckResult:
    """delta=0 SPD against exact dense Trotter conjugation, every step."""
    H = build_tilted_ising(L)
    q = local_energy((L + 1) // 2, L)
    s = q
    worst = 0.0
    for k, ref in enumerate(iter_trotter_conjugation(q, H, dt, steps)):
        if k:
            s = trotter_step(s, H, dt)
        worst = max(worst, np.abs(dense(s) - ref).max())
    return CheckResult("delta=0 vs dense conjugation", float(worst), 1e-10, f"tilted Ising L={L}, {steps} steps")


def tfim_magnetization(
    extents: tuple[int, ...],
    h: float,
    dt: float,
    steps: int,
    delta: float = 0.0,
    sequence: str = "first",
    x_cutoff: int | None = None,
    observe: Callable | None = None,
) -> tuple[np.ndarray, list[int], list[int]]:
    """``<Z_c>`` per step for a TFIM run, plus term and Z-type counts."""
    lat = LatticeSpec(extents)
    step = build_tfim(lat, h) if sequence == "first" else tfim_symmetrized_sequence(lat, h)
    z = PauliSum.from_terms(lat.n, [PauliTerm.from_sites(lat.n, {central_site(lat): "Z"})])
    cfg = EvolutionConfig(delta=delta, dt=dt, t_max=steps * dt, x_cutoff=x_cutoff)
    obs = {"m": PauliSum.expectation_zero}
    if observe is not None:
        obs["extra"] = observe
    traj = evolve(z, step, cfg, obs)
    return traj.series("m"), traj.n_terms, traj.n_ztype


def tfim_vs_state_vector(extents=(2, 2), h: float = H_CRITICAL_2D, dt: float = 0.05, steps: int = 20) -> CheckResult:
    lat = LatticeSpec(extents)
    site = lat.index(tuple(d // 2 for d in extents))
    z = PauliSum.from_terms(lat.n, [PauliTerm.from_sites(lat.n, {site: "Z"})])
    H = build_tfim(lat, h)
    traj = evolve(z, H, EvolutionConfig(delta=0.0, dt=dt, t_max=steps * dt), {"m": PauliSum.expectation_zero})
    ref = exact_expectation_series(H, lat.n, site, dt, steps)
    dev = float(np.abs(traj.series("m") - ref).max())
    label = "x".join(map(str, extents))
    return CheckResult(f"delta=0 vs state vector {label}", dev, 1e-10, f"{steps} steps")


def trotter_order(extents=(3, 3), h: float = H_CRITICAL_2D, dt: float = 0.04, steps: int = 10) -> CheckResult:
    first, *_ = tfim_magnetization(extents, h, dt, steps)
    sym, *_ = tfim_magnetization(extents, h, dt, steps, sequence="symmetrized")
    dev = float(np.abs(first - sym).max())
    return CheckResult("first vs symmetrized order", dev, 1e-12, f"{steps} steps")


def even_x_weight(extents=(3, 3), h: float = H_CRITICAL_2D, dt: float = 0.04, steps: int = 10, delta=2.0**-10):
    odd = []
    tfim_magnetization(extents, h, dt, steps, delta=delta, observe=lambda s: odd.append(int((s.x_weights() % 2).sum())))
    return CheckResult("even X-weight", float(max(odd)), 0.0, f"odd-weight terms over {steps} steps")


def unitarity(L: int = 7, dt: float = 0.02, steps: int = 50) -> CheckResult:
    q = local_energy((L + 1) // 2, L)
    cfg = EvolutionConfig(delta=0.0, dt=dt, t_max=steps * dt)
    traj = evolve(q, build_tilted_ising(L), cfg, {"norm": PauliSum.norm2})
    norms = traj.series("norm")
    return CheckResult("unitarity (delta=0)", float(np.abs(norms - norms[0]).max()), 1e-10, f"L={L}, {steps} steps")


def backend_agreement(L: int = 9, dt: float = 0.02, steps: int = 25, delta: float = 2.0**-12) -> CheckResult:
    names = kernels.available()
    if len(names) < 2:
        return CheckResult("backend agreement", 0.0, 0.0, f"only {names} available")
    H = build_tilted_ising(L)
    q = local_energy((L + 1) // 2, L)
    results = []
    for name in names:
        with kernels.use(name):
            s = q
            for _ in range(steps):
                s = trotter_step(s, H, dt, delta)
            results.append(s)
    a, b = results[:2]
    same = a.rows.shape == b.rows.shape and np.array_equal(a.rows, b.rows) and np.array_equal(a.coeffs, b.coeffs)
    dev = 0.0 if same else float("inf")
    return CheckResult("backend agreement", dev, 0.0, f"{' vs '.join(names)}, bitwise, N={len(a)}")


CHECKS: list[Callable[[], CheckResult]] = [
    convention_table,
    tilted_ising_vs_dense,
    lambda: tfim_vs_state_vector((2, 2)),
    lambda: tfim_vs_state_vector((3, 3)),
    trotter_order,
    even_x_weight,
    unitarity,
    backend_agreement,
]


def run_all() -> list[CheckResult]:
    return [check() for check in CHECKS]
