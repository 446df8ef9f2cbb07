"""QUBO solving backends: exact enumeration, simulated annealing, toy VQE.

All backends minimize the QUBO energy and return a :class:`Solution`. The
exact backend is the ground truth for small problems (up to 24 variables);
simulated annealing scales to the reduced problems the pipeline produces;
the VQE backend is a deliberately small statevector simulation for
experimentation, not performance.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .qubo import QuboModel, coefficient_scale, evaluate_qubo

EXACT_MAX_VARS = 24
VQE_MAX_VARS = 16


@dataclass(frozen=True)
class Solution:
    """A binary assignment and its QUBO energy."""

    bits: np.ndarray
    energy: float

    def __post_init__(self) -> None:
        bits = np.asarray(self.bits, dtype=int)
        if bits.ndim != 1 or not np.all((bits == 0) | (bits == 1)):
            raise ValueError("solution bits must be a flat 0/1 array")
        object.__setattr__(self, "bits", bits)


def _quad_matrices(model: QuboModel) -> tuple[np.ndarray, np.ndarray]:
    """(upper-triangular, symmetric) coefficient matrices of the quadratic part."""
    n = model.n_vars
    upper = np.zeros((n, n))
    for (i, j), w in model.quad.items():
        upper[i, j] = w
    return upper, upper + upper.T


def _bit_rows(counters: np.ndarray, n: int) -> np.ndarray:
    """Row s holds the bits of counters[s], variable i = bit i."""
    return ((counters[:, None] >> np.arange(n)[None, :]) & 1).astype(float)


def _all_energies(model: QuboModel, chunk: int = 1 << 18) -> np.ndarray:
    """Energies of all 2^n assignments, indexed by the bit counter."""
    n = model.n_vars
    upper, _ = _quad_matrices(model)
    lin = np.asarray(model.lin)
    total = 1 << n
    energies = np.empty(total)
    for start in range(0, total, chunk):
        counters = np.arange(start, min(start + chunk, total), dtype=np.int64)
        B = _bit_rows(counters, n)
        energies[start : start + len(counters)] = (
            ((B @ upper) * B).sum(axis=1) + B @ lin + model.offset
        )
    return energies


def solve_exact(model: QuboModel, chunk: int = 1 << 18) -> Solution:
    """Global minimum by full enumeration (ties -> lowest bit counter)."""
    n = model.n_vars
    if n > EXACT_MAX_VARS:
        raise ValueError(
            f"exact enumeration is capped at {EXACT_MAX_VARS} variables, got {n}"
        )
    if n == 0:
        return Solution(bits=np.zeros(0, dtype=int), energy=model.offset)
    upper, _ = _quad_matrices(model)
    lin = np.asarray(model.lin)
    best_energy = np.inf
    best_counter = 0
    total = 1 << n
    for start in range(0, total, chunk):
        counters = np.arange(start, min(start + chunk, total), dtype=np.int64)
        B = _bit_rows(counters, n)
        energies = ((B @ upper) * B).sum(axis=1) + B @ lin + model.offset
        idx = int(np.argmin(energies))
        if energies[idx] < best_energy:
            best_energy = float(energies[idx])
            best_counter = int(counters[idx])
    bits = ((best_counter >> np.arange(n)) & 1).astype(int)
    return Solution(bits=bits, energy=best_energy)


def solve_sa(
    model: QuboModel,
    seed: int = 0,
    sweeps: int | None = None,
    t_start: float | None = None,
    t_end: float | None = None,
) -> Solution:
    """Single-flip Metropolis annealing with a geometric cooling schedule.

    Each sweep visits every variable once in index order; the temperature
    ramps from the largest coefficient magnitude down to a 1e-3 fraction of
    it. Local fields are maintained incrementally, and the best-seen state's
    energy is recomputed from scratch before returning.
    """
    n = model.n_vars
    if n == 0:
        return Solution(bits=np.zeros(0, dtype=int), energy=model.offset)
    if sweeps is None:
        sweeps = 200 * n
    if sweeps < 1:
        raise ValueError(f"sweeps must be >= 1, got {sweeps}")
    scale = coefficient_scale(model)
    if t_start is None:
        t_start = scale
    if t_end is None:
        t_end = 1e-3 * scale
    if not (0 < t_end <= t_start):
        raise ValueError(f"need 0 < t_end <= t_start, got {t_end} and {t_start}")

    rng = np.random.default_rng(seed)
    _, sym = _quad_matrices(model)
    lin = np.asarray(model.lin)

    x = rng.integers(0, 2, size=n)
    fields = sym @ x
    energy = evaluate_qubo(model, x)
    best_bits = x.copy()
    best_energy = energy

    if sweeps == 1:
        temperatures = np.array([t_start])
    else:
        temperatures = t_start * (t_end / t_start) ** (np.arange(sweeps) / (sweeps - 1))

    for temperature in temperatures:
        accept_draws = rng.random(n)
        for i in range(n):
            delta = (1 - 2 * x[i]) * (lin[i] + fields[i])
            if delta <= 0 or accept_draws[i] < np.exp(-delta / temperature):
                step = 1 - 2 * x[i]
                x[i] += step
                fields += sym[:, i] * step
                energy += delta
                if energy < best_energy:
                    best_energy = energy
                    best_bits = x.copy()

    return Solution(bits=best_bits, energy=evaluate_qubo(model, best_bits))


def _apply_ry_layer(state: np.ndarray, angles: np.ndarray, n: int) -> np.ndarray:
    """One RY rotation per qubit on a real statevector of length 2^n."""
    state = state.reshape([2] * n)
    for q in range(n):
        axis = n - 1 - q  # qubit q is bit q of the basis index
        lo = np.take(state, 0, axis=axis)
        hi = np.take(state, 1, axis=axis)
        c = np.cos(angles[q] / 2.0)
        s = np.sin(angles[q] / 2.0)
        new_lo = c * lo - s * hi
        new_hi = s * lo + c * hi
        state = np.stack([new_lo, new_hi], axis=axis)
    return state.reshape(-1)


def _cz_ring_mask(n: int) -> np.ndarray:
    """Sign flips applied by a ring of CZ gates over all 2^n basis states."""
    states = np.arange(1 << n)
    mask = np.ones(1 << n)
    pairs = {tuple(sorted((q, (q + 1) % n))) for q in range(n)} if n > 1 else set()
    for a, b in sorted(pairs):
        both = ((states >> a) & 1) & ((states >> b) & 1)
        mask *= np.where(both == 1, -1.0, 1.0)
    return mask


def solve_vqe_sim(
    model: QuboModel,
    layers: int = 1,
    restarts: int = 2,
    passes: int = 3,
    grid: int = 12,
    shots: int = 8,
    seed: int = 0,
) -> Solution:
    """Tiny variational circuit simulation (capped at 16 variables).

    The ansatz is an initial RY layer followed by ``layers`` blocks of a CZ
    ring plus another RY layer. Angles are tuned by seeded random-restart
    coordinate search over a fixed angle grid against the exact expected
    energy; the returned solution is the best of the ``shots``
    highest-probability basis states.
    """
    n = model.n_vars
    if n > VQE_MAX_VARS:
        raise ValueError(f"VQE simulation is capped at {VQE_MAX_VARS} variables, got {n}")
    if n == 0:
        return Solution(bits=np.zeros(0, dtype=int), energy=model.offset)
    if layers < 0 or restarts < 1 or passes < 1 or grid < 2 or shots < 1:
        raise ValueError("invalid VQE parameters")

    energies = _all_energies(model)
    cz_mask = _cz_ring_mask(n)
    n_angles = n * (layers + 1)
    grid_angles = np.linspace(0.0, 2.0 * np.pi, grid, endpoint=False)

    def statevector(angles: np.ndarray) -> np.ndarray:
        state = np.zeros(1 << n)
        state[0] = 1.0
        state = _apply_ry_layer(state, angles[:n], n)
        for layer in range(layers):
            state = state * cz_mask
            block = angles[(layer + 1) * n : (layer + 2) * n]
            state = _apply_ry_layer(state, block, n)
        return state

    def expected_energy(angles: np.ndarray) -> float:
        amp = statevector(angles)
        return float((amp * amp) @ energies)

    rng = np.random.default_rng(seed)
    best_angles = None
    best_value = np.inf
    for _ in range(restarts):
        angles = rng.uniform(0.0, 2.0 * np.pi, size=n_angles)
        value = expected_energy(angles)
        for _ in range(passes):
            improved = False
            for idx in range(n_angles):
                saved = angles[idx]
                for candidate in grid_angles:
                    angles[idx] = candidate
                    trial = expected_energy(angles)
                    if trial < value - 1e-12:
                        value = trial
                        saved = candidate
                        improved = True
                angles[idx] = saved
            if not improved:
                break
        if value < best_value:
            best_value = value
            best_angles = angles.copy()

    amp = statevector(best_angles)
    probs = amp * amp
    top = np.argsort(-probs, kind="stable")[:shots]
    top_sorted = np.sort(top)
    state_energies = energies[top_sorted]
    pick = int(top_sorted[int(np.argmin(state_energies))])
    bits = ((pick >> np.arange(n)) & 1).astype(int)
    return Solution(bits=bits, energy=float(energies[pick]))


def solve_qubo(model: QuboModel, backend: str = "exact", seed: int = 0, **options) -> Solution:
    """Dispatch to a backend by name ("exact", "sa", or "vqe")."""
    if backend == "exact":
        return solve_exact(model, **options)
    if backend == "sa":
        return solve_sa(model, seed=seed, **options)
    if backend == "vqe":
        return solve_vqe_sim(model, seed=seed, **options)
    raise ValueError(f"unknown backend {backend!r}; expected 'exact', 'sa', or 'vqe'")
