"""Lifting reduced-problem solutions back to the original problem.

A shrink run leaves a log of contractions (``MergeStep``); replaying it in
reverse assigns a spin to every absorbed node from its survivor's spin. The
lifted spin vector is then gauge-fixed to the reference node and translated
back into binary variables of the original QUBO.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .maxcut import MaxCutGraph, binary_to_spins, cut_value, spins_to_binary
from .qubo import QuboModel
from .shrink import MergeStep, ShrinkResult


@dataclass(frozen=True)
class LiftedSolution:
    """Original-problem assignment recovered from a reduced solution."""

    bits: np.ndarray
    spins: np.ndarray
    energy: float


def replay(steps: tuple[MergeStep, ...], spins: dict[int, int]) -> dict[int, int]:
    """Assign spins to absorbed nodes by unwinding the contraction log.

    ``spins`` maps surviving original node ids to +/-1. Steps are replayed
    newest-first; each sets spin(i) = sigma * spin(j). A step whose survivor
    has no spin yet, or whose absorbed node already has one, is an error.
    """
    assigned = dict(spins)
    for value in assigned.values():
        if value not in (1, -1):
            raise ValueError(f"spins must be +1 or -1, got {value}")
    for step in reversed(steps):
        if step.j not in assigned:
            raise ValueError(
                f"merge step {step.order}: survivor node {step.j} has no spin assigned"
            )
        if step.i in assigned:
            raise ValueError(
                f"merge step {step.order}: absorbed node {step.i} already has a spin"
            )
        assigned[step.i] = step.sigma * assigned[step.j]
    return assigned


def lift_solution(
    result: ShrinkResult, reduced_bits, original_graph: MaxCutGraph
) -> LiftedSolution:
    """Turn reduced-problem bits into an original-problem assignment.

    Reduced bits become reduced-node spins, ``node_order`` places them on the
    surviving original nodes, the merge log fills in the absorbed nodes, and
    both global spin gauges are evaluated (they cut the same weight; ties
    keep the reference node on the +1 side).
    """
    reduced_spins = binary_to_spins(result.graph, reduced_bits)
    spin_map = {
        result.node_order[t]: int(reduced_spins[t]) for t in range(result.graph.n_nodes)
    }
    full = replay(result.steps, spin_map)
    n = original_graph.n_nodes
    if sorted(full) != list(range(n)):
        missing = sorted(set(range(n)) - set(full))
        raise ValueError(f"lifted spins do not cover all original nodes; missing {missing}")
    spins = np.array([full[v] for v in range(n)], dtype=int)

    cut_plus = cut_value(original_graph, spins)
    cut_minus = cut_value(original_graph, -spins)
    if cut_minus > cut_plus:
        spins = -spins
        cut = cut_minus
    elif cut_plus > cut_minus:
        cut = cut_plus
    else:
        if spins[0] == -1:
            spins = -spins
        cut = cut_plus

    bits = spins_to_binary(original_graph, spins)
    energy = original_graph.offset - cut
    return LiftedSolution(bits=bits, spins=spins, energy=energy)


def decode_solution(model: QuboModel, bits) -> np.ndarray:
    """Interpret QUBO bits through the model's variable semantics.

    MDKP models yield the item selection vector (slack bits dropped), MIS
    models the vertex selection vector, QAP models the n x n assignment
    matrix. Models with only generic "spin" tags are returned unchanged.
    """
    bits = np.asarray(bits, dtype=int)
    if bits.shape != (model.n_vars,):
        raise ValueError(f"bits have shape {bits.shape}, expected ({model.n_vars},)")
    kinds = {tag[0] for tag in model.semantics}
    if kinds <= {"item", "slack"}:
        items = [(tag[1], i) for i, tag in enumerate(model.semantics) if tag[0] == "item"]
        out = np.zeros(len(items), dtype=int)
        for item, var in items:
            out[item] = bits[var]
        return out
    if kinds == {"vertex"}:
        out = np.zeros(model.n_vars, dtype=int)
        for var, tag in enumerate(model.semantics):
            out[tag[1]] = bits[var]
        return out
    if kinds == {"assign"}:
        n = int(round(np.sqrt(model.n_vars)))
        if n * n != model.n_vars:
            raise ValueError(f"assignment model has non-square size {model.n_vars}")
        out = np.zeros((n, n), dtype=int)
        for var, tag in enumerate(model.semantics):
            out[tag[1], tag[2]] = bits[var]
        return out
    if kinds == {"spin"}:
        return bits.copy()
    raise ValueError(f"cannot decode mixed/unknown semantics kinds {sorted(kinds)}")
