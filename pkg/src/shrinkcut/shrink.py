"""Correlation-guided contraction of weighted Max-Cut graphs.

Nodes are greedily merged in pairs, guided by a correlation matrix from the
low-rank SDP relaxation: pick the supernode pair with the strongest effective
correlation (optionally discounted by a constraint-mixing penalty), fix the
relative spin sign to the correlation's sign, and contract. Every contraction
subtracts a constant from the graph offset so that the reduced problem's
energies equal the original energies of the lifted assignments exactly.

Correlations go stale as the graph changes; ``recalc`` picks one of four
refresh policies (fixed period, edge-count drift, correlation-strength
threshold, or cheap local rescaling with no re-solves).
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .maxcut import MaxCutGraph
from .sdp import extract_correlations, solve_maxcut_sdp
from .spectral import laplacian, select_target_size, symmetric_eigenvalues

PenaltyFn = Callable[["SuperNode", "SuperNode"], float]


@dataclass
class SuperNode:
    """A contracted group of original nodes with their spin signs relative to the representative."""

    id: int
    members: dict[int, int] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if not self.members:
            self.members = {self.id: 1}
        if self.members.get(self.id) != 1:
            raise ValueError(f"supernode {self.id} must contain itself with relative sign +1")
        for node, sign in self.members.items():
            if sign not in (1, -1):
                raise ValueError(f"relative sign of node {node} must be +1 or -1, got {sign}")


@dataclass(frozen=True)
class MergeStep:
    """One contraction: node i was absorbed into node j with spin(i) = sigma * spin(j)."""

    order: int
    i: int
    j: int
    sigma: int

    def __post_init__(self) -> None:
        if self.sigma not in (1, -1):
            raise ValueError(f"sigma must be +1 or -1, got {self.sigma}")
        if self.i == self.j:
            raise ValueError(f"merge step {self.order} absorbs node {self.i} into itself")


@dataclass(frozen=True)
class ShrinkConfig:
    """Knobs for a shrink run.

    stop_mode "k" stops at an explicit node count; "spectral" derives the
    count from the cumulative Laplacian eigenvalue mass of the *initial*
    graph (fraction ``alpha``, eigenvalues taken in ``energy_order``).
    """

    stop_mode: str = "spectral"
    k: int | None = None
    alpha: float = 0.9
    energy_order: str = "ascending"
    weight_mode: str = "absolute"
    lam: float = 1.5
    recalc: str = "fixed"
    r: int = 10
    delta: float = 0.1
    tau: float = 0.5
    seed: int = 0
    reference_protected: bool = True
    sdp_rank: int | None = None
    sdp_tol: float = 1e-6
    sdp_max_sweeps: int = 1000

    def __post_init__(self) -> None:
        if self.stop_mode not in ("k", "spectral"):
            raise ValueError(f"stop_mode must be 'k' or 'spectral', got {self.stop_mode!r}")
        if self.stop_mode == "k":
            if self.k is None or self.k < 1:
                raise ValueError(f"stop_mode 'k' needs a target size >= 1, got {self.k}")
        if not (0.0 <= self.alpha <= 1.0):
            raise ValueError(f"alpha must lie in [0, 1], got {self.alpha}")
        if self.energy_order not in ("ascending", "descending"):
            raise ValueError(f"energy_order must be 'ascending' or 'descending', got {self.energy_order!r}")
        if self.weight_mode not in ("absolute", "raw"):
            raise ValueError(f"weight_mode must be 'absolute' or 'raw', got {self.weight_mode!r}")
        if self.lam < 0:
            raise ValueError(f"lam must be >= 0, got {self.lam}")
        if self.recalc not in ("fixed", "delta", "tau", "local"):
            raise ValueError(f"recalc must be one of fixed/delta/tau/local, got {self.recalc!r}")
        if self.r < 1:
            raise ValueError(f"r must be >= 1, got {self.r}")
        if self.delta <= 0:
            raise ValueError(f"delta must be > 0, got {self.delta}")
        if not (0.0 <= self.tau <= 1.0):
            raise ValueError(f"tau must lie in [0, 1], got {self.tau}")


@dataclass(frozen=True)
class ShrinkStats:
    merges: int
    recalcs: int
    sdp_seconds: float
    shrink_seconds: float


@dataclass(frozen=True)
class ShrinkResult:
    """Reduced graph plus everything needed to lift a reduced solution back up.

    ``node_order[t]`` is the original node id behind reduced node t;
    ``steps`` replays contractions (in reverse) to reassign absorbed spins.
    """

    graph: MaxCutGraph
    node_order: tuple[int, ...]
    steps: tuple[MergeStep, ...]
    supernodes: dict[int, SuperNode]
    target_k: int
    stats: ShrinkStats


class WorkingGraph:
    """Mutable adjacency view of a Max-Cut graph; nodes keep their original ids."""

    def __init__(self, adj: dict[int, dict[int, float]], offset: float) -> None:
        self.adj = adj
        self.offset = offset

    @classmethod
    def from_graph(cls, graph: MaxCutGraph) -> "WorkingGraph":
        adj: dict[int, dict[int, float]] = {v: {} for v in range(graph.n_nodes)}
        for (i, j), w in graph.edges.items():
            adj[i][j] = w
            adj[j][i] = w
        return cls(adj, graph.offset)

    @property
    def n_nodes(self) -> int:
        return len(self.adj)

    @property
    def edge_count(self) -> int:
        return sum(len(nbrs) for nbrs in self.adj.values()) // 2

    def nodes(self) -> list[int]:
        return sorted(self.adj)

    def neighbors(self, i: int) -> dict[int, float]:
        return self.adj[i]

    def weight(self, i: int, j: int) -> float:
        return self.adj[i].get(j, 0.0)

    def absolute_degree(self, i: int) -> float:
        return sum(abs(w) for w in self.adj[i].values())

    def contract(self, i: int, j: int, sigma: int) -> float:
        """Absorb node i into node j with spin(i) = sigma * spin(j).

        Edges are folded as w(j,k) += sigma * w(i,k); the constant
        (1 - sigma)/2 * sum_k w(i,k) is subtracted from the offset so
        original and reduced energies coincide. Returns that constant.
        """
        if i not in self.adj or j not in self.adj:
            raise ValueError(f"cannot contract ({i}, {j}): node not in graph")
        if i == j:
            raise ValueError(f"cannot contract node {i} into itself")
        if sigma not in (1, -1):
            raise ValueError(f"sigma must be +1 or -1, got {sigma}")
        nbrs_i = self.adj.pop(i)
        constant = (1.0 - sigma) / 2.0 * sum(nbrs_i.values())
        self.offset -= constant
        for k, w in nbrs_i.items():
            del self.adj[k][i]
            if k == j:
                continue
            merged = self.adj[j].get(k, 0.0) + sigma * w
            if merged == 0.0:
                self.adj[j].pop(k, None)
                self.adj[k].pop(j, None)
            else:
                self.adj[j][k] = merged
                self.adj[k][j] = merged
        return constant

    def to_graph(self) -> tuple[MaxCutGraph, tuple[int, ...]]:
        """Compact to contiguous node ids 0..m-1 (surviving ids ascending).

        Returns the compacted graph and ``node_order`` mapping each reduced
        node index to the original id it represents.
        """
        node_order = tuple(self.nodes())
        index = {orig: t for t, orig in enumerate(node_order)}
        edges: dict[tuple[int, int], float] = {}
        for orig_i, nbrs in self.adj.items():
            for orig_j, w in nbrs.items():
                a, b = index[orig_i], index[orig_j]
                if a < b:
                    edges[(a, b)] = w
        var_map = {t: t - 1 for t in range(1, len(node_order))}
        graph = MaxCutGraph(
            n_nodes=len(node_order), edges=edges, offset=self.offset, var_map=var_map
        )
        return graph, node_order


def effective_correlation(a: SuperNode, b: SuperNode, correlations: np.ndarray) -> float:
    """Mean sign-adjusted correlation over all member pairs of two supernodes."""
    ua = np.fromiter(a.members.keys(), dtype=int, count=len(a.members))
    sa = np.fromiter(a.members.values(), dtype=float, count=len(a.members))
    ub = np.fromiter(b.members.keys(), dtype=int, count=len(b.members))
    sb = np.fromiter(b.members.values(), dtype=float, count=len(b.members))
    block = correlations[np.ix_(ua, ub)]
    return float(np.mean(sa[:, None] * sb[None, :] * block))


def merge_score(correlation: float, penalty: float, lam: float) -> float:
    """Strong correlations are good merge candidates, constraint mixing is not."""
    return abs(correlation) - lam * penalty


def select_merge(
    supernodes: dict[int, SuperNode],
    correlations: np.ndarray,
    lam: float = 1.5,
    penalty: PenaltyFn | None = None,
    rng: np.random.Generator | None = None,
    protected: frozenset[int] = frozenset({0}),
) -> tuple[int, int, int]:
    """Pick the best-scoring supernode pair to contract next.

    Returns (absorbed, survivor, sigma): the smaller id is absorbed into the
    larger, except that a protected node (the reference) always survives.
    Score ties are broken uniformly at random with ``rng``.
    """
    ids = sorted(supernodes)
    if len(ids) < 2:
        raise ValueError(f"need at least two supernodes to merge, got {len(ids)}")
    best_score = -np.inf
    ties: list[tuple[int, int, float]] = []
    for ai in range(len(ids) - 1):
        for bi in range(ai + 1, len(ids)):
            a, b = ids[ai], ids[bi]
            corr = effective_correlation(supernodes[a], supernodes[b], correlations)
            pi = penalty(supernodes[a], supernodes[b]) if penalty is not None else 0.0
            score = merge_score(corr, pi, lam)
            if score > best_score:
                best_score = score
                ties = [(a, b, corr)]
            elif score == best_score:
                ties.append((a, b, corr))
    pick = 0 if rng is None or len(ties) == 1 else int(rng.integers(len(ties)))
    a, b, corr = ties[pick]
    sigma = -1 if corr < 0 else 1
    if a in protected:
        absorbed, survivor = b, a
    else:
        absorbed, survivor = a, b
    return absorbed, survivor, sigma


def local_correlation_update(
    correlations: np.ndarray,
    working: WorkingGraph,
    supernodes: dict[int, SuperNode],
    survivor: int,
    affected: set[int],
) -> None:
    """Rescale correlations around a fresh merge without re-solving the SDP.

    For each affected neighbor supernode k, the survivor/neighbor correlation
    becomes w(survivor, k) / sqrt(d_survivor * d_k) with absolute weighted
    degrees after the merge (0 when a degree vanishes), written into the
    original-node-indexed matrix as sign-adjusted member blocks. Entries not
    touching the survivor are left exactly as they were.
    """
    d_s = working.absolute_degree(survivor)
    sn_s = supernodes[survivor]
    us = np.fromiter(sn_s.members.keys(), dtype=int, count=len(sn_s.members))
    ss = np.fromiter(sn_s.members.values(), dtype=float, count=len(sn_s.members))
    for k in sorted(affected):
        if k == survivor or k not in supernodes:
            continue
        d_k = working.absolute_degree(k)
        if d_s <= 0.0 or d_k <= 0.0:
            value = 0.0
        else:
            value = working.weight(survivor, k) / np.sqrt(d_s * d_k)
        sn_k = supernodes[k]
        uk = np.fromiter(sn_k.members.keys(), dtype=int, count=len(sn_k.members))
        sk = np.fromiter(sn_k.members.values(), dtype=float, count=len(sn_k.members))
        block = value * ss[:, None] * sk[None, :]
        correlations[np.ix_(us, uk)] = block
        correlations[np.ix_(uk, us)] = block.T


def _expand_correlations(
    reduced_entries: np.ndarray,
    node_order: tuple[int, ...],
    supernodes: dict[int, SuperNode],
    n_original: int,
) -> np.ndarray:
    """Lift a reduced-graph correlation matrix back to original node indices."""
    X = np.zeros((n_original, n_original))
    reps = list(node_order)
    members = []
    for rep in reps:
        sn = supernodes[rep]
        u = np.fromiter(sn.members.keys(), dtype=int, count=len(sn.members))
        s = np.fromiter(sn.members.values(), dtype=float, count=len(sn.members))
        members.append((u, s))
    for ia in range(len(reps)):
        ua, sa = members[ia]
        for ib in range(ia, len(reps)):
            ub, sb = members[ib]
            block = reduced_entries[ia, ib] * sa[:, None] * sb[None, :]
            X[np.ix_(ua, ub)] = block
            if ib != ia:
                X[np.ix_(ub, ua)] = block.T
    np.fill_diagonal(X, 1.0)
    return X


def run_shrink(
    graph: MaxCutGraph,
    config: ShrinkConfig | None = None,
    penalty: PenaltyFn | None = None,
    initial_correlations: np.ndarray | None = None,
) -> ShrinkResult:
    """Shrink ``graph`` down to the target node count by repeated contraction.

    ``penalty`` (if given) scores how badly two supernodes mix constraint
    structure; ``initial_correlations`` overrides the first SDP solve with a
    caller-supplied original-indexed correlation matrix.
    """
    if config is None:
        config = ShrinkConfig()
    t_start = time.perf_counter()
    n = graph.n_nodes
    if n < 1:
        raise ValueError("cannot shrink an empty graph")

    seed_seq = np.random.SeedSequence(config.seed)
    tie_rng = np.random.default_rng(seed_seq.spawn(1)[0])

    if config.stop_mode == "k":
        target_k = int(config.k)  # validated in ShrinkConfig
    else:
        spectrum = symmetric_eigenvalues(laplacian(graph, config.weight_mode))
        target_k = select_target_size(spectrum, config.alpha, config.energy_order)

    supernodes = {v: SuperNode(id=v, members={v: 1}) for v in range(n)}
    working = WorkingGraph.from_graph(graph)
    sdp_seconds = 0.0
    recalcs = 0
    steps: list[MergeStep] = []

    def finish() -> ShrinkResult:
        reduced, node_order = working.to_graph()
        stats = ShrinkStats(
            merges=len(steps),
            recalcs=recalcs,
            sdp_seconds=sdp_seconds,
            shrink_seconds=time.perf_counter() - t_start,
        )
        return ShrinkResult(
            graph=reduced,
            node_order=node_order,
            steps=tuple(steps),
            supernodes=supernodes,
            target_k=target_k,
            stats=stats,
        )

    if target_k >= n:
        return finish()

    protected = frozenset({0}) if config.reference_protected else frozenset()

    def solve_correlations() -> np.ndarray:
        nonlocal sdp_seconds
        reduced, node_order = working.to_graph()
        sdp_seed = int(seed_seq.spawn(1)[0].generate_state(1)[0])
        t0 = time.perf_counter()
        embedding = solve_maxcut_sdp(
            reduced,
            rank=config.sdp_rank,
            tol=config.sdp_tol,
            max_sweeps=config.sdp_max_sweeps,
            seed=sdp_seed,
        )
        reduced_entries = extract_correlations(embedding).entries
        sdp_seconds += time.perf_counter() - t0
        return _expand_correlations(reduced_entries, node_order, supernodes, n)

    if initial_correlations is not None:
        correlations = np.array(initial_correlations, dtype=float)
        if correlations.shape != (n, n):
            raise ValueError(
                f"initial correlations must have shape ({n}, {n}), got {correlations.shape}"
            )
        if not np.all(np.isfinite(correlations)):
            raise ValueError("initial correlations contain non-finite values")
    else:
        correlations = solve_correlations()

    merges_since_solve = 0
    edges_at_solve = working.edge_count

    while working.n_nodes > target_k:
        absorbed, survivor, sigma = select_merge(
            supernodes,
            correlations,
            lam=config.lam,
            penalty=penalty,
            rng=tie_rng,
            protected=protected,
        )
        affected = (
            set(working.neighbors(absorbed)) | set(working.neighbors(survivor))
        ) - {absorbed, survivor}
        working.contract(absorbed, survivor, sigma)
        absorbed_sn = supernodes.pop(absorbed)
        survivor_sn = supernodes[survivor]
        for node, rel in absorbed_sn.members.items():
            survivor_sn.members[node] = sigma * rel
        steps.append(MergeStep(order=len(steps) + 1, i=absorbed, j=survivor, sigma=sigma))
        merges_since_solve += 1

        if working.n_nodes <= target_k:
            break

        if config.recalc == "fixed":
            if merges_since_solve >= config.r:
                correlations = solve_correlations()
                recalcs += 1
                merges_since_solve = 0
                edges_at_solve = working.edge_count
        elif config.recalc == "delta":
            current_edges = working.edge_count
            if edges_at_solve == 0:
                drifted = current_edges != 0
            else:
                drifted = abs(current_edges - edges_at_solve) / edges_at_solve > config.delta
            if drifted:
                correlations = solve_correlations()
                recalcs += 1
                merges_since_solve = 0
                edges_at_solve = current_edges
        elif config.recalc == "tau":
            ids = sorted(supernodes)
            strongest = 0.0
            for ai in range(len(ids) - 1):
                for bi in range(ai + 1, len(ids)):
                    corr = abs(
                        effective_correlation(
                            supernodes[ids[ai]], supernodes[ids[bi]], correlations
                        )
                    )
                    if corr > strongest:
                        strongest = corr
            if strongest < config.tau:
                correlations = solve_correlations()
                recalcs += 1
                merges_since_solve = 0
                edges_at_solve = working.edge_count
        else:  # local
            local_correlation_update(correlations, working, supernodes, survivor, affected)

    return finish()


def merge_steps_to_jsonl(steps: tuple[MergeStep, ...]) -> str:
    """One JSON object per line: {"order": ..., "i": ..., "j": ..., "sigma": ...}."""
    lines = [
        json.dumps({"order": s.order, "i": s.i, "j": s.j, "sigma": s.sigma})
        for s in steps
    ]
    return "\n".join(lines) + ("\n" if lines else "")


def merge_steps_from_jsonl(text: str) -> tuple[MergeStep, ...]:
    steps = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ValueError(f"line {lineno}: invalid JSON: {exc}") from exc
        try:
            steps.append(
                MergeStep(
                    order=int(obj["order"]),
                    i=int(obj["i"]),
                    j=int(obj["j"]),
                    sigma=int(obj["sigma"]),
                )
            )
        except KeyError as exc:
            raise ValueError(f"line {lineno}: missing field {exc}") from exc
    return tuple(steps)
