"""Graph form of the interaction dynamics: incidence operators, a global
right-hand-side oracle, edge residuals, and a Lyapunov monitor.

Edges are directed (j, i): agent i receives from j because j lies inside
i's radius.  Columns of the incidence matrix D carry +1 at the receiving
node (head) and -1 at the source (tail), so stacking p agent-major gives
edge differences via (-D^T kron I_m) p = (p_j - p_i per edge).

The stacked weighted operators restrict each node's row of D to its
in-edges before applying the per-node weight diagonals.  With full rows,
a node's out-edges would couple back into its own dynamics, which the
per-agent law does not contain; the in-edge restriction makes the global
product reproduce the per-agent sums exactly (see global_rhs).

Dense matrices are built for n <= 64; beyond that the same quadratic
forms and products are evaluated edge-wise without materializing them.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from .core import EPS_POS, EPS_VEL, InteractionParams

log = logging.getLogger(__name__)

DENSE_NODE_LIMIT = 64


class OracleInapplicableError(ValueError):
    """The matrix form has no guard branch; degenerate pairs are refused."""

    def __init__(self, j: int, i: int, kind: str):
        self.j = j
        self.i = i
        self.kind = kind
        super().__init__(
            f"edge ({j}->{i}) degenerate in {kind}; global form undefined"
        )


@dataclass(frozen=True)
class InteractionGraph:
    """Directed proximity graph with its node-by-edge incidence matrix."""

    n_nodes: int
    edges: tuple[tuple[int, int], ...]  # (source j, receiver i), sorted by (i, j)
    incidence: np.ndarray  # (n_nodes, n_edges), +1 head/receiver, -1 tail/source

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    @property
    def sources(self) -> np.ndarray:
        return np.fromiter((j for j, _ in self.edges), dtype=int, count=self.n_edges)

    @property
    def receivers(self) -> np.ndarray:
        return np.fromiter((i for _, i in self.edges), dtype=int, count=self.n_edges)

    def in_degrees(self) -> np.ndarray:
        """Number of in-edges per node == |N_i| of the receiving agent."""
        return np.bincount(self.receivers, minlength=self.n_nodes)


@dataclass(frozen=True)
class WeightedIncidence:
    """Per-node weight diagonals and the stacked weighted operators.

    w_bar[i] is the diagonal of I - W_i over all edges (1 - w_e on edges
    owned by node i, 1 elsewhere); w_hat likewise for the velocity
    weights.  d_bar/d_hat are the dense stacked operators (None above
    the dense node limit), w_pos/w_vel the raw per-edge weights.
    """

    dim: int
    w_bar: np.ndarray  # (n, E)
    w_hat: np.ndarray  # (n, E)
    w_pos: np.ndarray  # (E,)
    w_vel: np.ndarray  # (E,)
    d_bar: np.ndarray | None  # (n*m, E*m)
    d_hat: np.ndarray | None


@dataclass(frozen=True)
class EdgeState:
    """Stacked edge-space vectors, ordered like the edge list."""

    e: np.ndarray  # (E*m,) edge position differences p_j - p_i
    e_dot: np.ndarray  # (E*m,) edge velocity differences
    q: np.ndarray  # (E*m,) stacked position offsets p_ij
    q_tilde: np.ndarray  # (E*m,) stacked velocity offsets v_ij


@dataclass(frozen=True)
class EdgeErrors:
    """Residuals (dp - p_ij, dv - v_ij) per edge plus per-agent averages.

    Edges inside a guard band carry a flagged sentinel row (zeros,
    valid=False) and are excluded from the averages; agents with no
    valid in-edge get NaN averages.
    """

    sources: np.ndarray  # (E,)
    receivers: np.ndarray  # (E,)
    pos: np.ndarray  # (E, m)
    vel: np.ndarray  # (E, m)
    pos_valid: np.ndarray  # (E,) bool
    vel_valid: np.ndarray  # (E,) bool
    agent_mean_pos: np.ndarray  # (n, m)
    agent_mean_vel: np.ndarray  # (n, m)


def _params_seq(params, n: int) -> list[InteractionParams]:
    if isinstance(params, InteractionParams):
        return [params] * n
    params = list(params)
    if len(params) != n:
        raise ValueError(f"expected {n} parameter blocks, got {len(params)}")
    return params


def _directed_edges(positions: np.ndarray, radii: np.ndarray):
    """Edge endpoint arrays (sources, receivers), sorted by (receiver, source)."""
    diff = positions[:, None, :] - positions[None, :, :]
    dist = np.linalg.norm(diff, axis=2)
    mask = dist <= radii[:, None]
    np.fill_diagonal(mask, False)
    receivers, sources = np.nonzero(mask)  # row-major == sorted by (i, j)
    return sources, receivers


def build_graph(positions: np.ndarray, params) -> InteractionGraph:
    """Directed edge (j, i) for every j in agent i's neighborhood."""
    positions = np.asarray(positions, dtype=float)
    n = positions.shape[0]
    plist = _params_seq(params, n)
    radii = np.array([p.radius for p in plist])
    sources, receivers = _directed_edges(positions, radii)
    ne = sources.shape[0]
    d = np.zeros((n, ne))
    cols = np.arange(ne)
    d[receivers, cols] = 1.0
    d[sources, cols] = -1.0
    edges = tuple(zip(sources.tolist(), receivers.tolist()))
    return InteractionGraph(n_nodes=n, edges=edges, incidence=d)


def laplacian(g: InteractionGraph) -> np.ndarray:
    """L = D D^T; symmetric PSD by construction."""
    return g.incidence @ g.incidence.T


def _receiver_param_arrays(plist: list[InteractionParams], receivers: np.ndarray):
    delta = np.array([p.delta for p in plist])[receivers]
    eta = np.array([p.eta for p in plist])[receivers]
    alpha = np.array([p.alpha for p in plist])[receivers]
    beta = np.array([p.beta for p in plist])[receivers]
    return delta, eta, alpha, beta


def _edge_weights(
    g: InteractionGraph,
    positions: np.ndarray,
    velocities: np.ndarray,
    plist: list[InteractionParams],
) -> tuple[np.ndarray, np.ndarray]:
    sources, receivers = g.sources, g.receivers
    dp = positions[sources] - positions[receivers]
    dv = velocities[sources] - velocities[receivers]
    dist = np.linalg.norm(dp, axis=1)
    dvn = np.linalg.norm(dv, axis=1)
    bad_p = dist <= EPS_POS
    if bad_p.any():
        e = int(np.nonzero(bad_p)[0][0])
        raise OracleInapplicableError(int(sources[e]), int(receivers[e]), "position")
    bad_v = dvn <= EPS_VEL
    if bad_v.any():
        e = int(np.nonzero(bad_v)[0][0])
        raise OracleInapplicableError(int(sources[e]), int(receivers[e]), "velocity")
    deg = g.in_degrees()[receivers]
    delta, eta, alpha, beta = _receiver_param_arrays(plist, receivers)
    w_pos = (delta * deg / dist) ** alpha
    w_vel = (eta / (deg * dvn)) ** beta
    return w_pos, w_vel


def weighted_incidence(
    g: InteractionGraph,
    positions: np.ndarray,
    velocities: np.ndarray,
    params,
) -> WeightedIncidence:
    """Freeze the current state into weight diagonals and stacked operators."""
    positions = np.asarray(positions, dtype=float)
    velocities = np.asarray(velocities, dtype=float)
    n, m = positions.shape
    plist = _params_seq(params, n)
    w_pos, w_vel = _edge_weights(g, positions, velocities, plist)

    owned = np.zeros((n, g.n_edges), dtype=bool)
    owned[g.receivers, np.arange(g.n_edges)] = True
    w_bar = np.where(owned, 1.0 - w_pos[None, :], 1.0)
    w_hat = np.where(owned, 1.0 - w_vel[None, :], 1.0)

    d_bar = d_hat = None
    if n <= DENSE_NODE_LIMIT:
        rows_bar = np.where(owned, w_bar, 0.0)  # in-edge rows of D times W_bar
        rows_hat = np.where(owned, w_hat, 0.0)
        eye = np.eye(m)
        d_bar = np.kron(rows_bar, eye)
        d_hat = np.kron(rows_hat, eye)
    return WeightedIncidence(
        dim=m, w_bar=w_bar, w_hat=w_hat, w_pos=w_pos, w_vel=w_vel,
        d_bar=d_bar, d_hat=d_hat,
    )


def edge_state(
    g: InteractionGraph,
    positions: np.ndarray,
    velocities: np.ndarray,
    params,
) -> EdgeState:
    """Edge differences and offset stacks for the current snapshot."""
    positions = np.asarray(positions, dtype=float)
    velocities = np.asarray(velocities, dtype=float)
    n, m = positions.shape
    plist = _params_seq(params, n)
    w_pos, w_vel = _edge_weights(g, positions, velocities, plist)
    dp = positions[g.sources] - positions[g.receivers]
    dv = velocities[g.sources] - velocities[g.receivers]
    return EdgeState(
        e=dp.reshape(-1),
        e_dot=dv.reshape(-1),
        q=(w_pos[:, None] * dp).reshape(-1),
        q_tilde=(w_vel[:, None] * dv).reshape(-1),
    )


def global_rhs(positions: np.ndarray, velocities: np.ndarray, params) -> np.ndarray:
    """Stacked accelerations -D_bar (D^T kron I) p - D_hat (D^T kron I) v.

    Block i equals the per-agent interaction acceleration.  Degenerate
    pairs raise OracleInapplicableError because the matrix form has no
    guard branch.
    """
    positions = np.asarray(positions, dtype=float)
    velocities = np.asarray(velocities, dtype=float)
    n, m = positions.shape
    plist = _params_seq(params, n)
    g = build_graph(positions, plist)
    if n <= DENSE_NODE_LIMIT:
        w = weighted_incidence(g, positions, velocities, plist)
        dt_kron = np.kron(g.incidence.T, np.eye(m))
        p_flat = positions.reshape(-1)
        v_flat = velocities.reshape(-1)
        return -w.d_bar @ (dt_kron @ p_flat) - w.d_hat @ (dt_kron @ v_flat)
    w_pos, w_vel = _edge_weights(g, positions, velocities, plist)
    dp = positions[g.sources] - positions[g.receivers]
    dv = velocities[g.sources] - velocities[g.receivers]
    contrib = (1.0 - w_pos)[:, None] * dp + (1.0 - w_vel)[:, None] * dv
    rhs = np.zeros((n, m))
    np.add.at(rhs, g.receivers, contrib)
    return rhs.reshape(-1)


def edge_errors(positions: np.ndarray, velocities: np.ndarray, params,
                g: InteractionGraph | None = None) -> EdgeErrors:
    """Interaction residuals per directed edge and their per-agent means."""
    positions = np.asarray(positions, dtype=float)
    velocities = np.asarray(velocities, dtype=float)
    n, m = positions.shape
    plist = _params_seq(params, n)
    if g is None:
        radii = np.array([p.radius for p in plist])
        sources, receivers = _directed_edges(positions, radii)
    else:
        sources, receivers = g.sources, g.receivers
    ne = sources.shape[0]
    deg_nodes = np.bincount(receivers, minlength=n)
    deg = deg_nodes[receivers]
    dp = positions[sources] - positions[receivers]
    dv = velocities[sources] - velocities[receivers]
    dist = np.linalg.norm(dp, axis=1)
    dvn = np.linalg.norm(dv, axis=1)
    delta, eta, alpha, beta = _receiver_param_arrays(plist, receivers)

    pos_valid = dist > EPS_POS
    vel_valid = dvn > EPS_VEL
    w_pos = np.where(pos_valid, (delta * deg / np.where(pos_valid, dist, 1.0)) ** alpha, 0.0)
    w_vel = np.where(vel_valid, (eta / (deg * np.where(vel_valid, dvn, 1.0))) ** beta, 0.0)
    pos = np.where(pos_valid[:, None], dp - w_pos[:, None] * dp, 0.0)
    vel = np.where(vel_valid[:, None], dv - w_vel[:, None] * dv, 0.0)

    sum_pos = np.zeros((n, m))
    sum_vel = np.zeros((n, m))
    np.add.at(sum_pos, receivers[pos_valid], pos[pos_valid])
    np.add.at(sum_vel, receivers[vel_valid], vel[vel_valid])
    cnt_pos = np.bincount(receivers[pos_valid], minlength=n).astype(float)
    cnt_vel = np.bincount(receivers[vel_valid], minlength=n).astype(float)
    with np.errstate(invalid="ignore", divide="ignore"):
        agent_mean_pos = np.where(cnt_pos[:, None] > 0, sum_pos / cnt_pos[:, None], np.nan)
        agent_mean_vel = np.where(cnt_vel[:, None] > 0, sum_vel / cnt_vel[:, None], np.nan)
    return EdgeErrors(
        sources=sources, receivers=receivers,
        pos=pos, vel=vel, pos_valid=pos_valid, vel_valid=vel_valid,
        agent_mean_pos=agent_mean_pos, agent_mean_vel=agent_mean_vel,
    )


def _apply_stacked(g: InteractionGraph, row_weights: np.ndarray, m: int,
                   edge_vec: np.ndarray) -> np.ndarray:
    """Matrix-free product of a stacked in-edge operator with an edge vector."""
    out = np.zeros((g.n_nodes, m))
    np.add.at(out, g.receivers, row_weights[:, None] * edge_vec.reshape(-1, m))
    return out.reshape(-1)


def _apply_dt_kron(g: InteractionGraph, m: int, node_vec: np.ndarray) -> np.ndarray:
    """Matrix-free (D^T kron I_m): node stack -> per-edge head-minus-tail."""
    nodes = node_vec.reshape(-1, m)
    return (nodes[g.receivers] - nodes[g.sources]).reshape(-1)


def stability_matrices(w: WeightedIncidence, g: InteractionGraph):
    """Dense A = (D^T kron I) D_hat and B = (D^T kron I) D_bar."""
    if w.d_hat is None:
        raise ValueError(
            f"dense stability matrices unavailable above {DENSE_NODE_LIMIT} nodes"
        )
    dt_kron = np.kron(g.incidence.T, np.eye(w.dim))
    return dt_kron @ w.d_hat, dt_kron @ w.d_bar


def lyapunov_value(es: EdgeState, w: WeightedIncidence, g: InteractionGraph):
    """Energy-like value V = 0.5 e_dot.e_dot + 0.5 e^T B e and V_dot = -e_dot^T A e_dot.

    Weights are the frozen ones inside ``w``; under time-varying topology
    the caller re-freezes each step and treats the state as a fresh
    initial condition.
    """
    m = w.dim
    if w.d_hat is not None:
        a, b = stability_matrices(w, g)
        be = b @ es.e
        a_edot = a @ es.e_dot
    else:
        be = _apply_dt_kron(g, m, _apply_stacked(g, 1.0 - w.w_pos, m, es.e))
        a_edot = _apply_dt_kron(g, m, _apply_stacked(g, 1.0 - w.w_vel, m, es.e_dot))
    v = 0.5 * float(es.e_dot @ es.e_dot) + 0.5 * float(es.e @ be)
    v_dot = -float(es.e_dot @ a_edot)
    return v, v_dot


def lyapunov_monitor(positions: np.ndarray, velocities: np.ndarray, params) -> dict:
    """One-shot monitor: freeze weights at this snapshot and report V, V_dot.

    Also reports whether the symmetric parts of A and B are numerically
    PSD (dense path only).  PSD failures are logged, not raised — the
    dissipation argument needs assumptions that running scenarios may
    violate.
    """
    positions = np.asarray(positions, dtype=float)
    velocities = np.asarray(velocities, dtype=float)
    plist = _params_seq(params, positions.shape[0])
    g = build_graph(positions, plist)
    w = weighted_incidence(g, positions, velocities, plist)
    es = edge_state(g, positions, velocities, plist)
    v, v_dot = lyapunov_value(es, w, g)
    a_psd = b_psd = None
    if w.d_hat is not None and g.n_edges > 0:
        a, b = stability_matrices(w, g)
        a_psd = bool(np.linalg.eigvalsh(0.5 * (a + a.T)).min() >= -1e-10)
        b_psd = bool(np.linalg.eigvalsh(0.5 * (b + b.T)).min() >= -1e-10)
        if not a_psd:
            log.warning("symmetric part of A not PSD; dissipation bound not certified")
        if a_psd and v_dot > 1e-12:
            log.warning("V_dot = %.3e exceeds tolerance despite PSD A", v_dot)
    return {
        "value": v,
        "derivative": v_dot,
        "a_psd": a_psd,
        "b_psd": b_psd,
        "n_edges": g.n_edges,
        "spanning_tree": has_spanning_tree(g),
    }


def has_spanning_tree(g: InteractionGraph) -> bool:
    """True iff one node is reachable from every other along edge directions."""
    n = g.n_nodes
    if n == 1:
        return True
    if g.n_edges == 0:
        return False
    adj = csr_matrix(
        (np.ones(g.n_edges), (g.sources, g.receivers)), shape=(n, n)
    )
    n_comp, labels = connected_components(adj, directed=True, connection="strong")
    if n_comp == 1:
        return True
    # The condensation is a DAG; a globally reachable root exists iff it
    # has exactly one sink component.
    has_out = np.zeros(n_comp, dtype=bool)
    src_lab = labels[g.sources]
    rcv_lab = labels[g.receivers]
    has_out[src_lab[src_lab != rcv_lab]] = True
    return int(np.count_nonzero(~has_out)) == 1
