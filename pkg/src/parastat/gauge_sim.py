"""Quantum-double lattice gauge models on tiny open patches.

A group element lives on every oriented edge.  Vertex operators average the
local gauge action (tail edges h -> h g^-1, head edges h -> g h); plaquette
operators project onto flat holonomy.  All of them commute, the ground state
is the uniform superposition over flat configurations, and open Wilson lines
in an irrep psi create a pair of point excitations at their endpoints whose
internal indices respond to trapping potentials with a delta structure in
(irrep, index).

Everything is dimension-agnostic: a patch is just vertices, oriented edges,
and signed plaquette cycles, so 2D patches exercise the same algebra the 3D
construction uses.  States are sparse maps from edge configurations to
amplitudes with a support cap, which limits groups to desk scale.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .group_engine import FiniteGroup, Irrep


class GaugeError(RuntimeError):
    pass


@dataclass(frozen=True)
class GaugeLattice:
    """Oriented graph with plaquettes as signed edge cycles."""

    n_vertices: int
    edges: tuple[tuple[int, int], ...]  # (tail, head)
    plaquettes: tuple[tuple[tuple[int, int], ...], ...]  # ((edge, sign), ...)

    def __post_init__(self):
        for p in self.plaquettes:
            for e, sign in p:
                if not 0 <= e < len(self.edges):
                    raise GaugeError(f"plaquette references missing edge {e}")
                if sign not in (+1, -1):
                    raise GaugeError("plaquette orientation signs must be +1/-1")

    @property
    def n_edges(self) -> int:
        return len(self.edges)


def patch_2x2() -> GaugeLattice:
    """Four vertices, four edges, one square plaquette.

        2 --e1--> 3
        ^         ^
        e2        e3
        |         |
        0 --e0--> 1
    """
    edges = ((0, 1), (2, 3), (0, 2), (1, 3))
    plaq = (((0, +1), (3, +1), (1, -1), (2, -1)),)
    return GaugeLattice(4, edges, plaq)


def ladder_2x3() -> GaugeLattice:
    """Six vertices, seven edges, two plaquettes side by side.

        3 --e2--> 4 --e3--> 5
        ^         ^         ^
        e4        e5        e6
        |         |         |
        0 --e0--> 1 --e1--> 2
    """
    edges = ((0, 1), (1, 2), (3, 4), (4, 5), (0, 3), (1, 4), (2, 5))
    plaq = (
        ((0, +1), (5, +1), (2, -1), (4, -1)),
        ((1, +1), (6, +1), (3, -1), (5, -1)),
    )
    return GaugeLattice(6, edges, plaq)


@dataclass
class GaugeState:
    """Sparse wavefunction over per-edge group-element assignments."""

    group: FiniteGroup
    lattice: GaugeLattice
    amps: dict[tuple, complex] = field(default_factory=dict)
    support_cap: int = 10 ** 6

    def norm(self) -> float:
        return float(np.sqrt(sum(abs(v) ** 2 for v in self.amps.values())))

    def normalized(self) -> "GaugeState":
        nrm = self.norm()
        if nrm == 0:
            raise GaugeError("zero state")
        return GaugeState(self.group, self.lattice,
                          {k: v / nrm for k, v in self.amps.items()}, self.support_cap)

    def axpy(self, other: "GaugeState", scale: complex = 1.0) -> "GaugeState":
        amps = dict(self.amps)
        for k, v in other.amps.items():
            amps[k] = amps.get(k, 0.0) + scale * v
        amps = {k: v for k, v in amps.items() if abs(v) > 1e-14}
        if len(amps) > self.support_cap:
            raise GaugeError(f"support cap exceeded: {len(amps)} configurations")
        return GaugeState(self.group, self.lattice, amps, self.support_cap)

    def dot(self, other: "GaugeState") -> complex:
        return sum(v.conjugate() * other.amps.get(k, 0.0) for k, v in self.amps.items())

    def distance(self, other: "GaugeState") -> float:
        keys = set(self.amps) | set(other.amps)
        return float(np.sqrt(sum(
            abs(self.amps.get(k, 0.0) - other.amps.get(k, 0.0)) ** 2 for k in keys
        )))


def _holonomy(G: FiniteGroup, config, plaq) -> int:
    """Plaquette loop product in the gauge-covariant order.

    With tail edges transforming h -> h g^-1 and head edges h -> g h, the
    product that conjugates covariantly under gauge transformations stacks
    later traversal steps on the LEFT: K = h~_n ... h~_2 h~_1, where h~ is
    the edge element along orientation and its inverse against.
    """
    h = 0  # identity element index
    for e, sign in plaq:
        he = config[e] if sign > 0 else int(G.inv[config[e]])
        h = int(G.mult[he, h])
    return h


def gauge_shift(G: FiniteGroup, lat: GaugeLattice, config: tuple, v: int, g: int) -> tuple:
    """One local gauge transformation of a single configuration."""
    out = list(config)
    for e, (tail, head) in enumerate(lat.edges):
        if tail == v:
            out[e] = int(G.mult[out[e], G.inv[g]])
        if head == v:
            out[e] = int(G.mult[g, out[e]])
    return tuple(out)


def apply_l(state: GaugeState, v: int, g: int) -> GaugeState:
    amps = {}
    for config, c in state.amps.items():
        key = gauge_shift(state.group, state.lattice, config, v, g)
        amps[key] = amps.get(key, 0.0) + c
    return GaugeState(state.group, state.lattice, amps, state.support_cap)


def vertex_projector(state: GaugeState, v: int) -> GaugeState:
    """Group average of the gauge action at v (a projector)."""
    G = state.group
    out = GaugeState(G, state.lattice, {}, state.support_cap)
    for g in range(G.order):
        out = out.axpy(apply_l(state, v, g), 1.0 / G.order)
    return out


def plaquette_projector(state: GaugeState, p: int) -> GaugeState:
    """Flat-holonomy projector: keeps configurations with trivial loop product."""
    G = state.group
    plaq = state.lattice.plaquettes[p]
    amps = {k: v for k, v in state.amps.items() if _holonomy(G, k, plaq) == 0}
    return GaugeState(G, state.lattice, amps, state.support_cap)


def ground_state(G: FiniteGroup, lat: GaugeLattice, support_cap: int = 10 ** 6) -> GaugeState:
    """Uniform superposition over flat configurations.

    Gauge transformations permute flat configurations, so this state already
    sits in the image of every vertex projector; the projector conditions
    are re-verified in the test suite rather than assumed.
    """
    total = G.order ** lat.n_edges
    if total > support_cap:
        raise GaugeError(
            f"ground state would enumerate {total} configurations (cap {support_cap})"
        )
    amps = {}
    for config in itertools.product(range(G.order), repeat=lat.n_edges):
        if all(_holonomy(G, config, p) == 0 for p in lat.plaquettes):
            amps[config] = 1.0 + 0.0j
    return GaugeState(G, lat, amps, support_cap).normalized()


@dataclass(frozen=True)
class WilsonLine:
    """Irrep-labeled string operator along a contiguous signed edge path."""

    psi: Irrep
    path: tuple[tuple[int, int], ...]  # ((edge, sign), ...)


def _transport(G: FiniteGroup, config, path) -> int:
    """Covariant parallel transport from the path's start to its end vertex.

    Same reverse-order stacking as _holonomy: K transforms as
    K -> g_end K g_start^-1, so on flat configurations K depends only on the
    homotopy class of the path.
    """
    k = 0
    for e, sign in path:
        he = config[e] if sign > 0 else int(G.inv[config[e]])
        k = int(G.mult[he, k])
    return k


def apply_wilson_line(state: GaugeState, w: WilsonLine, a: int, b: int) -> GaugeState:
    """Open-index string operator: amplitude factor [psi(K)]_{ab} per config.

    K is the covariant transport along the path (0-based matrix indices);
    the row index a lives at the path's END vertex, the column index b at
    its START.  Trapping potentials couple to (psi, a) at the end and to
    (conjugate psi, b) at the start.
    """
    G = state.group
    amps = {}
    for config, c in state.amps.items():
        factor = w.psi.matrices[_transport(G, config, w.path)][a, b]
        if abs(factor * c) > 1e-14:
            amps[config] = c * factor
    return GaugeState(G, state.lattice, amps, state.support_cap)


def apply_wilson_loop(state: GaugeState, w: WilsonLine) -> GaugeState:
    """Closed string operator: the trace over the open indices."""
    G = state.group
    amps = {}
    for config, c in state.amps.items():
        factor = np.trace(w.psi.matrices[_transport(G, config, w.path)])
        if abs(factor * c) > 1e-14:
            amps[config] = c * factor
    return GaugeState(G, state.lattice, amps, state.support_cap)


def verify_deformation(g0: GaugeState, w1: WilsonLine, w2: WilsonLine,
                       a: int, b: int) -> float:
    """Norm difference of two homotopic Wilson lines applied to a flat state."""
    return apply_wilson_line(g0, w1, a, b).distance(apply_wilson_line(g0, w2, a, b))


def conjugate_irrep(psi: Irrep) -> Irrep:
    """Entrywise complex conjugate representation."""
    return Irrep(psi.group, psi.index, psi.dim, psi.matrices.conj(),
                 psi.character.conj())


def trapping_check(state: GaugeState, v: int, phi: Irrep, c_index: int,
                   tol: float = 1e-8) -> complex:
    """Eigenvalue of the trapping operator sum_g [phi(g)]_{cc} L_v^g.

    On a two-excitation Wilson state with open indices (a, b), the result is
    |G|/d_phi at the path's end vertex when (phi, c) = (psi, a), at the
    start vertex when (phi, c) = (conjugate psi, b), and 0 otherwise.
    """
    G = state.group
    out = GaugeState(G, state.lattice, {}, state.support_cap)
    for g in range(G.order):
        coeff = phi.matrices[g][c_index, c_index]
        if abs(coeff) > 1e-15:
            out = out.axpy(apply_l(state, v, g), coeff)
    nrm2 = state.dot(state)
    lam = state.dot(out) / nrm2
    residual = out.axpy(state, -lam).norm()
    if residual > tol * max(1.0, abs(lam)) * np.sqrt(abs(nrm2)) + tol:
        raise GaugeError("not a two-excitation Wilson state")
    return lam


def vertex_expectations(state: GaugeState) -> list[float]:
    """<A_v> per vertex (1 on unexcited vertices, < 1 at string endpoints)."""
    out = []
    nrm2 = state.dot(state).real
    for v in range(state.lattice.n_vertices):
        out.append(float(state.dot(vertex_projector(state, v)).real / nrm2))
    return out


def plaquette_expectations(state: GaugeState) -> list[float]:
    out = []
    nrm2 = state.dot(state).real
    for p in range(len(state.lattice.plaquettes)):
        out.append(float(state.dot(plaquette_projector(state, p)).real / nrm2))
    return out


def commutator_residuals(G: FiniteGroup, lat: GaugeLattice, seed: int = 0,
                         samples: int = 5) -> dict:
    """Max residuals of projector identities on random test states.

    Checks idempotence of every vertex/plaquette projector and commutation
    of every (vertex, vertex), (vertex, plaquette) pair by applying both
    orderings to random sparse states (operator matrices for |G|^E
    dimensions are never materialized).
    """
    rng = np.random.default_rng(seed)
    states = []
    for _ in range(samples):
        amps = {}
        for _ in range(40):
            config = tuple(int(x) for x in rng.integers(0, G.order, lat.n_edges))
            amps[config] = complex(rng.standard_normal(), rng.standard_normal())
        states.append(GaugeState(G, lat, amps).normalized())

    def vp(s, v):
        return vertex_projector(s, v)

    def pp(s, p):
        return plaquette_projector(s, p)

    ops = [("A", v, vp) for v in range(lat.n_vertices)]
    ops += [("B", p, pp) for p in range(len(lat.plaquettes))]
    idem = 0.0
    comm = 0.0
    for s in states:
        applied = {(kind, i): op(s, i) for kind, i, op in ops}
        for kind, i, op in ops:
            once = applied[(kind, i)]
            idem = max(idem, op(once, i).distance(once))
        for x in range(len(ops)):
            for y in range(x + 1, len(ops)):
                k1, i1, op1 = ops[x]
                k2, i2, op2 = ops[y]
                xy = op1(applied[(k2, i2)], i1)
                yx = op2(applied[(k1, i1)], i2)
                comm = max(comm, xy.distance(yx))
    return {"idempotence": idem, "commutation": comm}
