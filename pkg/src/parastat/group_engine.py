"""Finite groups from presentations, and the exchange statistics they induce.

Pipeline: a finite presentation is enumerated into a full multiplication
table (Todd-Coxeter coset enumeration over the trivial subgroup, via sympy);
the character table is computed by simultaneous diagonalization of the class
algebra (Burnside's method); irreps are realized as explicit unitary matrices
by projecting the regular representation onto an isotypic block and splitting
off one copy with a random commutant symmetrizer.  A pair of irreps (sigma,
psi) with the fusion rule sigma (x) psi = d_psi * sigma yields an intertwiner
V, and composing V twice produces an R-matrix on the d_psi^2-dimensional
multiplicity space.

The distinguished order-128 group whose derived R-matrix is the built-in m=4
one ships as a bundled presentation (see gamma_presentation).  Its published
relations close to a group of order 256; the supplementary central relation
z1 z2 z3 z4 = 1 was determined empirically (order 128, an 8-dimensional
irrep, and the right fusion rule) and the bundled file flags it as derived.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources

import numpy as np
from sympy.combinatorics.fp_groups import FpGroup, coset_enumeration_r
from sympy.combinatorics.free_groups import free_group

from .rmatrix import RMatrix, from_map, as_map

_MAX_RETRIES = 12


class GroupError(RuntimeError):
    pass


# ---------------------------------------------------------------------------
# presentations


@dataclass(frozen=True)
class GroupPresentation:
    """Generator names plus relator words; inverse tokens spelled "g^-1"."""

    generators: tuple[str, ...]
    relations: tuple[tuple[str, ...], ...]
    derived_supplementary: bool = False

    def __post_init__(self):
        names = set(self.generators)
        for rel in self.relations:
            for tok in rel:
                base = tok[:-3] if tok.endswith("^-1") else tok
                if base not in names:
                    raise GroupError(f"relation references undeclared generator {tok!r}")


def presentation_from_dict(data: dict) -> GroupPresentation:
    return GroupPresentation(
        tuple(data["generators"]),
        tuple(tuple(rel) for rel in data["relations"]),
        bool(data.get("derived_supplementary", False)),
    )


def load_presentation(source) -> GroupPresentation:
    if hasattr(source, "read"):
        data = json.load(source)
    else:
        with open(source) as fh:
            data = json.load(fh)
    return presentation_from_dict(data)


def z2_presentation() -> GroupPresentation:
    return GroupPresentation(("g",), (("g", "g"),))


def s3_presentation() -> GroupPresentation:
    return GroupPresentation(
        ("a", "b"), (("a", "a", "a"), ("b", "b"), ("a", "b", "a", "b"))
    )


def d4_presentation() -> GroupPresentation:
    return GroupPresentation(
        ("r", "s"), (("r", "r", "r", "r"), ("s", "s"), ("s", "r", "s^-1", "r"))
    )


def gamma_presentation() -> GroupPresentation:
    """The bundled order-128 presentation with the derived extra relation."""
    ref = resources.files("parastat").joinpath("data/gamma128.json")
    return presentation_from_dict(json.loads(ref.read_text()))


NAMED_PRESENTATIONS = {
    "Z2": z2_presentation,
    "S3": s3_presentation,
    "D4": d4_presentation,
    "gamma128": gamma_presentation,
}


# ---------------------------------------------------------------------------
# group enumeration


@dataclass
class FiniteGroup:
    """Fully tabulated finite group; identity at element index 0."""

    presentation: GroupPresentation
    order: int
    words: list[tuple[int, ...]]  # signed generator indices (1-based, <0 = inverse)
    mult: np.ndarray  # mult[x, y] = index of x*y
    inv: np.ndarray
    classes: list[np.ndarray]  # conjugacy classes, order of first appearance
    class_of: np.ndarray
    gen_elems: list[int]  # element index of each generator
    _chartable: np.ndarray | None = field(default=None, repr=False)
    _irreps: list | None = field(default=None, repr=False)

    @property
    def n_classes(self) -> int:
        return len(self.classes)

    def conjugate(self, g: int, x: int) -> int:
        return self.mult[self.mult[g, x], self.inv[g]]


def _relator_word(rel, gens):
    out = gens[0] ** 0
    table = {name: g for name, g in zip([str(g) for g in gens], gens)}
    for tok in rel:
        if tok.endswith("^-1"):
            out = out * table[tok[:-3]] ** -1
        else:
            out = out * table[tok]
    return out


def enumerate_group(pres: GroupPresentation, order_bound: int = 100000) -> FiniteGroup:
    """Tabulate the group defined by pres via coset enumeration.

    Raises GroupError("group too large or infinite under bound") when the
    final order exceeds order_bound or the enumeration blows past the
    intermediate-coset allowance.
    """
    fr = free_group(", ".join(pres.generators))[0]
    gens = fr.generators
    relators = [_relator_word(rel, gens) for rel in pres.relations]
    fp = FpGroup(fr, relators)
    try:
        ct = coset_enumeration_r(fp, [], max_cosets=max(200000, 100 * order_bound))
    except ValueError as exc:
        raise GroupError("group too large or infinite under bound") from exc
    ct.compress()
    ct.standardize()
    table = ct.table
    n = len(table)
    if n > order_bound:
        raise GroupError("group too large or infinite under bound")

    k = len(pres.generators)
    act = np.empty((2 * k, n), dtype=np.int64)  # act[2i]=gen i, act[2i+1]=inverse
    for col in range(2 * k):
        act[col] = [row[col] for row in table]

    # breadth-first words from the identity coset give canonical shortlex forms
    words: list[tuple[int, ...] | None] = [None] * n
    words[0] = ()
    queue = [0]
    while queue:
        nxt = []
        for x in queue:
            for gi in range(k):
                for signed, col in ((gi + 1, 2 * gi), (-(gi + 1), 2 * gi + 1)):
                    y = int(act[col, x])
                    if words[y] is None:
                        words[y] = words[x] + (signed,)
                        nxt.append(y)
        queue = nxt
    if any(w is None for w in words):
        raise GroupError("coset table not transitive (enumeration incomplete)")

    mult = np.empty((n, n), dtype=np.int64)
    idx0 = np.arange(n)
    for y in range(n):
        idx = idx0
        for signed in words[y]:
            col = 2 * (abs(signed) - 1) + (0 if signed > 0 else 1)
            idx = act[col, idx]
        mult[:, y] = idx
    inv = np.argmin(mult, axis=1)  # position of the identity (index 0) in each row

    class_of = np.full(n, -1, dtype=np.int64)
    classes = []
    for x in range(n):
        if class_of[x] >= 0:
            continue
        orbit = np.unique(mult[mult[:, x], inv])
        class_of[orbit] = len(classes)
        classes.append(orbit)

    gen_elems = [int(act[2 * gi, 0]) for gi in range(k)]
    return FiniteGroup(pres, n, words, mult, inv, classes, class_of, gen_elems)


# ---------------------------------------------------------------------------
# characters


def character_table(G: FiniteGroup, seed: int = 0) -> np.ndarray:
    """Irreducible characters as rows, columns indexed by conjugacy class.

    Burnside's method: the class-sum multiplication matrices commute, so a
    random real combination has the (scaled) character vectors as its
    eigenvectors.  Rows are sorted by dimension, then lexicographically.
    """
    if G._chartable is not None:
        return G._chartable
    n = G.order
    k = G.n_classes
    sizes = np.array([len(c) for c in G.classes], dtype=np.float64)
    counts = np.zeros((k, k, k))
    cls = G.class_of
    for x in range(n):
        np.add.at(counts[cls[x]], (cls, cls[G.mult[x]]), 1.0)
    struct = counts / sizes[None, None, :]  # struct[i,j,k'] class-algebra constants

    id_cls = int(cls[0])
    rng = np.random.default_rng(seed)
    for _ in range(_MAX_RETRIES):
        combo = np.tensordot(rng.standard_normal(k), struct, axes=1)
        _, vecs = np.linalg.eig(combo)
        # right eigenvectors of left-multiplication: v_j ~ |C_j| chi_j / d
        chis = []
        ok = True
        for col in vecs.T:
            if abs(col[id_cls]) < 1e-12:
                ok = False
                break
            w = col / col[id_cls]
            d2 = n / np.sum(np.abs(w) ** 2 / sizes)
            if d2 <= 0:
                ok = False
                break
            d = np.sqrt(d2)
            chis.append(d * w / sizes)
        if not ok:
            continue
        tbl = np.array(chis)
        gram = (tbl * sizes[None, :]) @ tbl.conj().T / n
        if np.max(np.abs(gram - np.eye(k))) < 1e-8:
            dims = tbl[:, id_cls].real
            key = [
                (round(dims[i]), tuple(np.round(tbl[i], 6).view(np.float64)))
                for i in range(k)
            ]
            order = sorted(range(k), key=lambda i: key[i])
            G._chartable = tbl[order]
            return G._chartable
    raise GroupError("character table did not converge (degenerate symmetrizers)")


# ---------------------------------------------------------------------------
# irreps as explicit matrices


@dataclass
class Irrep:
    """Unitary matrix realization of one irreducible representation."""

    group: FiniteGroup
    index: int  # row in character_table(group)
    dim: int
    matrices: np.ndarray  # shape (order, dim, dim)
    character: np.ndarray  # class traces

    def __call__(self, g: int) -> np.ndarray:
        return self.matrices[g]


def _realize_irrep(G: FiniteGroup, chi: np.ndarray, index: int, rng) -> Irrep:
    n = G.order
    d = int(round(chi[G.class_of[0]].real))
    if d == 1:
        mats = chi[G.class_of].astype(np.complex128).reshape(n, 1, 1)
        return Irrep(G, index, 1, mats, chi.copy())

    # isotypic projector of the left regular representation
    proj = (d / n) * np.conj(chi[G.class_of[G.mult[np.arange(n)[:, None], G.inv[None, :]]]])
    evals, evecs = np.linalg.eigh(proj)
    basis = evecs[:, evals > 0.5]
    if basis.shape[1] != d * d:
        raise GroupError(f"isotypic block has rank {basis.shape[1]}, expected {d * d}")

    # regular rep restricted to the block: d copies of the irrep
    restricted = np.empty((n, d * d, d * d), dtype=np.complex128)
    bh = basis.conj().T
    for g in range(n):
        restricted[g] = bh @ basis[G.mult[G.inv[g]], :]

    for _ in range(_MAX_RETRIES):
        h = rng.standard_normal((d * d, d * d)) + 1j * rng.standard_normal((d * d, d * d))
        h = h + h.conj().T
        t = np.einsum("gij,jk,glk->il", restricted, h, restricted.conj()) / n
        tvals, tvecs = np.linalg.eigh(t)
        # eigenvalues of the commutant operator cluster in groups of exactly d
        splits = [0] + [
            i for i in range(1, d * d) if tvals[i] - tvals[i - 1] > 1e-6
        ] + [d * d]
        blocks = [(splits[i], splits[i + 1]) for i in range(len(splits) - 1)]
        chosen = next(((lo, hi) for lo, hi in blocks if hi - lo == d), None)
        if chosen is None:
            continue
        cols = tvecs[:, chosen[0]:chosen[1]]
        mats = np.einsum("ij,gjk,kl->gil", cols.conj().T, restricted, cols)
        traces = np.array([np.trace(mats[c[0]]) for c in G.classes])
        if np.max(np.abs(traces - chi)) < 1e-8:
            return Irrep(G, index, d, mats, chi.copy())
    raise GroupError("irrep realization failed after bounded retries")


def irreps(G: FiniteGroup, seed: int = 0) -> list[Irrep]:
    """One explicit unitary Irrep per character-table row."""
    if G._irreps is not None:
        return G._irreps
    tbl = character_table(G)
    rng = np.random.default_rng(seed)
    G._irreps = [_realize_irrep(G, tbl[i], i, rng) for i in range(len(tbl))]
    return G._irreps


# ---------------------------------------------------------------------------
# fusion


def fusion_decompose(G: FiniteGroup, pi1: Irrep, pi2: Irrep) -> list[tuple[int, int]]:
    """Multiplicities of each irrep in pi1 (x) pi2, as (irrep index, count)."""
    tbl = character_table(G)
    sizes = np.array([len(c) for c in G.classes], dtype=np.float64)
    prod = pi1.character * pi2.character
    raw = (tbl.conj() * sizes[None, :]) @ prod / G.order
    mults = np.round(raw.real).astype(int)
    if np.max(np.abs(raw - mults)) > 1e-6:
        raise GroupError("non-integral multiplicity")
    dims = tbl[:, G.class_of[0]].real.round().astype(int)
    if int(mults @ dims) != pi1.dim * pi2.dim:
        raise GroupError("fusion dimensions do not sum")
    return [(i, int(m)) for i, m in enumerate(mults) if m]


def find_para_pair(G: FiniteGroup) -> tuple[Irrep, Irrep]:
    """Irrep pair with sigma (x) psi = d_psi * sigma, d_psi >= 2, and
    genuinely parastatistical exchange.

    A fusion pair can still induce product-form (ordinary) statistics - for
    instance when psi is blind to the center that makes sigma projective -
    so each candidate's derived R is checked for non-triviality before the
    pair is accepted.  Preference among the surviving pairs: smallest d_psi,
    then smallest d_sigma, then irrep indices.
    """
    from .rmatrix import is_trivial_product

    reps = irreps(G)
    candidates = []
    for psi in reps:
        if psi.dim < 2:
            continue
        for sigma in reps:
            if fusion_decompose(G, sigma, psi) == [(sigma.index, psi.dim)]:
                candidates.append((psi.dim, sigma.dim, sigma.index, psi.index))
    for _, _, si, pi in sorted(candidates):
        sigma, psi = reps[si], reps[pi]
        derived = derive_r(sigma, psi, solve_intertwiner(sigma, psi))
        if is_trivial_product(derived, 1e-8) is None:
            return sigma, psi
    raise GroupError("no parastatistical fusion rule in Rep(G)")


# ---------------------------------------------------------------------------
# intertwiner and the derived R-matrix


@dataclass
class Intertwiner:
    """Unitary V with [sigma(g) (x) psi(g)] V = V [1_m (x) sigma(g)] for all g."""

    sigma: Irrep
    psi: Irrep
    V: np.ndarray

    @property
    def m(self) -> int:
        return self.psi.dim


def solve_intertwiner(sigma: Irrep, psi: Irrep, seed: int = 0) -> Intertwiner:
    """Group-average a random matrix and polar-decompose the result."""
    G = sigma.group
    n = G.order
    ds, m = sigma.dim, psi.dim
    dim = ds * m
    rng = np.random.default_rng(seed)
    left = np.einsum("gij,gkl->gikjl", sigma.matrices, psi.matrices).reshape(n, dim, dim)
    right = np.einsum("ij,gkl->gikjl", np.eye(m), sigma.matrices).reshape(n, dim, dim)
    for _ in range(_MAX_RETRIES):
        x = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
        t = np.einsum("gij,jk,glk->il", left, x, right.conj()) / n
        u, s, vh = np.linalg.svd(t)
        if s[-1] < 1e-8 * s[0]:
            continue  # rank-deficient average; try a fresh X
        v = u @ vh
        residual = max(
            np.max(np.abs(left[G.gen_elems[i]] @ v - v @ right[G.gen_elems[i]]))
            for i in range(len(G.gen_elems))
        )
        if residual <= 1e-8:
            return Intertwiner(sigma, psi, v)
    raise GroupError("intertwiner averaging stayed rank-deficient")


def derive_r(sigma: Irrep, psi: Irrep, inter: Intertwiner) -> RMatrix:
    """Extract the exchange R-matrix from the doubled intertwiner.

    W = (V (x) 1_psi)(1_m (x) V) maps m (x) m (x) sigma to sigma (x) psi (x)
    psi.  Swapping the two psi legs of W acts, by Schur's lemma, as a unique
    operator on the m x m multiplicity factor; that operator is R.
    """
    ds, m = sigma.dim, psi.dim
    v = inter.V
    w = np.kron(v, np.eye(m)) @ np.kron(np.eye(m), v)
    wt = w.reshape(ds, m, m, m, m, ds)
    swapped = wt.transpose(0, 2, 1, 3, 4, 5).reshape(ds * m * m, m * m * ds)
    overlap = w.conj().T @ swapped
    pi = np.einsum("abscds->abcd", overlap.reshape(m, m, ds, m, m, ds)) / ds
    mat = pi.reshape(m * m, m * m)
    if np.max(np.abs(mat.conj().T @ mat - np.eye(m * m))) > 1e-8:
        raise GroupError("inconsistent intertwiner basis")
    # snap exact-integer tensors back to integers so downstream checks are exact
    if np.max(np.abs(mat.imag)) < 1e-10 and np.max(np.abs(mat.real - np.round(mat.real))) < 1e-10:
        mat = np.round(mat.real).astype(np.int64)
    return from_map(mat, m)


def gauge_match(r1: RMatrix, r2: RMatrix, tol: float = 1e-8):
    """Monomial gauge Q with (Q x Q) map(r1) (Q x Q)^dag = map(r2), or None.

    Search space: permutations of the m internal states times diagonal phases
    from {1, -1, i, -i}, first phase fixed to 1 (a global phase cancels in
    Q x Q).  Absence of a monomial match does not disprove equivalence under
    a general unitary gauge.
    """
    from itertools import permutations, product

    if r1.m != r2.m:
        raise ValueError("gauge_match requires equal m")
    m = r1.m
    m1 = as_map(r1).astype(np.complex128)
    m2 = as_map(r2).astype(np.complex128)
    phases = (1.0, -1.0, 1j, -1j)
    for perm in permutations(range(m)):
        base = np.zeros((m, m), dtype=np.complex128)
        for i, j in enumerate(perm):
            base[j, i] = 1.0
        for ph in product(phases, repeat=m - 1):
            q = base * np.array((1.0,) + ph)[None, :]
            qq = np.kron(q, q)
            if np.max(np.abs(qq @ m1 @ qq.conj().T - m2)) <= tol:
                return q
    return None
