"""The secret-communication challenge game and its robustness experiments.

Two players each receive a secret number in 1..m, encode it in a
paraparticle's internal label at opposite ends of a chain, transport the
particles past each other under referee surveillance (no excitation may ever
appear outside a small window around each particle), measure at the swapped
corners, and decode each other's number from the exchange outcome.  A
nontrivial R-matrix whose exchange tensor is a perfect tensor makes the
decode map a bijection; product-form statistics carry no information.

The chain is lane-encoded: site i occupies Fock position 2i, with an
auxiliary passing slot at 2i+1.  The passing maneuver (step aside, partner
crosses, step back) performs exactly one exchange, so the final state is the
R-matrix image of the initial label pair regardless of where the crossing
happens.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import parafock as pf
from .rmatrix import RMatrix, as_map, is_trivial_product


class GameError(ValueError):
    pass


@dataclass(frozen=True)
class GameConfig:
    L: int
    r: RMatrix
    a: int
    b: int
    seed: int = 0
    r0: int = 3
    check_cadence: int = 2
    noise_p: float = 0.0
    noise_d: int = 1
    noise_l: int = 2
    repair_retries: int = 3

    def __post_init__(self):
        if self.L < 6 * self.r0:
            raise GameError("chain too short for the requested circle radius")
        m = self.r.m
        if not (1 <= self.a <= m and 1 <= self.b <= m):
            raise GameError(f"secret numbers must lie in 1..{m}")
        if not 0.0 <= self.noise_p <= 1.0:
            raise GameError("noise rate must be a probability")


@dataclass
class Transcript:
    events: list = field(default_factory=list)
    verdict: str = "incomplete"
    alice_guess: int | None = None
    bob_guess: int | None = None

    def log(self, kind: str, **info):
        self.events.append({"event": kind, **info})

    def as_dict(self) -> dict:
        return {
            "events": self.events,
            "verdict": self.verdict,
            "alice_guess": self.alice_guess,
            "bob_guess": self.bob_guess,
        }


@dataclass
class OutcomeReport:
    success: bool
    a_prime: int | None
    b_prime: int | None
    success_table: dict
    mutual_information_bits: dict

    def as_dict(self) -> dict:
        return {
            "success": bool(self.success),
            "a_prime": self.a_prime,
            "b_prime": self.b_prime,
            "success_table": {f"{a},{b}": v for (a, b), v in self.success_table.items()},
            "mutual_information_bits": self.mutual_information_bits,
        }


def _rng(seed: int, *key: int) -> np.random.Generator:
    """Counter-based generator: Philox keyed by (seed, key...)."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence((seed,) + key)))


# ---------------------------------------------------------------------------
# decode and information measures


def outcome_distribution(r: RMatrix, a: int, b: int) -> dict:
    """Born-rule distribution over measured (a', b') after one exchange."""
    e = np.abs(np.asarray(r.entries, dtype=np.complex128)) ** 2
    dist = {}
    for bp in range(r.m):
        for ap in range(r.m):
            w = float(e[bp, ap, a - 1, b - 1])
            if w > 0:
                dist[(ap + 1, bp + 1)] = w
    total = sum(dist.values())
    if abs(total - 1.0) > 1e-12:
        raise GameError("R-matrix columns not normalized (is it unitary?)")
    return dist


def _deterministic(r: RMatrix) -> bool:
    e = np.asarray(r.entries)
    counts = (np.abs(e) > 0).reshape(r.m * r.m, r.m * r.m).sum(axis=0)
    return bool(np.all(counts == 1))


def decode(r: RMatrix, who: str, own: int, observed: int) -> tuple[int, int]:
    """Recover the partner's (number, observation) from one's own pair.

    Alice holds (a, a') and scans the exchange table for the unique (b, b')
    with a nonzero entry at (b', a', a, b); Bob symmetrically.
    """
    if who not in ("Alice", "Bob"):
        raise GameError("who must be Alice or Bob")
    if not _deterministic(r):
        raise GameError("use outcome_distribution instead")
    e = np.asarray(r.entries)
    m = r.m
    hits = []
    if who == "Alice":
        a, ap = own, observed
        for b in range(1, m + 1):
            for bp in range(1, m + 1):
                if e[bp - 1, ap - 1, a - 1, b - 1] != 0:
                    hits.append((b, bp))
    else:
        b, bp = own, observed
        for a in range(1, m + 1):
            for ap in range(1, m + 1):
                if e[bp - 1, ap - 1, a - 1, b - 1] != 0:
                    hits.append((a, ap))
    if len(hits) != 1:
        raise GameError("R not perfect")
    return hits[0]


def mutual_information(r: RMatrix) -> dict:
    """Shannon information each player gains about the partner's number,
    with both numbers drawn uniformly."""
    m = r.m
    # joint over (a, b, a', b')
    p = {}
    for a in range(1, m + 1):
        for b in range(1, m + 1):
            for (ap, bp), w in outcome_distribution(r, a, b).items():
                p[(a, b, ap, bp)] = w / (m * m)

    def mi(target, view):
        joint, marg_t, marg_v = {}, {}, {}
        for key, w in p.items():
            t, v = key[target], tuple(key[i] for i in view)
            joint[(t, v)] = joint.get((t, v), 0.0) + w
            marg_t[t] = marg_t.get(t, 0.0) + w
            marg_v[v] = marg_v.get(v, 0.0) + w
        total = 0.0
        for (t, v), w in joint.items():
            total += w * math.log2(w / (marg_t[t] * marg_v[v]))
        return max(total, 0.0)

    # Alice sees (a, a') = indices 0, 2 and wants b = index 1; Bob dually.
    return {"alice_bits": mi(1, (0, 2)), "bob_bits": mi(0, (1, 3))}


# ---------------------------------------------------------------------------
# full protocol on the lattice


def _pos(site: int, lane: bool = False) -> int:
    return 2 * site + (1 if lane else 0)


def _check_windows(state: pf.StateVector, sites, r0: int):
    """All occupied sites must lie within radius r0 of a commanded site."""
    for cfg in state.amps:
        for p, _ in cfg:
            site = p // 2
            if not any(abs(site - c) <= r0 for c in sites):
                return False, site
    return True, None


def run_protocol(cfg: GameConfig, inject_stray: bool = False):
    """One full game: create, transport with referee checks, measure, decode.

    inject_stray plants an excitation outside both circles mid-game to
    demonstrate referee soundness.
    """
    r = cfg.r
    lat = pf.Lattice1D(cfg.L)
    tr = Transcript()
    rng = _rng(cfg.seed, 0x6A6D)
    state = pf.vacuum(r)

    state = pf.create(state, _pos(lat.o), cfg.a, "front")
    tr.log("create", site=lat.o, end="front")
    state = pf.create(state, _pos(lat.s), cfg.b, "back")
    tr.log("create", site=lat.s, end="back")

    site_a, site_b = lat.o, lat.s  # commanded sites
    moves = 0
    checks_ok = True

    def referee_check():
        nonlocal checks_ok
        ok, bad = _check_windows(state, (site_a, site_b), cfg.r0)
        tr.log("referee-check", windows=[site_a, site_b], passed=ok,
               stray_site=bad)
        checks_ok = checks_ok and ok

    def step(src, dst):
        nonlocal state, moves
        state = pf.move(state, src, dst)
        moves += 1
        tr.log("move", src=src, dst=dst)
        if moves % cfg.check_cadence == 0:
            referee_check()

    injected = False
    while site_a < lat.s or site_b > lat.o:
        if inject_stray and not injected and site_b - site_a <= cfg.L // 2:
            # a stray excitation well outside both circles
            stray_site = lat.s + cfg.r0 + 2
            state = pf.create(state, _pos(stray_site), 1, "back")
            tr.log("inject-stray", site=stray_site)
            injected = True
        if site_b == site_a + 1:
            # passing maneuver: Alice sidesteps, Bob crosses, Alice resumes
            step(_pos(site_a), _pos(site_a, lane=True))
            step(_pos(site_b), _pos(site_a))
            site_b = site_a
            step(_pos(site_a, lane=True), _pos(site_a + 1))
            site_a = site_a + 1
        else:
            if site_a < lat.s and site_a + 1 != site_b:
                step(_pos(site_a), _pos(site_a + 1))
                site_a += 1
            if site_b > lat.o and site_b - 1 != site_a:
                step(_pos(site_b), _pos(site_b - 1))
                site_b -= 1
    referee_check()

    if not checks_ok:
        tr.verdict = "challenge failed"
        report = OutcomeReport(False, None, None, {(cfg.a, cfg.b): 0},
                               mutual_information(r))
        return tr, report

    # Alice measures at the far corner (back), Bob at the near one (front)
    dist_back, collapsed_back = pf.measure_corner(state, "back", pos=_pos(lat.s))
    a_prime = _sample(dist_back, rng)
    state = collapsed_back[a_prime]
    dist_front, collapsed_front = pf.measure_corner(state, "front", pos=_pos(lat.o))
    b_prime = _sample(dist_front, rng)
    state = collapsed_front[b_prime]
    tr.log("measure", corner="s", outcome=a_prime)
    tr.log("measure", corner="o", outcome=b_prime)

    m = r.m
    try:
        alice_guess, _ = decode(r, "Alice", cfg.a, a_prime)
    except GameError:
        alice_guess = int(rng.integers(1, m + 1))
    try:
        bob_guess, _ = decode(r, "Bob", cfg.b, b_prime)
    except GameError:
        bob_guess = int(rng.integers(1, m + 1))
    tr.alice_guess, tr.bob_guess = alice_guess, bob_guess

    state = pf.annihilate(state, _pos(lat.s), a_prime, "back")
    state = pf.annihilate(state, _pos(lat.o), b_prime, "front")
    tr.log("annihilate", corner="s")
    tr.log("annihilate", corner="o")
    vacuum_ok = set(state.amps) == {()} and abs(abs(state.amps[()]) - 1.0) < 1e-10
    tr.log("final-check", vacuum=vacuum_ok)

    win = vacuum_ok and alice_guess == cfg.b and bob_guess == cfg.a
    tr.verdict = "win" if win else "lose"
    report = OutcomeReport(win, a_prime, b_prime, {(cfg.a, cfg.b): int(win)},
                           mutual_information(r))
    return tr, report


def _sample(dist: dict, rng) -> int:
    keys = sorted(dist)
    weights = np.array([dist[k] for k in keys])
    idx = rng.choice(len(keys), p=weights / weights.sum())
    return keys[int(idx)]


def run_all_pairs(base: GameConfig):
    """The 16-pair sweep; returns ({(a,b): win}, list of transcripts)."""
    table, transcripts = {}, []
    m = base.r.m
    for a in range(1, m + 1):
        for b in range(1, m + 1):
            tr, rep = run_protocol(replace(base, a=a, b=b))
            table[(a, b)] = int(rep.success)
            transcripts.append(tr)
    return table, transcripts


# ---------------------------------------------------------------------------
# fast trial sweeps (exchange outcome only; transport validated separately)


def guessing_trials(r: RMatrix, trials: int, seed: int) -> float:
    """Empirical success rate of the full decode task over random (a, b).

    Uses the exchange outcome distribution directly instead of lattice
    transport, which run_protocol has already validated to be equivalent.
    """
    m = r.m
    wins = 0
    for t in range(trials):
        rng = _rng(seed, 1, t)
        a = int(rng.integers(1, m + 1))
        b = int(rng.integers(1, m + 1))
        ap, bp = _sample(outcome_distribution(r, a, b), rng)
        try:
            ga, _ = decode(r, "Alice", a, ap)
        except GameError:
            ga = int(rng.integers(1, m + 1))
        try:
            gb, _ = decode(r, "Bob", b, bp)
        except GameError:
            gb = int(rng.integers(1, m + 1))
        wins += int(ga == b and gb == a)
    return wins / trials


# ---------------------------------------------------------------------------
# anti-anyon twist


def twist_experiment(r: RMatrix, twist_dist, trials: int, seed: int,
                     workers: int = 1) -> dict:
    """Exchange repeated 2n+1 times with n drawn from twist_dist.

    Bob measures his slot and infers Alice's number by maximum likelihood
    over the uniform prior on (a, n), without knowing n.  For involutive R
    the twists are invisible; for genuinely braiding R they scramble.
    """
    mat = as_map(r).astype(np.complex128)
    m = r.m
    ns, probs = _twist_support(twist_dist)

    # state for each (a, b, n): M^(2n+1) |a> x |b>, reshaped (b' slot, a' slot)
    powers = {}
    acc = mat.copy()
    for n in range(max(ns) + 1):
        powers[n] = acc
        acc = acc @ mat @ mat
    states = np.empty((m, m, len(ns), m, m), dtype=np.complex128)
    for a in range(m):
        for b in range(m):
            vec = np.zeros(m * m, dtype=np.complex128)
            vec[a * m + b] = 1.0
            for k, n in enumerate(ns):
                states[a, b, k] = (powers[n] @ vec).reshape(m, m)

    # Bob's outcome likelihoods: p(k | a, b, n) marginalizing Alice's slot
    like = np.abs(states) ** 2  # [a, b, n, bob outcome, alice slot]
    bob_like = like.sum(axis=4)  # [a, b, n, outcome]

    # rho_B for fixed (a, b): average over n of the Bob-slot reduced state
    rho_by_n = np.einsum("abnki,abnli->abnkl", states, states.conj())
    rho_avg = np.einsum("n,abnkl->abkl", probs, rho_by_n)
    rho_dev = float(np.max(np.abs(rho_by_n - rho_by_n[:, :, :1])))

    posterior = np.einsum("abnk,n->abk", bob_like, probs)  # sum over n prior

    def run(t):
        rng = _rng(seed, 2, t)
        a = int(rng.integers(m))
        b = int(rng.integers(m))
        n_idx = int(rng.choice(len(ns), p=probs))
        k = int(rng.choice(m, p=bob_like[a, b, n_idx] / bob_like[a, b, n_idx].sum()))
        guess = int(np.argmax(posterior[:, b, k]))
        return int(guess == a)

    wins = sum(_parallel_map(run, range(trials), workers))
    return {
        "success_rate": wins / trials,
        "rho_b_n_deviation": rho_dev,
        "rho_b_avg": rho_avg,
        "n_support": ns,
    }


def _twist_support(twist_dist):
    if isinstance(twist_dist, dict):
        ns = sorted(twist_dist)
        probs = np.array([twist_dist[n] for n in ns], dtype=float)
    else:
        ns = sorted(set(int(n) for n in twist_dist))
        probs = np.full(len(ns), 1.0 / len(ns))
    probs = probs / probs.sum()
    return ns, probs


def _parallel_map(fn, items, workers: int):
    if workers <= 1:
        return [fn(x) for x in items]
    from concurrent.futures import ThreadPoolExecutor

    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


# ---------------------------------------------------------------------------
# noise


def noise_experiment(cfg: GameConfig, trials: int, seed: int,
                     distances=None, exposure: int = 8,
                     workers: int = 1) -> list:
    """Decode success vs the particle-corner distance held during exposure.

    Each trial parks the particles at a given distance from their corners
    for `exposure` steps with the noise channel active, then completes the
    protocol noise-free.  A noise event picks a site within noise_d of a
    particle; it corrupts the internal label only when it lands on the
    particle's own site while that particle sits within noise_l of a corner
    (elsewhere the label is topologically shielded from local operations).
    """
    r = cfg.r
    m = r.m
    if distances is None:
        distances = list(range(0, cfg.noise_l + 3))
    results = []
    for dist_idx, dist in enumerate(distances):
        def run(t, dist=dist, dist_idx=dist_idx):
            rng = _rng(seed, 3, dist_idx, t)
            a = int(rng.integers(1, m + 1))
            b = int(rng.integers(1, m + 1))
            psi = np.zeros((m, m), dtype=np.complex128)
            psi[a - 1, b - 1] = 1.0
            exposed = dist <= cfg.noise_l
            for _ in range(exposure):
                for slot in (0, 1):  # Alice's, Bob's particle
                    if rng.random() >= cfg.noise_p:
                        continue
                    offset = int(rng.integers(-cfg.noise_d, cfg.noise_d + 1))
                    u = _haar(m, rng)
                    if offset != 0 or not exposed:
                        continue  # unoccupied site, or label shielded in bulk
                    psi = np.einsum("ij,jk->ik", u, psi) if slot == 0 else psi @ u.T
            out = as_map(r).astype(np.complex128) @ psi.reshape(m * m)
            probs = np.abs(out) ** 2
            probs = probs / probs.sum()
            idx = int(rng.choice(m * m, p=probs))
            bp, ap = idx // m + 1, idx % m + 1
            try:
                ga, _ = decode(r, "Alice", a, ap)
                gb, _ = decode(r, "Bob", b, bp)
            except GameError:
                ga = int(rng.integers(1, m + 1))
                gb = int(rng.integers(1, m + 1))
            return int(ga == b and gb == a)

        wins = sum(_parallel_map(run, range(trials), workers))
        results.append({"distance": dist, "success_rate": wins / trials})
    return results


def _haar(m: int, rng) -> np.ndarray:
    z = rng.standard_normal((m, m)) + 1j * rng.standard_normal((m, m))
    q, rr = np.linalg.qr(z)
    return q * (np.diagonal(rr) / np.abs(np.diagonal(rr)))


# ---------------------------------------------------------------------------
# eavesdropping


def eavesdrop_check(r: RMatrix, windows, L: int = 20) -> float:
    """Maximum trace distance any window observer can see across secrets.

    For every (a, b) pair, prepares the mid-game state (both particles in
    the bulk, exchange completed) and computes the label-blind occupation
    distribution on each window; returns the largest trace distance between
    any two (a, b) choices.  The claim is 0: local windows learn nothing.
    """
    lat = pf.Lattice1D(L)
    m = r.m
    mid_lo, mid_hi = 2 * (L // 2 - 1), 2 * (L // 2 + 1)
    per_pair = {}
    for a in range(1, m + 1):
        for b in range(1, m + 1):
            state = pf.vacuum(r)
            state = pf.create(state, mid_hi, a, "front")
            state = pf.create(state, mid_lo, b, "back")  # forces one exchange
            per_pair[(a, b)] = [
                pf.window_occupation_distribution(state, [2 * s for s in w])
                for w in windows
            ]
    worst = 0.0
    pairs = sorted(per_pair)
    for wi in range(len(windows)):
        for i in range(len(pairs)):
            for j in range(i + 1, len(pairs)):
                d1, d2 = per_pair[pairs[i]][wi], per_pair[pairs[j]][wi]
                keys = set(d1) | set(d2)
                td = 0.5 * sum(abs(d1.get(k, 0.0) - d2.get(k, 0.0)) for k in keys)
                worst = max(worst, td)
    return worst
