import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import parastat.parafock as pf
import parastat.rmatrix as rm


def randomized_normal_form(raw, r, rng, coeff=1.0):
    """Normal-form a raw pair list choosing swap positions at random.

    Used to check that the result is independent of the swap schedule.
    """
    amps = {}
    work = [(tuple(raw), complex(coeff))]
    e = r.entries
    while work:
        pairs, c = work.pop()
        bad = [i for i in range(len(pairs) - 1) if pairs[i][0] > pairs[i + 1][0]]
        if not bad:
            pf._accumulate(amps, pairs, c)
            continue
        k = bad[rng.integers(len(bad))]
        (p, a), (q, b) = pairs[k], pairs[k + 1]
        col = e[:, :, a - 1, b - 1]
        for bp, ap in zip(*np.nonzero(col)):
            swapped = pairs[:k] + ((q, int(bp) + 1), (p, int(ap) + 1)) + pairs[k + 2:]
            work.append((swapped, c * complex(col[bp, ap])))
    return pf.StateVector(r, amps)


class TestNormalForm:
    @pytest.mark.parametrize("sign", (+1, -1))
    def test_schedule_independence(self, sign):
        r = rm.paper_r(sign)
        rng = np.random.default_rng(17)
        for _ in range(100):
            n = int(rng.integers(2, 6))
            positions = rng.choice(20, size=n, replace=False)
            labels = rng.integers(1, 5, size=n)
            raw = tuple((int(p), int(l)) for p, l in zip(positions, labels))
            ref = pf.normal_form(raw, r)
            alt = randomized_normal_form(raw, r, rng)
            assert ref.allclose(alt)

    @pytest.mark.parametrize("sign", (+1, -1))
    def test_single_exchange_matches_table(self, sign):
        r = rm.paper_r(sign)
        e = r.entries
        for a in range(1, 5):
            for b in range(1, 5):
                sv = pf.normal_form(((7, a), (3, b)), r)
                assert len(sv.amps) == 1
                (cfg, c), = sv.amps.items()
                (q, bp), (p, ap) = cfg
                assert (q, p) == (3, 7)
                assert c == e[bp - 1, ap - 1, a - 1, b - 1]
        # one spot value from the exchange table: (a,b)=(1,1) -> (b',a')=(4,3)
        sv = pf.normal_form(((7, 1), (3, 1)), r)
        assert sv.amps == {((3, 4), (7, 3)): complex(sign)}

    def test_sorted_input_untouched(self):
        r = rm.paper_r(+1)
        raw = ((1, 2), (4, 3), (9, 1))
        sv = pf.normal_form(raw, r)
        assert sv.amps == {raw: 1.0 + 0.0j}

    def test_exclusion_rejected(self):
        with pytest.raises(pf.FockError, match="exclusion"):
            pf.normal_form(((2, 1), (2, 3)), rm.paper_r(+1))

    def test_double_swap_is_identity(self):
        # involutivity: moving a particle past another and back changes nothing
        r = rm.paper_r(-1)
        base = pf.normal_form(((2, 3), (5, 1)), r)
        out = pf.move(pf.move(base, 2, 8), 8, 2)
        assert out.allclose(base)


class TestCreateAnnihilate:
    @pytest.mark.parametrize("end", ("front", "back"))
    @pytest.mark.parametrize("sign", (+1, -1))
    def test_roundtrip(self, end, sign):
        r = rm.paper_r(sign)
        rng = np.random.default_rng(23)
        state = pf.vacuum(r)
        placed = []
        for _ in range(4):
            pos = int(rng.choice([p for p in range(1, 15) if p not in placed]))
            lab = int(rng.integers(1, 5))
            placed.append(pos)
            before = state
            state = pf.create(state, pos, lab, end)
            assert abs(state.norm() - 1.0) < 1e-12
            back = pf.annihilate(state, pos, lab, end)
            assert back.allclose(before, tol=1e-10)

    def test_annihilate_wrong_label_drops_amplitude(self):
        r = rm.paper_r(+1)
        state = pf.create(pf.vacuum(r), 3, 2, "back")
        gone = pf.annihilate(state, 3, 1, "back")
        assert gone.amps == {}

    def test_create_occupied_rejected(self):
        r = rm.paper_r(+1)
        state = pf.create(pf.vacuum(r), 3, 2, "back")
        with pytest.raises(pf.FockError, match="occupied"):
            pf.create(state, 3, 1, "back")

    def test_annihilate_missing_rejected(self):
        r = rm.paper_r(+1)
        state = pf.create(pf.vacuum(r), 3, 2, "back")
        with pytest.raises(pf.FockError, match="no particle"):
            pf.annihilate(state, 5, 2, "back")

    def test_bad_end_rejected(self):
        with pytest.raises(pf.FockError, match="front or back"):
            pf.create(pf.vacuum(rm.paper_r(+1)), 1, 1, "middle")

    def test_front_back_orders_differ(self):
        # creating at the two ends of the list gives R-related, not equal, states
        r = rm.paper_r(+1)
        base = pf.create(pf.vacuum(r), 5, 1, "back")
        fr = pf.create(base, 2, 1, "front")
        bk = pf.create(base, 2, 1, "back")
        assert not fr.allclose(bk)
        assert abs(fr.norm() - 1.0) < 1e-12 and abs(bk.norm() - 1.0) < 1e-12


class TestMove:
    def test_involution_and_norm(self):
        r = rm.paper_r(-1)
        rng = np.random.default_rng(5)
        state = pf.vacuum(r)
        for pos, lab in ((2, 1), (6, 4), (9, 2)):
            state = pf.create(state, pos, lab, "back")
        moved = pf.move(state, 6, 4)
        assert abs(moved.norm() - 1.0) < 1e-12
        assert pf.move(moved, 4, 6).allclose(state)
        del rng

    def test_move_through_neighbor_changes_state(self):
        r = rm.paper_r(+1)
        state = pf.vacuum(r)
        state = pf.create(state, 2, 1, "back")
        state = pf.create(state, 5, 1, "back")
        crossed = pf.move(state, 5, 1)
        assert crossed.positions() == {1, 2}
        assert not crossed.allclose(state)

    def test_move_errors(self):
        r = rm.paper_r(+1)
        state = pf.create(pf.vacuum(r), 2, 1, "back")
        with pytest.raises(pf.FockError, match="no particle"):
            pf.move(state, 7, 8)
        state2 = pf.create(state, 4, 2, "back")
        with pytest.raises(pf.FockError, match="occupied"):
            pf.move(state2, 2, 4)


class TestMeasurement:
    def test_corner_distribution_and_collapse(self):
        r = rm.paper_r(+1)
        # (1,1)(4,1) exchanged once: back particle label distribution is a
        # delta since the exchange table is monomial
        state = pf.normal_form(((4, 1), (1, 1)), r)
        dist, collapsed = pf.measure_corner(state, "back")
        assert sum(dist.values()) == pytest.approx(1.0)
        for lab, branch in collapsed.items():
            assert abs(branch.norm() - 1.0) < 1e-12
            for cfg in branch.amps:
                assert cfg[-1][1] == lab

    def test_superposition_splits(self):
        r = rm.paper_r(+1)
        s1 = pf.create(pf.vacuum(r), 3, 1, "back")
        s2 = pf.create(pf.vacuum(r), 3, 2, "back")
        mixed = pf.StateVector(r, {})
        for sv, w in ((s1, np.sqrt(0.25)), (s2, np.sqrt(0.75))):
            for cfg, c in sv.amps.items():
                pf._accumulate(mixed.amps, cfg, w * c)
        dist, _ = pf.measure_corner(mixed, "front")
        assert dist[1] == pytest.approx(0.25)
        assert dist[2] == pytest.approx(0.75)

    def test_position_mismatch_rejected(self):
        r = rm.paper_r(+1)
        state = pf.create(pf.vacuum(r), 3, 1, "back")
        with pytest.raises(pf.FockError, match="corner"):
            pf.measure_corner(state, "back", pos=5)
        with pytest.raises(pf.FockError, match="corner"):
            pf.measure_corner(pf.vacuum(r), "front")


class TestObservables:
    def test_number_counts_window(self):
        r = rm.paper_r(-1)
        state = pf.vacuum(r)
        for pos, lab in ((1, 2), (4, 3), (7, 1)):
            state = pf.create(state, pos, lab, "back")
        assert pf.local_expectation(state, range(1, 5)) == pytest.approx(2.0)
        assert pf.local_expectation(state, range(1, 10)) == pytest.approx(3.0)
        assert pf.local_expectation(state, [2, 3]) == pytest.approx(0.0)

    def test_label_counts_sum_to_number(self):
        r = rm.paper_r(+1)
        state = pf.normal_form(((6, 2), (2, 4), (9, 1)), r)
        nrm = state.norm()
        state = pf.StateVector(r, {k: v / nrm for k, v in state.amps.items()})
        w = range(1, 11)
        total = sum(
            pf.local_expectation(state, w, kind="label", label=l)
            for l in range(1, 5)
        )
        assert total == pytest.approx(pf.local_expectation(state, w))

    def test_window_distribution_is_label_blind(self):
        r = rm.paper_r(+1)
        # two states differing only in labels look identical through a window
        s1 = pf.create(pf.create(pf.vacuum(r), 2, 1, "back"), 5, 3, "back")
        s2 = pf.create(pf.create(pf.vacuum(r), 2, 4, "back"), 5, 2, "back")
        w = [1, 2, 3]
        d1 = pf.window_occupation_distribution(s1, w)
        d2 = pf.window_occupation_distribution(s2, w)
        assert d1 == d2 == {(2,): pytest.approx(1.0)}


class TestSpectrum:
    @pytest.mark.parametrize("L", (3, 6, 8))
    def test_m_fold_degeneracy(self, L):
        r = rm.paper_r(+1)
        vals = pf.single_particle_spectrum(L, 1.0, 0.5, r)
        assert len(vals) == 4 * L
        # each one-body level appears exactly m=4 times
        one_body = np.linalg.eigvalsh(
            np.diag([-0.5] * L) + np.diag([-1.0] * (L - 1), 1)
            + np.diag([-1.0] * (L - 1), -1))
        assert np.allclose(vals, np.sort(np.repeat(one_body, 4)))

    def test_open_chain_band(self):
        # uniform chain: levels are -mu - 2J cos(k pi / (L+1))
        L, J, mu = 6, 0.7, 0.3
        vals = pf.single_particle_spectrum(L, J, mu, rm.paper_r(+1))
        ks = np.arange(1, L + 1)
        expect = np.sort(np.repeat(-mu - 2 * J * np.cos(ks * np.pi / (L + 1)), 4))
        assert np.allclose(vals, expect)

    def test_site_dependent_potential(self):
        vals = pf.single_particle_spectrum(3, 0.0, [1.0, 2.0, 3.0], rm.paper_r(+1))
        assert np.allclose(vals, np.repeat([-3.0, -2.0, -1.0], 4))


class TestSerialization:
    def test_roundtrip(self):
        r = rm.paper_r(-1)
        state = pf.normal_form(((8, 2), (3, 4), (5, 1)), r)
        back = pf.load_state(pf.dump_state(state), r)
        assert back.allclose(state)

    def test_rejects_unordered(self):
        r = rm.paper_r(+1)
        data = [{"positions": [5, 2], "labels": [1, 1], "re": 1.0, "im": 0.0}]
        with pytest.raises(pf.FockError, match="normal form"):
            pf.load_state(data, r)

    def test_lattice_validation(self):
        lat = pf.Lattice1D(10)
        assert (lat.o, lat.s) == (1, 10)
        with pytest.raises(pf.FockError):
            pf.Lattice1D(1)


@settings(max_examples=40, deadline=None)
@given(
    seq=st.lists(
        st.tuples(st.integers(1, 12), st.integers(1, 4),
                  st.sampled_from(["front", "back"])),
        min_size=1, max_size=5,
        unique_by=lambda t: t[0],
    ),
    sign=st.sampled_from([+1, -1]),
)
def test_creation_sequences_preserve_norm(seq, sign):
    state = pf.vacuum(rm.paper_r(sign))
    for pos, lab, end in seq:
        state = pf.create(state, pos, lab, end)
    assert abs(state.norm() - 1.0) < 1e-10
