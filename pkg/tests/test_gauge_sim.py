import numpy as np
import pytest

import parastat.gauge_sim as gs
import parastat.group_engine as ge


@pytest.fixture(scope="module")
def patch():
    return gs.patch_2x2()


@pytest.fixture(scope="module")
def ladder():
    return gs.ladder_2x3()


def nontrivial_irrep(G):
    return max(ge.irreps(G),
               key=lambda r: (r.dim, float(np.abs(r.character - 1.0).sum())))


class TestLattices:
    def test_patch_shape(self, patch):
        assert patch.n_vertices == 4 and patch.n_edges == 4
        assert len(patch.plaquettes) == 1

    def test_ladder_shape(self, ladder):
        assert ladder.n_vertices == 6 and ladder.n_edges == 7
        assert len(ladder.plaquettes) == 2

    def test_bad_plaquette_rejected(self):
        with pytest.raises(gs.GaugeError, match="missing edge"):
            gs.GaugeLattice(2, ((0, 1),), (((5, +1),),))
        with pytest.raises(gs.GaugeError, match="orientation"):
            gs.GaugeLattice(2, ((0, 1),), (((0, 2),),))


class TestProjectorAlgebra:
    @pytest.mark.parametrize("name", ("Z2", "S3", "D4"))
    def test_residuals_on_patch(self, small_groups, patch, name):
        res = gs.commutator_residuals(small_groups[name], patch, seed=1)
        assert res["idempotence"] <= 1e-10
        assert res["commutation"] <= 1e-10

    def test_residuals_on_ladder(self, small_groups, ladder):
        res = gs.commutator_residuals(small_groups["Z2"], ladder, seed=2,
                                      samples=3)
        assert res["idempotence"] <= 1e-10
        assert res["commutation"] <= 1e-10


class TestGroundState:
    @pytest.mark.parametrize("name", ("Z2", "S3", "D4"))
    def test_all_projectors_fix_it(self, small_groups, patch, name):
        G = small_groups[name]
        g0 = gs.ground_state(G, patch)
        assert abs(g0.norm() - 1.0) < 1e-12
        assert np.allclose(gs.vertex_expectations(g0), 1.0, atol=1e-10)
        assert np.allclose(gs.plaquette_expectations(g0), 1.0, atol=1e-10)

    def test_flat_count(self, small_groups, patch):
        # flat configurations on a single square: one edge determined by the
        # other three, so |G|^3 of them
        G = small_groups["S3"]
        g0 = gs.ground_state(G, patch)
        assert len(g0.amps) == G.order ** 3

    def test_support_cap_enforced(self, small_groups, ladder):
        with pytest.raises(gs.GaugeError, match="cap"):
            gs.ground_state(small_groups["D4"], ladder, support_cap=1000)


class TestWilsonLines:
    @pytest.mark.parametrize("name", ("Z2", "S3", "D4"))
    def test_endpoint_excitations_only(self, small_groups, patch, name):
        G = small_groups[name]
        psi = nontrivial_irrep(G)
        g0 = gs.ground_state(G, patch)
        # path 0 -> 1 -> 3 along edges e0, e3
        w = gs.WilsonLine(psi, ((0, +1), (3, +1)))
        exc = gs.apply_wilson_line(g0, w, 0, 0)
        vexc = gs.vertex_expectations(exc)
        assert vexc[0] < 1 - 1e-6 and vexc[3] < 1 - 1e-6
        assert vexc[1] == pytest.approx(1.0, abs=1e-10)
        assert vexc[2] == pytest.approx(1.0, abs=1e-10)
        assert np.allclose(gs.plaquette_expectations(exc), 1.0, atol=1e-10)

    @pytest.mark.parametrize("name", ("Z2", "S3", "D4"))
    def test_homotopic_deformation(self, small_groups, patch, name):
        G = small_groups[name]
        psi = nontrivial_irrep(G)
        g0 = gs.ground_state(G, patch)
        # two routes 0 -> 3 around the single plaquette
        w1 = gs.WilsonLine(psi, ((0, +1), (3, +1)))
        w2 = gs.WilsonLine(psi, ((2, +1), (1, +1)))
        for a in range(psi.dim):
            for b in range(psi.dim):
                assert gs.verify_deformation(g0, w1, w2, a, b) <= 1e-10

    def test_cross_plaquette_deformation(self, small_groups, ladder):
        # routes 0 -> 5 through the middle rung vs around the outside span
        # both plaquettes, so invariance needs flatness of each
        G = small_groups["Z2"]
        psi = nontrivial_irrep(G)
        g0 = gs.ground_state(G, ladder)
        w1 = gs.WilsonLine(psi, ((0, +1), (5, +1), (3, +1)))
        w2 = gs.WilsonLine(psi, ((4, +1), (2, +1), (3, +1)))
        w3 = gs.WilsonLine(psi, ((0, +1), (1, +1), (6, +1)))
        assert gs.verify_deformation(g0, w1, w2, 0, 0) <= 1e-10
        assert gs.verify_deformation(g0, w1, w3, 0, 0) <= 1e-10

    def test_non_homotopic_paths_differ_off_shell(self, small_groups, patch):
        # on a non-flat state the two routes disagree
        G = small_groups["S3"]
        psi = nontrivial_irrep(G)
        rng = np.random.default_rng(3)
        amps = {}
        for _ in range(30):
            cfg = tuple(int(x) for x in rng.integers(0, G.order, 4))
            amps[cfg] = complex(rng.standard_normal(), rng.standard_normal())
        s = gs.GaugeState(G, patch, amps).normalized()
        w1 = gs.WilsonLine(psi, ((0, +1), (3, +1)))
        w2 = gs.WilsonLine(psi, ((2, +1), (1, +1)))
        assert gs.verify_deformation(s, w1, w2, 0, 0) > 1e-3

    @pytest.mark.parametrize("name", ("Z2", "S3", "D4"))
    def test_closed_loop_eigenvalue(self, small_groups, patch, name):
        G = small_groups[name]
        psi = nontrivial_irrep(G)
        g0 = gs.ground_state(G, patch)
        loop = gs.WilsonLine(psi, ((0, +1), (3, +1), (1, -1), (2, -1)))
        looped = gs.apply_wilson_loop(g0, loop)
        # on flat configurations the loop operator multiplies by tr psi(1) = d
        assert looped.axpy(g0, -psi.dim).norm() <= 1e-10


class TestTrapping:
    @pytest.mark.parametrize("name", ("Z2", "S3", "D4"))
    def test_delta_structure(self, small_groups, patch, name):
        G = small_groups[name]
        psi = nontrivial_irrep(G)
        psi_bar = gs.conjugate_irrep(psi)
        g0 = gs.ground_state(G, patch)
        a, b = 0, psi.dim - 1
        w = gs.WilsonLine(psi, ((0, +1), (3, +1)))  # start 0, end 3
        exc = gs.apply_wilson_line(g0, w, a, b)
        want = G.order / psi.dim
        for phi in ge.irreps(G):
            for c in range(phi.dim):
                lam = gs.trapping_check(exc, 3, phi, c)  # end vertex
                expect = want if (phi.index == psi.index and c == a) else 0.0
                assert abs(lam - expect) < 1e-8
        # start vertex couples to the conjugate irrep at index b
        lam = gs.trapping_check(exc, 0, psi_bar, b)
        assert abs(lam - want) < 1e-8
        if psi.dim > 1:
            assert abs(gs.trapping_check(exc, 0, psi_bar, (b + 1) % psi.dim)) < 1e-8

    def test_bulk_vertex_sees_nothing(self, small_groups, patch):
        G = small_groups["D4"]
        psi = nontrivial_irrep(G)
        g0 = gs.ground_state(G, patch)
        exc = gs.apply_wilson_line(g0, gs.WilsonLine(psi, ((0, +1), (3, +1))), 0, 0)
        for phi in ge.irreps(G):
            for c in range(phi.dim):
                lam = gs.trapping_check(exc, 2, phi, c)
                if phi.dim == 1 and np.allclose(phi.character, 1):
                    expect = G.order  # trivial irrep: operator is sum_g L^g
                else:
                    expect = 0.0
                assert abs(lam - expect) < 1e-8

    def test_non_eigenstate_rejected(self, small_groups, patch):
        G = small_groups["S3"]
        psi = nontrivial_irrep(G)
        rng = np.random.default_rng(9)
        amps = {}
        for _ in range(30):
            cfg = tuple(int(x) for x in rng.integers(0, G.order, 4))
            amps[cfg] = complex(rng.standard_normal(), rng.standard_normal())
        s = gs.GaugeState(G, patch, amps).normalized()
        with pytest.raises(gs.GaugeError, match="Wilson state"):
            gs.trapping_check(s, 0, psi, 0)


class TestStateOps:
    def test_axpy_cap(self, small_groups, patch):
        G = small_groups["Z2"]
        s1 = gs.GaugeState(G, patch, {(0, 0, 0, 0): 1.0}, support_cap=1)
        s2 = gs.GaugeState(G, patch, {(1, 0, 0, 0): 1.0}, support_cap=1)
        with pytest.raises(gs.GaugeError, match="cap"):
            s1.axpy(s2)

    def test_zero_state_rejected(self, small_groups, patch):
        with pytest.raises(gs.GaugeError, match="zero"):
            gs.GaugeState(small_groups["Z2"], patch, {}).normalized()

    def test_gauge_shift_preserves_flatness(self, small_groups, patch):
        G = small_groups["S3"]
        g0 = gs.ground_state(G, patch)
        rng = np.random.default_rng(4)
        cfg = next(iter(g0.amps))
        for _ in range(10):
            v = int(rng.integers(4))
            g = int(rng.integers(G.order))
            cfg = gs.gauge_shift(G, patch, cfg, v, g)
            assert gs._holonomy(G, cfg, patch.plaquettes[0]) == 0
