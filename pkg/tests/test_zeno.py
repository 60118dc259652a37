import math

import numpy as np
import pytest
from numpy.testing import assert_allclose
from scipy.linalg import expm

from nvzeno.errors import (
    ClusterAmbiguity,
    DegenerateParams,
    DimensionMismatch,
    NotHermitian,
    WrongSpace,
)
from nvzeno.linalg import max_abs, propagator
from nvzeno.model import basis_state, build_h_dd, build_h_drive, build_space
from nvzeno.zeno import (
    subspace_catalog,
    survival_probability,
    swap_dark_amplitudes,
    swap_dark_hamiltonian,
    zeno_decompose,
    zeno_hamiltonian,
    zeno_limit_generator,
    zeno_limit_propagator,
)

ROOT2 = math.sqrt(2.0)


def swap_sector_restriction(space, catalog, operator):
    basis = catalog.swap_sector
    return np.array([[np.vdot(a, operator @ b) for b in basis] for a in basis])


class TestZenoDecompose:
    def test_full_register_groups(self, space2):
        decomp = zeno_decompose(build_h_dd(space2, (1.0, 1.0)), tolerance=1e-8)
        assert_allclose(decomp.eigenvalues, [-ROOT2, 0.0, ROOT2], atol=1e-12)
        assert decomp.ranks == (2, 8, 2)
        # every NV-aux ket is dark
        dark = decomp.dark_projector()
        for n1 in (0, 1):
            for n2 in (0, 1):
                ket = basis_state(space2, (n1, n2, "aux"))
                assert np.linalg.norm(dark @ ket - ket) < 1e-10

    def test_zero_matrix_single_group(self):
        decomp = zeno_decompose(np.zeros((4, 4)))
        assert len(decomp.projectors) == 1
        assert decomp.eigenvalues[0] == 0.0
        assert max_abs(decomp.projectors[0] - np.eye(4)) < 1e-12

    def test_swap_sector_ranks(self, space2, catalog):
        h5 = swap_sector_restriction(space2, catalog, build_h_dd(space2, (1.0, 1.0)))
        decomp = zeno_decompose(h5, tolerance=1e-8)
        assert decomp.ranks == (1, 3, 1)
        assert_allclose(decomp.eigenvalues, [-ROOT2, 0.0, ROOT2], atol=1e-12)

    def test_completeness_and_orthogonality(self, space2, rng):
        a = rng.standard_normal((9, 9)) + 1j * rng.standard_normal((9, 9))
        decomp = zeno_decompose(0.5 * (a + a.conj().T))
        total = sum(decomp.projectors)
        assert max_abs(total - np.eye(9)) < 1e-10
        for i, p in enumerate(decomp.projectors):
            for j, q in enumerate(decomp.projectors):
                expected = p if i == j else np.zeros_like(p)
                assert max_abs(p @ q - expected) < 1e-10

    def test_cluster_ambiguity(self):
        with pytest.raises(ClusterAmbiguity):
            zeno_decompose(np.diag([0.0, 0.025]), tolerance=0.01)

    def test_rejects_non_hermitian(self):
        with pytest.raises(NotHermitian):
            zeno_decompose(np.array([[0.0, 1.0], [0.0, 0.0]]))


class TestZenoHamiltonian:
    def test_block_diagonal_input_unchanged(self, space2):
        h_c = build_h_dd(space2, (1.0, 1.0))
        decomp = zeno_decompose(h_c)
        # the coupling itself is block diagonal in its own eigenbasis
        assert max_abs(zeno_hamiltonian(decomp, h_c) - h_c) < 1e-10

    def test_commutes_with_projectors(self, space2):
        decomp = zeno_decompose(build_h_dd(space2, (1.0, 1.0)))
        hz = zeno_hamiltonian(decomp, build_h_drive(space2, 0.105))
        for _, proj, _ in decomp.groups:
            assert max_abs(hz @ proj - proj @ hz) < 1e-10

    def test_dark_block_matches_closed_form(self, space2, catalog):
        # dark-projected drive on the swap sector equals
        # (omega/sqrt(2)) (-|start> + |end>) <dark| + h.c.
        omega = 0.105
        h5_c = swap_sector_restriction(space2, catalog, build_h_dd(space2, (1.0, 1.0)))
        h5_drive = swap_sector_restriction(space2, catalog, build_h_drive(space2, omega))
        decomp = zeno_decompose(h5_c)
        dark = decomp.dark_projector()
        projected = dark @ h5_drive @ dark

        e1 = np.zeros(5, complex); e1[0] = 1.0
        e5 = np.zeros(5, complex); e5[4] = 1.0
        psi_dark = np.zeros(5, complex); psi_dark[1] = -1 / ROOT2; psi_dark[3] = 1 / ROOT2
        half = (omega / ROOT2) * np.outer(-e1 + e5, psi_dark.conj())
        expected = half + half.conj().T
        assert max_abs(projected - expected) < 1e-12

    def test_dimension_mismatch(self, space2):
        decomp = zeno_decompose(build_h_dd(space2, (1.0, 1.0)))
        with pytest.raises(DimensionMismatch):
            zeno_hamiltonian(decomp, np.zeros((5, 5)))


class TestZenoLimitPropagator:
    def test_zero_time_identity(self, space2):
        decomp = zeno_decompose(build_h_dd(space2, (1.0, 1.0)))
        u = zeno_limit_propagator(decomp, build_h_drive(space2, 0.105), k=10.0, t=0.0)
        assert max_abs(u - np.eye(12)) < 1e-12

    def test_dark_block_independent_of_k(self, space2):
        decomp = zeno_decompose(build_h_dd(space2, (1.0, 1.0)))
        drive = build_h_drive(space2, 0.105)
        dark = decomp.dark_projector()
        u1 = zeno_limit_propagator(decomp, drive, k=7.0, t=3.3)
        u2 = zeno_limit_propagator(decomp, drive, k=700.0, t=3.3)
        assert max_abs(dark @ u1 @ dark - dark @ u2 @ dark) < 1e-10

    def test_matches_full_propagator_at_strong_coupling(self, space2):
        # dark-block matrix elements vs the exact propagator at K = 1000
        omega, k = 1.0, 1000.0
        decomp = zeno_decompose(build_h_dd(space2, (1.0, 1.0)))
        drive = build_h_drive(space2, omega)
        dark = decomp.dark_projector()
        for t in (0.3, 1.7, math.pi / omega):
            u_full = propagator(drive + build_h_dd(space2, (k, k)), t)
            u_zeno = zeno_limit_propagator(decomp, drive, k=k, t=t)
            assert max_abs(dark @ (u_full - u_zeno) @ dark) < 2e-3

    def test_rejects_nonpositive_ratio(self, space2):
        decomp = zeno_decompose(build_h_dd(space2, (1.0, 1.0)))
        with pytest.raises(ValueError):
            zeno_limit_generator(decomp, build_h_drive(space2, 0.1), k=0.0)


class TestSwapDarkSector:
    def test_hamiltonian_entries_and_spectrum(self):
        omega = 0.4
        h = swap_dark_hamiltonian(omega)
        assert abs(h[0, 1] + omega / ROOT2) < 1e-15
        assert abs(h[2, 1] - omega / ROOT2) < 1e-15
        assert_allclose(np.linalg.eigvalsh(h), [-omega, 0.0, omega], atol=1e-12)
        assert max_abs(swap_dark_hamiltonian(0.0)) == 0.0

    def test_matches_projected_drive(self, space2, catalog):
        omega = 0.105
        decomp = zeno_decompose(build_h_dd(space2, (1.0, 1.0)))
        hz = zeno_hamiltonian(decomp, build_h_drive(space2, omega))
        basis = catalog.swap_dark_basis
        restricted = np.array([[np.vdot(a, hz @ b) for b in basis] for a in basis])
        assert max_abs(restricted - swap_dark_hamiltonian(omega)) < 1e-12

    def test_amplitudes_boundary_values(self):
        omega = 0.105
        c1, c2, c3 = swap_dark_amplitudes(0.0, omega)
        assert_allclose([c1, c2, c3], [1.0, 0.0, 0.0], atol=1e-15)
        c1, c2, c3 = swap_dark_amplitudes(math.pi / omega, omega)
        assert abs(c3 - 1.0) < 1e-12 and abs(c1) < 1e-12 and abs(c2) < 1e-12

    def test_amplitudes_normalized(self):
        t = np.linspace(0.0, 120.0, 301)
        c1, c2, c3 = swap_dark_amplitudes(t, 0.105)
        norms = np.abs(c1) ** 2 + np.abs(c2) ** 2 + np.abs(c3) ** 2
        assert np.max(np.abs(norms - 1.0)) < 1e-12

    def test_amplitudes_match_matrix_exponential(self):
        # independent oracle: scipy expm of the three-level dark generator
        omega = 0.105
        h = swap_dark_hamiltonian(omega)
        e_start = np.array([1.0, 0.0, 0.0], complex)
        for t in np.linspace(0.0, math.pi / omega, 100):
            exact = expm(-1j * h * t) @ e_start
            c1, c2, c3 = swap_dark_amplitudes(t, omega)
            assert max_abs(np.array([c1, c2, c3]) - exact) < 1e-10


class TestSurvivalProbability:
    def test_boundary_cases(self):
        assert survival_probability(1.0, 0.105, 0.0) == pytest.approx(1.0)
        t = np.linspace(0.0, 30.0, 50)
        assert_allclose(survival_probability(0.0, 0.3, t), np.cos(0.3 * t) ** 2, atol=1e-12)

    def test_degenerate_params(self):
        with pytest.raises(DegenerateParams):
            survival_probability(0.0, 0.0, 1.0)

    @pytest.mark.parametrize("g,omega", [(1.0, 0.105), (1.0, 0.05), (2.0, 0.4), (0.5, 0.5)])
    def test_against_three_level_chain_oracle(self, g, omega):
        # chain |0> -omega- |1> -g- |2>, ground amplitude via scipy expm
        h3 = np.array([[0.0, omega, 0.0], [omega, 0.0, g], [0.0, g, 0.0]])
        for t in np.linspace(0.0, 40.0, 60):
            amp = expm(-1j * h3 * t)[0, 0]
            assert abs(survival_probability(g, omega, t) - abs(amp) ** 2) < 1e-10


class TestSubspaceCatalog:
    def test_requires_two_nuclei(self):
        with pytest.raises(WrongSpace):
            subspace_catalog(build_space(1))

    def test_unit_norms(self, catalog):
        states = [
            catalog.swap_start, catalog.swap_start_nv_up, catalog.swap_apex,
            catalog.swap_end_nv_up, catalog.swap_end, catalog.swap_dark,
            catalog.swap_bright_plus, catalog.swap_bright_minus,
            catalog.hold_start, catalog.hold_start_nv_up, catalog.hold_mid_a,
            catalog.hold_mid_b, catalog.hold_dark, catalog.hold_bright_plus,
            catalog.hold_bright_minus, catalog.transfer_relay,
        ]
        for psi in states:
            assert abs(np.linalg.norm(psi) - 1.0) < 1e-12

    def test_sector_orthogonality(self, catalog):
        for group in (
            [catalog.swap_start, catalog.swap_dark, catalog.swap_end,
             catalog.swap_bright_plus, catalog.swap_bright_minus],
            [catalog.hold_start, catalog.hold_dark,
             catalog.hold_bright_plus, catalog.hold_bright_minus],
        ):
            for i, a in enumerate(group):
                for b in group[i + 1:]:
                    assert abs(np.vdot(a, b)) < 1e-12

    def test_bright_states_are_coupling_eigenstates(self, space2, catalog):
        h = build_h_dd(space2, (1.0, 1.0))
        for plus, minus in catalog.transfer_bright_pairs:
            assert max_abs(h @ plus - ROOT2 * plus) < 1e-12
            assert max_abs(h @ minus + ROOT2 * minus) < 1e-12

    def test_relay_is_dark(self, space2, catalog):
        h = build_h_dd(space2, (1.0, 1.0))
        assert np.linalg.norm(h @ catalog.transfer_relay) < 1e-12

    def test_relay_links_sector_darks(self, catalog):
        combined = (catalog.swap_dark - catalog.hold_dark) / ROOT2
        assert max_abs(catalog.transfer_relay - combined) < 1e-12


class TestZenoInvariants:
    def test_leakage_bound_weak_drive(self, space2, catalog):
        # starting in the dark subspace with omega/g <= 0.05, population
        # outside it stays below 0.01 over one cycle
        omega = 0.05
        h = build_h_drive(space2, omega) + build_h_dd(space2, (1.0, 1.0))
        dark = zeno_decompose(build_h_dd(space2, (1.0, 1.0))).dark_projector()
        w, v = np.linalg.eigh(h)
        coeff = v.conj().T @ catalog.swap_start
        for t in np.linspace(0.0, math.pi / omega, 200):
            psi = v @ (np.exp(-1j * w * t) * coeff)
            outside = 1.0 - np.real(np.vdot(psi, dark @ psi))
            assert outside < 0.01

    def test_hold_start_population_at_cycle_end(self, space2, catalog):
        omega = 0.105
        h = build_h_drive(space2, omega) + build_h_dd(space2, (1.0, 1.0))
        u = propagator(h, math.pi / omega)
        pop = abs(np.vdot(catalog.hold_start, u @ catalog.hold_start)) ** 2
        assert pop >= 0.98
