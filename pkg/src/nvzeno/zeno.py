"""Quantum Zeno machinery for strong-coupling-limited dynamics.

When a weak generator H competes with a strong coupling H_c, the strong part
acts like a continuous measurement: coherent evolution confines itself to the
eigenspaces of H_c.  Writing H_c = sum_n lambda_n P_n over its distinct
eigenvalues, the surviving generator is the block-diagonal "Zeno Hamiltonian"
sum_n P_n H P_n, and the finite-coupling propagator is approximated by
exp[-i sum_n (K lambda_n P_n + P_n H P_n) t] for coupling ratio K.

This module provides that decomposition for arbitrary Hermitian couplings,
plus the closed-form objects specific to the two-nucleus register: the named
eigenstates of the flip-flop coupling (the swap and hold sectors and the
transfer relay state), the three-level dark-sector generator that performs
the nuclear swap, its analytic solution, and the drive-survival formula for
a weakly driven level anchored by a strong coupling.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ClusterAmbiguity, DegenerateParams, DimensionMismatch, WrongSpace
from .linalg import as_complex_matrix, dagger, eig_hermitian, propagator
from .model import HilbertSpace, basis_state


# -- eigenprojection grouping --------------------------------------------------


@dataclass(frozen=True)
class ZenoDecomposition:
    """Distinct-eigenvalue groups ``(lambda_n, P_n)`` of a Hermitian coupling.

    Projectors are complete (``sum_n P_n = 1``) and mutually orthogonal;
    ``ranks`` holds each group's multiplicity.  ``tolerance`` is the
    eigenvalue clustering width that produced the grouping.
    """

    eigenvalues: np.ndarray
    projectors: tuple
    ranks: tuple
    tolerance: float

    @property
    def groups(self) -> list:
        """List of ``(eigenvalue, projector, rank)`` triples."""
        return list(zip(self.eigenvalues, self.projectors, self.ranks))

    @property
    def dim(self) -> int:
        return self.projectors[0].shape[0]

    def dark_projector(self) -> np.ndarray:
        """Projector of the zero-eigenvalue (dark) group.

        Raises:
            DegenerateParams: if no group sits at eigenvalue zero.
        """
        for lam, proj, _ in self.groups:
            if abs(lam) <= self.tolerance:
                return proj
        raise DegenerateParams("decomposition has no zero-eigenvalue group")


def zeno_decompose(h_c, tolerance: float | None = None) -> ZenoDecomposition:
    """Group the spectrum of a Hermitian coupling into distinct-eigenvalue projectors.

    Eigenvalues closer than ``tolerance`` share one projector.  The default
    tolerance is ``1e-8 * max(1, |H_c|)``; spectra built from integer
    multiples of a coupling are separated far more widely than that.

    Raises:
        NotHermitian: if ``h_c`` fails the symmetry check.
        ClusterAmbiguity: if two groups are separated by less than three
            times the tolerance (the grouping would be unsafe).
    """
    eig = eig_hermitian(h_c)
    w, v = eig.eigenvalues, eig.eigenvectors
    scale = max(1.0, float(np.max(np.abs(w))) if w.size else 1.0)
    if tolerance is None:
        tolerance = 1e-8 * scale
    if tolerance <= 0:
        raise ValueError("tolerance must be positive")

    # Cluster the ascending eigenvalues by adjacent gaps.
    boundaries = [0]
    for i in range(1, w.size):
        if w[i] - w[i - 1] > tolerance:
            boundaries.append(i)
    boundaries.append(w.size)

    values, projectors, ranks = [], [], []
    for lo, hi in zip(boundaries[:-1], boundaries[1:]):
        block = v[:, lo:hi]
        values.append(float(np.mean(w[lo:hi])))
        projectors.append(block @ dagger(block))
        ranks.append(hi - lo)

    for a, b in zip(values[:-1], values[1:]):
        if b - a < 3.0 * tolerance:
            raise ClusterAmbiguity(
                f"groups at {a:.6g} and {b:.6g} are separated by less than "
                f"3x tolerance ({tolerance:.3g})"
            )
    return ZenoDecomposition(
        eigenvalues=np.array(values),
        projectors=tuple(projectors),
        ranks=tuple(ranks),
        tolerance=float(tolerance),
    )


def zeno_hamiltonian(decomp: ZenoDecomposition, h) -> np.ndarray:
    """Block-diagonal surviving generator ``sum_n P_n H P_n``.

    Commutes with every group projector by construction.
    """
    h = as_complex_matrix(h)
    if h.shape[0] != decomp.dim:
        raise DimensionMismatch(
            f"operator dimension {h.shape[0]} != decomposition dimension {decomp.dim}"
        )
    out = np.zeros_like(h)
    for _, proj, _ in decomp.groups:
        out += proj @ h @ proj
    return out


def zeno_limit_generator(decomp: ZenoDecomposition, h, k: float) -> np.ndarray:
    """Hermitian generator ``sum_n (k lambda_n P_n + P_n H P_n)`` of the limit flow."""
    if k <= 0:
        raise ValueError(f"coupling ratio must be positive, got {k}")
    h = as_complex_matrix(h)
    if h.shape[0] != decomp.dim:
        raise DimensionMismatch(
            f"operator dimension {h.shape[0]} != decomposition dimension {decomp.dim}"
        )
    gen = np.zeros_like(h)
    for lam, proj, _ in decomp.groups:
        gen += k * lam * proj + proj @ h @ proj
    return gen


def zeno_limit_propagator(decomp: ZenoDecomposition, h, k: float, t: float) -> np.ndarray:
    """Strong-coupling propagator ``exp[-i sum_n (k lambda_n P_n + P_n H P_n) t]``.

    ``k`` is the coupling ratio multiplying the (unit-normalized) coupling
    spectrum.  Restricted to the zero-eigenvalue group the result does not
    depend on ``k``.
    """
    return propagator(zeno_limit_generator(decomp, h, k), t)


# -- named states of the two-nucleus register -----------------------------------


@dataclass(frozen=True)
class SubspaceCatalog:
    """Named unit vectors of the 12-dimensional two-nucleus register.

    The *swap sector* is the five-ket manifold reached from
    ``|up, down> (x) |aux>``; inside it the coupling leaves a rank-3 dark
    subspace spanned by ``swap_start``, ``swap_dark`` and ``swap_end``, and
    the drive walks the nuclear excitation from start to end (the swap).
    The *hold sector* is the four-ket manifold over ``|down, down>``; its
    dark subspace contains no path out of ``hold_start``, which therefore
    stays frozen.  ``transfer_relay`` is the dark combination of both
    sectors' NV-excited kets that mediates state transfer.  Bright states
    sit at coupling eigenvalues +-sqrt(2) g.
    """

    swap_start: np.ndarray       # |up, down> |aux>
    swap_start_nv_up: np.ndarray  # |up, down> |up>
    swap_apex: np.ndarray        # |up, up> |down>
    swap_end_nv_up: np.ndarray   # |down, up> |up>
    swap_end: np.ndarray         # |down, up> |aux>
    swap_dark: np.ndarray
    swap_bright_plus: np.ndarray
    swap_bright_minus: np.ndarray
    hold_start: np.ndarray       # |down, down> |aux>
    hold_start_nv_up: np.ndarray  # |down, down> |up>
    hold_mid_a: np.ndarray       # |down, up> |down>
    hold_mid_b: np.ndarray       # |up, down> |down>
    hold_dark: np.ndarray
    hold_bright_plus: np.ndarray
    hold_bright_minus: np.ndarray
    transfer_relay: np.ndarray

    @property
    def swap_sector(self) -> list:
        """Basis of the swap sector, ordered from start to end."""
        return [
            self.swap_start,
            self.swap_start_nv_up,
            self.swap_apex,
            self.swap_end_nv_up,
            self.swap_end,
        ]

    @property
    def hold_sector(self) -> list:
        """Basis of the hold sector."""
        return [
            self.hold_start,
            self.hold_start_nv_up,
            self.hold_mid_a,
            self.hold_mid_b,
        ]

    @property
    def swap_dark_basis(self) -> list:
        """Dark subspace of the swap sector: (start, dark relay, end)."""
        return [self.swap_start, self.swap_dark, self.swap_end]

    @property
    def transfer_bright_pairs(self) -> tuple:
        """Bright +-sqrt(2) g pairs of the hold and swap sectors."""
        return (
            (self.hold_bright_plus, self.hold_bright_minus),
            (self.swap_bright_plus, self.swap_bright_minus),
        )


def subspace_catalog(space: HilbertSpace) -> SubspaceCatalog:
    """Construct every named state on the two-nucleus register.

    Raises:
        WrongSpace: if ``space`` does not hold exactly two nuclei.
    """
    if space.n_nuclei != 2:
        raise WrongSpace(f"catalog requires 2 nuclei, space has {space.n_nuclei}")
    ket = lambda *labels: basis_state(space, labels)
    s1 = ket("up", "down", "aux")
    s2 = ket("up", "down", "up")
    s3 = ket("up", "up", "down")
    s4 = ket("down", "up", "up")
    s5 = ket("down", "up", "aux")
    h1 = ket("down", "down", "aux")
    h2 = ket("down", "down", "up")
    h3 = ket("down", "up", "down")
    h4 = ket("up", "down", "down")
    inv_sqrt2 = 1.0 / math.sqrt(2.0)
    return SubspaceCatalog(
        swap_start=s1,
        swap_start_nv_up=s2,
        swap_apex=s3,
        swap_end_nv_up=s4,
        swap_end=s5,
        swap_dark=inv_sqrt2 * (-s2 + s4),
        swap_bright_plus=0.5 * (s2 + math.sqrt(2.0) * s3 + s4),
        swap_bright_minus=0.5 * (s2 - math.sqrt(2.0) * s3 + s4),
        hold_start=h1,
        hold_start_nv_up=h2,
        hold_mid_a=h3,
        hold_mid_b=h4,
        hold_dark=inv_sqrt2 * (-h3 + h4),
        hold_bright_plus=0.5 * (math.sqrt(2.0) * h2 + h3 + h4),
        hold_bright_minus=0.5 * (-math.sqrt(2.0) * h2 + h3 + h4),
        transfer_relay=0.5 * (h3 + s4 - h4 - s2),
    )


# -- closed-form dark-sector dynamics --------------------------------------------


def swap_dark_hamiltonian(omega: float) -> np.ndarray:
    """Drive restricted to the swap sector's dark subspace (basis: start, dark, end).

    The only nonzero couplings are ``<start|H|dark> = -omega/sqrt(2)`` and
    ``<end|H|dark> = +omega/sqrt(2)``; the spectrum is ``{0, +-omega}``.
    """
    if omega < 0:
        raise ValueError(f"omega must be nonnegative, got {omega}")
    c = omega / math.sqrt(2.0)
    return np.array(
        [[0.0, -c, 0.0], [-c, 0.0, c], [0.0, c, 0.0]], dtype=complex
    )


def swap_dark_amplitudes(t, omega: float):
    """Analytic amplitudes on (start, dark, end) after driving for time ``t``.

    Starting from the swap-sector entry ket the components are
    ``(1 + cos(omega t))/2`` on start, ``i sin(omega t)/sqrt(2)`` on the
    dark relay and ``(1 - cos(omega t))/2`` on end; the norm is exactly one
    and at ``t = pi/omega`` the excitation has fully swapped.
    """
    t = np.asarray(t, dtype=float)
    phase = omega * t
    c_start = 0.5 * (1.0 + np.cos(phase)) + 0j
    c_dark = 1j * np.sin(phase) / math.sqrt(2.0)
    c_end = 0.5 * (1.0 - np.cos(phase)) + 0j
    return c_start, c_dark, c_end


def survival_probability(g: float, omega: float, t):
    """Ground-amplitude survival for a chain ``|0> -omega- |1> -g- |2>``.

    ``P_0(t) = [(g^2 + omega^2 cos(sqrt(g^2 + omega^2) t)) / (g^2 + omega^2)]^2``:
    with ``g >> omega`` the strong anchor pins the weakly driven level near
    unit occupation.  ``t`` may be an array.

    Raises:
        DegenerateParams: if ``g`` and ``omega`` are both zero.
    """
    if g == 0 and omega == 0:
        raise DegenerateParams("survival probability undefined for g = omega = 0")
    t = np.asarray(t, dtype=float)
    w2 = g * g + omega * omega
    amp = (g * g + omega * omega * np.cos(np.sqrt(w2) * t)) / w2
    return amp * amp
