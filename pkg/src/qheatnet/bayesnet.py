"""Spectral bases, conditional probabilities and trajectory enumeration.

The latent global state evolves deterministically: eigenvectors of the
initial joint state are pushed forward by the interaction unitary while
their populations stay fixed.  Local outcomes at each grid time are
eigenstates of the reduced states, and their probabilities conditioned on
the global state are squared overlaps.  Enumeration is exhaustive over
the flat index space; entries below the probability floor are dropped.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from . import linalg, system

__all__ = [
    "TimeGrid",
    "BasisSet",
    "ConditionalTrajectory",
    "MarginalTables",
    "build_bases",
    "conditional_prob",
    "enumerate_trajectories",
    "reverse_overlap_tables",
    "reverse_enumerate",
    "local_marginals",
    "path_probability_table",
    "choi_path_probability",
    "tpm_table",
]


@dataclass(frozen=True)
class TimeGrid:
    """Strictly increasing positive measurement times; t=0 is implicit."""

    times: tuple[float, ...]

    def __post_init__(self):
        if len(self.times) < 1:
            raise ValueError("time grid needs at least one time")
        prev = 0.0
        for t in self.times:
            if not t > prev:
                raise ValueError("grid times must be strictly increasing and positive")
            prev = t

    @property
    def n_steps(self) -> int:
        return len(self.times)

    @property
    def all_times(self) -> tuple[float, ...]:
        return (0.0,) + self.times


@dataclass(frozen=True)
class BasisSet:
    """Global and local spectral data at every grid time.

    ``overlaps[n][s, a, b]`` is the probability of local outcomes (a, b)
    at time ``n`` conditioned on global label ``s``.
    """

    spec: system.BipartiteSpec
    grid: TimeGrid
    populations: np.ndarray               # P_s, descending
    global_vectors: tuple[np.ndarray, ...]  # columns U(t_n)|s>, n = 0..N
    local_a: tuple[linalg.EigenSystem, ...]
    local_b: tuple[linalg.EigenSystem, ...]
    energies_a: tuple[np.ndarray, ...]    # <a_n|H_A|a_n>
    energies_b: tuple[np.ndarray, ...]
    overlaps: tuple[np.ndarray, ...]      # (D, d_A, d_B) per time
    unitaries: tuple[np.ndarray, ...]     # U(t_n), n = 0..N

    @property
    def dim(self) -> int:
        return self.populations.shape[0]

    @property
    def n_times(self) -> int:
        return len(self.overlaps)


@dataclass(frozen=True)
class ConditionalTrajectory:
    """One record (s, (a_0,b_0), ..., (a_N,b_N)) with its path weight."""

    s: int
    outcomes: tuple[tuple[int, int], ...]
    weight: float


def build_bases(spec: system.BipartiteSpec, grid: TimeGrid) -> BasisSet:
    """Diagonalize the global state once and the reduced states at every
    grid time, with Hamiltonian tie-breaking inside degenerate blocks."""
    rho0 = system.build_initial_state(spec)
    da, db = spec.dim_a, spec.dim_b

    glob = linalg.hermitian_eigendecompose(rho0, tiebreak=spec.h_total)
    populations = np.clip(glob.values, 0.0, None)

    global_vectors = [glob.vectors]
    local_a, local_b = [], []
    energies_a, energies_b = [], []
    overlaps = []
    unitaries = [np.eye(spec.dim, dtype=complex)]

    for n, t in enumerate(grid.all_times):
        if n > 0:
            u = linalg.unitary_from_hamiltonian(spec.h_int, t)
            unitaries.append(u)
            global_vectors.append(u @ glob.vectors)
        vecs = global_vectors[n]
        rho_t = (vecs * populations) @ vecs.conj().T

        ra = linalg.partial_trace(rho_t, da, db, keep="A")
        rb = linalg.partial_trace(rho_t, da, db, keep="B")
        ea = linalg.hermitian_eigendecompose(ra, tiebreak=spec.h_a)
        eb = linalg.hermitian_eigendecompose(rb, tiebreak=spec.h_b)
        local_a.append(ea)
        local_b.append(eb)
        energies_a.append(np.real(np.einsum(
            "ij,ik,kj->j", ea.vectors.conj(), spec.h_a, ea.vectors)))
        energies_b.append(np.real(np.einsum(
            "ij,ik,kj->j", eb.vectors.conj(), spec.h_b, eb.vectors)))

        prod = linalg.tensor_product(ea.vectors, eb.vectors)
        amp = prod.conj().T @ vecs          # (d_A*d_B, D)
        overlaps.append(np.abs(amp.T.reshape(spec.dim, da, db)) ** 2)

    return BasisSet(
        spec=spec,
        grid=grid,
        populations=populations,
        global_vectors=tuple(global_vectors),
        local_a=tuple(local_a),
        local_b=tuple(local_b),
        energies_a=tuple(energies_a),
        energies_b=tuple(energies_b),
        overlaps=tuple(overlaps),
        unitaries=tuple(unitaries),
    )


def conditional_prob(basis: BasisSet, n: int, a: int, b: int, s: int) -> float:
    """P(a_n, b_n | s_n), the squared overlap of the product local state
    with the evolved global eigenstate."""
    if not 0 <= n < basis.n_times:
        raise IndexError(f"time index {n} out of range")
    table = basis.overlaps[n]
    if not (0 <= s < table.shape[0] and 0 <= a < table.shape[1] and 0 <= b < table.shape[2]):
        raise IndexError("basis index out of range")
    return float(table[s, a, b])


def enumerate_trajectories(basis: BasisSet) -> list[ConditionalTrajectory]:
    """All conditional trajectories with weight above the probability floor.

    The weight is the initial population times the product of conditional
    probabilities at each grid time.
    """
    floor = basis.spec.tol.probability_floor
    da, db = basis.spec.dim_a, basis.spec.dim_b
    pairs = list(itertools.product(range(da), range(db)))
    out = []
    for s in range(basis.dim):
        ps = basis.populations[s]
        if ps <= floor:
            continue
        for combo in itertools.product(pairs, repeat=basis.n_times):
            w = ps
            for n, (a, b) in enumerate(combo):
                w *= basis.overlaps[n][s, a, b]
                if w <= floor:
                    break
            if w > floor:
                out.append(ConditionalTrajectory(s=s, outcomes=combo, weight=float(w)))
    return out


def reverse_overlap_tables(basis: BasisSet) -> list[np.ndarray]:
    """Conditional probability tables of the time-reversed process.

    The reversed experiment starts from the same global eigenvectors and
    populations and runs the interaction backwards.  Entry ``m`` of the
    returned list (m = 0 is the start of the reversed process, physical
    time ``t_N``) holds |<a_n b_n| U^dag(t_N - t_n) |s>|^2 with n = N - m:
    the local bases are visited in reverse chronological order while the
    backward evolution accumulates.
    """
    da, db = basis.spec.dim_a, basis.spec.dim_b
    nsteps = basis.grid.n_steps
    u_final = basis.unitaries[nsteps]
    tables = []
    for n in range(nsteps, -1, -1):
        # U^dag(t_N - t_n) == U(t_n) U(t_N)^dag for a fixed generator
        vecs = basis.unitaries[n] @ u_final.conj().T @ basis.global_vectors[0]
        prod = linalg.tensor_product(basis.local_a[n].vectors, basis.local_b[n].vectors)
        amp = prod.conj().T @ vecs
        tables.append(np.abs(amp.T.reshape(basis.dim, da, db)) ** 2)
    return tables


def reverse_enumerate(basis: BasisSet) -> list[ConditionalTrajectory]:
    """Trajectories of the time-reversed process.

    A reverse record (s*, (a_N,b_N), ..., (a_0,b_0)) pairs each global
    label with backward evolution: the factor for physical time t_n is
    the squared overlap of |a_n b_n> with U^dag(t_N - t_n) applied to the
    label's initial eigenvector.  Populations are the forward ones;
    outcomes are stored in reverse chronological order.  For a product
    initial state this reproduces the forward statistics.
    """
    floor = basis.spec.tol.probability_floor
    da, db = basis.spec.dim_a, basis.spec.dim_b
    nsteps = basis.grid.n_steps
    back = reverse_overlap_tables(basis)

    pairs = list(itertools.product(range(da), range(db)))
    out = []
    for s in range(basis.dim):
        ps = basis.populations[s]
        if ps <= floor:
            continue
        for combo in itertools.product(pairs, repeat=nsteps + 1):
            w = ps
            for step, (a, b) in enumerate(combo):
                w *= back[step][s, a, b]
                if w <= floor:
                    break
            if w > floor:
                out.append(ConditionalTrajectory(s=s, outcomes=combo, weight=float(w)))
    return out


@dataclass(frozen=True)
class MarginalTables:
    """Two-time outcome marginals; ``joint_1`` is checked against the
    direct matrix elements of the evolved state during construction."""

    joint_0: np.ndarray   # P(a_0, b_0)
    joint_1: np.ndarray   # P(a_1, b_1)
    a_0: np.ndarray
    b_0: np.ndarray
    a_1: np.ndarray
    b_1: np.ndarray


def _two_time(basis: BasisSet) -> None:
    if basis.grid.n_steps != 1:
        raise ValueError("operation requires a two-time grid (exactly one step)")


def local_marginals(basis: BasisSet) -> MarginalTables:
    """Outcome marginals at both times of a two-time grid.

    The final joint table is computed both by summing over the global
    label and as diagonal matrix elements of the evolved state; the two
    routes must agree to 1e-12.
    """
    _two_time(basis)
    p = basis.populations
    joint_0 = np.einsum("s,sab->ab", p, basis.overlaps[0])
    joint_1 = np.einsum("s,sab->ab", p, basis.overlaps[1])

    vecs = basis.global_vectors[1]
    rho_t = (vecs * p) @ vecs.conj().T
    prod = linalg.tensor_product(basis.local_a[1].vectors, basis.local_b[1].vectors)
    direct = np.real(np.einsum("is,ij,js->s", prod.conj(), rho_t, prod))
    direct = direct.reshape(joint_1.shape)
    dev = np.abs(direct - joint_1).max()
    if dev > 1e-12:
        raise AssertionError(f"marginal routes disagree by {dev:.3e}")

    return MarginalTables(
        joint_0=joint_0,
        joint_1=joint_1,
        a_0=joint_0.sum(axis=1),
        b_0=joint_0.sum(axis=0),
        a_1=joint_1.sum(axis=1),
        b_1=joint_1.sum(axis=0),
    )


def path_probability_table(basis: BasisSet) -> np.ndarray:
    """Two-time local path probabilities P(a_0,b_0,a_1,b_1), obtained by
    marginalizing the global label out of the trajectory weights."""
    _two_time(basis)
    return np.einsum(
        "s,sab,scd->abcd", basis.populations, basis.overlaps[0], basis.overlaps[1]
    )


def choi_path_probability(basis: BasisSet) -> np.ndarray:
    """Same table via the channel-state (Choi) route.

    A two-copy state correlates each global eigenvector with itself, the
    second copy is pushed through the evolution channel, and the table is
    read off as diagonal expectations in the product of local bases.
    Positivity and normalization are inherited from the construction.
    """
    _two_time(basis)
    d = basis.dim
    v0 = basis.global_vectors[0]
    u = basis.unitaries[1]

    omega = np.zeros((d * d, d * d), dtype=complex)
    for s in range(d):
        proj = np.outer(v0[:, s], v0[:, s].conj())
        omega += basis.populations[s] * linalg.tensor_product(proj, proj)
    big_u = linalg.tensor_product(np.eye(d), u)
    lam = big_u @ omega @ big_u.conj().T

    prod0 = linalg.tensor_product(basis.local_a[0].vectors, basis.local_b[0].vectors)
    prod1 = linalg.tensor_product(basis.local_a[1].vectors, basis.local_b[1].vectors)
    kets = linalg.tensor_product(prod0, prod1)   # columns |a b> x |a' b'>
    table = np.real(np.einsum("is,ij,js->s", kets.conj(), lam, kets))
    da, db = basis.spec.dim_a, basis.spec.dim_b
    return table.reshape(da, db, da, db)


def tpm_table(basis: BasisSet) -> np.ndarray:
    """Two-point-measurement path probabilities,
    P_a0 * P_b0 * |<a_1 b_1|U|a_0 b_0>|^2, in the same local bases."""
    _two_time(basis)
    marg = local_marginals(basis)
    prod0 = linalg.tensor_product(basis.local_a[0].vectors, basis.local_b[0].vectors)
    prod1 = linalg.tensor_product(basis.local_a[1].vectors, basis.local_b[1].vectors)
    amp = prod1.conj().T @ basis.unitaries[1] @ prod0
    da, db = basis.spec.dim_a, basis.spec.dim_b
    trans = (np.abs(amp) ** 2).reshape(da, db, da, db)  # [a1,b1,a0,b0]
    p0 = np.outer(marg.a_0, marg.b_0)
    return np.einsum("ab,cdab->abcd", p0, trans)
