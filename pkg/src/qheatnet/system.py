"""Physical setup: correlated bipartite initial states and their checks.

A :class:`BipartiteSpec` bundles the two local Hamiltonians, the inverse
temperatures, the correlation operator on the joint space and the
interaction generator.  ``validate`` runs every structural check the
construction relies on and reports residuals instead of raising, so a CLI
can name the first violated condition.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from . import linalg

__all__ = [
    "Tolerances",
    "BipartiteSpec",
    "GibbsState",
    "CheckResult",
    "ValidationReport",
    "SpecError",
    "gibbs_state",
    "build_initial_state",
    "validate",
    "evolve",
]


class SpecError(ValueError):
    """A bipartite spec violates one of its structural invariants."""


@dataclass(frozen=True)
class Tolerances:
    """Validation tolerance bundle.  All values are absolute."""

    hermiticity: float = 1e-10
    marginal: float = 1e-10
    commutator: float = 1e-10
    positivity: float = 1e-10
    unitarity: float = 1e-10
    #: trajectory weights below this are dropped from enumerations
    probability_floor: float = 1e-14
    #: distribution support points closer than this share one bin
    binning: float = 1e-9

    def updated(self, **kwargs) -> "Tolerances":
        return replace(self, **kwargs)


@dataclass(frozen=True)
class BipartiteSpec:
    """One experiment: local Hamiltonians, temperatures, correlations,
    and the energy-conserving interaction generator."""

    h_a: np.ndarray
    h_b: np.ndarray
    beta_a: float
    beta_b: float
    chi: np.ndarray
    h_int: np.ndarray
    tol: Tolerances = field(default_factory=Tolerances)

    @property
    def dim_a(self) -> int:
        return self.h_a.shape[0]

    @property
    def dim_b(self) -> int:
        return self.h_b.shape[0]

    @property
    def dim(self) -> int:
        return self.dim_a * self.dim_b

    @property
    def h_total(self) -> np.ndarray:
        """H_A x I + I x H_B on the joint space."""
        ia = np.eye(self.dim_a)
        ib = np.eye(self.dim_b)
        return linalg.tensor_product(self.h_a, ib) + linalg.tensor_product(ia, self.h_b)


@dataclass(frozen=True)
class GibbsState:
    """Thermal state exp(-beta*H)/Z with its spectral data."""

    rho: np.ndarray
    z: float
    beta: float
    energies: np.ndarray  # ascending, paired with rho's descending populations
    vectors: np.ndarray


def gibbs_state(h: np.ndarray, beta: float) -> GibbsState:
    """Thermal state of Hamiltonian ``h`` at inverse temperature ``beta``.

    ``beta == 0`` gives the maximally mixed state.
    """
    if beta < 0:
        raise SpecError("beta must be nonnegative")
    eig = linalg.hermitian_eigendecompose(h)
    # eig.values descend; order by ascending energy so populations descend
    energies = eig.values[::-1].copy()
    vectors = eig.vectors[:, ::-1].copy()
    # subtract the ground energy before exponentiating for stability
    shifted = energies - energies[0]
    boltz = np.exp(-beta * shifted)
    z = float(boltz.sum() * np.exp(-beta * energies[0]))
    pops = boltz / boltz.sum()
    rho = (vectors * pops) @ vectors.conj().T
    return GibbsState(rho=rho, z=z, beta=beta, energies=energies, vectors=vectors)


@dataclass(frozen=True)
class CheckResult:
    name: str
    residual: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.residual <= self.tolerance


@dataclass(frozen=True)
class ValidationReport:
    checks: tuple[CheckResult, ...]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def first_failure(self) -> CheckResult | None:
        for c in self.checks:
            if not c.passed:
                return c
        return None


def _hermiticity_residual(m: np.ndarray) -> float:
    return float(np.abs(m - m.conj().T).max())


def validate(spec: BipartiteSpec) -> ValidationReport:
    """Run all structural checks on a spec; failures are data, not errors."""
    tol = spec.tol
    checks: list[CheckResult] = []

    checks.append(CheckResult("h_a_hermitian", _hermiticity_residual(spec.h_a), tol.hermiticity))
    checks.append(CheckResult("h_b_hermitian", _hermiticity_residual(spec.h_b), tol.hermiticity))
    checks.append(CheckResult("h_int_hermitian", _hermiticity_residual(spec.h_int), tol.hermiticity))
    checks.append(CheckResult("chi_hermitian", _hermiticity_residual(spec.chi), tol.hermiticity))

    dim_ok = spec.h_int.shape[0] == spec.dim and spec.chi.shape[0] == spec.dim
    checks.append(CheckResult("joint_dimension", 0.0 if dim_ok else 1.0, 0.5))
    if not dim_ok:
        return ValidationReport(tuple(checks))

    checks.append(CheckResult("chi_traceless", float(abs(np.trace(spec.chi))), tol.marginal))
    tr_a = linalg.partial_trace(spec.chi, spec.dim_a, spec.dim_b, keep="B")
    tr_b = linalg.partial_trace(spec.chi, spec.dim_a, spec.dim_b, keep="A")
    checks.append(CheckResult("chi_marginal_a", float(np.abs(tr_b).max()), tol.marginal))
    checks.append(CheckResult("chi_marginal_b", float(np.abs(tr_a).max()), tol.marginal))

    try:
        rho0 = _raw_initial_state(spec)
        checks.append(CheckResult("rho0_unit_trace", float(abs(np.trace(rho0).real - 1.0)), 1e-10))
        eigvals = np.linalg.eigvalsh((rho0 + rho0.conj().T) / 2.0)
        neg = max(0.0, float(-eigvals.min()))
        checks.append(CheckResult("rho0_positive", neg, tol.positivity))
    except linalg.LinalgError:
        checks.append(CheckResult("rho0_constructible", 1.0, 0.5))

    try:
        comm = linalg.commutator_norm(spec.h_int, spec.h_total)
        checks.append(CheckResult("h_int_energy_conserving", comm, tol.commutator))
    except linalg.LinalgError:
        checks.append(CheckResult("h_int_energy_conserving", np.inf, tol.commutator))

    return ValidationReport(tuple(checks))


def _raw_initial_state(spec: BipartiteSpec) -> np.ndarray:
    ga = gibbs_state(spec.h_a, spec.beta_a)
    gb = gibbs_state(spec.h_b, spec.beta_b)
    return linalg.tensor_product(ga.rho, gb.rho) + spec.chi


def build_initial_state(spec: BipartiteSpec) -> np.ndarray:
    """Joint initial state: Gibbs product plus the correlation term.

    Raises :class:`SpecError` naming the first failed check if the spec
    is invalid.
    """
    report = validate(spec)
    if not report.passed:
        bad = report.first_failure()
        raise SpecError(
            f"spec check {bad.name!r} failed with residual {bad.residual:.3e}"
        )
    return _raw_initial_state(spec)


def evolve(rho: np.ndarray, u: np.ndarray, unitarity_tol: float = 1e-10) -> np.ndarray:
    """Conjugate a state by a unitary, U rho U^dag."""
    rho = np.asarray(rho, dtype=complex)
    u = np.asarray(u, dtype=complex)
    if rho.shape != u.shape:
        raise linalg.LinalgError("state and unitary dimensions differ")
    dev = np.abs(u.conj().T @ u - np.eye(u.shape[0])).max()
    if dev > unitarity_tol:
        raise linalg.LinalgError(f"matrix is not unitary (deviation {dev:.3e})")
    return u @ rho @ u.conj().T
