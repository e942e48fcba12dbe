"""Stochastic ledgers and fluctuation-theorem checks on two-time grids.

Each forward trajectory is augmented with an anchor label for the
reversed process, drawn uniformly over the retained global labels; the
reversed process itself runs the interaction backwards from the same
initial eigenvectors.  Per-pair ledgers collect heat, information
(classical and coherent parts), athermality and the two-anchor mismatch
term, and every exchange-type relation in the hierarchy is evaluated as
an exact finite sum.

Averages whose summand cancels the anchor population (the information
terms) are computed in the cancelled form over *all* labels, so states
with eigenvalues on the boundary of the simplex (exact zeros) keep their
unit averages; the naive restriction to retained trajectories would
silently lose the 0 * inf contributions.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import bayesnet, linalg, system
from .distributions import DiscreteDistribution

__all__ = [
    "FORWARD_QUANTITIES",
    "REVERSE_QUANTITIES",
    "AugmentedTrajectory",
    "Ledger",
    "LedgerSet",
    "CombinedFT",
    "JointFT",
    "PsiReport",
    "HeatBalance",
    "InfoMeans",
    "compute_ledgers",
    "integral_ft",
    "combined_integral_ft",
    "heat_distribution",
    "joint_distribution",
    "psi_factor",
    "mean_heat_balance",
    "mutual_information_check",
    "mean_quantity",
]

#: quantities averaged over the forward (augmented) ensemble
FORWARD_QUANTITIES = ("i0", "j0", "c0", "sigma_a", "sigma_b", "gamma")
#: quantities averaged over the reversed / final-measurement ensemble
REVERSE_QUANTITIES = ("i1", "j1", "c1")


@dataclass(frozen=True)
class AugmentedTrajectory:
    """Forward record plus its anchor label for the reversed process."""

    s: int
    a0: int
    b0: int
    a1: int
    b1: int
    s_star: int
    weight_forward: float
    weight_reverse: float


@dataclass(frozen=True)
class Ledger:
    """Per-pair stochastic quantities.  ``i0 = j0 + c0`` and
    ``i1 = j1 + c1`` hold exactly as computed."""

    q_a: float
    q_b: float
    i0: float
    j0: float
    c0: float
    i1: float
    j1: float
    c1: float
    sigma_a: float
    sigma_b: float
    gamma: float
    k: float
    energy_conserving: bool


class LedgerSet:
    """Vectorized ledger data for one basis set on a two-time grid.

    Array attributes index the retained augmented pairs; the per-label
    probability tables stay available for the closed-form averages.
    """

    def __init__(self, basis: bayesnet.BasisSet):
        if basis.grid.n_steps != 1:
            raise ValueError("ledgers require a two-time grid (exactly one step)")
        spec = basis.spec
        da, db, dim = spec.dim_a, spec.dim_b, spec.dim
        floor = spec.tol.probability_floor
        binning = spec.tol.binning

        self.basis = basis
        self.floor = floor
        self.binning = binning
        self.beta_a = spec.beta_a
        self.beta_b = spec.beta_b
        self.delta_beta = spec.beta_a - spec.beta_b
        self.dim_a, self.dim_b = da, db

        marg = bayesnet.local_marginals(basis)
        self.marg = marg
        self.pops = basis.populations
        self.keep = np.flatnonzero(self.pops > floor)
        self.n_anchor = len(self.keep)

        m = da * db
        self.a0_table = basis.overlaps[0].reshape(dim, m)
        self.a1_table = basis.overlaps[1].reshape(dim, m)
        back = bayesnet.reverse_overlap_tables(basis)
        self.b1_table = back[0].reshape(dim, m)   # t1 local bases vs anchors
        self.b0_table = back[1].reshape(dim, m)   # t0 local bases vs backward-evolved

        self.joint0 = marg.joint_0.ravel()
        self.joint1 = marg.joint_1.ravel()
        self.pp0 = np.outer(marg.a_0, marg.b_0).ravel()
        self.pp1 = np.outer(marg.a_1, marg.b_1).ravel()

        self.e_a0, self.e_a1 = basis.energies_a
        self.e_b0, self.e_b1 = basis.energies_b
        ga = system.gibbs_state(spec.h_a, spec.beta_a)
        gb = system.gibbs_state(spec.h_b, spec.beta_b)
        self.pth_a1 = np.exp(-spec.beta_a * self.e_a1) / ga.z
        self.pth_b1 = np.exp(-spec.beta_b * self.e_b1) / gb.z
        self.gibbs_a, self.gibbs_b = ga, gb

        # heat tables over flattened outcome pairs (i0, i1)
        a0idx, b0idx = np.divmod(np.arange(m), db)
        self.flat_a, self.flat_b = a0idx, b0idx
        qa = self.e_a1[a0idx][None, :] - self.e_a0[a0idx][:, None]
        qb = self.e_b1[b0idx][None, :] - self.e_b0[b0idx][:, None]
        self.q_a_tab, self.q_b_tab = qa, qb

        kp = self.keep
        self.fwd = (self.pops[kp, None, None]
                    * self.a0_table[kp][:, :, None]
                    * self.a1_table[kp][:, None, :])
        self.rev = (self.pops[kp, None, None]
                    * self.b0_table[kp][:, :, None]
                    * self.b1_table[kp][:, None, :])
        self.fmask = self.fwd > floor
        self.rmask = self.rev > floor

        fany = self.fmask.any(axis=0)
        self.all_energy_conserving = bool(
            np.abs((qa + qb)[fany]).max(initial=0.0) <= binning
        )

        # retained augmented pairs: forward label x anchor label
        pair_mask = self.fmask[:, None, :, :] & self.rmask[None, :, :, :]
        ki, kj, i0, i1 = np.nonzero(pair_mask)
        self.ki, self.kj, self.i0, self.i1 = ki, kj, i0, i1
        s_lab, t_lab = kp[ki], kp[kj]
        self.s_lab, self.t_lab = s_lab, t_lab

        self.w_f = self.fwd[ki, i0, i1] / self.n_anchor
        self.w_r = self.rev[kj, i0, i1] / self.n_anchor

        ln_pops = np.log(self.pops[kp])
        ln_j0 = np.log(self.joint0[i0])
        ln_j1 = np.log(self.joint1[i1])
        self.col_j0 = ln_j0 - np.log(self.pp0[i0])
        self.col_c0 = ln_pops[ki] - ln_j0
        self.col_i0 = self.col_j0 + self.col_c0
        self.col_j1 = ln_j1 - np.log(self.pp1[i1])
        self.col_c1 = ln_pops[kj] - ln_j1
        self.col_i1 = self.col_j1 + self.col_c1
        self.col_sigma_a = (np.log(marg.a_1[a0idx[i1]])
                            - np.log(self.pth_a1[a0idx[i1]]))
        self.col_sigma_b = (np.log(marg.b_1[b0idx[i1]])
                            - np.log(self.pth_b1[b0idx[i1]]))
        self.col_gamma = (
            np.log(self.a0_table[s_lab, i0]) + np.log(self.a1_table[s_lab, i1])
            - np.log(self.b0_table[t_lab, i0]) - np.log(self.b1_table[t_lab, i1])
        )
        self.col_k = self.col_i1 - self.col_i0 + self.col_sigma_a + self.col_sigma_b
        self.col_q_a = qa[i0, i1]
        self.col_q_b = qb[i0, i1]
        self.col_energy_ok = np.abs(self.col_q_a + self.col_q_b) <= binning

        self.exponent = (self.beta_a * self.col_q_a + self.beta_b * self.col_q_b
                         + self.col_i0 - self.col_i1
                         - self.col_sigma_a - self.col_sigma_b + self.col_gamma)
        resid = np.log(self.w_f) - np.log(self.w_r) - self.exponent
        self.detailed_residual = float(np.abs(resid).max(initial=0.0))

    @property
    def n_pairs(self) -> int:
        return len(self.w_f)

    def records(self) -> list[tuple[AugmentedTrajectory, Ledger]]:
        out = []
        db = self.dim_b
        for n in range(self.n_pairs):
            traj = AugmentedTrajectory(
                s=int(self.s_lab[n]),
                a0=int(self.i0[n] // db), b0=int(self.i0[n] % db),
                a1=int(self.i1[n] // db), b1=int(self.i1[n] % db),
                s_star=int(self.t_lab[n]),
                weight_forward=float(self.w_f[n]),
                weight_reverse=float(self.w_r[n]),
            )
            led = Ledger(
                q_a=float(self.col_q_a[n]), q_b=float(self.col_q_b[n]),
                i0=float(self.col_i0[n]), j0=float(self.col_j0[n]),
                c0=float(self.col_c0[n]),
                i1=float(self.col_i1[n]), j1=float(self.col_j1[n]),
                c1=float(self.col_c1[n]),
                sigma_a=float(self.col_sigma_a[n]),
                sigma_b=float(self.col_sigma_b[n]),
                gamma=float(self.col_gamma[n]), k=float(self.col_k[n]),
                energy_conserving=bool(self.col_energy_ok[n]),
            )
            out.append((traj, led))
        return out


def compute_ledgers(basis: bayesnet.BasisSet) -> LedgerSet:
    """Build the augmented-pair ledgers for a two-time basis set."""
    return LedgerSet(basis)


def _guarded_ratio(num: np.ndarray, den: np.ndarray, floor: float) -> np.ndarray:
    out = np.zeros_like(num)
    ok = den > floor
    out[ok] = num[ok] / den[ok]
    return out


def integral_ft(ledgers: LedgerSet, quantity: str, measure: str) -> float:
    """<exp(-X)> for one ledger quantity under its own ensemble.

    Forward-ensemble quantities are i0, j0, c0, sigma_a, sigma_b and
    gamma; the information terms at the final time (i1, j1, c1) average
    over the reversed ensemble.  A mismatched measure raises ValueError.
    Sums that cancel the label population run over all labels, including
    zero-population ones.
    """
    if measure not in ("forward", "reverse"):
        raise ValueError(f"unknown measure {measure!r}")
    expected = "forward" if quantity in FORWARD_QUANTITIES else (
        "reverse" if quantity in REVERSE_QUANTITIES else None)
    if expected is None:
        raise ValueError(f"unknown quantity {quantity!r}")
    if measure != expected:
        raise ValueError(
            f"quantity {quantity!r} averages over the {expected} ensemble, "
            f"not {measure!r}")

    a0, a1 = ledgers.a0_table, ledgers.a1_table
    pops, floor = ledgers.pops, ledgers.floor

    if quantity == "i0":
        return float(np.einsum("ki,kj,i->", a0, a1, ledgers.pp0))
    if quantity == "c0":
        return float(np.einsum("ki,kj,i->", a0, a1, ledgers.joint0))
    if quantity == "j0":
        r = _guarded_ratio(ledgers.pp0, ledgers.joint0, floor)
        return float(np.einsum("k,ki,kj,i->", pops, a0, a1, r))
    if quantity == "sigma_a":
        r1 = _guarded_ratio(ledgers.pth_a1[ledgers.flat_a],
                            ledgers.marg.a_1[ledgers.flat_a], floor)
        return float(np.einsum("k,ki,kj,j->", pops, a0, a1, r1))
    if quantity == "sigma_b":
        r1 = _guarded_ratio(ledgers.pth_b1[ledgers.flat_b],
                            ledgers.marg.b_1[ledgers.flat_b], floor)
        return float(np.einsum("k,ki,kj,j->", pops, a0, a1, r1))
    if quantity == "gamma":
        kp = ledgers.keep
        return float(np.einsum(
            "k,mi,mj->", pops, ledgers.b0_table[kp], ledgers.b1_table[kp]
        )) / ledgers.n_anchor
    if quantity == "i1":
        return float(np.einsum("kj,ki,j->", a1, a0, ledgers.pp1))
    if quantity == "c1":
        return float(np.einsum("kj,ki,j->", a1, a0, ledgers.joint1))
    # j1
    r = _guarded_ratio(ledgers.pp1, ledgers.joint1, floor)
    return float(np.einsum("k,kj,ki,j->", pops, a1, a0, r))


@dataclass(frozen=True)
class CombinedFT:
    """<exp(-X)> over the augmented forward ensemble, with X the full
    exchange exponent; ``value_delta_beta`` replaces the two bath terms
    by Q_A * (beta_A - beta_B)."""

    value: float
    value_delta_beta: float
    all_energy_conserving: bool


def combined_integral_ft(ledgers: LedgerSet) -> CombinedFT:
    ret = float(np.sum(ledgers.w_f * np.exp(-ledgers.exponent)))
    # pairs dropped by the probability floor contribute their reverse
    # weight exactly (w_f * exp(-X) == w_r pointwise), so patch with the
    # cancelled form to keep boundary-of-simplex cases exact
    patch = float(ledgers.rev.sum() - np.sum(ledgers.w_r))
    exponent_db = (ledgers.delta_beta * ledgers.col_q_a
                   + ledgers.col_i0 - ledgers.col_i1
                   - ledgers.col_sigma_a - ledgers.col_sigma_b
                   + ledgers.col_gamma)
    ret_db = float(np.sum(ledgers.w_f * np.exp(-exponent_db)))
    return CombinedFT(
        value=ret + patch,
        value_delta_beta=ret_db + patch,
        all_energy_conserving=ledgers.all_energy_conserving,
    )


def heat_distribution(ledgers: LedgerSet, direction: str = "forward") -> DiscreteDistribution:
    """Distribution of the heat absorbed by subsystem A.

    ``forward`` bins the forward path weights; ``reverse`` bins the
    time-reversed process, whose heat values are sign-flipped relative to
    the forward energy differences.
    """
    if direction == "forward":
        weights = ledgers.fwd.sum(axis=0)
        values = ledgers.q_a_tab
    elif direction == "reverse":
        weights = ledgers.rev.sum(axis=0)
        values = -ledgers.q_a_tab
    else:
        raise ValueError(f"unknown direction {direction!r}")
    return DiscreteDistribution.from_samples(
        values.ravel(), weights.ravel(), binning=ledgers.binning)


@dataclass(frozen=True)
class JointFT:
    """Joint (Q, K, gamma) statistics and the bin-by-bin detailed check.

    The reverse table holds the image of each reverse pair under the
    pairing bijection, i.e. coordinates (-Q, -K, gamma)."""

    forward: DiscreteDistribution
    reverse: DiscreteDistribution
    max_residual: float
    n_checked: int
    n_unverified: int


def joint_distribution(ledgers: LedgerSet) -> JointFT:
    fwd = DiscreteDistribution.from_samples(
        np.stack([ledgers.col_q_a, ledgers.col_k, ledgers.col_gamma], axis=1),
        ledgers.w_f, binning=ledgers.binning)
    rev = DiscreteDistribution.from_samples(
        np.stack([-ledgers.col_q_a, -ledgers.col_k, ledgers.col_gamma], axis=1),
        ledgers.w_r, binning=ledgers.binning)

    resid, checked, unverified = 0.0, 0, 0
    for pt, pf in zip(fwd.points, fwd.probs):
        if pf <= ledgers.floor:
            continue
        q, kk, gg = pt
        pr = rev.prob_at((-q, -kk, gg))
        if pr <= ledgers.floor:
            unverified += 1
            continue
        checked += 1
        factor = np.exp(q * ledgers.delta_beta - kk + gg)
        resid = max(resid, abs(pf - factor * pr))
    return JointFT(forward=fwd, reverse=rev, max_residual=resid,
                   n_checked=checked, n_unverified=unverified)


@dataclass(frozen=True)
class PsiReport:
    """Heat-conditioned correction factor and the modified detailed check.

    For each forward heat bin, ``psi`` is the conditional average of
    exp(K - gamma); ``residuals`` compares P_f(Q) * psi(Q) against
    exp(Q * delta_beta) * P_r(-Q).  Bins skipped for lack of forward or
    reverse mass are counted, not asserted."""

    q_values: np.ndarray
    psi: np.ndarray
    p_f: np.ndarray
    p_r_mirror: np.ndarray
    residuals: np.ndarray
    max_residual: float
    n_skipped: int


def psi_factor(ledgers: LedgerSet) -> PsiReport:
    p_f = heat_distribution(ledgers, "forward")
    p_r = heat_distribution(ledgers, "reverse")

    # numerator of psi per heat bin: retained pairs through the ledger
    # columns, floor-dropped pairs through the cancelled product form
    num = DiscreteDistribution.from_samples(
        ledgers.col_q_a,
        ledgers.w_f * np.exp(ledgers.col_k - ledgers.col_gamma),
        binning=ledgers.binning)

    nf = ledgers.fmask.sum(axis=0)                     # retained forward labels
    r_ret = np.where(ledgers.rmask, ledgers.rev, 0.0)
    cnt_all = ledgers.n_anchor * ledgers.rev.sum(axis=0)
    cnt_ret = nf[None, :, :] * r_ret
    patch_tab = (np.exp(ledgers.beta_a * ledgers.q_a_tab
                        + ledgers.beta_b * ledgers.q_b_tab)
                 * (cnt_all - cnt_ret.sum(axis=0)) / ledgers.n_anchor)
    patch = DiscreteDistribution.from_samples(
        ledgers.q_a_tab.ravel(), patch_tab.ravel(), binning=ledgers.binning)

    qs, psis, pfs, prs, resids = [], [], [], [], []
    skipped = 0
    for pt, pf in zip(p_f.points, p_f.probs):
        q = pt[0]
        if pf <= ledgers.floor:
            skipped += 1
            continue
        numerator = num.prob_at(q) + patch.prob_at(q)
        psi = numerator / pf
        pr = p_r.prob_at(-q)
        qs.append(q)
        psis.append(psi)
        pfs.append(pf)
        prs.append(pr)
        resids.append(abs(pf * psi - np.exp(q * ledgers.delta_beta) * pr))
    resids = np.asarray(resids)
    return PsiReport(
        q_values=np.asarray(qs), psi=np.asarray(psis),
        p_f=np.asarray(pfs), p_r_mirror=np.asarray(prs),
        residuals=resids,
        max_residual=float(resids.max(initial=0.0)),
        n_skipped=skipped,
    )


@dataclass(frozen=True)
class HeatBalance:
    """Mean heat times the temperature bias against its entropic budget:
    the mutual-information change plus the athermality of both reduced
    states relative to their initial Gibbs states."""

    mean_q_a: float
    lhs: float
    rhs: float
    residual: float
    heat_reversed: bool


def _state_pair(ledgers: LedgerSet):
    basis = ledgers.basis
    v0, v1 = basis.global_vectors[0], basis.global_vectors[1]
    rho0 = (v0 * ledgers.pops) @ v0.conj().T
    rho1 = (v1 * ledgers.pops) @ v1.conj().T
    return rho0, rho1


def mean_heat_balance(ledgers: LedgerSet) -> HeatBalance:
    mean_q_a = float(np.sum(ledgers.fwd.sum(axis=0) * ledgers.q_a_tab))
    lhs = mean_q_a * ledgers.delta_beta

    rho0, rho1 = _state_pair(ledgers)
    da, db = ledgers.dim_a, ledgers.dim_b

    def mutual(rho):
        ra = linalg.partial_trace(rho, da, db, keep="A")
        rb = linalg.partial_trace(rho, da, db, keep="B")
        return (linalg.von_neumann_entropy(ra) + linalg.von_neumann_entropy(rb)
                - linalg.von_neumann_entropy(rho))

    ra1 = linalg.partial_trace(rho1, da, db, keep="A")
    rb1 = linalg.partial_trace(rho1, da, db, keep="B")
    rhs = (mutual(rho1) - mutual(rho0)
           + linalg.relative_entropy(ra1, ledgers.gibbs_a.rho)
           + linalg.relative_entropy(rb1, ledgers.gibbs_b.rho))
    return HeatBalance(
        mean_q_a=mean_q_a, lhs=lhs, rhs=rhs,
        residual=abs(lhs - rhs), heat_reversed=lhs < 0,
    )


@dataclass(frozen=True)
class InfoMeans:
    """Stochastic information averages against their entropic values."""

    mean_i0: float
    info_0: float
    mean_i1: float
    info_1: float

    @property
    def max_residual(self) -> float:
        return max(abs(self.mean_i0 - self.info_0), abs(self.mean_i1 - self.info_1))


def _entropy_of(p: np.ndarray, floor: float) -> float:
    ok = p > floor
    return float(-np.sum(p[ok] * np.log(p[ok])))


def mutual_information_check(ledgers: LedgerSet) -> InfoMeans:
    kp, pops, floor = ledgers.keep, ledgers.pops, ledgers.floor
    lnp = np.log(pops[kp])

    def mean_info(table, pp):
        w = pops[kp, None] * table[kp]
        ok = (w > floor) & (pp[None, :] > floor)
        vals = lnp[:, None] - np.log(np.where(pp > floor, pp, 1.0))[None, :]
        return float(np.sum(w[ok] * vals[ok]))

    s_global = _entropy_of(pops, floor)
    info_0 = (_entropy_of(ledgers.marg.a_0, floor)
              + _entropy_of(ledgers.marg.b_0, floor) - s_global)
    info_1 = (_entropy_of(ledgers.marg.a_1, floor)
              + _entropy_of(ledgers.marg.b_1, floor) - s_global)
    return InfoMeans(
        mean_i0=mean_info(ledgers.a0_table, ledgers.pp0),
        info_0=info_0,
        mean_i1=mean_info(ledgers.a1_table, ledgers.pp1),
        info_1=info_1,
    )


def mean_quantity(ledgers: LedgerSet, quantity: str) -> float:
    """<X> for one ledger quantity under its own ensemble."""
    pops, floor = ledgers.pops, ledgers.floor
    kp = ledgers.keep

    def klsum(w, num, den):
        ok = (w > floor) & (num > floor) & (den > floor)
        return float(np.sum(w[ok] * (np.log(num[ok]) - np.log(den[ok]))))

    if quantity in ("i0", "j0", "c0"):
        w = pops[kp, None] * ledgers.a0_table[kp]
        lnp = {"i0": (np.broadcast_to(pops[kp][:, None], w.shape),
                      np.broadcast_to(ledgers.pp0[None, :], w.shape)),
               "j0": (np.broadcast_to(ledgers.joint0[None, :], w.shape),
                      np.broadcast_to(ledgers.pp0[None, :], w.shape)),
               "c0": (np.broadcast_to(pops[kp][:, None], w.shape),
                      np.broadcast_to(ledgers.joint0[None, :], w.shape))}[quantity]
        return klsum(w, *lnp)
    if quantity in ("i1", "j1", "c1"):
        w = pops[kp, None] * ledgers.a1_table[kp]
        lnp = {"i1": (np.broadcast_to(pops[kp][:, None], w.shape),
                      np.broadcast_to(ledgers.pp1[None, :], w.shape)),
               "j1": (np.broadcast_to(ledgers.joint1[None, :], w.shape),
                      np.broadcast_to(ledgers.pp1[None, :], w.shape)),
               "c1": (np.broadcast_to(pops[kp][:, None], w.shape),
                      np.broadcast_to(ledgers.joint1[None, :], w.shape))}[quantity]
        return klsum(w, *lnp)
    if quantity == "sigma_a":
        p, q = ledgers.marg.a_1, ledgers.pth_a1
        ok = p > floor
        return float(np.sum(p[ok] * (np.log(p[ok]) - np.log(q[ok]))))
    if quantity == "sigma_b":
        p, q = ledgers.marg.b_1, ledgers.pth_b1
        ok = p > floor
        return float(np.sum(p[ok] * (np.log(p[ok]) - np.log(q[ok]))))
    if quantity == "gamma":
        return float(np.sum(ledgers.w_f * ledgers.col_gamma))
    raise ValueError(f"unknown quantity {quantity!r}")
