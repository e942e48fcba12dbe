import numpy as np
import pytest

from qheatnet import bayesnet, linalg, qubit, randspec
from qheatnet.distributions import DiscreteDistribution

EA = 0.25        # exp(-beta_a) for occupation 0.2
EB = 3.0 / 7.0   # exp(-beta_b) for occupation 0.3


class TestTimeGrid:
    def test_basic(self):
        grid = bayesnet.TimeGrid((0.5, 1.0))
        assert grid.n_steps == 2
        assert grid.all_times == (0.0, 0.5, 1.0)

    @pytest.mark.parametrize("times", [(), (0.0,), (-1.0,), (1.0, 0.5), (1.0, 1.0)])
    def test_rejects_bad_times(self, times):
        with pytest.raises(ValueError):
            bayesnet.TimeGrid(times)


class TestBuildBases:
    def test_correlated_populations(self, correlated_spec):
        basis = bayesnet.build_bases(correlated_spec, bayesnet.TimeGrid((0.4,)))
        assert np.allclose(basis.populations, [0.56, 0.38, 0.06, 0.0], atol=1e-12)

    def test_correlated_eigenvector(self, correlated_spec):
        basis = bayesnet.build_bases(correlated_spec, bayesnet.TimeGrid((0.4,)))
        # the 0.38 eigenvector lives in the single-excitation sector
        phi = basis.global_vectors[0][:, 1]
        expect = np.array([0.0, np.sqrt(EB), 1j * np.sqrt(EA), 0.0]) / np.sqrt(EA + EB)
        phase = phi[np.argmax(np.abs(expect))] / expect[np.argmax(np.abs(expect))]
        assert np.abs(phi - expect * phase).max() < 1e-12

    def test_local_energies(self, correlated_spec):
        basis = bayesnet.build_bases(correlated_spec, bayesnet.TimeGrid((0.73,)))
        for n in range(2):
            assert np.allclose(np.sort(basis.energies_a[n]), [0.0, 1.0], atol=1e-12)
            assert np.allclose(np.sort(basis.energies_b[n]), [0.0, 1.0], atol=1e-12)

    def test_overlap_normalization(self, correlated_spec):
        basis = bayesnet.build_bases(correlated_spec, bayesnet.TimeGrid((1.3,)))
        for table in basis.overlaps:
            assert np.allclose(table.sum(axis=(1, 2)), 1.0, atol=1e-12)


class TestConditionalProb:
    def test_product_state_is_deterministic(self, product_spec):
        basis = bayesnet.build_bases(product_spec, bayesnet.TimeGrid((0.9,)))
        table = basis.overlaps[0].reshape(4, 4)
        assert np.allclose(np.sort(table, axis=1)[:, :-1], 0.0, atol=1e-14)
        assert np.allclose(table.sum(axis=1), 1.0)

    def test_correlated_value(self, correlated_spec):
        basis = bayesnet.build_bases(correlated_spec, bayesnet.TimeGrid((0.9,)))
        # outcome (0, 1) given the single-excitation eigenvector at t=0
        assert bayesnet.conditional_prob(basis, 0, 0, 1, 1) == pytest.approx(
            EB / (EA + EB), abs=1e-12)

    def test_out_of_range(self, correlated_spec):
        basis = bayesnet.build_bases(correlated_spec, bayesnet.TimeGrid((0.9,)))
        with pytest.raises(IndexError):
            bayesnet.conditional_prob(basis, 2, 0, 0, 0)
        with pytest.raises(IndexError):
            bayesnet.conditional_prob(basis, 0, 0, 0, 4)


class TestEnumerate:
    def test_weights_sum_to_one(self, correlated_spec):
        basis = bayesnet.build_bases(correlated_spec, bayesnet.TimeGrid((0.6,)))
        trajs = bayesnet.enumerate_trajectories(basis)
        assert len(trajs) <= 64
        assert sum(t.weight for t in trajs) == pytest.approx(1.0, abs=1e-12)

    def test_zero_population_branch_absent(self, correlated_spec):
        basis = bayesnet.build_bases(correlated_spec, bayesnet.TimeGrid((0.6,)))
        labels = {t.s for t in bayesnet.enumerate_trajectories(basis)}
        assert 3 not in labels  # the exactly-zero eigenvalue

    def test_weights_match_tables(self, correlated_spec):
        basis = bayesnet.build_bases(correlated_spec, bayesnet.TimeGrid((0.6,)))
        for traj in bayesnet.enumerate_trajectories(basis):
            w = basis.populations[traj.s]
            for n, (a, b) in enumerate(traj.outcomes):
                w *= basis.overlaps[n][traj.s, a, b]
            assert traj.weight == pytest.approx(w, rel=1e-12)

    def test_three_time_marginalizes(self, correlated_spec):
        grid3 = bayesnet.TimeGrid((0.4, 1.1))
        basis3 = bayesnet.build_bases(correlated_spec, grid3)
        basis2 = bayesnet.build_bases(correlated_spec, bayesnet.TimeGrid((1.1,)))
        # conditional independence given the label: summing out the middle
        # outcome reproduces the two-time path weights
        acc = {}
        for t in bayesnet.enumerate_trajectories(basis3):
            key = (t.s, t.outcomes[0], t.outcomes[2])
            acc[key] = acc.get(key, 0.0) + t.weight
        for t in bayesnet.enumerate_trajectories(basis2):
            key = (t.s, t.outcomes[0], t.outcomes[1])
            assert acc.get(key, 0.0) == pytest.approx(t.weight, abs=1e-12)


def _heat_hist(trajs, basis, reverse=False):
    values, weights = [], []
    for t in trajs:
        if reverse:
            (a_last, _), (a_first, _) = t.outcomes[0], t.outcomes[-1]
            q = basis.energies_a[0][a_first] - basis.energies_a[1][a_last]
        else:
            (a0, _), (a1, _) = t.outcomes[0], t.outcomes[-1]
            q = basis.energies_a[1][a1] - basis.energies_a[0][a0]
        values.append(q)
        weights.append(t.weight)
    return DiscreteDistribution.from_samples(np.array(values), np.array(weights))


class TestReverseEnumerate:
    def test_normalized(self, correlated_spec):
        basis = bayesnet.build_bases(correlated_spec, bayesnet.TimeGrid((0.8,)))
        trajs = bayesnet.reverse_enumerate(basis)
        assert sum(t.weight for t in trajs) == pytest.approx(1.0, abs=1e-12)

    def test_product_state_matches_forward(self, product_spec):
        basis = bayesnet.build_bases(product_spec, bayesnet.TimeGrid((0.8,)))
        fwd = _heat_hist(bayesnet.enumerate_trajectories(basis), basis)
        rev = _heat_hist(bayesnet.reverse_enumerate(basis), basis, reverse=True)
        for q in (-1.0, 0.0, 1.0):
            assert rev.prob_at(q) == pytest.approx(fwd.prob_at(q), abs=1e-12)

    def test_tiny_time_matches_forward(self, correlated_spec):
        basis = bayesnet.build_bases(correlated_spec, bayesnet.TimeGrid((1e-9,)))
        fwd = _heat_hist(bayesnet.enumerate_trajectories(basis), basis)
        rev = _heat_hist(bayesnet.reverse_enumerate(basis), basis, reverse=True)
        for q in (-1.0, 0.0, 1.0):
            assert rev.prob_at(q) == pytest.approx(fwd.prob_at(q), abs=1e-7)

    def test_correlated_differs_from_forward(self, correlated_spec):
        basis = bayesnet.build_bases(correlated_spec, bayesnet.TimeGrid((0.8,)))
        fwd = _heat_hist(bayesnet.enumerate_trajectories(basis), basis)
        rev = _heat_hist(bayesnet.reverse_enumerate(basis), basis, reverse=True)
        assert abs(fwd.prob_at(1.0) - rev.prob_at(1.0)) > 1e-3


class TestMarginals:
    def test_initial_marginals_thermal(self, correlated_spec):
        basis = bayesnet.build_bases(correlated_spec, bayesnet.TimeGrid((0.5,)))
        marg = bayesnet.local_marginals(basis)
        assert np.allclose(np.sort(marg.a_0), [0.2, 0.8], atol=1e-12)
        assert np.allclose(np.sort(marg.b_0), [0.3, 0.7], atol=1e-12)

    def test_full_swap(self, correlated_spec):
        basis = bayesnet.build_bases(correlated_spec, bayesnet.TimeGrid((1.0,)))
        marg = bayesnet.local_marginals(basis)
        assert np.allclose(np.sort(marg.a_1), [0.3, 0.7], atol=1e-12)

    def test_joints_normalized(self, correlated_spec):
        basis = bayesnet.build_bases(correlated_spec, bayesnet.TimeGrid((1.7,)))
        marg = bayesnet.local_marginals(basis)
        assert marg.joint_0.sum() == pytest.approx(1.0, abs=1e-12)
        assert marg.joint_1.sum() == pytest.approx(1.0, abs=1e-12)


class TestPathTables:
    @pytest.mark.parametrize("t", [0.3, 1.0, 1.9])
    def test_choi_route_agrees(self, correlated_spec, t):
        basis = bayesnet.build_bases(correlated_spec, bayesnet.TimeGrid((t,)))
        table = bayesnet.path_probability_table(basis)
        choi = bayesnet.choi_path_probability(basis)
        assert np.abs(table - choi).max() < 1e-12

    def test_choi_route_random_specs(self):
        for seed in range(5):
            spec = randspec.random_spec(seed, 2, 3)
            basis = bayesnet.build_bases(spec, bayesnet.TimeGrid((0.9,)))
            assert np.abs(bayesnet.path_probability_table(basis)
                          - bayesnet.choi_path_probability(basis)).max() < 1e-12

    def test_tpm_reduction_for_product(self, product_spec):
        basis = bayesnet.build_bases(product_spec, bayesnet.TimeGrid((0.7,)))
        assert np.abs(bayesnet.path_probability_table(basis)
                      - bayesnet.tpm_table(basis)).max() < 1e-12

    def test_tpm_misses_correlations(self, correlated_spec):
        basis = bayesnet.build_bases(correlated_spec, bayesnet.TimeGrid((0.7,)))
        assert np.abs(bayesnet.path_probability_table(basis)
                      - bayesnet.tpm_table(basis)).max() > 1e-3

    def test_table_normalized(self, correlated_spec):
        basis = bayesnet.build_bases(correlated_spec, bayesnet.TimeGrid((0.7,)))
        assert bayesnet.path_probability_table(basis).sum() == pytest.approx(1.0, abs=1e-12)

    def test_requires_two_time_grid(self, correlated_spec):
        basis = bayesnet.build_bases(correlated_spec, bayesnet.TimeGrid((0.3, 0.7)))
        with pytest.raises(ValueError):
            bayesnet.path_probability_table(basis)
