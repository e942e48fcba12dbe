import json

import numpy as np
import pytest

from qheatnet import bayesnet, cli, config, qubit
from qheatnet.distributions import DiscreteDistribution


@pytest.fixture()
def example_config(tmp_path, correlated_spec):
    path = tmp_path / "example.json"
    config.save_config(correlated_spec, bayesnet.TimeGrid((1.0,)), path)
    return str(path)


class TestMatrixCodec:
    def test_round_trip(self):
        m = np.array([[1.0, 2 - 3j], [2 + 3j, -0.5]])
        assert np.array_equal(config.decode_matrix(config.encode_matrix(m), "m"), m)

    @pytest.mark.parametrize("bad", ["x", [[1, 2]], [[[1, 2], [3, 4]]], [[[1], [2]]]])
    def test_rejects_malformed(self, bad):
        with pytest.raises(config.ConfigError):
            config.decode_matrix(bad, "m")


class TestConfigIO:
    def test_round_trip_bit_identical(self, tmp_path, correlated_spec, example_config):
        loaded = config.load_config(example_config)
        assert np.array_equal(loaded.spec.chi, correlated_spec.chi)
        assert loaded.spec.beta_a == correlated_spec.beta_a
        second = tmp_path / "second.json"
        config.save_config(loaded.spec, loaded.grid, second)
        assert second.read_text() == open(example_config).read()

    def test_occupation_shorthand(self, correlated_spec):
        d = config.config_dict(correlated_spec, bayesnet.TimeGrid((1.0,)))
        del d["beta_a"]
        d["occupation_a"] = 0.2
        assert config.load_config(d).spec.beta_a == pytest.approx(np.log(4.0))

    def test_occupation_needs_two_levels(self, correlated_spec):
        d = config.config_dict(correlated_spec, bayesnet.TimeGrid((1.0,)))
        d["h_a"] = config.encode_matrix(np.diag([0.0, 1.0, 2.0]))
        del d["beta_a"]
        d["occupation_a"] = 0.2
        del d["dims"]
        with pytest.raises(config.ConfigError):
            config.load_config(d)

    def test_both_temperature_keys_rejected(self, correlated_spec):
        d = config.config_dict(correlated_spec, bayesnet.TimeGrid((1.0,)))
        d["occupation_a"] = 0.2
        with pytest.raises(config.ConfigError):
            config.load_config(d)

    @pytest.mark.parametrize("key", ["h_a", "chi", "h_int", "times"])
    def test_missing_key(self, correlated_spec, key):
        d = config.config_dict(correlated_spec, bayesnet.TimeGrid((1.0,)))
        del d[key]
        with pytest.raises(config.ConfigError, match=key):
            config.load_config(d)

    def test_unknown_tolerance(self, correlated_spec):
        d = config.config_dict(correlated_spec, bayesnet.TimeGrid((1.0,)))
        d["tolerances"]["fuzziness"] = 1.0
        with pytest.raises(config.ConfigError):
            config.load_config(d)

    def test_dims_consistency(self, correlated_spec):
        d = config.config_dict(correlated_spec, bayesnet.TimeGrid((1.0,)))
        d["dims"] = [3, 2]
        with pytest.raises(config.ConfigError):
            config.load_config(d)

    def test_tolerance_override(self, correlated_spec):
        d = config.config_dict(correlated_spec, bayesnet.TimeGrid((1.0,)))
        d["tolerances"]["binning"] = 1e-7
        assert config.load_config(d).spec.tol.binning == 1e-7


class TestDistribution:
    def test_binning_merges_close_points(self):
        d = DiscreteDistribution.from_samples(
            np.array([1.0, 1.0 + 1e-12, 2.0]), np.array([0.3, 0.3, 0.4]))
        assert d.n_points == 2
        assert d.prob_at(1.0) == pytest.approx(0.6)

    def test_prob_at_miss(self):
        d = DiscreteDistribution.from_samples(np.array([1.0]), np.array([1.0]))
        assert d.prob_at(2.0) == 0.0

    def test_multidimensional(self):
        pts = np.array([[0.0, 1.0], [0.0, 1.0], [1.0, -1.0]])
        d = DiscreteDistribution.from_samples(pts, np.array([0.2, 0.2, 0.6]))
        assert d.n_points == 2
        assert d.prob_at((0.0, 1.0)) == pytest.approx(0.4)


class TestCli:
    def test_validate_ok(self, example_config, capsys):
        assert cli.main(["validate", "--config", example_config]) == 0
        report = json.loads(capsys.readouterr().out)
        assert report["passed"]
        assert any(r["name"] == "chi_marginal_a" for r in report["records"])

    def test_validate_catches_bad_state(self, tmp_path, correlated_spec, capsys):
        d = config.config_dict(correlated_spec, bayesnet.TimeGrid((1.0,)))
        chi = config.decode_matrix(d["chi"], "chi") * 3.0
        d["chi"] = config.encode_matrix(chi)
        path = tmp_path / "bad.json"
        path.write_text(json.dumps(d))
        assert cli.main(["validate", "--config", str(path)]) == 1
        report = json.loads(capsys.readouterr().out)
        failed = [r["name"] for r in report["records"] if not r["passed"]]
        assert "rho0_positive" in failed

    def test_verify_from_config(self, example_config, capsys):
        assert cli.main(["verify", "--config", example_config]) == 0
        report = json.loads(capsys.readouterr().out)
        names = {r["name"] for r in report["records"]}
        assert {"combined_ft", "detailed_ft_pointwise", "choi_consistency"} <= names
        assert sum(n.startswith("integral_ft[") for n in names) == 9

    def test_verify_random_instance(self, capsys):
        assert cli.main(["verify", "--dims", "2x3", "--seed", "11", "--time", "0.8"]) == 0
        capsys.readouterr()

    def test_verify_needs_source(self, capsys):
        assert cli.main(["verify"]) == 2
        assert "error" in capsys.readouterr().err

    def test_bad_tol_flag(self, example_config, capsys):
        assert cli.main(["verify", "--config", example_config, "--tol", "nope=1"]) == 2
        capsys.readouterr()

    def test_heat_csv(self, example_config, tmp_path):
        out = tmp_path / "heat.csv"
        assert cli.main(["heat", "--config", example_config,
                         "--sweep", "0.5:1.5:3", "--out", str(out)]) == 0
        lines = out.read_text().strip().splitlines()
        assert lines[0] == "t,Q,P_f,P_r,ratio,exp_QdBeta,Psi"
        assert len(lines) == 1 + 3 * 3
        # full precision round trip
        val = lines[1].split(",")[2]
        assert float(f"{float(val):.17g}") == float(val)

    def test_bad_sweep(self, example_config, capsys):
        assert cli.main(["heat", "--config", example_config, "--sweep", "1:2"]) == 2
        capsys.readouterr()

    def test_example_against_oracle(self, tmp_path):
        out = tmp_path / "example.csv"
        report = tmp_path / "report.json"
        assert cli.main(["example", "--sweep", "0:2:9", "--out", str(out),
                         "--report", str(report)]) == 0
        rep = json.loads(report.read_text())
        assert rep["passed"]
        lines = out.read_text().strip().splitlines()
        assert lines[0] == "t,Q,P_f,P_f_analytic,P_r,P_r_analytic"
        assert len(lines) == 1 + 9 * 3
