"""Run configuration: defaults, table validation, ${VAR} expansion and the
resolution order."""

from pathlib import Path

import pytest

from juryrig import config as cf
from juryrig.cli import main as cli_main
from juryrig.model import TieRule


def _write(tmp_path: Path, text: str) -> Path:
    path = tmp_path / cf.CONFIG_FILENAME
    path.write_text(text)
    return path


# =============================================================================
# Loading
# =============================================================================

class TestLoadConfig:

    def test_defaults_without_a_file(self):
        cfg = cf.load_config(None)
        assert cfg.path is None
        assert cfg.tie is TieRule.FAVOR_A
        assert cfg.oracle_step == 0.005
        assert cfg.simulate.n_voters == 10001
        assert cfg.sweep.q_high == 0.7

    def test_full_file(self, tmp_path):
        path = _write(tmp_path, """
[analysis]
tolerance = 1e-10
tie = "favor-b"

[oracle]
step = 0.002

[simulate]
n_voters = 501
trials = 40
seed = 9
fixed_split = true

[sweep]
q_high = 0.65
q_low = [0.5, 0.65, 0.05]
lambda = [0.0, 1.0, 0.25]

[public]
step = 0.01
""")
        cfg = cf.load_config(path)
        assert cfg.path == path.resolve()
        assert cfg.tolerance == 1e-10
        assert cfg.tie is TieRule.FAVOR_B
        assert cfg.oracle_step == 0.002
        assert (cfg.simulate.n_voters, cfg.simulate.trials, cfg.simulate.seed) == (501, 40, 9)
        assert cfg.simulate.fixed_split
        assert cfg.simulate.tie is TieRule.FAVOR_B
        assert cfg.sweep.q_high == 0.65
        assert cfg.sweep.lam == (0.0, 1.0, 0.25)
        assert cfg.public_step == 0.01

    def test_env_expansion(self, tmp_path, monkeypatch):
        monkeypatch.setenv("JURY_SEED", "123")
        path = _write(tmp_path, '[simulate]\nseed = "${JURY_SEED}"\n')
        assert cf.load_config(path).simulate.seed == 123

    def test_unset_env_var_refused(self, tmp_path, monkeypatch):
        monkeypatch.delenv("JURY_SEED", raising=False)
        path = _write(tmp_path, '[simulate]\nseed = "${JURY_SEED}"\n')
        with pytest.raises(cf.ConfigError, match="JURY_SEED"):
            cf.load_config(path)

    def test_unknown_table_refused(self, tmp_path):
        path = _write(tmp_path, "[plots]\ndpi = 300\n")
        with pytest.raises(cf.ConfigError, match="unknown key"):
            cf.load_config(path)

    def test_unknown_key_refused(self, tmp_path):
        path = _write(tmp_path, "[oracle]\nresolution = 0.005\n")
        with pytest.raises(cf.ConfigError, match="resolution"):
            cf.load_config(path)

    def test_boolean_is_not_a_number(self, tmp_path):
        path = _write(tmp_path, "[simulate]\ntrials = true\n")
        with pytest.raises(cf.ConfigError, match="'trials' must be of type"):
            cf.load_config(path)

    def test_out_of_domain_step(self, tmp_path):
        path = _write(tmp_path, "[oracle]\nstep = 0.05\n")
        with pytest.raises(cf.ConfigError, match="grid step"):
            cf.load_config(path)

    def test_out_of_domain_sweep(self, tmp_path):
        path = _write(tmp_path, "[sweep]\nq_high = 0.6\nq_low = [0.5, 0.7, 0.01]\n")
        with pytest.raises(cf.ConfigError, match="q_low range"):
            cf.load_config(path)

    def test_q_high_trims_the_default_q_low_range(self, tmp_path):
        cfg = cf.load_config(_write(tmp_path, "[sweep]\nq_high = 0.6\n"))
        assert cfg.sweep.q_low == (0.5, 0.6, 0.01)
        assert "sweep.q_low" not in cfg.explicit

    def test_explicit_keys_are_recorded(self, tmp_path):
        cfg = cf.load_config(_write(tmp_path, "[sweep]\nq_low = [0.55, 0.7, 0.05]\n"))
        assert cfg.sweep.q_low == (0.55, 0.7, 0.05)
        assert "sweep.q_low" in cfg.explicit

    def test_malformed_toml(self, tmp_path):
        path = _write(tmp_path, "[oracle\nstep = 0.005\n")
        with pytest.raises(cf.ConfigError, match=cf.CONFIG_FILENAME):
            cf.load_config(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(cf.ConfigError, match="not found"):
            cf.load_config(tmp_path / "nowhere.toml")


# =============================================================================
# Resolution order
# =============================================================================

class TestResolveConfigPath:

    def test_explicit_beats_env(self, monkeypatch):
        monkeypatch.setenv(cf.CONFIG_ENV, "/env/juryrig.toml")
        assert cf.resolve_config_path("/flag/juryrig.toml") == Path("/flag/juryrig.toml")

    def test_env_beats_cwd(self, monkeypatch, tmp_path):
        monkeypatch.setenv(cf.CONFIG_ENV, "/env/juryrig.toml")
        monkeypatch.chdir(tmp_path)
        _write(tmp_path, "")
        assert cf.resolve_config_path() == Path("/env/juryrig.toml")

    def test_cwd_file(self, monkeypatch, tmp_path):
        monkeypatch.delenv(cf.CONFIG_ENV, raising=False)
        monkeypatch.chdir(tmp_path)
        _write(tmp_path, "")
        assert cf.resolve_config_path() == Path(cf.CONFIG_FILENAME)

    def test_defaults_when_nothing_found(self, monkeypatch, tmp_path):
        monkeypatch.delenv(cf.CONFIG_ENV, raising=False)
        monkeypatch.chdir(tmp_path)
        assert cf.resolve_config_path() is None


class TestConfigThroughCli:

    def test_cwd_config_sets_tie(self, monkeypatch, tmp_path, capsys):
        monkeypatch.delenv(cf.CONFIG_ENV, raising=False)
        monkeypatch.chdir(tmp_path)
        _write(tmp_path, '[analysis]\ntie = "favor-b"\n')
        assert cli_main(["analyze", "--q", "0.7"]) == 0
        out = capsys.readouterr().out
        assert '"tie": "favor-b"' in out
        assert cf.CONFIG_FILENAME in out

    def test_flag_overrides_config(self, monkeypatch, tmp_path, capsys):
        monkeypatch.delenv(cf.CONFIG_ENV, raising=False)
        monkeypatch.chdir(tmp_path)
        _write(tmp_path, '[analysis]\ntie = "favor-b"\n')
        assert cli_main(["analyze", "--q", "0.7", "--tie", "favor-a"]) == 0
        assert '"tie": "favor-a"' in capsys.readouterr().out

    def test_bad_config_exits_2(self, monkeypatch, tmp_path, capsys):
        monkeypatch.setenv(cf.CONFIG_ENV, str(tmp_path / "missing.toml"))
        assert cli_main(["analyze", "--q", "0.7"]) == 2
        assert "config file not found" in capsys.readouterr().err
