import pytest

from tweetpolarity.config import ENV_VAR, RunConfig
from tweetpolarity.errors import ConfigError


class TestRunConfig:
    def test_defaults(self):
        cfg = RunConfig.load(None)
        assert cfg.d == 200
        assert cfg.s_prime == 80
        assert cfg.filter_sizes == (3, 4, 5)
        assert cfg.filters_per_size == 200
        assert cfg.hidden == 30
        assert cfg.lstm_m == 200
        assert cfg.dropout == 0.5
        assert cfg.lr == 0.001
        assert cfg.distant_frozen_epochs == 1
        assert cfg.distant_unfrozen_epochs == 6
        assert cfg.sup_frozen_epochs == 5
        assert cfg.sup_unfrozen_epochs == 5

    def test_overrides_and_comments(self, tmp_path):
        p = tmp_path / "run.cfg"
        p.write_text("# comment line\nd = 16\nfilter_sizes = 1,2,3\n"
                     "dropout=0.25\n\nemoticon_rules = rules.tsv\n",
                     encoding="utf-8")
        cfg = RunConfig.load(p)
        assert cfg.d == 16
        assert cfg.filter_sizes == (1, 2, 3)
        assert cfg.dropout == 0.25
        assert cfg.emoticon_rules == "rules.tsv"

    def test_unknown_key_rejected(self, tmp_path):
        p = tmp_path / "run.cfg"
        p.write_text("nonsense = 5\n", encoding="utf-8")
        with pytest.raises(ConfigError, match="unknown key"):
            RunConfig.load(p)

    def test_bad_value_type(self, tmp_path):
        p = tmp_path / "run.cfg"
        p.write_text("d = lots\n", encoding="utf-8")
        with pytest.raises(ConfigError, match="bad value"):
            RunConfig.load(p)

    def test_missing_separator(self, tmp_path):
        p = tmp_path / "run.cfg"
        p.write_text("d 16\n", encoding="utf-8")
        with pytest.raises(ConfigError, match="key=value"):
            RunConfig.load(p)

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError, match="not found"):
            RunConfig.load(tmp_path / "absent.cfg")

    def test_env_var_default(self, tmp_path, monkeypatch):
        p = tmp_path / "run.cfg"
        p.write_text("d = 32\n", encoding="utf-8")
        monkeypatch.setenv(ENV_VAR, str(p))
        assert RunConfig.load(None).d == 32
        monkeypatch.delenv(ENV_VAR)
        assert RunConfig.load(None).d == 200
