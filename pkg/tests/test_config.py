"""Tests for YAML run configuration parsing and validation."""

from __future__ import annotations

from pathlib import Path

import pytest

from qbethe.config import (
    DEFAULT_CHECKS,
    Settings,
    load_config,
    parse_checks,
    parse_config,
)
from qbethe.errors import ConfigError

# ---------------------------------------------------------------------------
# Helpers
# ---------------------------------------------------------------------------


def _data(**overrides) -> dict:
    params = {"q": 0.5, "xi": 0.3, "omega": 0.7, "N": 1, "S": 0}
    params.update(overrides.pop("params", {}))
    return {"params": params, **overrides}


@pytest.fixture(autouse=True)
def _no_worker_env(monkeypatch: pytest.MonkeyPatch) -> None:
    monkeypatch.delenv("QBETHE_WORKERS", raising=False)


# ---------------------------------------------------------------------------
# parse_config
# ---------------------------------------------------------------------------


class TestParseConfig:
    def test_minimal(self) -> None:
        config = parse_config(_data())
        (point,) = config.points()
        assert point.twist == pytest.approx(0.21)
        assert config.checks == DEFAULT_CHECKS
        assert config.settings == Settings()
        assert config.output_path == Path("report")
        assert config.output_format == "json"
        assert config.workers == 1

    def test_unknown_top_level_key(self) -> None:
        with pytest.raises(ConfigError, match="bogus"):
            parse_config(_data(bogus=1))

    def test_unknown_nested_key(self) -> None:
        with pytest.raises(ConfigError, match="probes"):
            parse_config(_data(probes={"count": 4, "colour": "red"}))

    def test_missing_parameter(self) -> None:
        with pytest.raises(ConfigError, match="missing S"):
            parse_config({"params": {"q": 0.5, "xi": 0.3, "omega": 0.7, "N": 1}})

    def test_invalid_parameter_is_named(self) -> None:
        with pytest.raises(ConfigError) as err:
            parse_config(_data(params={"q": 1.5}))
        assert str(err.value).startswith("params.q")

    @pytest.mark.parametrize(
        "params",
        [{"N": 0}, {"S": -1}, {"N": 1.5}, {"xi": True}, {"omega": "abc"}],
    )
    def test_bad_field_values(self, params: dict) -> None:
        with pytest.raises(ConfigError):
            parse_config(_data(params=params))

    def test_grid_is_row_major(self) -> None:
        config = parse_config(_data(params={"q": [0.3, 0.4], "omega": [0.5, 0.6]}))
        pairs = [(p.q, p.omega) for p in config.points()]
        assert pairs == [(0.3, 0.5), (0.3, 0.6), (0.4, 0.5), (0.4, 0.6)]

    def test_grid_limit(self) -> None:
        data = _data(params={"q": [0.3, 0.4, 0.5], "omega": [0.5, 0.6]}, grid_limit=5)
        with pytest.raises(ConfigError, match="grid_limit"):
            parse_config(data)

    @pytest.mark.parametrize("text", ["0.6+0.2j", "0.6 + 0.2j"])
    def test_complex_strings(self, text: str) -> None:
        (point,) = parse_config(_data(params={"omega": text})).points()
        assert point.omega == 0.6 + 0.2j

    def test_settings_sections(self) -> None:
        config = parse_config(
            _data(
                truncation=32,
                tolerance=1e-9,
                probes={"count": 4, "seed": 7},
                multistart={"attempts": 8, "seed": 3},
                states="all",
            )
        )
        s = config.settings
        assert (s.truncation, s.tolerance) == (32, 1e-9)
        assert (s.probe_count, s.probe_seed) == (4, 7)
        assert (s.attempts, s.rng_seed) == (8, 3)
        assert s.states == "all"

    def test_bilateral_max_below_start(self) -> None:
        with pytest.raises(ConfigError, match="bilateral_max"):
            parse_config(_data(bilateral=80, bilateral_max=40))

    def test_states_choice(self) -> None:
        with pytest.raises(ConfigError, match="states"):
            parse_config(_data(states="some"))

    def test_output_format(self) -> None:
        config = parse_config(_data(output={"path": "out/run", "format": "yaml"}))
        assert config.output_path == Path("out/run")
        assert config.output_format == "yaml"
        with pytest.raises(ConfigError, match="output.format"):
            parse_config(_data(output={"format": "xml"}))

    def test_seeds(self) -> None:
        config = parse_config(_data(seeds=[[-1.0], [0.5, "0.1+0.2j"]]))
        assert config.seeds == ((-1.0,), (0.5, 0.1 + 0.2j))

    def test_identity_lists_and_scalars(self) -> None:
        # a list entry inside the column selects the general family
        config = parse_config(
            {"identity": {"a": [0.9, [0.4, 0.5]], "b": 0.2, "z": 0.5, "q": 0.5}}
        )
        assert config.identity.a == (0.9, (0.4, 0.5))
        assert len(config.identity.points()) == 2

    def test_params_only_needed_for_grid_commands(self) -> None:
        config = parse_config({})
        with pytest.raises(ConfigError, match="params"):
            config.points()


class TestWorkers:
    def test_from_environment(self, monkeypatch: pytest.MonkeyPatch) -> None:
        monkeypatch.setenv("QBETHE_WORKERS", "3")
        assert parse_config(_data()).workers == 3

    def test_config_overrides_environment(
        self, monkeypatch: pytest.MonkeyPatch
    ) -> None:
        monkeypatch.setenv("QBETHE_WORKERS", "3")
        assert parse_config(_data(workers=2)).workers == 2

    @pytest.mark.parametrize("raw", ["x", "0"])
    def test_bad_environment(self, monkeypatch: pytest.MonkeyPatch, raw: str) -> None:
        monkeypatch.setenv("QBETHE_WORKERS", raw)
        with pytest.raises(ConfigError, match="QBETHE_WORKERS"):
            parse_config(_data())


class TestParseChecks:
    def test_default(self) -> None:
        assert parse_checks(None) == DEFAULT_CHECKS

    def test_single_name(self) -> None:
        assert parse_checks("rr") == ("rr",)

    def test_unknown(self) -> None:
        with pytest.raises(ConfigError, match="known: bae"):
            parse_checks(["bae", "nope"])


# ---------------------------------------------------------------------------
# load_config
# ---------------------------------------------------------------------------


class TestLoadConfig:
    def test_reads_yaml(self, tmp_path: Path) -> None:
        path = tmp_path / "run.yaml"
        path.write_text(
            "params:\n"
            "  q: [0.3, 0.5]\n"
            "  xi: 0.3\n"
            "  omega: 0.7\n"
            "  N: 2\n"
            "  S: 1\n"
            "tolerance: 1.0e-8\n"
            "checks: [bae, hq]\n"
        )
        config = load_config(path)
        assert len(config.points()) == 2
        assert config.settings.tolerance == 1e-8
        assert config.checks == ("bae", "hq")

    def test_malformed_yaml(self, tmp_path: Path) -> None:
        path = tmp_path / "bad.yaml"
        path.write_text("params: [1, 2\n")
        with pytest.raises(ConfigError, match="malformed YAML"):
            load_config(path)

    def test_missing_file(self, tmp_path: Path) -> None:
        with pytest.raises(ConfigError, match="cannot read"):
            load_config(tmp_path / "absent.yaml")

    def test_top_level_must_be_mapping(self, tmp_path: Path) -> None:
        path = tmp_path / "list.yaml"
        path.write_text("- 1\n- 2\n")
        with pytest.raises(ConfigError, match="expected a mapping"):
            load_config(path)
