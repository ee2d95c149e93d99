"""Config resolution: files, overrides, the seed variable and the digest."""
import pytest
from hypothesis import given, strategies as st

from dioecious.config import SCHEMAS, SEED_ENV, ConfigError, read_config_file, resolve


def test_defaults_and_required():
    cfg = resolve("good-event", {"lambda": "10", "T": "0.05"}, environ={})
    assert cfg["lambda"] == 10.0 and cfg["replicas"] == 100_000
    assert cfg.seed == 0 and cfg.threads == 1 and str(cfg.output_dir) == "out"
    with pytest.raises(ConfigError, match="missing required key 'T'"):
        resolve("good-event", {"lambda": "10"}, environ={})


def test_unknown_key_and_subcommand():
    with pytest.raises(ConfigError, match="unknown key"):
        resolve("good-event", {"lambda": "1", "T": "1", "Lambda": "2"}, environ={})
    with pytest.raises(ConfigError, match="unknown subcommand"):
        resolve("nope", {}, environ={})


def test_bad_types():
    with pytest.raises(ConfigError):
        resolve("good-event", {"lambda": "ten", "T": "1"}, environ={})
    with pytest.raises(ConfigError):
        resolve("simulate-op", {"gamma": "0.1", "n_levels": "2.5"}, environ={})
    with pytest.raises(ConfigError):
        resolve("simulate-op", {"gamma": "0.1", "threads": "0"}, environ={})


def test_choices_are_case_insensitive():
    cfg = resolve("simulate-ips", {"lambda": "1", "model": "g1", "stirring": "LILY-PAD"}, environ={})
    assert cfg["model"] == "G1" and cfg["stirring"] == "lily-pad"
    with pytest.raises(ConfigError, match="must be one of"):
        resolve("simulate-ips", {"lambda": "1", "model": "G3"}, environ={})


def test_precedence_flag_over_file_and_env_over_both():
    cfg = resolve("simulate-op", {"gamma": "0.1", "seed": "3"}, {"gamma": "0.2", "seed": "4"}, environ={})
    assert cfg["gamma"] == 0.2 and cfg.seed == 4
    cfg = resolve("simulate-op", {"gamma": "0.1", "seed": "3"}, {"seed": "4"}, environ={SEED_ENV: "99"})
    assert cfg.seed == 99
    assert resolve("simulate-op", {"gamma": "0.1"}, environ={SEED_ENV: ""}).seed == 0


def test_ini_with_and_without_section(tmp_path):
    bare = tmp_path / "a.ini"
    bare.write_text("lambda = 10\nT = 0.05\n# comment\n")
    sec = tmp_path / "b.ini"
    sec.write_text("[good-event]\nlambda = 10\nT = 0.05\n")
    assert read_config_file(bare) == read_config_file(sec) == {"lambda": "10", "T": "0.05"}
    two = tmp_path / "c.ini"
    two.write_text("[a]\nx = 1\n[b]\ny = 2\n")
    with pytest.raises(ConfigError):
        read_config_file(two)


def test_digest_ignores_output_dir():
    a = resolve("simulate-op", {"gamma": "0.1", "output_dir": "x"}, environ={})
    b = resolve("simulate-op", {"gamma": "0.1", "output_dir": "y"}, environ={})
    c = resolve("simulate-op", {"gamma": "0.1", "seed": "1"}, environ={})
    assert a.digest() == b.digest() != c.digest()


@given(seed=st.integers(0, 2**63 - 1), sub=st.sampled_from(sorted(SCHEMAS)))
def test_digest_is_a_function_of_values(seed, sub):
    required = {k: "1" for k, key in SCHEMAS[sub].items() if key.required and isinstance(key.kind, type)}
    required.update({k: key.kind[0] for k, key in SCHEMAS[sub].items() if key.required and isinstance(key.kind, tuple)})
    a = resolve(sub, required, {"seed": str(seed)}, environ={})
    b = resolve(sub, required, environ={SEED_ENV: str(seed)})
    assert a.digest() == b.digest() and a.seed == seed
