import pytest

from gmwb.config import REQUIRED, ConfigError, parse_config

TABLE3 = """# static contract, base case
sigma_S=0.2
rho=0.2
kappa=0.0349
theta=0.05
sigma_r=0.02
S0=1.0
r0=0.05
mode=static
alpha_bp=60
beta=0.1
T=10
Nw=4
mesh=fine
"""


def test_table3_set_is_valid():
    cfg = parse_config(TABLE3)
    assert cfg.params.kappa == 0.0349 and cfg.params.rho == 0.2
    assert cfg.contract.alpha == pytest.approx(0.006) and cfg.contract.N == 40
    assert cfg.spec.M == 100 and cfg.spec.K == 60 and cfg.mode == "static"


def test_out_of_range_names_line():
    text = TABLE3.replace("rho=0.2", "rho=1.5")
    with pytest.raises(ConfigError) as e:
        parse_config(text)
    assert e.value.errors == ["rho out of [-1,1] at line 3"]


def test_empty_file_lists_every_missing_key():
    with pytest.raises(ConfigError) as e:
        parse_config("")
    assert e.value.errors == [f"missing required key '{k}'" for k in REQUIRED]


def test_unknown_key_and_bad_values_collected():
    with pytest.raises(ConfigError) as e:
        parse_config(TABLE3 + "foo=1\nJ=abc\nnot a pair\nrho=0.1\n")
    msgs = e.value.errors
    assert "unknown key 'foo' at line 15" in msgs
    assert any(m.startswith("invalid value for J") and m.endswith("at line 16") for m in msgs)
    assert "expected key=value at line 17" in msgs
    assert any("duplicate key 'rho' at line 18" in m for m in msgs)


def test_comments_and_blank_lines():
    cfg = parse_config("\n# only a comment\n" + TABLE3.replace("rho=0.2", "rho=0.2   # inline"))
    assert cfg.params.rho == 0.2


def test_cross_field_invariants_revalidated():
    with pytest.raises(ConfigError):
        parse_config(TABLE3 + "alpha=0.01\n")  # both fee keys
    with pytest.raises(ConfigError):
        parse_config(TABLE3.replace("T=10", "T=1.1"))  # T * Nw not whole
    with pytest.raises(ConfigError):
        parse_config(TABLE3 + "n_paths=11\nantithetic=true\n")


def test_grid_overrides():
    cfg = parse_config(TABLE3 + "quad=12,4\ntransform=cholesky\nN_dt=2\n")
    assert (cfg.spec.q1, cfg.spec.q2, cfg.spec.transform, cfg.spec.N_dt) == (12, 4, "cholesky", 2)


def test_vanilla_mode_defaults_to_vanilla_mesh():
    cfg = parse_config(TABLE3.replace("mode=static", "mode=vanilla").replace("mesh=fine\n", ""))
    assert (cfg.spec.M, cfg.spec.K, cfg.spec.q1, cfg.spec.q2, cfg.spec.N_dt) == (100, 20, 12, 3, 5)
