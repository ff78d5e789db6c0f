import pytest

from chemoblowup.config import RunConfig, dumps, load, loads
from chemoblowup.errors import InvalidParameterError

SAMPLE = """
[model]
n = 4
m1 = 1.25
m2 = 1.05
mu2 = 0.5

[exponents]
alpha = 0.1
beta = 0.1
delta = 0.45

[initial]
kind = constant
y0_override = 1000.0
amplitude = 16

[solver]
N = 128
enforce_monotone = yes

[scan]
m1_range = 1.1, 1.9
mode = both

[output]
cadence = 0.01
"""


def test_defaults_round_trip():
    cfg = RunConfig()
    assert loads(dumps(cfg)) == cfg
    assert loads("") == cfg


def test_sample_round_trip():
    cfg = loads(SAMPLE)
    assert cfg.model.n == 4 and cfg.model.mu2 == 0.5
    assert cfg.exponents.delta == 0.45
    assert cfg.initial.y0_override == 1000.0 and cfg.initial.theta_override is None
    assert cfg.solver.enforce_monotone is True
    assert cfg.scan.m1_range == (1.1, 1.9) and cfg.scan.m2_range == (1.05, 2.0)
    text = dumps(cfg)
    assert loads(text) == cfg
    assert dumps(loads(text)) == text


def test_load_from_file(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text(SAMPLE)
    assert load(path) == loads(SAMPLE)
    with pytest.raises(InvalidParameterError):
        load(tmp_path / "missing.cfg")


@pytest.mark.parametrize("text", [
    "[model]\nm3 = 1\n",
    "[extra]\nx = 1\n",
    "[model]\nn = three\n",
    "[model]\nm1 = 0.9\n",
    "[solver]\ncfl = 1.5\n",
    "[solver]\nenforce_monotone = maybe\n",
    "[scan]\nm1_range = 1.2\n",
    "[scan]\nmode = fast\n",
    "[exponents]\nalpha = 0.1\n",
    "[initial]\nkind = file\n",
    "not a config",
])
def test_invalid_configs(text):
    with pytest.raises(InvalidParameterError):
        loads(text)


def test_overrides():
    cfg = RunConfig().with_overrides(m1=2, m2=1.5, n=5, out="/tmp/x")
    assert (cfg.model.m1, cfg.model.m2, cfg.model.n) == (2.0, 1.5, 5)
    assert cfg.output.directory == "/tmp/x"
    with pytest.raises(InvalidParameterError):
        RunConfig().with_overrides(m1=0.5)
