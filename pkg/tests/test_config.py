"""Run configuration parsing."""
import math

import pytest

from eulerbkm.config import load_config, parse_config, parse_length
from eulerbkm.errors import ConfigError

VALID = """\
# Taylor-Green
domain.kind = torus3
domain.n = 16
solver.dt = 1e-2
solver.t_end = 0.1   # short
init.kind = taylor_green
monitor.every = 5
monitor.criteria = bkm, ponce
"""


@pytest.mark.parametrize("text, value", [("2*pi", 2 * math.pi), ("pi/2", math.pi / 2), ("pi", math.pi),
                                         ("1.5", 1.5), ("3 pi / 4", 0.75 * math.pi)])
def test_parse_length(text, value):
    assert parse_length(text) == pytest.approx(value, rel=1e-15)


def test_valid_config():
    cfg = parse_config(VALID)
    sc = cfg.solver_config()
    assert sc.n == (16, 16, 16) and sc.dt == 0.01 and sc.output_every == 5
    assert cfg.criteria == ("bkm", "ponce")
    assert cfg.triplet(sc.make_grid().domain) is None
    assert cfg.echo()["domain.n"] == [16, 16, 16]


def test_channel_defaults_and_triplet():
    cfg = parse_config("domain.kind = channel\ntriplet.a = 0.2\ntriplet.b = 0.6\n")
    sc = cfg.solver_config()
    assert sc.n == (32, 32, 33) and sc.initial == "channel_taylor_green"
    t = cfg.triplet(sc.make_grid().domain)
    assert t.transition_interval == (0.2, 0.6)


@pytest.mark.parametrize("text, line, fragment", [
    ("domain.kind = torus3\nfoo.bar = 1\n", 2, "unknown key"),
    ("domain.n = 16\n\nsolver.dt = fast\n", 3, "solver.dt"),
    ("solver.dt = -1\n", 1, "positive"),
    ("domain.n = 16, 16\n", 1, "three"),
    ("domain.n = 4\n", 1, "at least 8"),
    ("seed = 1\nseed = 2\n", 2, "duplicate"),
    ("just words\n", 1, "key = value"),
    ("domain.kind = channel\ninit.kind = taylor_green\n", 2, "torus3"),
    ("triplet.a = 0.5\ntriplet.b = 0.2\n", 2, "smaller"),
    ("monitor.criteria = bkm, besov\n", 1, "unknown criteria"),
    ("output.snapshots = maybe\n", 1, "boolean"),
])
def test_errors_carry_line_numbers(text, line, fragment):
    with pytest.raises(ConfigError) as info:
        parse_config(text)
    assert info.value.line == line
    assert str(info.value).startswith(f"line {line}:")
    assert fragment in str(info.value)


def test_triplet_needs_both_ends():
    cfg = parse_config("domain.kind = channel\ntriplet.a = 0.2\n")
    with pytest.raises(ConfigError, match="triplet.b"):
        cfg.triplet(cfg.solver_config().make_grid().domain)


def test_load_missing(tmp_path):
    with pytest.raises(ConfigError):
        load_config(tmp_path / "missing.cfg")
    p = tmp_path / "ok.cfg"
    p.write_text(VALID)
    assert load_config(p).source == str(p)
