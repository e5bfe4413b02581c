import math
import os
from pathlib import Path

import numpy as np
import pytest

import spdesens

ROOT = Path(os.environ.get("SPDESENS_SOURCE_DIR", Path(__file__).resolve().parents[2]))
CONFIGS = ROOT / "configs"


def test_version():
    assert spdesens.__version__.count(".") == 2


def test_partitions():
    assert [spdesens.bell_number(n) for n in range(1, 6)] == [1, 2, 5, 15, 52]
    assert spdesens.term_count(5) == 51
    parts = spdesens.set_partitions(3)
    assert len(parts) == 5
    assert parts[0] == [[1, 2, 3]]


def test_gamma_and_semigroup():
    assert spdesens.gamma(0.0) == 0.0
    assert spdesens.gamma(math.sqrt(math.pi / 2), 1) == pytest.approx(1.0, abs=1e-15)
    assert spdesens.gamma(1.0) == pytest.approx(0.310268301723381, abs=1e-10)
    y = spdesens.semigroup_apply([1.0, 2.0], math.log(2.0), np.ones(2))
    np.testing.assert_allclose(y, [0.5, 0.25], rtol=1e-15)
    with pytest.raises(ValueError):
        spdesens.semigroup_apply([1.0, -1.0], 1.0, np.ones(2))


def test_simulate_free_flow():
    out = spdesens.simulate(str(CONFIGS / "free_flow.cfg"))
    t = np.asarray(out["t"])
    u = np.asarray(out["u"])
    assert not out["blown_up"]
    k = np.arange(1, 17)
    exact = np.exp(-0.05 * k**2 * t[-1]) / k
    np.testing.assert_allclose(u[-1], exact, rtol=1e-12)


def test_solve_system_linear_second_order_vanishes():
    dirs = [np.eye(4)[0], np.eye(4)[1]]
    out = spdesens.solve_system(str(CONFIGS / "linear.cfg"), dirs)
    assert set(out) == {"base", "{1}", "{2}", "{1,2}"}
    assert np.max(np.abs(np.asarray(out["{1,2}"]["u"]))) == 0.0


def test_exponent_plan():
    assert spdesens.exponent_plan_check(1, "0", "2", "2.5")["pass"]
    report = spdesens.exponent_plan_check(2, "1", "1", "3")
    assert not report["pass"]
    assert report["binding"].startswith("factorial_bound")


def test_run_cli():
    code, out, err = spdesens.run(["partitions", "--n", "3"])
    assert code == 0
    assert len(out.strip().splitlines()) == 6
    code, _, err = spdesens.run(["simulate", "--config", str(ROOT / "tests/data/missing_T.cfg")])
    assert code == 2
    assert "missing required key 'T'" in err


def test_config_errors_are_value_errors():
    with pytest.raises(ValueError):
        spdesens.simulate(str(ROOT / "tests/data/missing_T.cfg"))
