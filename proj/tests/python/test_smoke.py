import json
import math

import numpy as np
import pytest

import kirchhoff_gp as kgp

A_STAR = 11.700896524559
M1 = 1.9216734945


@pytest.fixture(scope="module")
def gs():
    return kgp.townes()


def test_townes(gs):
    assert gs.a_star == pytest.approx(A_STAR, rel=1e-9)
    assert gs.consistency_spread < 1e-6
    assert gs.moment(1.0) == pytest.approx(M1, rel=1e-6)
    q = gs.q.values
    assert q.shape == (4096,)
    assert np.all(np.diff(q) <= 0)


def test_profile_roundtrip():
    grid = kgp.Grid(n=512, radius=20.0)
    r = grid.nodes
    u = kgp.Profile(grid, np.exp(-r**2 / 2) / math.sqrt(math.pi))
    assert kgp.mass(u) == pytest.approx(1.0, rel=1e-6)
    assert kgp.kinetic(u) == pytest.approx(1.0, rel=1e-3)
    with pytest.raises(ValueError):
        kgp.Profile(grid, [1.0, 2.0])


def test_energy_and_bounds(gs):
    params = kgp.ModelParams(a=gs.a_star, b=1.0, p=1.0)
    e = kgp.energy(gs.q0, params)
    assert e["total"] == pytest.approx(1.0 - M1, rel=1e-5)
    limit = kgp.theorem2_limit(1.0, gs.moment(1.0))
    assert kgp.upper_bound(kgp.ModelParams(a=gs.a_star, b=1e-2, p=1.0), gs) == pytest.approx(
        1e-2 ** (-1 / 3) * limit, rel=1e-8
    )
    assert kgp.theorem3_limit(2 * gs.a_star, gs.a_star) == pytest.approx(-0.25)
    with pytest.raises(ValueError):
        kgp.ModelParams(a=1.0, b=1.0, p=2.5)


def test_minimize(gs):
    params = kgp.ModelParams(a=gs.a_star, b=0.1, p=1.0)
    res = kgp.minimize(params, kgp.gaussian(gs.q.grid), gs, frame="blowup", record_trace=True)
    assert res.converged
    assert res.residual < 1e-6
    assert kgp.mass(res.profile) == pytest.approx(1.0, abs=1e-10)
    assert res.energy["total"] <= kgp.upper_bound(params, gs)
    assert all(b <= a + 1e-12 for a, b in zip(res.energy_trace, res.energy_trace[1:]))
    with pytest.raises(kgp.InfimumNotAttained):
        kgp.minimize(kgp.ModelParams(a=gs.a_star, b=0.0), gs.q0, gs)


def test_sweep_and_fit(gs):
    records = kgp.sweep(gs, "critical", 1.0, 1.0, [1e-1, 3e-2, 1e-2, 3e-3])
    assert all(r["converged"] for r in records)
    assert all(r["energy"]["total"] < 0 for r in records)
    b = [1e-1, 1e-2, 1e-3, 1e-4]
    fit = kgp.fit_power_limit(b, [-0.5 + 0.3 * x**0.5 for x in b])
    assert fit["estimate"] == pytest.approx(-0.5, abs=1e-6)


def test_run_cli(tmp_path):
    cfg = {"subcommand": "verify", "verify": {"mode": "formulas"}, "output_dir": str(tmp_path)}
    assert kgp.run(json.dumps(cfg)) == 0
    out = json.loads((tmp_path / "verify.json").read_text())
    assert out["a_star"] == pytest.approx(A_STAR, rel=1e-9)
    with pytest.raises(kgp.ConfigError):
        kgp.run(json.dumps({"subcommand": "minimize", "params": {"p": 3}}))
