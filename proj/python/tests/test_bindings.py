import math

import pytest

import cwhom


def test_rate_anchors():
    assert cwhom.cw_fourfold_rate(0.01, 100e-12, 100e-12) == pytest.approx(1e6, rel=1e-14)
    assert cwhom.pulsed_rate(0.01, 165e-12, 165e-12, 1e9) == pytest.approx(1e5, rel=1e-14)


def test_identical_visibility_and_map():
    v = cwhom.identical_source_visibility(165e-12, 40e-12, 15e-12)
    assert 0.95 < v < 1.0
    flat = cwhom.visibility_map([165e-12], [40e-12, 80e-12], 15e-12)
    assert flat[0] == pytest.approx(v)
    assert flat[1] < flat[0]


def test_scenario_round_trip():
    s = cwhom.Scenario.from_dict({"windows": {"tau14_ps": 40}, "delays": {"values_ps": [0, 100]}})
    assert s.tau14 == [pytest.approx(40e-12)]
    assert s.coherence_time("a", with_jitter=False) == pytest.approx(165e-12, rel=5e-3)
    curve = s.hom_curve()
    assert curve["reliable"]
    assert curve["values"][0] < curve["values"][1]
    assert s.visibility() == pytest.approx(curve["visibility"])
    p, o = s.fourfold_probability(0.0), s.fourfold_probability_oracle(0.0)
    assert o == pytest.approx(p, rel=1e-3)


def test_errors_map_to_python():
    with pytest.raises(ValueError):
        cwhom.Scenario.from_dict({"nope": 1})
    with pytest.raises(cwhom.ValidationError):
        cwhom.cw_fourfold_rate(-1.0, 1e-10, 1e-10)
    s = cwhom.Scenario.from_dict({"windows": {"tau14_ps": 80, "tau23_ps": 280}})
    with pytest.raises(cwhom.UnreliablePlateauError):
        s.visibility()
    with pytest.raises(cwhom.ResolutionError):
        cwhom.Scenario.from_dict({"grid": {"n_points": 101}}).visibility()


def test_fbg_design_and_model_dict():
    w = 2 * math.pi * 299792458.0 * 40e-12 / 1550e-9**2
    m = cwhom.design_fbg(w)
    assert cwhom.fbg_fwhm(m) == pytest.approx(w, rel=1e-6)
    back = cwhom.FbgModel.from_dict(m.to_dict())
    assert back.length == m.length
    r = cwhom.fbg_reflectance(m, [0.0, 10 * w])
    assert 0.9 < r[0] <= 1.0 and r[1] < 1e-3


def test_tags_simulate_and_count():
    ch, t = cwhom.simulate_streams(1e6, 1e6, duration=2e-3, noise_rates=[1e5] * 4, seed=3)
    assert len(ch) == len(t) > 0
    assert all(a <= b for a, b in zip(t, t[1:]))
    c = cwhom.count_with_accidentals(ch, t, 2e-3, 2e-9, 4e-9)
    assert c["corrected"] == c["raw"] - c["shifted_2"] - c["shifted_3"]
    assert cwhom.simulate_streams(1e6, 1e6, duration=2e-3, noise_rates=[1e5] * 4, seed=3) == (ch, t)


def test_accidentals_and_swaps():
    a = cwhom.analytic_accidentals(1e-3, 1e-3, [0.5, 0.9, 0.9, 0.9], [0.0] * 4, 0.0)
    assert a["as2"] == 0.0 and a["a0"] == pytest.approx(1e-6 * 0.5 * 0.9**3)
    n = cwhom.pass_swaps([0.0, 600.0], [[30, 30, 2.2, 2.2]] * 2, 0.01, 800e-12, 50e-12)
    assert n == pytest.approx(0.851, rel=1e-3)


def test_optimizer_dict():
    r = cwhom.optimize_window(n_samples=10)
    rates = [c["rate_hz"] for c in r["curve"]]
    assert max(rates) == pytest.approx(r["rate_opt_hz"])
    assert rates[0] < r["rate_opt_hz"] and rates[-1] < r["rate_opt_hz"]
