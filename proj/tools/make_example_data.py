"""Regenerates data/: synthetic FBG reflection lobes, the fitted source
models built from them, a constant loss profile and example scenarios.

    PYTHONPATH=build/python python3 tools/make_example_data.py
"""

import json
import math
import pathlib

import numpy as np

import cwhom

C = 299792458.0
LAMBDA0 = 1550e-9
ROOT = pathlib.Path(__file__).resolve().parent.parent
DATA = ROOT / "data"


def pm_to_angular(pm):
    return 2 * math.pi * C * pm * 1e-12 / LAMBDA0**2


# Signal/idler half widths of the two sources, in pm.
GRATINGS = {"a_signal": 41.0, "a_idler": 27.0, "b_signal": 44.0, "b_idler": 41.0}


def measured_lobe(fwhm_pm, rng):
    truth = cwhom.design_fbg(pm_to_angular(fwhm_pm))
    half = 2 * pm_to_angular(fwhm_pm)
    omega = np.linspace(-half, half, 241)
    r = np.asarray(cwhom.fbg_reflectance(truth, omega.tolist()))
    r = np.clip(r * (1 + 0.005 * rng.standard_normal(r.size)), 0, 1)
    return omega, r


def write_lobe(path, omega, r):
    # Longer wavelength is lower frequency.
    rows = ["wavelength_pm,reflectance"]
    for w, x in sorted(zip(-omega * LAMBDA0**2 / (2 * math.pi * C) / 1e-12, r)):
        rows.append(f"{w:.6f},{x:.6f}")
    path.write_text("\n".join(rows) + "\n")


def dump(name, doc):
    (DATA / name).write_text(json.dumps(doc, indent=2) + "\n")


def main():
    rng = np.random.default_rng(7)
    models = {}
    for name, fwhm in GRATINGS.items():
        omega, r = measured_lobe(fwhm, rng)
        write_lobe(DATA / "fbg" / f"{name}_measured.csv", omega, r)
        seed = cwhom.design_fbg(1.15 * pm_to_angular(fwhm), kappa_length=4.0, order=2.5, width_fraction=0.7)
        model, residual, _ = cwhom.fit_fbg(omega.tolist(), r.tolist(), seed)
        models[name] = model.to_dict()
        print(f"{name}: fwhm {fwhm} pm, residual {residual:.3e}")
    (DATA / "fbg" / "fitted_models.json").write_text(json.dumps(models, indent=2) + "\n")

    def fbg_source(s, i):
        return {"filter": "fbg", "signal": {"model": models[s]}, "idler": {"model": models[i]}}

    sources = {"a": fbg_source("a_signal", "a_idler"), "b": fbg_source("b_signal", "b_idler")}
    jitter = {"jitter_ps": [17, 13, 11, 16]}

    (DATA / "loss_constant.csv").write_text("t_s,loss1_db,loss2_db,loss3_db,loss4_db\n0,30,30,2.2,2.2\n600,30,30,2.2,2.2\n")

    dump("two_sources.json", {
        "description": "Two FBG-filtered sources fitted to the measured lobes in fbg/, 2 ns beam-splitter window",
        "sources": sources, "detectors": jitter,
        "windows": {"tau14_ps": [40, 80, 160, 320], "tau23_ps": 2000},
        "delays": {"start_ps": -600, "stop_ps": 600, "count": 121},
        "coherence": {"source": "a"},
    })
    dump("two_sources_from_measured.json", {
        "description": "Same sources, fitted from the measured CSVs at load time (slow)",
        "sources": {ab: {"filter": "fbg",
                         "signal": {"fwhm_pm": GRATINGS[f"{ab}_signal"], "measured_csv": f"fbg/{ab}_signal_measured.csv"},
                         "idler": {"fwhm_pm": GRATINGS[f"{ab}_idler"], "measured_csv": f"fbg/{ab}_idler_measured.csv"}}
                    for ab in "ab"},
        "detectors": jitter,
        "windows": {"tau14_ps": 40, "tau23_ps": 2000},
        "delays": {"values_ps": [0]},
    })
    dump("identical_rect.json", {
        "description": "Identical rectangular-filter sources, T_c = 165 ps",
        "sources": {"a": {"filter": "rect", "coherence_time_ps": 165}},
        "detectors": jitter,
        "windows": {"tau14_ps": [40, 80, 160], "tau23_ps": 2000},
        "delays": {"start_ps": -600, "stop_ps": 600, "count": 121},
    })
    dump("short_bs_window.json", {
        "description": "Short beam-splitter window: dip with side maxima",
        "sources": {"a": {"filter": "rect", "coherence_time_ps": 165}},
        "detectors": jitter,
        "windows": {"tau14_ps": 80, "tau23_ps": 280},
        "delays": {"start_ps": -1200, "stop_ps": 1200, "count": 241},
    })
    dump("vismap.json", {
        "vismap": {"tc_ps": [50, 100, 150, 200, 250, 300], "tau14_ps": [25, 50, 75, 100, 150, 200, 250, 300],
                   "jitter_ps": 50, "filter": "rect"},
    })
    dump("rate.json", {"rate": {"mu": 0.01, "jitter_ps": 15, "v_target": 0.95, "tc_max_ps": 800}})
    dump("pulsed.json", {"pulsed": {"mu_p": 0.01, "tau_p_ps": 165, "tc_ps": 165, "f_rep_hz": 1e9}})
    dump("pass.json", {"pass": {"loss_csv": "loss_constant.csv", "mu": 0.01, "tc_ps": 800, "tau_w_ps": 50}})
    dump("tags.json", {
        "description": "tags simulate writes tags.csv next to this file; tags count reads it back",
        "detectors": {"jitter_ps": [17, 13, 11, 16]},
        "windows": {"tau14_ps": 2000, "tau23_ps": 4000},
        "rng_seed": 42,
        "tags": {"pair_rate_a_hz": 7.5e5, "pair_rate_b_hz": 7.5e5, "gamma": 0.5, "pairing_window_ps": 1000,
                 "noise_rates_hz": [1.5e7, 4.3e6, 4.3e6, 5e4], "etas": [0.5, 0.9, 0.9, 0.9],
                 "duration_ps": 2e10, "tag_csv": "tags.csv"},
    })
    dump("fbg_fit.json", {"fbg_fit": {"measured_csv": "fbg/a_signal_measured.csv", "restarts": 3}})
    dump("oracle.json", {"description": "Default oracle cases on identical 165 ps rect sources"})


if __name__ == "__main__":
    main()
