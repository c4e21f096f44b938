"""Named experiment sets that regenerate the four figures' data."""

import copy

_LADDER_FIG1 = {"start": 0.1, "stop": 100.0, "points": 10}
_LADDER_FIG4 = {"start": 0.1, "stop": 1.0e5, "points": 25}

PRESETS = {
    "fig1": {"experiments": [
        {"name": f"fwhm_r{r}", "kind": "fwhm-sweep",
         "distribution": {"family": "student_t", "r": r},
         "gammas": _LADDER_FIG1, "spectrum_gammas": [0.0, 10.0]}
        for r in (0.5, 1.5)
    ]},
    "fig2": {"experiments": [
        {"name": f"zeno_r{r}", "kind": "zeno-compare",
         "distribution": {"family": "student_t", "r": r},
         "interval": 0.25, "times": [0.5, 1.0, 2.0], "ensemble_size": 100_000, "seed": 2}
        for r in (0.5, 1.5)
    ]},
    "fig3": {"experiments": [
        {"name": f"decay_r{r}", "kind": "decay-sweep",
         "distribution": {"family": "student_t", "r": r},
         "gammas": [2.0, 5.0, 10.0, 20.0, 50.0], "ensemble_size": 10_000, "seed": 3,
         "estimator": "conditional"}
        for r in (0.5, 0.75)
    ]},
    "fig4": {"experiments": [
        {"name": f"cutoff_{est}", "kind": "cutoff-sweep",
         "distribution": {"family": "student_t", "r": 0.5},
         "cutoffs": [1.0e2, 1.0e3, 1.0e4], "gammas": _LADDER_FIG4, "reference_T": 0.5,
         "ensemble_size": 10_000, "seed": 4, "estimator": est}
        for est in ("phase", "conditional")
    ]},
}


def get(name):
    if name not in PRESETS:
        raise KeyError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}")
    return copy.deepcopy(PRESETS[name])
