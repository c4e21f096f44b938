"""Experiment kinds behind the command line: each writes CSV/JSON data files.

Engines run in units of delta0 = 1; ``_Units`` converts config values in
and results out.  Sweeps reuse one seed for every rate, so neighbouring
points share random numbers and their differences are smoother than
independent runs would give.
"""

from pathlib import Path

import numpy as np

from . import analysis, analytic, io, montecarlo, poisson
from .config import LinGrid, ladder
from .distributions import StableLaw, StudentT, TruncatedDistribution, char_magnitude
from .errors import FitWindowError, MotionalError, NumericalError, ScanRangeError

DECAY_POINTS = 301
DECAY_MIN_STOP = 5.0
DECAY_WINDOW_SPAN = 30.0
RESOLVED_SIGMA = 3.0


class _Units:
    def __init__(self, delta0):
        self.d0 = float(delta0)

    def time_in(self, t):
        return np.asarray(t, dtype=float) * self.d0

    def time_out(self, t):
        return np.asarray(t, dtype=float) / self.d0

    def rate_in(self, g):
        return np.asarray(g, dtype=float) / self.d0

    def rate_out(self, g):
        return np.asarray(g, dtype=float) * self.d0


def build_distribution(spec, delta0=1.0, delta_c=None):
    """Distribution in units of delta0 from a config spec."""
    if spec.family == "student_t":
        dist = StudentT(spec.r, 1.0)
    else:
        dist = StableLaw(spec.alpha, spec.c / delta0 ** spec.alpha)
    dc = delta_c if delta_c is not None else spec.delta_c
    if dc is not None:
        dist = TruncatedDistribution(dist, dc / delta0)
    return dist


def tail_exponent(dist):
    inner = dist.inner if isinstance(dist, TruncatedDistribution) else dist
    return min(inner.r, 2.0) if isinstance(inner, StudentT) else inner.alpha


def _process(spec, u):
    if spec.type == "poisson":
        return montecarlo.CollisionProcess.poisson(float(u.rate_in(spec.rate)))
    if spec.type == "fixed":
        return montecarlo.CollisionProcess.fixed(float(u.time_in(spec.interval)))
    return montecarlo.CollisionProcess.none()


def _times(exp, dist, u):
    if exp.times is None:
        return analytic.default_time_grid(dist, 201) if not isinstance(
            dist, TruncatedDistribution) else analytic.default_time_grid(dist.inner, 201)
    if isinstance(exp.times, LinGrid):
        return np.linspace(0.0, float(u.time_in(exp.times.stop)), exp.times.points)
    return u.time_in(exp.times)


def _sim(dist, process, times, exp):
    cfg = montecarlo.SimulationConfig(dist, process, times, exp.ensemble_size, exp.seed,
                                      exp.estimator)
    return montecarlo.simulate(cfg)


def _spectrum(dist, gamma, exp, u):
    omegas = None
    if exp.frequencies is not None:
        omegas = np.linspace(-exp.frequencies.half_width, exp.frequencies.half_width,
                             exp.frequencies.points) / u.d0
    return poisson.spectrum(dist, gamma, omegas)


def run_coherence(exp, u, out):
    dist = build_distribution(exp.distribution, u.d0)
    process = _process(exp.process, u)
    times = _times(exp, dist, u)
    err = np.zeros_like(times)
    extra = {}
    if exp.engine == "monte_carlo":
        res = _sim(dist, process, times, exp)
        values, err, meta = res.values, res.stderr, res.meta
        extra = {"mean_collisions": res.mean_collisions,
                 "collisions_stderr": res.collisions_stderr}
    elif exp.engine == "laplace":
        gamma = process.rate if process.kind == "poisson" else 0.0
        pos = times > 0
        curve = poisson.invert_laplace(poisson.LaplaceEvaluator(dist, gamma), times[pos])
        values = np.ones_like(times)
        values[pos] = curve.values
        meta = curve.meta
    else:
        if process.kind == "poisson" and process.rate > 0:
            raise NumericalError("the analytic engine has no Poisson-averaged formula; "
                                 "use engine 'laplace' or 'monte_carlo'")
        if process.kind == "fixed":
            values = np.array([1.0] + [analytic.zeno_product(
                dist, analytic.CollisionSchedule.fixed(T, process.interval)) for T in times[1:]])
        else:
            values = analytic.coherence_free(dist, times).values
        meta = {"engine": "analytic", "distribution": dist.to_dict(),
                "process": process.to_dict()}
    T = u.time_out(times)
    io.write_csv(out / "coherence.csv", ["T", "R", "stderr"], zip(T, values, err))
    io.write_json(out / "coherence.json", {"meta": meta, **extra, "T": T, "R": values,
                                           "stderr": err})


def run_spectrum(exp, u, out):
    dist = build_distribution(exp.distribution, u.d0)
    rows, widths = [], {}
    for G in exp.spectrum_gammas:
        s = _spectrum(dist, float(u.rate_in(G)), exp, u)
        widths[format(G, ".17g")] = float(u.rate_out(s.fwhm))
        rows += [(G, w, v) for w, v in zip(u.rate_out(s.omegas), s.values)]
    io.write_csv(out / "spectrum.csv", ["Gamma", "omega", "S"], rows)
    io.write_json(out / "spectrum.json", {"distribution": dist.to_dict(), "fwhm": widths})


def run_fwhm_sweep(exp, u, out):
    dist = build_distribution(exp.distribution, u.d0)
    gammas = ladder(exp.gammas)
    base = _spectrum(dist, 0.0, exp, u).fwhm
    ratios = np.array([_spectrum(dist, float(u.rate_in(G)), exp, u).fwhm / base
                       for G in gammas])
    io.write_csv(out / "fwhm_sweep.csv", ["Gamma", "fwhm_ratio"], zip(gammas, ratios))
    run_spectrum(exp, u, out)
    d = np.diff(ratios)
    io.write_json(out / "fwhm_sweep.json", {
        "distribution": dist.to_dict(), "fwhm_gamma0": float(u.rate_out(base)),
        "Gamma": gammas, "fwhm_ratio": ratios,
        "increasing": bool(np.all(d > 0)), "decreasing": bool(np.all(d < 0))})


def decay_times(gamma):
    """Default grid for one rate: long enough for a window after 10 / Gamma."""
    return np.linspace(0.0, max(DECAY_MIN_STOP, DECAY_WINDOW_SPAN / gamma), DECAY_POINTS)


def decay_sweep(dist, gammas, exp, times=None):
    """Simulate and fit each rate (internal units).  Returns (results, fits, errors)."""
    results, fits, errors = {}, {}, {}
    for G in gammas:
        t = decay_times(G) if times is None else times
        res = _sim(dist, montecarlo.CollisionProcess.poisson(G), t, exp)
        results[G] = res
        try:
            fits[G] = analysis.fit_exponential_tail(res, G)
        except FitWindowError as exc:
            errors[G] = str(exc)
    return results, fits, errors


def _fit_out(fit, u):
    d = fit.to_dict()
    d["gamma"] = float(u.rate_out(fit.gamma))
    d["gamma_stderr"] = float(u.rate_out(fit.gamma_stderr))
    d["fit_window"] = u.time_out(fit.fit_window).tolist()
    return d


def run_decay_sweep(exp, u, out):
    dist = build_distribution(exp.distribution, u.d0)
    gammas = ladder(exp.gammas)
    times = None if exp.times is None else _times(exp, dist, u)
    results, fits, errors = decay_sweep(dist, u.rate_in(gammas), exp, times)
    rows = []
    for G, res in results.items():
        Go = float(u.rate_out(G))
        rows += [(Go, T, R, e) for T, R, e in zip(u.time_out(res.times), res.values, res.stderr)]
    io.write_csv(out / "coherence.csv", ["Gamma", "T", "R", "stderr"], rows)
    table = [(float(u.rate_out(G)), float(u.rate_out(f.gamma)), float(u.rate_out(f.gamma_stderr)))
             for G, f in fits.items()]
    io.write_csv(out / "decay_rates.csv", ["Gamma", "gamma_fit", "gamma_stderr"], table)
    summary = {"distribution": dist.to_dict(), "estimator": exp.estimator,
               "fits": {format(float(u.rate_out(G)), ".17g"): _fit_out(f, u)
                        for G, f in fits.items()},
               "fit_errors": {format(float(u.rate_out(G)), ".17g"): m for G, m in errors.items()}}
    failure = None
    try:
        sf = analysis.fit_scaling_law([(g, gf) for g, gf, _ in table])
        summary["scaling_fit"] = sf.to_dict()
    except (ValueError, MotionalError) as exc:
        summary["scaling_fit"] = None
        summary["scaling_fit_error"] = str(exc)
        failure = exc
    io.write_json(out / "scaling_fit.json", summary)
    if failure is not None:
        raise NumericalError(f"scaling fit failed: {failure}")


def cutoff_scan(dist, gammas, exp, reference_T):
    """Normalised coherence R(T)/R0(T) at ``reference_T`` for each rate."""
    times = np.array([0.0, reference_T])
    out = []
    for G in gammas:
        cfg = montecarlo.SimulationConfig(dist, montecarlo.CollisionProcess.poisson(G), times,
                                          exp.ensemble_size, exp.seed, exp.estimator)
        out.append(montecarlo.simulate_normalized_coherence(cfg, reference_T))
    return out


def run_cutoff_sweep(exp, u, out):
    gammas = ladder(exp.gammas)
    T = float(u.time_in(exp.reference_T))
    rows, summary, stars = [], {}, []
    for dc in exp.cutoffs:
        dist = build_distribution(exp.distribution, u.d0, delta_c=dc)
        scan = cutoff_scan(dist, u.rate_in(gammas), exp, T)
        ratio = np.array([s.ratio for s in scan])
        rows += [(dc, G, s.ratio, s.stderr) for G, s in zip(gammas, scan)]
        key = format(dc, ".17g")
        try:
            c = analysis.find_crossover(gammas, ratio, dc, tail_exponent(dist), exp.reference_T,
                                        u.d0)
            d = c.to_dict()
            # a minimum within a few standard errors of zero is not located by the data
            err = scan[c.index].stderr
            d["min_significance"] = float(ratio[c.index] / err) if err > 0 else float("inf")
            d["resolved"] = bool(d["min_significance"] >= RESOLVED_SIGMA)
            summary[key] = d
            stars.append((dc, c.gamma_star))
        except ScanRangeError as exc:
            summary[key] = {"error": str(exc)}
    io.write_csv(out / "cutoff_sweep.csv", ["delta_c", "Gamma", "R_over_R0", "stderr"], rows)
    slope = None
    if len(stars) >= 2:
        x, y = np.log(np.array(stars)).T
        slope = float(np.polyfit(x, y, 1)[0])
    io.write_json(out / "crossover.json", {"reference_T": exp.reference_T,
                                           "estimator": exp.estimator,
                                           "crossovers": summary, "log_slope": slope,
                                           "all_resolved": all(v.get("resolved", False)
                                                               for v in summary.values())})


def run_zeno_compare(exp, u, out):
    dist = build_distribution(exp.distribution, u.d0)
    dt = float(u.time_in(exp.interval))
    Ts = _times(exp, dist, u)
    R0 = char_magnitude(dist, Ts)
    prod = np.array([analytic.zeno_product(dist, analytic.CollisionSchedule.fixed(T, dt))
                     for T in Ts])
    res = _sim(dist, montecarlo.CollisionProcess.fixed(dt), np.concatenate(([0.0], Ts)), exp)
    To = u.time_out(Ts)
    io.write_csv(out / "zeno.csv", ["T", "R0", "product", "R_mc", "stderr"],
                 zip(To, R0, prod, res.values[1:], res.stderr[1:]))
    io.write_json(out / "zeno.json", {
        "distribution": dist.to_dict(), "interval": exp.interval, "T": To,
        "R0": R0, "product": prod, "R_mc": res.values[1:], "stderr": res.stderr[1:],
        "product_below_R0": (prod < R0).tolist(), "regime": analytic.classify_regime(
            tail_exponent(dist)).value})


RUNNERS = {
    "coherence": run_coherence,
    "spectrum": run_spectrum,
    "fwhm-sweep": run_fwhm_sweep,
    "decay-sweep": run_decay_sweep,
    "cutoff-sweep": run_cutoff_sweep,
    "zeno-compare": run_zeno_compare,
}


def run_experiment(exp, delta0, out_dir):
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    RUNNERS[exp.kind](exp, _Units(delta0), out)
    return sorted(p for p in out.iterdir() if p.is_file())


__all__ = ["RUNNERS", "run_experiment", "build_distribution", "decay_sweep", "cutoff_scan",
           "decay_times", "tail_exponent"]
