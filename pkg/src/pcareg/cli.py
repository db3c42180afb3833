"""Command-line front end: experiment configs in, CSV/JSON tables out.

Commands
--------
error-curve       theory (and optional Monte Carlo) errors over an alpha sweep
heatmap           (alpha*, min generalisation error) over an (n_u, n_l) grid
phase-curve       analytic phase boundaries over parameter families
optimal-alpha     argmin alpha for a single configuration
substitution-rate marginal rate of substitution at one (n_u, n_l) point
validate          theory-vs-simulation acceptance suite

Every command takes ``--config PATH --seed U64 --threads N --out PATH
--format {csv,json}``; flags override the same keys in the config file.
Exit codes: 0 success, 1 config error, 2 numeric error, 3 validation failure.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import replace

import numpy as np

from . import phase
from .errors import ConfigError, DomainError, NumericError, SingularityError
from .measures import bbp_overlap
from .phase import AlphaGrid, RegimeTag
from .risk import (
    ModelParams,
    TestSpike,
    TestSpikeSpec,
    generalisation_error,
    training_error,
)
from .simulate import FiniteInstance, run_alpha_sweep, run_trials

CONFIG_VERSION = 1


# ---------------------------------------------------------------------------
# config loading
# ---------------------------------------------------------------------------

def _load_config(path: str | None) -> dict:
    if path is None:
        return {"version": CONFIG_VERSION}
    try:
        with open(path, encoding="utf-8") as fh:
            cfg = json.load(fh)
    except OSError as e:
        raise ConfigError(f"cannot read config {path}: {e}") from e
    except json.JSONDecodeError as e:
        raise ConfigError(f"config {path} is not valid JSON: {e}") from e
    if not isinstance(cfg, dict):
        raise ConfigError("config root must be a JSON object")
    if cfg.get("version") != CONFIG_VERSION:
        raise ConfigError(f"config version must be {CONFIG_VERSION}")
    return cfg


def _take(block: dict, where: str, allowed: dict):
    """Validate ``block`` against {key: default}; unknown keys are rejected."""
    if not isinstance(block, dict):
        raise ConfigError(f"{where} must be an object")
    unknown = set(block) - set(allowed)
    if unknown:
        raise ConfigError(f"unknown keys in {where}: {sorted(unknown)}")
    merged = dict(allowed)
    merged.update(block)
    return merged


_TOP_KEYS = ("version", "seed", "out", "format", "model", "test_spikes",
             "alpha_sweep", "alpha_grid", "mc", "heatmap", "phase_curve",
             "substitution_rate", "validate")


def _check_top(cfg: dict) -> None:
    unknown = set(cfg) - set(_TOP_KEYS)
    if unknown:
        raise ConfigError(f"unknown top-level config keys: {sorted(unknown)}")


def _model_from_config(cfg: dict, alpha: float = 1.0) -> tuple[ModelParams, int | None]:
    """Normalize the model block to ModelParams; returns (params, p or None).

    Accepts either aspect ratios (gamma_u, gamma_l) or sizes (p, n_u, n_l).
    """
    block = _take(cfg.get("model", {}), "model", {
        "gamma_u": None, "gamma_l": None, "p": None, "n_u": None, "n_l": None,
        "lam": None, "eta": None, "snr": None, "w_star_norm_sq": None,
        "noise_var": 1.0,
    })
    by_gamma = block["gamma_u"] is not None or block["gamma_l"] is not None
    by_n = block["n_u"] is not None or block["n_l"] is not None
    if by_gamma and by_n:
        raise ConfigError("model: give either (gamma_u, gamma_l) or (p, n_u, n_l), not both")
    if by_n:
        for k in ("p", "n_u", "n_l"):
            if block[k] is None:
                raise ConfigError(f"model: {k} is required with size parameterization")
        p = int(block["p"])
        gamma_u = p / int(block["n_u"])
        gamma_l = p / int(block["n_l"])
    elif by_gamma:
        if block["gamma_u"] is None or block["gamma_l"] is None:
            raise ConfigError("model: both gamma_u and gamma_l are required")
        gamma_u, gamma_l = float(block["gamma_u"]), float(block["gamma_l"])
        p = int(block["p"]) if block["p"] is not None else None
    else:
        raise ConfigError("model: missing sample-size or aspect-ratio parameters")
    if block["lam"] is None or block["eta"] is None:
        raise ConfigError("model: lam and eta are required")
    noise_var = float(block["noise_var"])
    if block["w_star_norm_sq"] is not None and block["snr"] is not None:
        raise ConfigError("model: give either snr or w_star_norm_sq, not both")
    if block["w_star_norm_sq"] is not None:
        w_sq = float(block["w_star_norm_sq"])
    elif block["snr"] is not None:
        w_sq = float(block["snr"]) * noise_var
    else:
        raise ConfigError("model: snr or w_star_norm_sq is required")
    try:
        params = ModelParams(
            gamma_u=gamma_u, gamma_l=gamma_l, alpha=alpha,
            lam=float(block["lam"]), eta=float(block["eta"]),
            w_star_norm_sq=w_sq, noise_var=noise_var,
        )
    except DomainError as e:
        raise ConfigError(f"model: {e}") from e
    return params, p


def _test_from_config(cfg: dict, params: ModelParams) -> TestSpikeSpec:
    spec = cfg.get("test_spikes", "matched")
    if spec == "matched":
        return TestSpikeSpec.matched(params)
    if spec == "isotropic":
        return TestSpikeSpec.isotropic()
    if not isinstance(spec, list):
        raise ConfigError('test_spikes must be "matched", "isotropic" or a list')
    spikes = []
    for i, item in enumerate(spec):
        item = _take(item, f"test_spikes[{i}]", {"nu": None, "rho_w_new": None, "rho_v_new": None})
        if None in item.values():
            raise ConfigError(f"test_spikes[{i}]: nu, rho_w_new, rho_v_new are all required")
        try:
            spikes.append(TestSpike(float(item["nu"]), float(item["rho_w_new"]),
                                    float(item["rho_v_new"])))
        except DomainError as e:
            raise ConfigError(f"test_spikes[{i}]: {e}") from e
    return TestSpikeSpec(spikes=tuple(spikes))


def _alpha_grid_from_config(cfg: dict, gamma_l: float) -> AlphaGrid:
    block = _take(cfg.get("alpha_grid", {}), "alpha_grid",
                  {"num": 30, "lo": 0.01, "guard_fraction": phase.GUARD_FRACTION})
    return AlphaGrid.build(gamma_l, num=int(block["num"]), lo=float(block["lo"]),
                           guard_fraction=float(block["guard_fraction"]))


def _linspace_block(block, where: str) -> np.ndarray:
    block = _take(block, where, {"min": None, "max": None, "num": None, "values": None})
    if block["values"] is not None:
        return np.asarray([float(v) for v in block["values"]])
    if None in (block["min"], block["max"], block["num"]):
        raise ConfigError(f"{where}: need min/max/num or values")
    if float(block["min"]) <= 0:
        raise ConfigError(f"{where}: min must be positive")
    return np.linspace(float(block["min"]), float(block["max"]), int(block["num"]))


# ---------------------------------------------------------------------------
# table output
# ---------------------------------------------------------------------------

def _fmt_cell(x) -> str:
    if x is None:
        return ""
    if isinstance(x, float):
        return f"{x:.17g}"
    return str(x)


def _write_table(columns: list[str], rows: list[dict], out: str | None, fmt: str) -> None:
    if fmt == "csv":
        lines = [",".join(columns)]
        lines.extend(",".join(_fmt_cell(row.get(c)) for c in columns) for row in rows)
        text = "\n".join(lines) + "\n"
    elif fmt == "json":
        payload = {"version": CONFIG_VERSION, "columns": columns, "rows": rows}
        text = json.dumps(payload, ensure_ascii=False, separators=(",", ":")) + "\n"
    else:
        raise ConfigError(f"unknown format {fmt!r}")
    if out is None:
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def _cmd_error_curve(cfg: dict, seed: int, threads: int) -> tuple[list[str], list[dict], int]:
    params, p = _model_from_config(cfg)
    test = _test_from_config(cfg, params)
    sweep = _take(cfg.get("alpha_sweep", {}), "alpha_sweep",
                  {"num": 30, "lo": 0.01, "hi": 1.0, "scale": "linear", "values": None})
    if sweep["values"] is not None:
        alphas = [float(a) for a in sweep["values"]]
    elif sweep["scale"] == "log":
        alphas = np.geomspace(float(sweep["lo"]), float(sweep["hi"]), int(sweep["num"])).tolist()
    else:
        alphas = np.linspace(float(sweep["lo"]), float(sweep["hi"]), int(sweep["num"])).tolist()

    mc_block = _take(cfg.get("mc", {}), "mc", {"enabled": False, "n_trials": 100, "p": None})
    mc_enabled = bool(mc_block["enabled"])
    columns = ["alpha", "e_est", "e_gen", "e_train", "missing", "leaked",
               "variance", "test_spike_bias", "flag"]
    mc_aggs = None
    if mc_enabled:
        p_mc = mc_block["p"] if mc_block["p"] is not None else p
        if p_mc is None:
            raise ConfigError("mc: p is required when the model is given by aspect ratios")
        p_mc = int(p_mc)
        n_u = max(1, round(p_mc / params.gamma_u))
        n_l = max(1, round(p_mc / params.gamma_l))
        m_values = [max(1, round(a * p_mc)) for a in alphas]
        inst = FiniteInstance(p=p_mc, n_u=n_u, n_l=n_l, m=1, lam=params.lam,
                              eta=params.eta, w_star_norm=math.sqrt(params.w_star_norm_sq),
                              noise_sd=math.sqrt(params.noise_var), seed=seed)
        mc_aggs = run_alpha_sweep(inst, m_values, int(mc_block["n_trials"]), test,
                                  threads=threads)
        columns += ["m", "mc_e_est_mean", "mc_e_est_sd", "mc_e_gen_mean",
                    "mc_e_gen_sd", "mc_e_train_mean", "mc_e_train_sd"]

    guard = phase.GUARD_FRACTION
    rows = []
    for i, a in enumerate(alphas):
        row: dict = {"alpha": a}
        singular = params.gamma_l > 1.0 and abs(a * params.gamma_l - 1.0) < guard
        if singular:
            row.update({k: None for k in ("e_est", "e_gen", "e_train", "missing",
                                          "leaked", "variance", "test_spike_bias")})
            row["flag"] = "singular"
        else:
            b = generalisation_error(params.with_alpha(a), test)
            row.update({"e_est": b.e_est, "e_gen": b.e_gen, "e_train": b.e_train,
                        "missing": b.missing_signal, "leaked": b.leaked_signal,
                        "variance": b.variance, "test_spike_bias": b.test_spike_bias,
                        "flag": ""})
        if mc_aggs is not None:
            agg = mc_aggs[i]
            row.update({"m": max(1, round(a * p_mc)),
                        "mc_e_est_mean": agg.mean.e_est_emp, "mc_e_est_sd": agg.sd.e_est_emp,
                        "mc_e_gen_mean": agg.mean.e_gen_emp, "mc_e_gen_sd": agg.sd.e_gen_emp,
                        "mc_e_train_mean": agg.mean.e_train_emp,
                        "mc_e_train_sd": agg.sd.e_train_emp})
        rows.append(row)
    return columns, rows, 0


def _cmd_heatmap(cfg: dict, seed: int, threads: int) -> tuple[list[str], list[dict], int]:
    params, p_model = _model_from_config(cfg)
    test = _test_from_config(cfg, params)
    block = _take(cfg.get("heatmap", {}), "heatmap",
                  {"p": None, "n_u": None, "n_l": None,
                   "include_substitution_rate": False, "include_train_optimal": False})
    p = block["p"] if block["p"] is not None else p_model
    if p is None or block["n_u"] is None or block["n_l"] is None:
        raise ConfigError("heatmap: p, n_u and n_l ranges are required")
    p = int(p)
    n_u_vals = _linspace_block(block["n_u"], "heatmap.n_u")
    n_l_vals = _linspace_block(block["n_l"], "heatmap.n_l")
    grid = _alpha_grid_from_config(cfg, gamma_l=2.0)  # guard recomputed per cell below
    alpha_star, e_min = phase.heatmap(params, test, n_u_vals, n_l_vals, grid, p,
                                      threads=threads)
    rate_surface = None
    if block["include_substitution_rate"]:
        # the rate differences the positive-alpha surface: the exact zero
        # endpoint is flat in n_l and would put poles into the ratio
        _, rate_surface = phase.heatmap(params, test, n_u_vals, n_l_vals, grid, p,
                                        threads=threads, positive_alpha_only=True)

    columns = ["n_u", "n_l", "alpha_star", "e_gen_min"]
    if block["include_substitution_rate"]:
        columns.append("substitution_rate")
    if block["include_train_optimal"]:
        columns.append("alpha_star_train")
    columns.append("flag")

    rows = []
    for i, n_u in enumerate(n_u_vals):
        for j, n_l in enumerate(n_l_vals):
            a, e = alpha_star[i, j], e_min[i, j]
            singular = not (math.isfinite(a) and math.isfinite(e))
            row: dict = {"n_u": float(n_u), "n_l": float(n_l),
                         "alpha_star": None if singular else float(a),
                         "e_gen_min": None if singular else float(e),
                         "flag": "singular" if singular else ""}
            if block["include_substitution_rate"]:
                row["substitution_rate"] = _central_rate(rate_surface, n_u_vals,
                                                         n_l_vals, i, j)
            if block["include_train_optimal"]:
                row["alpha_star_train"] = phase.train_optimal_alpha(p / float(n_l))
            rows.append(row)
    return columns, rows, 0


def _central_rate(e_min, n_u_vals, n_l_vals, i: int, j: int) -> float | None:
    """Central-difference substitution rate on the heatmap grid; None at
    boundaries or next to singular cells."""
    if not (0 < i < len(n_u_vals) - 1 and 0 < j < len(n_l_vals) - 1):
        return None
    stencil = (e_min[i + 1, j], e_min[i - 1, j], e_min[i, j + 1], e_min[i, j - 1])
    if not all(math.isfinite(x) for x in stencil):
        return None
    d_u = (stencil[0] - stencil[1]) / (n_u_vals[i + 1] - n_u_vals[i - 1])
    d_l = (stencil[2] - stencil[3]) / (n_l_vals[j + 1] - n_l_vals[j - 1])
    if d_l == 0.0:
        return None
    return float(d_u / d_l)


def _cmd_phase_curve(cfg: dict, seed: int, threads: int) -> tuple[list[str], list[dict], int]:
    params, p_model = _model_from_config(cfg)
    block = _take(cfg.get("phase_curve", {}), "phase_curve",
                  {"p": None, "n_u": None, "gamma_u": None,
                   "family": None, "gamma_l_max": 50.0})
    p = block["p"] if block["p"] is not None else p_model
    if block["n_u"] is not None:
        if p is None:
            raise ConfigError("phase_curve: p is required with an n_u range")
        gamma_u_vals = (int(p) / _linspace_block(block["n_u"], "phase_curve.n_u"))
    elif block["gamma_u"] is not None:
        gamma_u_vals = _linspace_block(block["gamma_u"], "phase_curve.gamma_u")
    else:
        raise ConfigError("phase_curve: an n_u or gamma_u range is required")

    family = block["family"]
    if family is None:
        variants = [("", params)]
    else:
        family = _take(family, "phase_curve.family", {"vary": None, "values": None})
        vary, values = family["vary"], family["values"]
        if vary not in ("snr", "lam", "eta") or not isinstance(values, list):
            raise ConfigError('phase_curve.family: vary must be "snr", "lam" or "eta" '
                              "with a list of values")
        variants = []
        for val in values:
            if vary == "snr":
                pp = replace(params, w_star_norm_sq=float(val) * params.noise_var)
            else:
                pp = replace(params, **{vary: float(val)})
            variants.append((f"{vary}={val:g}", pp))

    columns = ["family", "gamma_u", "n_u", "regime_tag", "gamma_l_boundary",
               "boundary_n_l", "n_roots"]
    rows = []
    for label, pp in variants:
        for gu in gamma_u_vals:
            gu = float(gu)
            n_u = (int(p) / gu) if p is not None else None
            search = phase.endpoint_transition_curve(
                pp.lam, pp.eta, pp.snr, gu, gamma_l_max=float(block["gamma_l_max"]))
            rows.append({"family": label, "gamma_u": gu, "n_u": n_u,
                         "regime_tag": RegimeTag.ENDPOINT_CONDITION.value,
                         "gamma_l_boundary": search.gamma_l,
                         "boundary_n_l": (int(p) / search.gamma_l)
                         if (p is not None and search.gamma_l) else None,
                         "n_roots": search.n_roots})
            crit = phase.stability_boundary(pp.lam, pp.eta, pp.snr, gu)
            degenerate = crit <= 1e-9  # boundary collapses to 0 (eta=1, gamma_u -> 0)
            rows.append({"family": label, "gamma_u": gu, "n_u": n_u,
                         "regime_tag": RegimeTag.STABILITY_BOUNDARY.value,
                         "gamma_l_boundary": None if degenerate else crit,
                         "boundary_n_l": (int(p) / crit)
                         if (p is not None and not degenerate) else None,
                         "n_roots": 0 if degenerate else 1})
    return columns, rows, 0


def _cmd_optimal_alpha(cfg: dict, seed: int, threads: int) -> tuple[list[str], list[dict], int]:
    params, _ = _model_from_config(cfg)
    test = _test_from_config(cfg, params)
    grid = _alpha_grid_from_config(cfg, params.gamma_l)
    a, e = phase.optimal_alpha(params, test, grid)
    rows = [{"gamma_u": params.gamma_u, "gamma_l": params.gamma_l,
             "alpha_star": a, "e_gen_min": e}]
    return ["gamma_u", "gamma_l", "alpha_star", "e_gen_min"], rows, 0


def _cmd_substitution_rate(cfg: dict, seed: int, threads: int) -> tuple[list[str], list[dict], int]:
    params, p_model = _model_from_config(cfg)
    test = _test_from_config(cfg, params)
    block = _take(cfg.get("substitution_rate", {}), "substitution_rate",
                  {"p": None, "n_u": None, "n_l": None, "h_u": None, "h_l": None})
    p = block["p"] if block["p"] is not None else p_model
    if p is None or block["n_u"] is None or block["n_l"] is None:
        raise ConfigError("substitution_rate: p, n_u and n_l are required")
    p, n_u, n_l = int(p), float(block["n_u"]), float(block["n_l"])
    h_u = float(block["h_u"]) if block["h_u"] is not None else max(1.0, n_u / 50.0)
    h_l = float(block["h_l"]) if block["h_l"] is not None else max(1.0, n_l / 50.0)
    grid = _alpha_grid_from_config(cfg, gamma_l=p / n_l)
    rate, one_sided = phase.substitution_rate(params, test, grid, p, n_u, n_l, h_u, h_l)
    rows = [{"n_u": n_u, "n_l": n_l, "h_u": h_u, "h_l": h_l, "rate": rate,
             "flag": "one_sided" if one_sided else ""}]
    return ["n_u", "n_l", "h_u", "h_l", "rate", "flag"], rows, 0


# ---------------------------------------------------------------------------
# validate
# ---------------------------------------------------------------------------

def _cmd_validate(cfg: dict, seed: int, threads: int) -> tuple[list[str], list[dict], int]:
    block = _take(cfg.get("validate", {}), "validate", {
        "p": 400, "n_u": 300, "n_l": 300, "snr": 9.0, "eta": 1.0,
        "lams": [2.0, 5.0], "alpha_points": 20, "exclude_band": 0.15,
        "n_trials": 100, "bbp_seeds": 50,
        "bbp_cases": [[5.0, 1.0], [5.0, 4.0], [2.0, 0.25], [2.0, 4.0]],
        "theory_lambda_scale": 1.0,
    })
    p, n_u, n_l = int(block["p"]), int(block["n_u"]), int(block["n_l"])
    snr, eta = float(block["snr"]), float(block["eta"])
    n_trials = int(block["n_trials"])
    lam_scale = float(block["theory_lambda_scale"])
    rows: list[dict] = []

    def report(check: str, measured: float, tol: float, detail: str = ""):
        ok = measured <= tol
        rows.append({"check": check, "status": "pass" if ok else "fail",
                     "measured": measured, "tolerance": tol, "detail": detail})

    gamma_l = p / n_l
    alphas = [a for a in np.linspace(0.01, 1.0, int(block["alpha_points"]))
              if abs(a * gamma_l - 1.0) >= float(block["exclude_band"])]
    for lam in block["lams"]:
        lam = float(lam)
        inst = FiniteInstance(p=p, n_u=n_u, n_l=n_l, m=1, lam=lam, eta=eta,
                              w_star_norm=math.sqrt(snr), noise_sd=1.0, seed=seed)
        m_values = [max(1, round(a * p)) for a in alphas]
        aggs = run_alpha_sweep(inst, m_values, n_trials,
                               test=TestSpikeSpec(spikes=(TestSpike(lam, math.sqrt(eta), 1.0),)),
                               threads=threads)
        worst_gen, worst_train = 0.0, 0.0
        for a, agg in zip(alphas, aggs):
            params = ModelParams(gamma_u=p / n_u, gamma_l=gamma_l, alpha=a,
                                 lam=lam * lam_scale, eta=eta,
                                 w_star_norm_sq=snr, noise_var=1.0)
            b = generalisation_error(params, TestSpikeSpec.matched(params))
            tol_gen = max(0.05 * b.e_gen, 3.0 * agg.se("e_gen_emp"))
            worst_gen = max(worst_gen, abs(agg.mean.e_gen_emp - b.e_gen) / tol_gen)
            th_train = training_error(params)
            tol_train = max(0.05 * th_train, 3.0 * agg.se("e_train_emp"), 1e-8)
            worst_train = max(worst_train, abs(agg.mean.e_train_emp - th_train) / tol_train)
        report(f"theory_mc_gen_lam{lam:g}", worst_gen, 1.0,
               f"max |mc-theory|/tol over {len(alphas)} alphas")
        report(f"theory_mc_train_lam{lam:g}", worst_train, 1.0,
               f"max |mc-theory|/tol over {len(alphas)} alphas")

    for lam, gamma_u in block["bbp_cases"]:
        lam, gamma_u = float(lam), float(gamma_u)
        inst = FiniteInstance(p=p, n_u=max(1, round(p / gamma_u)), n_l=8, m=1,
                              lam=lam, eta=1.0, w_star_norm=1.0, noise_sd=1.0, seed=seed)
        agg = run_trials(inst, int(block["bbp_seeds"]), threads=threads)
        c = bbp_overlap(lam * lam_scale, gamma_u)
        report(f"bbp_overlap_lam{lam:g}_gu{gamma_u:g}",
               abs(agg.mean.spike_overlap_sq - c), 0.05,
               f"empirical {agg.mean.spike_overlap_sq:.4f} vs c = {c:.4f}")

    # interpolation: gamma_eff in {1.5, 2} must fit the training data exactly
    for m in (300, 400):
        inst = FiniteInstance(p=400, n_u=n_u, n_l=200, m=m, lam=5.0, eta=eta,
                              w_star_norm=math.sqrt(snr), noise_sd=1.0, seed=seed)
        agg = run_trials(inst, max(10, n_trials // 5), threads=threads)
        report(f"train_interpolation_geff{m / 200:g}", agg.mean.e_train_emp, 1e-8)

    # undersampled training law: alpha = 1, gamma_l = 1/2 gives sigma^2 (1 - gamma_l)
    inst = FiniteInstance(p=400, n_u=n_u, n_l=800, m=400, lam=5.0, eta=eta,
                          w_star_norm=math.sqrt(snr), noise_sd=1.0, seed=seed)
    agg = run_trials(inst, n_trials, threads=threads)
    report("train_undersampled_geff0.5", abs(agg.mean.e_train_emp - 0.5),
           3.0 * agg.se("e_train_emp"), "theory sigma^2 (1 - gamma_l) = 0.5")

    # determinism: same instance, different thread counts, identical bits
    inst = FiniteInstance(p=64, n_u=48, n_l=48, m=16, lam=5.0, eta=1.0,
                          w_star_norm=3.0, noise_sd=1.0, seed=seed)
    a1 = run_trials(inst, 8, threads=1)
    a2 = run_trials(inst, 8, threads=2)
    report("determinism_threads",
           max(abs(a1.mean.e_gen_emp - a2.mean.e_gen_emp),
               abs(a1.mean.e_train_emp - a2.mean.e_train_emp),
               abs(a1.mean.e_est_emp - a2.mean.e_est_emp)), 0.0)

    failed = any(r["status"] == "fail" for r in rows)
    return (["check", "status", "measured", "tolerance", "detail"], rows,
            3 if failed else 0)


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    def error(self, message):  # config errors exit 1, not argparse's 2
        self.print_usage(sys.stderr)
        sys.stderr.write(f"error: {message}\n")
        raise SystemExit(1)


_COMMANDS = {
    "error-curve": _cmd_error_curve,
    "heatmap": _cmd_heatmap,
    "phase-curve": _cmd_phase_curve,
    "optimal-alpha": _cmd_optimal_alpha,
    "substitution-rate": _cmd_substitution_rate,
    "validate": _cmd_validate,
}


def _build_parser() -> _Parser:
    parser = _Parser(prog="pcareg", description=__doc__,
                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _COMMANDS:
        cmd = sub.add_parser(name)
        cmd.add_argument("--config", default=None)
        cmd.add_argument("--seed", type=int, default=None)
        cmd.add_argument("--threads", type=int, default=None)
        cmd.add_argument("--out", default=None)
        cmd.add_argument("--format", dest="fmt", choices=("csv", "json"), default=None)
    return parser


def main(argv=None) -> int:
    try:
        args = _build_parser().parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    try:
        cfg = _load_config(args.config)
        _check_top(cfg)
        seed = args.seed if args.seed is not None else int(cfg.get("seed", 0))
        if not 0 <= seed < 2**64:
            raise ConfigError(f"seed must be an unsigned 64-bit integer, got {seed}")
        threads = args.threads if args.threads is not None else 1
        if threads < 1:
            raise ConfigError("threads must be >= 1")
        out = args.out if args.out is not None else cfg.get("out")
        fmt = args.fmt if args.fmt is not None else cfg.get("format", "csv")
        columns, rows, code = _COMMANDS[args.command](cfg, seed, threads)
        _write_table(columns, rows, out, fmt)
        return code
    except (NumericError, SingularityError) as e:
        print(f"numeric error: {e}", file=sys.stderr)
        return 2
    except (ConfigError, DomainError) as e:
        print(f"config error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
