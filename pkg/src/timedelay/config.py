"""Experiment configuration: schema, defaults, cross-field checks and builders.

A configuration is a YAML mapping.  ``normalize`` fills every default so the
echoed configuration documents the run completely; ``cross_check`` performs
the checks that need several sections at once.  Every problem is reported as
a ``ConfigError`` carrying the dotted path of the field.
"""
from __future__ import annotations

import copy
import hashlib
import json
import math

import numpy as np
import yaml

from . import dispersion as _disp
from .exceptions import ConfigError, ContractError
from .grid import Grid, gaussian, hermite_function
from .localization import make_characteristic, make_plateau_bump, make_plateau_power
from .model import FriedrichsModel, hermite, hermite_combination, lorentzian, shifted_zero_profile
from .sojourn import EXTRAPOLATIONS, S_SOURCES, SojournConfig

__all__ = [
    "EXPERIMENTS", "load", "normalize", "cross_check", "config_hash", "dump",
    "build_grid", "build_dispersion", "build_model", "build_state",
    "build_localization", "build_sojourn",
]

EXPERIMENTS = ("localization_properties", "integral_formula", "friedrichs_time_delay",
               "stationary_trace", "wave_operator_decay")

SECTIONS = {
    "localization_properties": ("localization_properties",),
    "integral_formula": ("grid", "dispersion", "state", "localization", "sojourn"),
    "friedrichs_time_delay": ("grid", "model", "state", "localization", "sojourn"),
    "stationary_trace": ("model", "stationary"),
    "wave_operator_decay": ("grid", "model", "state", "wave_operator"),
}

TOLERANCES = {
    "localization_properties": {"identity": 1e-7, "oracle": 1e-7},
    "integral_formula": {"relative_error": 0.02},
    "friedrichs_time_delay": {"relative_gap": 0.05, "delay_gap": 1e-6, "free_identity": 1e-6},
    "stationary_trace": {"s_oracle": 1e-6, "kernel_oracle": 1e-6, "unitarity": 1e-8,
                         "rank_one_cross": 1e-10, "product_cross": 1e-6},
    "wave_operator_decay": {"min_exponent": 2.0, "min_r_squared": 0.99, "s_agreement": 1e-3,
                            "support_fraction": 0.05},
}

DEFAULTS = {
    "grid": {"n_points": 16384, "x_min": -200.0, "x_max": 200.0},
    "dispersion": "friedrichs",
    "state": {"kind": "gaussian", "center": 0.0, "width": 1.0, "momentum": 0.0},
    "sojourn": {
        "r_schedule": [2.0, 4.0, 8.0, 16.0, 32.0], "t_cutoff_factor": 1.5, "dt": 0.01,
        "quad_tol": 1e-9, "extrapolation": "power_fit", "t_margin": 10.0,
        "sample_stride": 10, "density_pad": 2, "interaction_time": 30.0,
        "s_source": "stationary", "tail_tol": 1e-4,
    },
    "stationary": {"x_min": -10.0, "x_max": 10.0, "n_points": 401, "step": 0.05, "tol": 1e-6,
                   "eigenvalue_scan": 401},
    "wave_operator": {"T_max": 30.0, "dt": 0.01, "n_fit": 40},
    "localization_properties": {"n_samples": 100, "dims": [1, 2, 3], "n_oracle": 10},
    "output": {"dir": "out", "prefix": None},
}

LOCALIZATION_DEFAULTS = {
    "bump": {"plateau_radius": 0.5, "decay_scale": 1.0},
    "characteristic": {"intervals": [[-1.0, 1.0]]},
    "plateau_power": {"plateau_radius": 1.0, "rho": 2.0},
}

PROFILE_DEFAULTS = {
    "lorentzian": {"order": 0},
    "hermite": {"order": 0},
    "hermite_combination": {"coeffs": [1.0]},
    "shifted_zero": {"a": -1.0},
}

STATE_DEFAULTS = {
    "gaussian": {"center": 0.0, "width": 1.0, "momentum": 0.0},
    "hermite": {"order": 0, "center": 0.0},
}

# experiments whose quantities involve the integral of f
_NEEDS_INTEGRABLE_F = ("integral_formula", "friedrichs_time_delay")


# -- scalar checks --------------------------------------------------------------


def _number(path, v, positive=False, nonneg=False):
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(path, f"expected a number, got {v!r}")
    v = float(v)
    if not math.isfinite(v):
        raise ConfigError(path, "must be finite")
    if positive and not v > 0:
        raise ConfigError(path, f"must be positive, got {v:g}")
    if nonneg and v < 0:
        raise ConfigError(path, f"must be non-negative, got {v:g}")
    return v


def _integer(path, v, minimum=None):
    if isinstance(v, bool) or not isinstance(v, int):
        raise ConfigError(path, f"expected an integer, got {v!r}")
    if minimum is not None and v < minimum:
        raise ConfigError(path, f"must be at least {minimum}, got {v}")
    return int(v)


def _choice(path, v, options):
    if v not in options:
        raise ConfigError(path, f"must be one of {list(options)}, got {v!r}")
    return v


def _mapping(path, v):
    if not isinstance(v, dict):
        raise ConfigError(path, f"expected a mapping, got {type(v).__name__}")
    return v


def _list(path, v, min_len=1):
    if not isinstance(v, (list, tuple)):
        raise ConfigError(path, f"expected a list, got {type(v).__name__}")
    if len(v) < min_len:
        raise ConfigError(path, f"needs at least {min_len} entries")
    return list(v)


def _merge(path, given, defaults):
    given = _mapping(path, given if given is not None else {})
    extra = sorted(set(given) - set(defaults))
    if extra:
        raise ConfigError(f"{path}.{extra[0]}" if path else extra[0],
                          f"unknown field; allowed: {sorted(defaults)}")
    out = copy.deepcopy(defaults)
    out.update(copy.deepcopy(given))
    return out


# -- sections --------------------------------------------------------------------


def _grid(v):
    g = _merge("grid", v, DEFAULTS["grid"])
    n = _integer("grid.n_points", g["n_points"], minimum=2)
    if n & (n - 1):
        raise ConfigError("grid.n_points", f"must be a power of two, got {n}")
    lo, hi = _number("grid.x_min", g["x_min"]), _number("grid.x_max", g["x_max"])
    if not hi > lo:
        raise ConfigError("grid.x_max", "must exceed grid.x_min")
    return {"n_points": n, "x_min": lo, "x_max": hi}


def _dispersion(v):
    if not isinstance(v, str):
        raise ConfigError("dispersion", f"expected a name, got {v!r}")
    if v.strip().lower() == "friedrichs":
        return "friedrichs"
    try:
        return _disp.builtin(v).name
    except (ContractError, ValueError) as e:
        raise ConfigError("dispersion", str(e)) from None


def _state(v):
    v = _mapping("state", v if v is not None else {})
    kind = _choice("state.kind", v.get("kind", "gaussian"), tuple(STATE_DEFAULTS))
    s = _merge("state", {k: x for k, x in v.items() if k != "kind"}, STATE_DEFAULTS[kind])
    if kind == "gaussian":
        s["center"] = _number("state.center", s["center"])
        s["width"] = _number("state.width", s["width"], positive=True)
        s["momentum"] = _number("state.momentum", s["momentum"])
    else:
        s["order"] = _integer("state.order", s["order"], minimum=0)
        s["center"] = _number("state.center", s["center"])
    return {"kind": kind, **s}


def _localization(v):
    v = _mapping("localization", v if v is not None else {})
    kind = _choice("localization.kind", v.get("kind", "bump"), tuple(LOCALIZATION_DEFAULTS))
    s = _merge("localization", {k: x for k, x in v.items() if k != "kind"},
               LOCALIZATION_DEFAULTS[kind])
    if kind == "characteristic":
        ivs = _list("localization.intervals", s["intervals"])
        out = []
        for i, iv in enumerate(ivs):
            p = f"localization.intervals[{i}]"
            iv = _list(p, iv, 2)
            if len(iv) != 2:
                raise ConfigError(p, "expected [lo, hi]")
            a, b = _number(p, iv[0]), _number(p, iv[1])
            if not b > a:
                raise ConfigError(p, "needs lo < hi")
            out.append([a, b])
        s["intervals"] = out
    else:
        s["plateau_radius"] = _number("localization.plateau_radius", s["plateau_radius"],
                                      positive=True)
        if kind == "bump":
            s["decay_scale"] = _number("localization.decay_scale", s["decay_scale"],
                                       positive=True)
        else:
            s["rho"] = _number("localization.rho", s["rho"], positive=True)
    return {"kind": kind, **s}


def _model(v):
    entries = _list("model", v if v is not None else [], min_len=0)
    out = []
    for i, e in enumerate(entries):
        p = f"model[{i}]"
        e = _mapping(p, e)
        prof = _choice(f"{p}.profile", e.get("profile", "lorentzian"), tuple(PROFILE_DEFAULTS))
        rest = {k: x for k, x in e.items() if k not in ("profile", "coupling")}
        s = _merge(p, rest, PROFILE_DEFAULTS[prof])
        s["coupling"] = _number(f"{p}.coupling", e.get("coupling", 1.0))
        if "order" in s:
            s["order"] = _integer(f"{p}.order", s["order"], minimum=0)
        if prof == "hermite_combination":
            c = _list(f"{p}.coeffs", s["coeffs"])
            s["coeffs"] = [_number(f"{p}.coeffs[{j}]", x) for j, x in enumerate(c)]
            if not any(s["coeffs"]):
                raise ConfigError(f"{p}.coeffs", "must not all vanish")
        if prof == "shifted_zero":
            s["a"] = _number(f"{p}.a", s["a"])
            if s["a"] == 0:
                raise ConfigError(f"{p}.a", "must be nonzero")
        out.append({"profile": prof, **s})
    return out


def _sojourn(v):
    s = _merge("sojourn", v, DEFAULTS["sojourn"])
    r = _list("sojourn.r_schedule", s["r_schedule"])
    s["r_schedule"] = [_number(f"sojourn.r_schedule[{i}]", x, positive=True)
                       for i, x in enumerate(r)]
    if any(b <= a for a, b in zip(s["r_schedule"], s["r_schedule"][1:])):
        raise ConfigError("sojourn.r_schedule", "must be strictly increasing")
    for key in ("t_cutoff_factor", "dt", "quad_tol", "interaction_time", "tail_tol"):
        s[key] = _number(f"sojourn.{key}", s[key], positive=True)
    s["t_margin"] = _number("sojourn.t_margin", s["t_margin"], nonneg=True)
    s["sample_stride"] = _integer("sojourn.sample_stride", s["sample_stride"], minimum=1)
    s["density_pad"] = _integer("sojourn.density_pad", s["density_pad"], minimum=1)
    _choice("sojourn.extrapolation", s["extrapolation"], EXTRAPOLATIONS)
    _choice("sojourn.s_source", s["s_source"], S_SOURCES)
    return s


def _stationary(v):
    s = _merge("stationary", v, DEFAULTS["stationary"])
    s["x_min"] = _number("stationary.x_min", s["x_min"])
    s["x_max"] = _number("stationary.x_max", s["x_max"])
    if not s["x_max"] > s["x_min"]:
        raise ConfigError("stationary.x_max", "must exceed stationary.x_min")
    s["n_points"] = _integer("stationary.n_points", s["n_points"], minimum=2)
    s["step"] = _number("stationary.step", s["step"], positive=True)
    s["tol"] = _number("stationary.tol", s["tol"], positive=True)
    s["eigenvalue_scan"] = _integer("stationary.eigenvalue_scan", s["eigenvalue_scan"], minimum=3)
    return s


def _wave_operator(v):
    s = _merge("wave_operator", v, DEFAULTS["wave_operator"])
    s["T_max"] = _number("wave_operator.T_max", s["T_max"], positive=True)
    s["dt"] = _number("wave_operator.dt", s["dt"], positive=True)
    s["n_fit"] = _integer("wave_operator.n_fit", s["n_fit"], minimum=3)
    return s


def _properties(v):
    s = _merge("localization_properties", v, DEFAULTS["localization_properties"])
    s["n_samples"] = _integer("localization_properties.n_samples", s["n_samples"], minimum=1)
    s["n_oracle"] = _integer("localization_properties.n_oracle", s["n_oracle"], minimum=0)
    dims = _list("localization_properties.dims", s["dims"])
    s["dims"] = [_integer(f"localization_properties.dims[{i}]", d, minimum=1)
                 for i, d in enumerate(dims)]
    return s


_SECTION_NORMALIZERS = {
    "grid": _grid, "dispersion": _dispersion, "state": _state, "localization": _localization,
    "model": _model, "sojourn": _sojourn, "stationary": _stationary,
    "wave_operator": _wave_operator, "localization_properties": _properties,
}


# -- whole configuration -----------------------------------------------------------


def load(path):
    """Read a YAML file into a mapping; syntax errors become ``ConfigError``."""
    try:
        with open(path, encoding="utf-8") as fh:
            raw = yaml.safe_load(fh)
    except OSError as e:
        raise ConfigError("", f"cannot read {path}: {e.strerror}") from None
    except yaml.YAMLError as e:
        raise ConfigError("", f"invalid YAML in {path}: {e}") from None
    return _mapping("", raw if raw is not None else {})


def normalize(raw, seed=None):
    """Schema-check ``raw`` and return it with every default made explicit."""
    raw = _mapping("", raw)
    if "experiment" not in raw:
        raise ConfigError("experiment", f"required; one of {list(EXPERIMENTS)}")
    exp = _choice("experiment", raw["experiment"], EXPERIMENTS)
    sections = SECTIONS[exp]
    allowed = {"experiment", "seed", "tolerances", "output", *sections}
    extra = sorted(set(raw) - allowed)
    if extra:
        raise ConfigError(extra[0], f"not used by experiment {exp}; allowed: {sorted(allowed)}")
    out = {"experiment": exp}
    out["seed"] = _integer("seed", raw.get("seed", 0), minimum=0)
    if seed is not None:
        out["seed"] = _integer("seed", seed, minimum=0)
    for name in sections:
        default = DEFAULTS.get(name)
        out[name] = _SECTION_NORMALIZERS[name](raw.get(name, copy.deepcopy(default)))
    tol = _merge("tolerances", raw.get("tolerances"), TOLERANCES[exp])
    out["tolerances"] = {k: _number(f"tolerances.{k}", x, nonneg=True) for k, x in tol.items()}
    outp = _merge("output", raw.get("output"), DEFAULTS["output"])
    if not isinstance(outp["dir"], str) or not outp["dir"]:
        raise ConfigError("output.dir", "expected a directory name")
    if outp["prefix"] is None:
        outp["prefix"] = exp
    if not isinstance(outp["prefix"], str) or not outp["prefix"] or "/" in outp["prefix"]:
        raise ConfigError("output.prefix", "expected a plain file stem")
    out["output"] = outp
    return out


def config_hash(cfg):
    """SHA-256 of the canonical JSON form, ignoring output placement."""
    body = {k: v for k, v in cfg.items() if k != "output"}
    text = json.dumps(body, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def dump(cfg):
    return yaml.safe_dump(cfg, sort_keys=False, default_flow_style=None)


# -- builders ----------------------------------------------------------------------


def _wrap(path, fn, *args, **kw):
    try:
        return fn(*args, **kw)
    except ContractError as e:
        if isinstance(e, ConfigError):
            raise
        raise ConfigError(path, str(e)) from None


def build_grid(cfg):
    g = cfg["grid"]
    return _wrap("grid", Grid, g["n_points"], g["x_min"], g["x_max"])


def build_dispersion(cfg):
    """``None`` stands for the Friedrichs picture ``H0 = Q``."""
    name = cfg.get("dispersion", "friedrichs")
    return None if name == "friedrichs" else _wrap("dispersion", _disp.builtin, name)


def _profile(e):
    kind = e["profile"]
    if kind == "lorentzian":
        return lorentzian(e["order"])
    if kind == "hermite":
        return hermite(e["order"])
    if kind == "hermite_combination":
        return hermite_combination(e["coeffs"])
    return shifted_zero_profile(e["a"])


def build_model(cfg):
    ents = cfg["model"]
    return FriedrichsModel.from_profiles([_profile(e) for e in ents],
                                         [e["coupling"] for e in ents])


def build_state(cfg, grid):
    s = cfg["state"]
    if s["kind"] == "gaussian":
        return gaussian(grid, s["center"], s["width"], s["momentum"])
    return hermite_function(grid, s["order"], s["center"])


def build_localization(cfg, dim=1):
    s = cfg["localization"]
    if s["kind"] == "bump":
        return _wrap("localization", make_plateau_bump, dim, s["plateau_radius"], s["decay_scale"])
    if s["kind"] == "characteristic":
        return _wrap("localization.intervals", make_characteristic, s["intervals"])
    return _wrap("localization", make_plateau_power, dim, s["plateau_radius"], s["rho"])


def build_sojourn(cfg):
    s = dict(cfg["sojourn"])
    s["r_schedule"] = tuple(s["r_schedule"])
    return _wrap("sojourn", SojournConfig, **s)


# -- cross-field checks ---------------------------------------------------------------


def _state_band(s, n_sigma=8.0):
    """Position and momentum intervals holding the state up to ``exp(-n_sigma^2/2)``."""
    if s["kind"] == "gaussian":
        w = s["width"]
        sx, sk = w / math.sqrt(2.0), 1.0 / (w * math.sqrt(2.0))
        return ((s["center"] - n_sigma * sx, s["center"] + n_sigma * sx),
                (s["momentum"] - n_sigma * sk, s["momentum"] + n_sigma * sk))
    reach = math.sqrt(2.0 * s["order"] + 1.0) + n_sigma
    return (s["center"] - reach, s["center"] + reach), (-reach, reach)


def _energy_range(h, band, n=2001):
    p = np.linspace(band[0], band[1], n)
    e = h.h(p)
    lo, hi = float(np.min(e)), float(np.max(e))
    for c in h.critical_points:
        if band[0] <= c <= band[1]:
            v = float(h.h(np.array(c)))
            lo, hi = min(lo, v), max(hi, v)
    return lo, hi


def cross_check(cfg):
    """Checks spanning several sections; returns a list of informational notes."""
    exp = cfg["experiment"]
    notes = []
    if "localization" in cfg and exp in _NEEDS_INTEGRABLE_F:
        loc = cfg["localization"]
        if loc["kind"] == "plateau_power" and loc["rho"] <= 1.0:
            raise ConfigError("localization.rho",
                              f"f decays like |x|^-{loc['rho']:g}; rho <= 1 makes the integral "
                              "of f non-integrable, which this experiment needs")
    if "model" in cfg:
        try:
            err = build_model(cfg).check_orthonormal(None, tol=1e-8)
        except ContractError as e:
            raise ConfigError("model", str(e)) from None
        notes.append(f"model: profiles orthonormal to {err:.1e}")
    if "state" in cfg and "grid" in cfg:
        g, s = cfg["grid"], cfg["state"]
        xb, kb = _state_band(s)
        L = g["x_max"] - g["x_min"]
        margin = 0.1 * L
        if xb[0] < g["x_min"] + margin or xb[1] > g["x_max"] - margin:
            raise ConfigError("state.center",
                              f"state occupies [{xb[0]:.3g}, {xb[1]:.3g}], outside the interior "
                              f"of the box [{g['x_min']:g}, {g['x_max']:g}]")
        k_max = math.pi * g["n_points"] / L
        if exp in ("friedrichs_time_delay", "wave_operator_decay"):
            if "sojourn" in cfg:
                sj = cfg["sojourn"]
                reach = max(sj["t_cutoff_factor"] * sj["r_schedule"][-1] + sj["t_margin"],
                            sj["interaction_time"])
            else:
                reach = cfg["wave_operator"]["T_max"]
            need = max(abs(kb[0]), abs(kb[1])) + reach
            if need > 0.8 * k_max:
                raise ConfigError("grid.n_points",
                                  f"momentum reach {need:.3g} exceeds the usable band "
                                  f"{0.8 * k_max:.3g}; refine the grid")
        elif max(abs(kb[0]), abs(kb[1])) > 0.8 * k_max:
            raise ConfigError("grid.n_points", "state momentum band is not resolved by the grid")
        h = build_dispersion(cfg) if "dispersion" in cfg else None
        if h is not None and h.critical_values:
            lo, hi = _energy_range(h, kb)
            d = h.distance_to_critical(lo, hi)
            need = 1e-3 * h.margin_factor
            if d < need:
                raise ConfigError(
                    "state.momentum",
                    f"kappa-window violation: momentum band [{kb[0]:.3g}, {kb[1]:.3g}] has energies "
                    f"[{lo:.3g}, {hi:.3g}] within {d:.3g} of the critical values "
                    f"{list(h.critical_values)} of {h.name}")
            notes.append(f"state: energy band [{lo:.3g}, {hi:.3g}] is {d:.3g} from kappa(h)")
    return notes
