"""Command-line front end: kicked-rotor {simulate,oracle,scan,map,fit,reduce}.

Every option can come from a flat TOML config (`--config`, keys are the long
option names with underscores); flags given on the command line win. Outputs
are written only after the whole computation succeeded.
"""

import argparse
import sys

import numpy as np
import tomli
from scipy.constants import atomic_mass

from . import __version__
from .ensemble import SourceSpec, average_incoherently, scan_initial_momentum
from .errors import InvalidParameter, NumericalFailure
from .io import atomic_write, matrix_text, profile_columns, read_matrix, read_table, table_text
from .observables import EnergyScan, direct_variance, fit_orders, reduce_image, repeat_statistics
from .oracle import ladder_amplitudes, second_moment
from .propagator import SpatialGrid, init_plane_wave, init_wavepacket, momentum_distribution, run_schedule
from .distributions import Profile
from .schedule import KickSchedule, to_dimensionless
from .units import DEFAULT_WAVELENGTH, RB87_MASS_U, make_context

EXIT_CONFIG = 2
EXIT_NUMERICAL = 3

DEFAULTS = {
    "engine": "propagator",
    "l": None,
    "period_us": None,
    "kicks": 2,
    "phid": 1.0,
    "pi": 0.0,
    "sigma": None,
    "nodes": 33,
    "span": 3.0,
    "grid_points": 2**16,
    "periods": 256,
    "sigma_w_um": 0.0,
    "tau_fraction": 0.0,
    "substeps": 32,
    "mass_u": RB87_MASS_U,
    "wavelength_nm": DEFAULT_WAVELENGTH * 1e9,
    "workers": 1,
    "pmax": 20.0,
    "format": "csv",
    "out": None,
    "sweep": "pi",
    "start": 0.0,
    "stop": 2.0,
    "steps": 9,
    "distributions": False,
    "min_prob": 1e-12,
    "max_order": 8,
    "seed_width": None,
    "beta": None,
    "axis": 0,
    "p0": None,
    "dp": None,
    "inputs": None,
    "input": None,
}

TYPES = {
    "engine": str, "l": float, "period_us": float, "kicks": int, "phid": float, "pi": float,
    "sigma": float, "nodes": int, "span": float, "grid_points": int, "periods": int,
    "sigma_w_um": float, "tau_fraction": float, "substeps": int, "mass_u": float,
    "wavelength_nm": float, "workers": int, "pmax": float, "format": str, "out": str,
    "sweep": str, "start": float, "stop": float, "steps": int, "distributions": bool,
    "min_prob": float, "max_order": int, "seed_width": float, "beta": float, "axis": int,
    "p0": float, "dp": float, "inputs": list, "input": str,
}

CHOICES = {"engine": ("propagator", "oracle"), "format": ("csv", "json"), "sweep": ("pi", "n")}


_SHARED = ("engine", "l", "period_us", "kicks", "phid", "pi", "grid_points", "periods", "sigma_w_um",
           "tau_fraction", "substeps", "mass_u", "wavelength_nm", "format")
_SOURCE = ("sigma", "nodes", "span")
# keys echoed into each command's output header (enough to re-run it)
META_KEYS = {
    "simulate": _SHARED + ("pmax", "min_prob"),
    "oracle": ("l", "period_us", "kicks", "phid", "pi", "mass_u", "wavelength_nm", "min_prob", "format"),
    "scan": _SHARED + _SOURCE + ("sweep", "start", "stop", "steps", "distributions", "pmax"),
    "map": _SHARED + _SOURCE + ("pmax",),
    "fit": ("pi", "beta", "max_order", "seed_width", "format"),
    "reduce": ("axis", "p0", "dp", "format"),
}


class ConfigError(Exception):
    pass


def _add_common(p):
    g = p.add_argument_group("run configuration")
    g.add_argument("--config", metavar="PATH", help="flat TOML file of option values")
    g.add_argument("--engine", choices=CHOICES["engine"])
    per = g.add_mutually_exclusive_group()
    per.add_argument("--l", type=float, help="kick period as l, T = l T_T / 2")
    per.add_argument("--period-us", type=float, help="kick period in microseconds")
    g.add_argument("--kicks", type=int, help="number of kicks")
    g.add_argument("--phid", type=float, help="kick strength (pulse area)")
    g.add_argument("--pi", type=float, metavar="RECOILS", help="initial momentum")
    g.add_argument("--sigma", type=float, metavar="RECOILS", help="source momentum rms; enables averaging")
    g.add_argument("--nodes", type=int, help="source quadrature nodes")
    g.add_argument("--span", type=float, help="source window half-width in sigmas")
    g.add_argument("--grid-points", type=int)
    g.add_argument("--periods", type=int, help="lattice periods spanned by the box")
    g.add_argument("--sigma-w-um", type=float, help="initial packet width in um; 0 = plane wave")
    g.add_argument("--tau-fraction", type=float, help="pulse width over period; 0 = delta kicks")
    g.add_argument("--substeps", type=int, help="Strang substeps per finite pulse")
    g.add_argument("--mass-u", type=float, help="atomic mass in u")
    g.add_argument("--wavelength-nm", type=float)
    g.add_argument("--workers", type=int, help="worker processes for scan/map points")
    g.add_argument("--pmax", type=float, help="crop written momentum axes to |p| <= pmax")
    g.add_argument("--out", metavar="PATH", help="output stem; stdout when omitted")
    g.add_argument("--format", choices=CHOICES["format"])


def build_parser():
    parser = argparse.ArgumentParser(prog="kicked-rotor", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="propagate one initial momentum")
    _add_common(p)

    p = sub.add_parser("oracle", help="closed-form ladder amplitudes and <p^2>")
    _add_common(p)
    p.add_argument("--min-prob", type=float, help="omit orders below this probability")

    p = sub.add_parser("scan", help="energy versus initial momentum or kick count")
    _add_common(p)
    p.add_argument("--sweep", choices=CHOICES["sweep"])
    p.add_argument("--start", type=float)
    p.add_argument("--stop", type=float)
    p.add_argument("--steps", type=int)
    p.add_argument("--distributions", action="store_true", default=None,
                   help="also write the per-point momentum distributions")

    p = sub.add_parser("map", help="initial x final momentum map and averaged profile")
    _add_common(p)

    p = sub.add_parser("fit", help="per-order Gaussian fits of measured or simulated profiles")
    _add_common(p)
    p.add_argument("inputs", nargs="*", help="profile CSVs (momentum_recoils, probability_density)")
    p.add_argument("--max-order", type=int)
    p.add_argument("--beta", type=float, help="quasimomentum of the comb (default pi/2)")
    p.add_argument("--seed-width", type=float, help="initial Gaussian width, recoils")

    p = sub.add_parser("reduce", help="sum a 2D image into a 1D momentum profile")
    _add_common(p)
    p.add_argument("input", nargs="?", help="image matrix, whitespace or comma delimited")
    p.add_argument("--axis", type=int, help="axis to sum over (0 = rows)")
    p.add_argument("--p0", type=float, help="momentum of the first pixel, recoils")
    p.add_argument("--dp", type=float, help="momentum per pixel, recoils")
    return parser


def _coerce(key, value):
    want = TYPES[key]
    if value is None:
        return None
    if want is float and isinstance(value, (int, float)) and not isinstance(value, bool):
        value = float(value)
    if want is list and isinstance(value, str):
        value = [value]
    if not isinstance(value, want) or (want is int and isinstance(value, bool)):
        raise ConfigError(f"{key}: expected {want.__name__}, got {value!r}")
    if key in CHOICES and value not in CHOICES[key]:
        raise ConfigError(f"{key}: must be one of {CHOICES[key]}, got {value!r}")
    return value


def resolve_config(args):
    """Defaults, then the config file, then explicit flags."""
    cfg = dict(DEFAULTS)
    if args.config:
        try:
            with open(args.config, "rb") as fh:
                doc = tomli.load(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read config: {exc}") from exc
        except tomli.TOMLDecodeError as exc:
            raise ConfigError(f"malformed config {args.config}: {exc}") from exc
        for k, v in doc.items():
            if k not in DEFAULTS:
                raise ConfigError(f"unknown config key {k!r}")
            cfg[k] = _coerce(k, v)
        if cfg["l"] is not None and cfg["period_us"] is not None:
            raise ConfigError("give the period either as l or as period_us, not both")
    # a period flag replaces whichever period form the config used
    if getattr(args, "l", None) is not None:
        cfg["period_us"] = None
    if getattr(args, "period_us", None) is not None:
        cfg["l"] = None
    for k, v in vars(args).items():
        if k in DEFAULTS and v is not None and v != []:
            cfg[k] = _coerce(k, v)
    if cfg["l"] is None and cfg["period_us"] is None:
        cfg["l"] = 1.0
    return cfg


def _context(cfg):
    return make_context(cfg["mass_u"] * atomic_mass, cfg["wavelength_nm"] * 1e-9)


def _schedule(cfg, n_kicks=None):
    n = cfg["kicks"] if n_kicks is None else n_kicks
    if cfg["period_us"] is not None:
        ctx = _context(cfg)
        period = cfg["period_us"] * 1e-6
        return to_dimensionless(ctx, period, n, cfg["phid"], cfg["tau_fraction"] * period, cfg["substeps"])
    return KickSchedule.from_l(n, cfg["l"], cfg["phid"],
                               pulse_width_fraction=cfg["tau_fraction"], substeps=cfg["substeps"])


def _grid(cfg):
    return SpatialGrid(cfg["grid_points"], cfg["periods"])


def _sigma_w(cfg):
    if not cfg["sigma_w_um"]:
        return None
    return _context(cfg).length_to_dimensionless(cfg["sigma_w_um"] * 1e-6)


def _meta(command, cfg, **extra):
    keep = {k: cfg[k] for k in META_KEYS[command] if cfg[k] is not None}
    return {"command": command, "version": __version__, **keep, **extra}


def _path(cfg, kind):
    ext = "json" if cfg["format"] == "json" else "csv"
    return f"{cfg['out']}.{kind}.{ext}"


def cmd_simulate(cfg):
    sch = _schedule(cfg)
    grid = _grid(cfg)
    sw = _sigma_w(cfg)
    s0 = init_plane_wave(grid, cfg["pi"]) if sw is None else init_wavepacket(grid, sw, cfg["pi"])
    s = run_schedule(s0, sch)
    ladder, prof = momentum_distribution(s)
    keep = ladder.probabilities > cfg["min_prob"]
    meta = _meta("simulate", cfg, beta_actual=s0.beta, l_real=sch.l_real, dx=grid.dx, dp=grid.dp,
                 norm_drift=abs(s.norm() - 1.0), off_comb_mass=ladder.off_comb_mass,
                 energy_recoils=direct_variance(prof, center=2 * s0.beta),
                 second_moment_recoils=direct_variance(prof))
    comb = {"order": ladder.orders[keep], "momentum_recoils": ladder.momenta[keep],
            "probability": ladder.probabilities[keep]}
    return {
        "comb": table_text(comb, meta, cfg["format"]),
        "fine": table_text(profile_columns(prof, cfg["pmax"]), meta, cfg["format"]),
    }


def cmd_oracle(cfg):
    sch = _schedule(cfg)
    if not sch.is_talbot_multiple:
        raise ConfigError(
            f"the closed form holds only for T = l T_T/2 with integer l; got l = {sch.l_real:.6g}"
        )
    amps = ladder_amplitudes(sch.n_kicks, sch.l, cfg["pi"] / 2.0, sch.phi_d)
    prob = amps.probabilities
    keep = prob > cfg["min_prob"]
    e2 = second_moment(amps)
    meta = _meta("oracle", cfg, l_int=sch.l, beta=amps.beta, kick_argument=amps.argument,
                 second_moment_recoils=e2, energy_recoils=e2 - cfg["pi"] ** 2)
    cols = {"order": amps.orders[keep], "momentum_recoils": 2.0 * (amps.orders[keep] + amps.beta),
            "probability": prob[keep], "phase": np.angle(amps.c[keep])}
    return {"amplitudes": table_text(cols, meta, cfg["format"])}


def _source(cfg, mean):
    return SourceSpec(mean, cfg["sigma"], cfg["nodes"], cfg["span"])


def cmd_scan(cfg):
    engine = cfg["engine"]
    sw = _sigma_w(cfg)
    grid = _grid(cfg)
    if cfg["steps"] < 1:
        raise ConfigError("steps must be >= 1")
    spec = _source(cfg, cfg["pi"]) if cfg["sigma"] else None
    outputs = {}
    if cfg["sweep"] == "pi":
        sch = _schedule(cfg)
        values = np.linspace(cfg["start"], cfg["stop"], cfg["steps"])
        scan, dists = scan_initial_momentum(sch, values, spec, engine, grid, sw, cfg["workers"])
        n_col = np.full(len(values), sch.n_kicks)
        p_col = values
    else:
        kicks = np.arange(int(round(cfg["start"])), int(round(cfg["stop"])) + 1)
        energies, seconds, dists = [], [], []
        for n in kicks:
            sch = _schedule(cfg, int(n))
            s, d = scan_initial_momentum(sch, [cfg["pi"]], spec, engine, grid, sw, cfg["workers"])
            energies.append(s.energy[0])
            seconds.append(s.second_moment[0])
            dists.append(d[0])
        scan = EnergyScan("n", kicks, energies, np.zeros(len(kicks)), second_moment=seconds)
        n_col = kicks
        p_col = np.full(len(kicks), cfg["pi"])
    sch = _schedule(cfg)
    cols = {
        "p_i_recoils": p_col,
        "energy_recoils": scan.energy,
        "uncertainty": scan.uncertainty,
        "engine": [engine] * len(p_col),
        "l": np.full(len(p_col), sch.l_real),
        "n": n_col,
        "phi_d": np.full(len(p_col), sch.phi_d),
        "second_moment_recoils": scan.second_moment,
    }
    meta = _meta("scan", cfg, l_real=sch.l_real)
    outputs["scan"] = table_text(cols, meta, cfg["format"])
    if cfg["distributions"]:
        axis, rows = _distribution_rows(dists, grid, cfg["pmax"])
        label = "p_initial_recoils" if cfg["sweep"] == "pi" else "n"
        outputs["distributions"] = matrix_text(scan.values, axis, rows, row_name=label, meta=meta)
    return outputs


def _distribution_rows(dists, grid, pmax):
    import scipy.fft as sfft

    axis = sfft.fftshift(grid.p)
    rows = []
    for d in dists:
        if isinstance(d, Profile):
            rows.append(d.density)
        elif hasattr(d, "per_sample"):
            rows.append(d.density)
        else:
            rows.append(Profile.from_ladder(d, axis).density)
    sel = np.abs(axis) <= pmax
    return axis[sel], np.array(rows)[:, sel]


def cmd_map(cfg):
    if not cfg["sigma"]:
        cfg = dict(cfg, sigma=0.18)
    sch = _schedule(cfg)
    grid = _grid(cfg)
    avg = average_incoherently(sch, _source(cfg, cfg["pi"]), cfg["engine"], grid, _sigma_w(cfg), cfg["workers"])
    sel = np.abs(avg.momentum) <= cfg["pmax"]
    meta = _meta("map", cfg, l_real=sch.l_real, energy_recoils=direct_variance(avg.profile, center=cfg["pi"]),
                 cropped_mass=1.0 - float(avg.density[sel].sum() * grid.dp))
    cols = {"momentum_recoils": avg.momentum[sel], "probability_density": avg.density[sel]}
    return {
        "map": matrix_text(avg.nodes, avg.momentum[sel], avg.per_sample[:, sel], weights=avg.weights, meta=meta),
        "profile": table_text(cols, meta, cfg["format"]),
    }


def cmd_fit(cfg):
    inputs = cfg["inputs"] or []
    if not inputs:
        raise ConfigError("fit needs at least one profile file")
    beta = cfg["beta"] if cfg["beta"] is not None else cfg["pi"] / 2.0
    outputs = {}
    results = []
    for path in inputs:
        try:
            _, cols = read_table(path)
            prof = Profile(cols["momentum_recoils"], cols["probability_density"])
        except (OSError, KeyError) as exc:
            raise ConfigError(f"cannot read profile {path}: {exc}") from exc
        res, energy = fit_orders(prof.normalized(), beta, cfg["max_order"], cfg["seed_width"])
        results.append((path, prof, res))
    energies = [r.energy_about(cfg["pi"]) for _, _, r in results]
    meta = _meta("fit", cfg)
    rows = {"file": [], "order": [], "center_recoils": [], "area": [], "width_recoils": [], "fitted": []}
    for path, _, r in results:
        for k in range(len(r.orders)):
            rows["file"].append(path)
            rows["order"].append(int(r.orders[k]))
            rows["center_recoils"].append(r.centers[k])
            rows["area"].append(r.areas[k])
            rows["width_recoils"].append(r.widths[k])
            rows["fitted"].append(int(r.fitted[k]))
    outputs["orders"] = table_text(rows, meta, cfg["format"])
    summary = {
        "file": [p for p, _, _ in results],
        "energy_fit_recoils": energies,
        "energy_direct_recoils": [direct_variance(pr, center=cfg["pi"]) for _, pr, _ in results],
        "converged": [int(r.converged) for _, _, r in results],
    }
    extra = {}
    if len(results) >= 2:
        scans = [EnergyScan("p_i_recoils", [cfg["pi"]], [e], [0.0]) for e in energies]
        st = repeat_statistics(scans)
        extra = {"energy_mean_recoils": float(st.energy[0]), "energy_std_recoils": float(st.uncertainty[0])}
    outputs["energy"] = table_text(summary, _meta("fit", cfg, **extra), cfg["format"])
    return outputs


def cmd_reduce(cfg):
    if not cfg["input"]:
        raise ConfigError("reduce needs an image file")
    try:
        img = read_matrix(cfg["input"])
    except OSError as exc:
        raise ConfigError(f"cannot read image: {exc}") from exc
    axis = cfg["axis"]
    if axis not in (0, 1):
        raise ConfigError("axis must be 0 or 1")
    dp = cfg["dp"] or 1.0
    prof = reduce_image(img, axis=axis, spacing=dp)
    p0 = cfg["p0"] if cfg["p0"] is not None else 0.0
    cols = {"momentum_recoils": p0 + dp * np.arange(len(prof)), "probability_density": prof}
    return {"profile": table_text(cols, _meta("reduce", cfg), cfg["format"])}


COMMANDS = {
    "simulate": cmd_simulate,
    "oracle": cmd_oracle,
    "scan": cmd_scan,
    "map": cmd_map,
    "fit": cmd_fit,
    "reduce": cmd_reduce,
}


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = resolve_config(args)
        outputs = COMMANDS[args.command](cfg)
    except (ConfigError, InvalidParameter) as exc:
        print(f"kicked-rotor: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalFailure as exc:
        print(f"kicked-rotor: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    if cfg["out"]:
        for kind, text in outputs.items():
            atomic_write(_path(cfg, kind), text)
    else:
        sys.stdout.write(next(iter(outputs.values())))
    return 0


if __name__ == "__main__":
    sys.exit(main())
