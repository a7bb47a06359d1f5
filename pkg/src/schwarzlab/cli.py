"""Command-line front end.

Exit codes: 0 success or pass, 1 check failure, 2 usage or parse error, 3 inconclusive.

Every option may also come from a config file (``--config``), an INI document
whose ``[common]`` section applies to all subcommands and whose section named
after the subcommand applies to that one.  Precedence: command line, then the
file, then built-in defaults.
"""
from __future__ import annotations

import argparse
import configparser
import logging
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .boundary import (DEFAULT_LADDER, FLAG_NAMES, boundary_csv_rows, distribution_function,
                       log_grid, sample_boundary, schwarz_function, weak_l1_norm)
from .catalog import CATALOG
from .formats import ParseError, read_domain, read_measure, write_csv, write_json
from .logdet import (TailFitError, I_f, angular_kernel_identity, companion_identity,
                     identity_record, jensen_check, logdet_profile, p_power_identity)
from .measure import schwarz_values
from .potential import (ConstructionError, InsufficientSamplesError, WalkConfig, choose_radii,
                        liminf_t_omega, omega_from_walks, single_slit_oracle, walk_on_spheres)

log = logging.getLogger("schwarzlab")

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_INCONCLUSIVE = 0, 1, 2, 3


class UsageError(Exception):
    pass


def _floats(text: str) -> list:
    text = str(text).strip()
    return [float(x) for x in text.split(",") if x.strip()] if text else []


def _complexes(text: str) -> list:
    text = str(text).strip()
    return [complex(x.strip().replace(" ", "")) for x in text.split(",") if x.strip()] if text else []


def _int(text) -> int:
    return int(float(text)) if "e" in str(text).lower() else int(text)


# name: (type, default, help)
COMMON = {
    "out": (str, "out", "output directory (created if absent)"),
    "format": (str, "csv", "table format: csv or json"),
}
SOURCE = {
    "measure": (str, None, "measure description file"),
    "catalog": (str, None, f"catalog entry: {', '.join(CATALOG)}"),
    "n": (_int, 2**16, "number of angles (power of two)"),
    "ladder_depth": (_int, len(DEFAULT_LADDER), "radial ladder 1 - 10^-k for k = 1..depth"),
}
TGRID = {
    "t_min": (float, 1e-2, "smallest t of the distribution grid"),
    "t_max": (float, 1e6, "largest t of the distribution grid"),
    "per_decade": (_int, 512, "grid points per decade"),
}
MONTE_CARLO = {
    "seed": (_int, None, "RNG seed (required)"),
    "epsilon": (float, 1e-4, "absorption distance"),
    "walks": (_int, 100_000, "walks per estimate"),
    "max_steps": (_int, 100_000, "steps before a walk times out"),
    "far_field": (float, 1e6, "radius beyond which walks are counted as far excursions"),
}
OPTIONS = {
    "transform": {**COMMON, **SOURCE},
    "distribution": {**COMMON, **SOURCE, **TGRID},
    "logdet": {**COMMON, **SOURCE},
    "identities": {**COMMON,
                   "r_grid": (str, "0.1,10,20", "r grid as min,max,count (log spaced)"),
                   "t_grid": (str, "0.1,10,20", "t grid as min,max,count (log spaced)"),
                   "lambdas": (str, "0.5j,1j,2j,3j", "comma-separated λ values"),
                   "ps": (str, "0.2,0.5,0.9", "comma-separated p values in (0, 1)"),
                   "tol": (float, 1e-4, "relative tolerance"),
                   "stress": (str, "1j:0.999", "extra λ:p rows checked at 1e-2"),
                   "with_catalog": (str, "", "catalog entry for the companion identity")},
    "wos": {**COMMON, **MONTE_CARLO,
            "domain": (str, None, "domain description file"),
            "t": (str, "", "comma-separated thresholds t")},
    "construct": {**COMMON, **MONTE_CARLO,
                  "generations": (_int, 3, "number of radii r_1..r_N"),
                  "max_radius": (float, 1e30, "give up beyond this candidate radius")},
    "verify": {**COMMON, **SOURCE},
    "counterexample": {**COMMON, "depth": (_int, 8, "number of rungs K")},
}
HELP = {
    "transform": "boundary samples and disc values of a Schwarz integral",
    "distribution": "distribution function m_f(t) and weak-L1 functionals",
    "logdet": "logarithmic determinant u_f, I_f and the Jensen chain",
    "identities": "angular kernel and p-power identities on parameter grids",
    "wos": "walk-on-spheres harmonic measure ω(t) of a slit domain",
    "construct": "radius selection r_1 < r_2 < ... with Monte Carlo certificates",
    "verify": "full condition report for a catalog entry or measure file",
    "counterexample": "step function with vanishing tail liminf outside every L^p",
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="schwarzlab", description=__doc__.split("\n")[0])
    p.add_argument("--version", action="version", version=__version__)
    p.add_argument("-v", "--verbose", action="store_true", help="progress messages on stderr")
    sub = p.add_subparsers(dest="command", required=True)
    for cmd, opts in OPTIONS.items():
        sp = sub.add_parser(cmd, help=HELP[cmd], description=HELP[cmd])
        sp.add_argument("--config", help="INI config file ([common] and [%s] sections)" % cmd)
        for name, (typ, default, text) in opts.items():
            shown = "" if default is None else f" (default {default})"
            sp.add_argument("--" + name.replace("_", "-"), dest=name, type=typ,
                            default=argparse.SUPPRESS, help=text + shown)
    return p


def resolve(cmd: str, cli: dict, config_path: str | None) -> dict:
    """Merge defaults, config file and command line (in increasing priority)."""
    opts = OPTIONS[cmd]
    values = {k: v[1] for k, v in opts.items()}
    if config_path:
        cp = configparser.ConfigParser()
        if not cp.read(config_path, encoding="utf-8"):
            raise UsageError(f"cannot read config file {config_path}")
        for section in ("common", cmd):
            if cp.has_section(section):
                for key, raw in cp.items(section):
                    key = key.replace("-", "_")
                    if key not in opts:
                        if section == cmd:
                            raise UsageError(f"{config_path}: unknown key {key!r} in [{section}]")
                        continue
                    try:
                        values[key] = opts[key][0](raw)
                    except ValueError as exc:
                        raise UsageError(f"{config_path}: bad value for {key}: {exc}") from None
    values.update({k: v for k, v in cli.items() if k in opts})
    return values


# ------------------------------------------------------------------ helpers

def _source(cfg):
    if cfg.get("measure") and cfg.get("catalog"):
        raise UsageError("give either --measure or --catalog, not both")
    if cfg.get("measure"):
        mu = read_measure(cfg["measure"])
        return schwarz_function(mu, mu.label), mu, mu.label, None
    if cfg.get("catalog"):
        if cfg["catalog"] not in CATALOG:
            raise UsageError(f"unknown catalog entry {cfg['catalog']!r}")
        e = CATALOG[cfg["catalog"]]
        return e.f, e.measure, e.name, e
    raise UsageError("one of --measure or --catalog is required")


def _ladder(depth: int):
    if not 3 <= depth <= 15:
        raise UsageError("ladder depth must be between 3 and 15")
    return tuple(1.0 - 10.0 ** (-k) for k in range(1, depth + 1))


def _samples(cfg):
    f, mu, name, entry = _source(cfg)
    n = cfg["n"]
    if n < 2**10 or n & (n - 1):
        raise UsageError("--n must be a power of two >= 1024")
    return sample_boundary(f, n, _ladder(cfg["ladder_depth"])), f, mu, name, entry


def _table(cfg, stem, header, rows):
    out = Path(cfg["out"])
    rows = list(rows)
    if cfg["format"] == "json":
        write_json(out / f"{stem}.json", {"columns": list(header), "rows": rows})
    elif cfg["format"] == "csv":
        write_csv(out / f"{stem}.csv", header, rows)
    else:
        raise UsageError("--format must be csv or json")


def _walk_config(cfg) -> WalkConfig:
    if cfg.get("seed") is None:
        raise UsageError("--seed is required for Monte Carlo subcommands")
    try:
        return WalkConfig(cfg["epsilon"], cfg["max_steps"], cfg["walks"], cfg["seed"], cfg["far_field"])
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _mc_meta(wc: WalkConfig) -> dict:
    return {"seed": wc.seed, "epsilon": wc.epsilon, "walks": wc.n_walks,
            "max_steps": wc.max_steps, "far_field_radius": wc.far_field_radius}


# ------------------------------------------------------------------ subcommands

def cmd_transform(cfg) -> int:
    s, f, mu, name, _ = _samples(cfg)
    _table(cfg, "boundary", ("theta", "re", "im", "flag"), boundary_csv_rows(s))
    r = np.linspace(0.0, 0.9, 10)
    th = -math.pi + 2.0 * math.pi * np.arange(64) / 64
    R, T = np.meshgrid(r, th, indexing="ij")
    vals = f(R * np.exp(1j * T))
    rows = zip(R.ravel(), T.ravel(), vals.real.ravel(), vals.imag.ravel())
    _table(cfg, "disc", ("r", "theta", "re", "im"), rows)
    write_json(Path(cfg["out"]) / "transform.json",
               {"source": name, "n": s.n, "ladder": list(s.radii),
                "flags": {FLAG_NAMES[k]: int(np.count_nonzero(s.flags == k)) for k in FLAG_NAMES}})
    return EXIT_OK


def cmd_distribution(cfg) -> int:
    from .verdict import hv_limit, tail_proxy

    s, f, mu, name, _ = _samples(cfg)
    t = log_grid(cfg["t_min"], cfg["t_max"], cfg["per_decade"])
    d = distribution_function(s, t)
    _table(cfg, "distribution", ("t", "m_f"), zip(d.t, d.m))
    w = weak_l1_norm(d)
    tail = tail_proxy(d)
    hv = hv_limit(d, mu.singular_mass() if mu is not None else None)
    tw = d.window()[0]
    write_json(Path(cfg["out"]) / "distribution.json",
               {"source": name, "n": s.n, "weak_l1": w.value, "weak_l1_t": w.t_at,
                "weak_l1_edge": w.edge, "resolved_window": [tw[0], tw[-1]],
                "tail_liminf_proxy": tail.value, "tail_probe_R": tail.R,
                "tail_probes": tail.probes, "tail_divergent": tail.divergent,
                "hv_limit": hv.limit, "hv_band": hv.band, "hv_predicted": hv.predicted,
                "blowup_angles": d.n_blowup})
    return EXIT_OK


def cmd_logdet(cfg) -> int:
    s, f, mu, name, _ = _samples(cfg)
    t = np.geomspace(1e-3, 1e6, 9 * 16 + 1)
    phi = -math.pi + 2.0 * math.pi * np.arange(64) / 64
    w = np.concatenate([1j * t, -1j * t] + [r * np.exp(1j * phi) for r in (0.5, 1.0, 2.0)])
    prof = logdet_profile(s, w)
    _table(cfg, "logdet", ("w_re", "w_im", "u"), prof.csv_rows())
    summary = {"source": name, "n": s.n}
    code = EXIT_OK
    try:
        res = I_f(s)
        jc = jensen_check(s, np.geomspace(0.05, 5.0, 12), I=res.value, n_theta=256)
        summary.update({"I_f": res.value, "core": res.core, "near_zero": res.near_zero,
                        "near_zero_bound": res.near_zero_bound, "far_tail": res.far_tail,
                        "t_min": res.t_min, "t_max": res.t_max, "jensen_ok": jc.ok,
                        "jensen_witness": jc.witness,
                        "jensen": {"r": jc.r, "mu": jc.mu, "M_er": jc.M_er, "M_r": jc.M_r,
                                   "two_I_r": jc.linear_bound}})
        code = EXIT_OK if jc.ok else EXIT_FAIL
    except (ValueError, TailFitError) as exc:
        summary["I_f"] = None
        summary["note"] = str(exc)
        code = EXIT_INCONCLUSIVE
    write_json(Path(cfg["out"]) / "logdet.json", summary)
    return code


def _grid(spec: str):
    bits = _floats(spec)
    if len(bits) != 3 or bits[2] < 1:
        raise UsageError(f"grid {spec!r} must be min,max,count with count >= 1")
    lo, hi, k = bits
    if not 0 < lo <= hi:
        raise UsageError(f"grid {spec!r} needs 0 < min <= max")
    return np.geomspace(lo, hi, int(k))


def cmd_identities(cfg) -> int:
    rs, ts = _grid(cfg["r_grid"]), _grid(cfg["t_grid"])
    lams, ps = _complexes(cfg["lambdas"]), _floats(cfg["ps"])
    if not lams or not ps:
        raise UsageError("empty λ or p grid")
    if any(not 0 < p < 1 for p in ps):
        raise UsageError("p values must lie in (0, 1)")
    rows = []
    ang_tol = min(cfg["tol"], 1e-6)
    for r in rs:
        for t in ts:
            lhs, rhs = angular_kernel_identity(float(r), float(t))
            rows.append(("angular", float(r), float(t), ang_tol, identity_record(lhs, rhs, ang_tol), ""))
    for lam in lams:
        for p in ps:
            lhs, rhs = p_power_identity(lam, p)
            rows.append(("p-power", lam, p, cfg["tol"], identity_record(lhs, rhs, cfg["tol"]), ""))
    for item in filter(None, (x.strip() for x in cfg["stress"].split(","))):
        lam_s, p_s = item.split(":")
        lam, p = complex(lam_s), float(p_s)
        lhs, rhs = p_power_identity(lam, p)
        rows.append(("p-power", lam, p, 1e-2, identity_record(lhs, rhs, 1e-2),
                     "cot(πp/2) near 0: relaxed tolerance"))
    if cfg["with_catalog"]:
        e = CATALOG.get(cfg["with_catalog"])
        if e is None:
            raise UsageError(f"unknown catalog entry {cfg['with_catalog']!r}")
        s = sample_boundary(e.f, 2**16)
        for p in ps:
            lhs, rhs = companion_identity(s, p)
            rows.append(("companion", e.name, p, 1e-3, identity_record(lhs, rhs, 1e-3), ""))

    def a_str(a):
        return f"{a.real:.17g}{a.imag:+.17g}j" if isinstance(a, complex) else a

    table = [(k, a_str(a), b, rec["lhs"], rec["rhs"], rec["abs_err"], rec["rel_err"], tol,
              rec["pass"], note) for k, a, b, tol, rec, note in rows]
    _table(cfg, "identities", ("kind", "a", "b", "lhs", "rhs", "abs_err", "rel_err", "tol", "pass",
                               "note"), table)
    ok = all(rec["pass"] for *_, rec, _ in rows)
    write_json(Path(cfg["out"]) / "identities.json",
               {"all_pass": ok, "count": len(rows),
                "failures": [list(r) for r in table if not r[8]]})
    return EXIT_OK if ok else EXIT_FAIL


def cmd_wos(cfg) -> int:
    if not cfg.get("domain"):
        raise UsageError("--domain is required")
    d = read_domain(cfg["domain"])
    ts = _floats(cfg["t"])
    if not ts:
        raise UsageError("give at least one threshold with --t")
    wc = _walk_config(cfg)
    walks = walk_on_spheres(0j, d, wc)
    rows, ests = [], []
    for t in ts:
        if d.bounded and t > d.b.max():
            rows.append((t, 0.0, 0.0))
            ests.append({"t": t, "estimate": 0.0, "stderr": 0.0, "note": "target empty"})
            continue
        e = omega_from_walks(t, walks)
        rows.append((t, e.value, e.standard_error))
        rec = {"t": t, "estimate": e.value, "stderr": e.standard_error, "note": e.note}
        if len(d.slits) == 1 and d.bounded:
            a, b = d.slits[0]
            rec["oracle"] = single_slit_oracle(0j, (a, b), (max(t, a), b))
        ests.append(rec)
    _table(cfg, "omega", ("t", "omega", "stderr"), rows)
    write_json(Path(cfg["out"]) / "wos.json",
               {"domain": [list(s) for s in d.slits], "n": walks.n_walks,
                "timeouts": walks.n_timeouts, "escaped": walks.n_escaped,
                "far_excursions": walks.n_far,
                "hit_fractions": walks.hit_fractions(len(d.slits)), "seed": wc.seed,
                "config": _mc_meta(wc), "estimates": ests})
    return EXIT_OK


def cmd_construct(cfg) -> int:
    wc = _walk_config(cfg)
    n = cfg["generations"]
    if n < 1:
        raise UsageError("--generations must be >= 1")
    out = Path(cfg["out"])

    def progress(gen, cand, est):
        log.info("generation %d: r=%g h=%.5f ± %.5f", gen, cand, est.value, est.standard_error)

    meta = {"generations": n, "seed": wc.seed, "config": _mc_meta(wc), "max_radius": cfg["max_radius"]}
    try:
        radii, certs = choose_radii(n, wc, cfg["max_radius"], progress)
    except ConstructionError as exc:
        write_json(out / "construct.json", {**meta, "status": "failed", "message": str(exc),
                                            "history": [list(h) for h in exc.history]})
        log.error("%s", exc)
        return EXIT_FAIL
    probes = liminf_t_omega(radii, wc)
    _table(cfg, "probe", ("n", "t", "t_omega", "stderr", "bound"),
           [(p.n, p.t, p.t_omega, p.standard_error, "" if p.bound is None else p.bound)
            for p in probes])
    write_json(out / "construct.json", {**meta, "status": "certified", "radii": radii,
                                        "certificates": [c.to_dict() for c in certs]})
    return EXIT_OK


def cmd_verify(cfg) -> int:
    from .verdict import FAIL, INCONCLUSIVE, run_conditions

    s, f, mu, name, entry = _samples(cfg)
    rep = run_conditions(f, name, mu, s=s)
    doc = rep.to_dict()
    if entry is not None:
        doc["designed_failures"] = sorted(entry.designed_failures)
    write_json(Path(cfg["out"]) / "report.json", doc)
    values = {"i": rep.smirnov_defect, "ii": rep.kolmogorov_constant, "iii": rep.hv_limit_estimate,
              "iv": rep.f0_imag, "tail": rep.tail_liminf_proxy, "a2": rep.a2_proxy,
              "theorem2": rep.theorem2_bound, "recovery": rep.recovered_total_mass}
    rows = [(name, k, v, "" if values.get(k) is None else values[k]) for k, v in rep.verdicts.items()]
    _table(cfg, "summary", ("function", "condition", "verdict", "value"), rows)
    overall = rep.overall
    return {FAIL: EXIT_FAIL, INCONCLUSIVE: EXIT_INCONCLUSIVE}.get(overall, EXIT_OK)


def cmd_counterexample(cfg) -> int:
    from .counterexample import (construct_tail_counterexample, gap_tail_values,
                                 log_lp_partial_sums)

    h = construct_tail_counterexample(cfg["depth"])
    _table(cfg, "steps", ("start", "end", "log_value"), h.intervals())
    gaps = gap_tail_values(h)
    bounds = -np.arange(1, h.depth) * math.log(2.0)
    _table(cfg, "gaps", ("j", "log_t", "log_tail", "log_bound"),
           zip(range(1, h.depth), h.gap_probes_log, gaps, bounds))
    lp_rows, growth = [], {}
    for p in (0.1, 0.3, 0.5, 1.0):
        sums = log_lp_partial_sums(h, p)
        lp_rows += [(p, k + 1, v) for k, v in enumerate(sums)]
        growth[str(p)] = bool(np.all(np.diff(sums) >= math.log(2.0)))
    _table(cfg, "lp_sums", ("p", "K", "log_partial_sum"), lp_rows)
    gaps_ok = bool(np.all(gaps <= bounds))
    write_json(Path(cfg["out"]) / "counterexample.json",
               {"depth": h.depth, "requested_depth": h.requested_depth, "truncated": h.truncated,
                "growth": h.growth, "gap_bound_ok": gaps_ok, "lp_doubling": growth})
    return EXIT_OK if gaps_ok and all(growth.values()) else EXIT_FAIL


COMMANDS = {
    "transform": cmd_transform, "distribution": cmd_distribution, "logdet": cmd_logdet,
    "identities": cmd_identities, "wos": cmd_wos, "construct": cmd_construct,
    "verify": cmd_verify, "counterexample": cmd_counterexample,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = vars(parser.parse_args(argv))
    logging.basicConfig(level=logging.INFO if args.pop("verbose") else logging.WARNING,
                        format="%(levelname)s %(message)s", stream=sys.stderr)
    cmd = args.pop("command")
    config = args.pop("config", None)
    try:
        cfg = resolve(cmd, args, config)
        return COMMANDS[cmd](cfg)
    except (UsageError, ParseError, FileNotFoundError) as exc:
        print(f"schwarzlab {cmd}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except InsufficientSamplesError as exc:
        print(f"schwarzlab {cmd}: {exc}", file=sys.stderr)
        return EXIT_INCONCLUSIVE


if __name__ == "__main__":
    sys.exit(main())
