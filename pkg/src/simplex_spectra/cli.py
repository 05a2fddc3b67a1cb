"""Command-line interface: ``simplex-spectra <command> [options]``.

Every command reads an optional JSON ``--config`` whose keys mirror the long
flags (dashes become underscores); explicit flags win.  Files go to
``--output-dir`` together with ``manifest.json``, which lists each file with
its SHA-256 and the fully resolved configuration.  All randomness is seeded,
so repeated runs produce byte-identical files.

Exit codes: 0 success, 2 configuration error, 3 numerical alarm, 4 a
requested check against the closed-form values failed.
"""
import argparse
import csv
import hashlib
import io
import json
import math
import os
import sys

from . import _parallel, localization, params, quadrature, sde, spectral
from .errors import ConfigError, NumericalAlarm
from .forms import DiffusionModel
from .ineq_lab import (
    build_family,
    exponent_summary,
    functional_triples,
    nash_ratio,
    p_alpha,
    p_prime,
    sharpness_scan,
)
from .poly import MultiPoly, monomials_up_to, parse

EXIT_OK, EXIT_CONFIG, EXIT_ALARM, EXIT_MISMATCH = 0, 2, 3, 4
GAP_TOL = 1e-6
GEM_SIGMAS = 3.0


class CheckFailed(Exception):
    pass


# value parsers


def _floats(v):
    if isinstance(v, str):
        v = [s for s in v.replace(" ", "").split(",") if s]
    try:
        return [float(x) for x in v]
    except (TypeError, ValueError):
        raise ConfigError(f"expected a comma-separated list of numbers, got {v!r}") from None


def _int(v):
    try:
        f = float(v)
    except (TypeError, ValueError):
        raise ConfigError(f"expected an integer, got {v!r}") from None
    if not math.isfinite(f) or f != int(f):
        raise ConfigError(f"expected an integer, got {v!r}")
    return int(f)


def _float(v):
    try:
        return float(v)
    except (TypeError, ValueError):
        raise ConfigError(f"expected a number, got {v!r}") from None


def _bool(v):
    if isinstance(v, bool):
        return v
    if str(v).lower() in ("1", "true", "yes"):
        return True
    if str(v).lower() in ("0", "false", "no"):
        return False
    raise ConfigError(f"expected a boolean, got {v!r}")


def _strs(v):
    if isinstance(v, str):
        return [s for s in v.replace(" ", "").split(",") if s]
    return [str(s) for s in v]


def _opt(conv):
    return lambda v: None if v is None else conv(v)


COMMON = {
    "alpha": (_floats, None),
    "n": (_int, None),
    "seed": (_int, 0),
    "threads": (_opt(_int), None),
    "output_dir": (_opt(str), None),
}

COMMANDS = {
    "gap": {
        "models": (_strs, ["dirichlet", "fv"]),
        "degree": (_int, 3),
        "k": (_int, 1),
        "samples": (_int, 1_000_000),
        "assert_paper": (_bool, False),
    },
    "spectrum": {"models": (_strs, ["dirichlet"]), "degree": (_int, 3), "k": (_int, 5)},
    "sharpness": {
        "families": (_strs, ["bump", "corner_complement", "corner_all"]),
        "models": (_strs, ["dirichlet", "fv"]),
        "eps_grid": (_opt(_floats), None),
        "samples": (_int, 1_000_000),
        "method": (str, "stratified"),
    },
    "nash-scan": {
        "family": (str, "bump"),
        "model": (str, "dirichlet"),
        "exponent": (_opt(_float), None),
        "eps_grid": (_opt(_floats), None),
        "samples": (_int, 1_000_000),
        "method": (str, "stratified"),
    },
    "localize": {"gamma": (_opt(_float), None), "c0_beta": (_float, 1.0), "k_min": (_int, 4), "k_max": (_int, 12)},
    "simulate": {
        "dt": (_float, 1e-3),
        "steps": (_int, 1_000_000),
        "burn_in": (_int, 10_000),
        "x0": (_opt(_floats), None),
        "thin": (_int, 100),
        "observable": (str, "x1"),
        "decay": (_bool, True),
    },
    "sample": {"count": (_int, 1000)},
    "moments": {"degree": (_int, 2)},
}

HELP = {
    "gap": "spectral gaps by Galerkin (Monte Carlo for GEM)",
    "spectrum": "smallest nonzero Galerkin eigenvalues",
    "sharpness": "test-function families, slopes and forced exponents",
    "nash-scan": "Nash ratios of centred family members",
    "localize": "assembled super-Poincare rate exponent",
    "simulate": "Euler-Maruyama trajectory, moments and decay rate",
    "sample": "i.i.d. draws from the Dirichlet law",
    "moments": "exact moment table",
}


def resolve_config(command, args):
    """Defaults, then the JSON file, then explicit flags."""
    spec = dict(COMMON, **COMMANDS[command])
    raw = {}
    if args.config:
        try:
            with open(args.config) as fh:
                raw = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}") from None
        if not isinstance(raw, dict):
            raise ConfigError("config must be a JSON object")
        unknown = sorted(set(raw) - set(spec))
        if unknown:
            raise ConfigError(f"unknown config keys for {command!r}: {', '.join(unknown)}")
    for key in spec:
        val = getattr(args, key, None)
        if val is not None:
            raw[key] = val
    cfg = {}
    for key, (conv, default) in spec.items():
        cfg[key] = conv(raw[key]) if key in raw else default
    if cfg["alpha"] is None:
        raise ConfigError("alpha is required")
    if cfg["n"] is None:
        cfg["n"] = len(cfg["alpha"]) - 1
    return cfg


# output


class Output:
    def __init__(self, directory):
        self.directory = directory
        self.files = {}

    def add(self, name, text):
        self.files[name] = text

    def add_json(self, name, obj):
        self.add(name, json.dumps(obj, indent=2, sort_keys=True) + "\n")

    def add_csv(self, name, header, rows):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([("%.17g" % v) if isinstance(v, float) else v for v in row])
        self.add(name, buf.getvalue())

    def flush(self, command, cfg):
        if self.directory is None:
            return
        os.makedirs(self.directory, exist_ok=True)
        listing = []
        for name in sorted(self.files):
            data = self.files[name].encode()
            with open(os.path.join(self.directory, name), "wb") as fh:
                fh.write(data)
            listing.append({"file": name, "sha256": hashlib.sha256(data).hexdigest(), "bytes": len(data)})
        # thread cap and destination do not affect results; leaving them out keeps manifests comparable
        resolved = {k: v for k, v in cfg.items() if k not in ("threads", "output_dir")}
        manifest = {"command": command, "config": resolved, "files": listing}
        with open(os.path.join(self.directory, "manifest.json"), "w") as fh:
            fh.write(json.dumps(manifest, indent=2, sort_keys=True) + "\n")


def _quad(cfg):
    return quadrature.QuadratureSpec(cfg.get("method", "mc"), cfg["samples"], cfg["seed"])


# commands


def closed_form_gap(model, p):
    """Closed-form spectral gap of each model."""
    m = DiffusionModel.parse(model)
    if m is DiffusionModel.FLEMING_VIOT or p.n == 1:
        return p.alpha_total
    if m is DiffusionModel.DIRICHLET:
        return p.last
    return p.alpha[-2] + p.alpha[-1]


def cmd_gap(cfg, p, out):
    rows, report, failures = [], [], []
    for name in cfg["models"]:
        m = DiffusionModel.parse(name)
        expected = closed_form_gap(m, p)
        if m is DiffusionModel.GEM:
            est = spectral.gem_gap_estimate(p, cfg["degree"], _quad(cfg))
            gap, se = est.gap, est.stderr
            ok = abs(gap - expected) <= GEM_SIGMAS * se + 1e-12
        else:
            rec = spectral.gap_report(m, p, cfg["degree"], min(cfg["k"], _basis_size(p, cfg["degree"]) - 1))
            gap, se = rec["gap"], 0.0
            ok = abs(gap - expected) <= GAP_TOL
        print(f"model={m.value} gap={gap:.6f} expected={expected:.6f}" + (f" se={se:.2g}" if se else ""))
        rows.append((m.value, gap, se, expected, int(ok)))
        report.append({"model": m.value, "gap": gap, "stderr": se, "expected": expected, "match": ok})
        if not ok:
            failures.append(m.value)
    out.add_csv("gap.csv", ["model", "gap", "stderr", "expected", "match"], rows)
    out.add_json("gap.json", {"alpha": list(p.alpha), "degree": cfg["degree"], "results": report})
    if cfg["assert_paper"] and failures:
        raise CheckFailed(f"gap differs from the closed form for: {', '.join(failures)}")


def _basis_size(p, degree):
    return len(monomials_up_to(p.n, degree))


def cmd_spectrum(cfg, p, out):
    for name in cfg["models"]:
        m = DiffusionModel.parse(name)
        sp = spectral.spectrum(m, p, cfg["degree"], cfg["k"])
        print(f"model={m.value} " + " ".join(f"{v:.6f}" for v in sp.eigenvalues))
        out.add_csv(
            f"spectrum_{m.value}.csv",
            ["index", "eigenvalue", "degree"],
            [(i + 1, v, d) for i, (v, d) in enumerate(zip(sp.eigenvalues, sp.degrees))],
        )


def cmd_sharpness(cfg, p, out):
    if cfg["eps_grid"] is not None and not cfg["eps_grid"]:
        raise ConfigError("eps_grid is empty")
    summary = exponent_summary(p)
    reports = []
    for fam_name in cfg["families"]:
        fam = build_family(fam_name, p, cfg["eps_grid"])
        res = sharpness_scan(fam, cfg["models"], _quad(cfg))
        rep = res.report(summary)
        reports.append(rep)
        out.add(f"{fam.kind.value}_m2.csv", res.m2_curve.to_csv())
        for key, curve in res.beta_curves.items():
            out.add(f"{fam.kind.value}_beta_{key}.csv", curve.to_csv())
        forced = " ".join(f"{k}={v:.3f}" for k, v in rep["forced_measured"].items())
        print(f"family={fam.kind.value} m2_slope={rep['measured_slope']:.3f} theory={rep['theory_slope']:.3f} forced: {forced}")
    print(f"p_alpha={summary.p_alpha:g} p_tilde={summary.p_tilde:g} p_prime={summary.p_prime:g} sharp={summary.sharp}")
    out.add_json("sharpness.json", reports)


def cmd_nash_scan(cfg, p, out):
    m = DiffusionModel.parse(cfg["model"])
    fam = build_family(cfg["family"], p, cfg["eps_grid"])
    exponent = cfg["exponent"]
    if exponent is None:
        exponent = p_prime(p) if m is DiffusionModel.FLEMING_VIOT else p_alpha(p)
    rows = []
    for k, eps in enumerate(fam.eps_grid):
        q = quadrature.QuadratureSpec(cfg["method"], cfg["samples"], cfg["seed"] + k)
        (t,) = functional_triples([m], p, fam.member(eps), q, center=True)
        ratio = nash_ratio(t, exponent)
        rows.append((eps, t.m2, t.m1, t.en, ratio))
        print(f"eps={eps:.6g} ratio={ratio:.6g}")
    out.add_csv("nash_scan.csv", ["eps", "m2", "m1", "energy", "ratio"], rows)
    out.add_json("nash_scan.json", {"family": fam.kind.value, "model": m.value, "exponent": exponent,
                                    "max_ratio": max(r[-1] for r in rows)})


def cmd_localize(cfg, p, out):
    lc = localization.make_config(p, cfg["gamma"], cfg["c0_beta"])
    ks = tuple(range(cfg["k_min"], cfg["k_max"] + 1))
    report = localization.localization_report(p, lc, ks)
    out.add("assembly.csv", localization.assembly_curve(p, lc, ks).to_csv())
    out.add_json("localization.json", report)
    print(f"assembled_exponent={report['assembled_exponent']:.6f} p_alpha={report['p_alpha']:g} match={report['match']}")
    if not report["match"]:
        raise CheckFailed("assembled exponent differs from p_alpha")


def cmd_simulate(cfg, p, out):
    x0 = cfg["x0"] if cfg["x0"] is not None else [a / p.alpha_total for a in p.head]
    sc = sde.SimConfig(cfg["dt"], cfg["steps"], cfg["burn_in"], cfg["seed"])
    traj = sde.simulate(p, x0, sc)
    out.add("trajectory.csv", traj.to_csv(cfg["thin"]))
    rep = sde.moment_report(p, traj)
    if cfg["decay"]:
        obs = parse(cfg["observable"], p.n) if "*" in cfg["observable"] else _coordinate(cfg["observable"], p.n)
        est = sde.autocorr_gap(traj, obs)
        rep["decay"] = {"observable": str(obs), "rate": est.rate, "stderr": est.stderr, "lags": list(est.lags),
                        "expected_gap": closed_form_gap(DiffusionModel.DIRICHLET, p)}
        print(f"decay_rate={est.rate:.4f} se={est.stderr:.2g}")
    out.add_json("moments.json", rep)
    for row in rep["moments"]:
        print(f"{row['monomial']}: {row['time_average']:.5f} exact={row['exact']:.5f} z={row['z']:.2f}")
    print(f"clamp_fraction={traj.clamp_fraction:.4g}")


def _coordinate(text, n):
    name = text.strip()
    if not name.startswith("x"):
        raise ConfigError(f"observable {text!r} is neither a coordinate nor a polynomial")
    try:
        i = int(name[1:]) - 1
    except ValueError:
        raise ConfigError(f"bad observable {text!r}") from None
    if not 0 <= i < n:
        raise ConfigError(f"observable {text!r} outside x1..x{n}")
    return MultiPoly.variable(n, i)


def cmd_sample(cfg, p, out):
    if cfg["count"] < 1:
        raise ConfigError("count must be >= 1")
    xs = params.sample(p, cfg["seed"], cfg["count"])
    out.add_csv("samples.csv", [f"x{i + 1}" for i in range(p.n)], [tuple(float(v) for v in row) for row in xs])
    print(f"wrote {cfg['count']} samples")


def cmd_moments(cfg, p, out):
    if cfg["degree"] < 0:
        raise ConfigError("degree must be >= 0")
    rows = []
    for k in monomials_up_to(p.n, cfg["degree"]):
        v = params.moment(p, k)
        rows.append((" ".join(str(e) for e in k), v))
        print(f"E[x^{k}] = {v:.12g}")
    out.add_csv("moments.csv", ["exponent", "moment"], rows)


RUNNERS = {
    "gap": cmd_gap,
    "spectrum": cmd_spectrum,
    "sharpness": cmd_sharpness,
    "nash-scan": cmd_nash_scan,
    "localize": cmd_localize,
    "simulate": cmd_simulate,
    "sample": cmd_sample,
    "moments": cmd_moments,
}


def build_parser():
    parser = argparse.ArgumentParser(prog="simplex-spectra", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name, spec in COMMANDS.items():
        sp = sub.add_parser(name, help=HELP[name])
        sp.add_argument("--config", help="JSON file with option values")
        for key in list(COMMON) + list(spec):
            flags = ["--" + key.replace("_", "-")]
            if key == "models" and "model" not in spec:
                flags.append("--model")
            conv = (COMMON.get(key) or spec[key])[0]
            if conv is _bool:
                sp.add_argument(*flags, dest=key, action="store_const", const=True, default=None)
            else:
                sp.add_argument(*flags, dest=key, default=None)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = resolve_config(args.command, args)
        if cfg["threads"] is not None:
            if cfg["threads"] < 1:
                raise ConfigError("threads must be >= 1")
            os.environ[_parallel.THREADS_ENV] = str(cfg["threads"])
        p = params.validate(cfg["alpha"], cfg["n"])
        out = Output(cfg["output_dir"])
        RUNNERS[args.command](cfg, p, out)
        out.flush(args.command, cfg)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalAlarm as exc:
        print(f"numerical alarm: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_ALARM
    except CheckFailed as exc:
        print(f"check failed: {exc}", file=sys.stderr)
        return EXIT_MISMATCH
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
