"""Command line interface.

Every subcommand writes one JSON document (stdout or --out) and optional CSV
side files.  Exit status: 0 success, 1 bad input, 2 failed mathematical
verification.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys

import numpy as np

from . import acceptance, rmt
from .curve import curve_l_polynomial, inverse_zeros, parse_curve, point_counts
from .errors import FFSummatoryError, InputError, OutOfRangeError, VerificationError
from .explicit import (
    bound_kfree,
    bound_residue_class,
    bound_totient,
    build_model,
    empirical_sup,
    global_normalizations,
    normalized_error,
    oscillatory_sum,
    residual_constant,
)
from .limits import (
    density_kfree,
    density_totient,
    empirical_cf,
    empirical_distribution,
    exact_density,
    fourier_transform,
    kolmogorov_distance,
    sign_densities,
    torus_distribution,
)
from .series import (
    MAX_XMAX,
    oracle_kfree,
    oracle_totient,
    places_from_l,
    summatory_kfree,
    summatory_totient,
)

log = logging.getLogger("ffsummatory")


class UsageError(InputError):
    code = "Usage"


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _floats(text):
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise UsageError(f"expected comma separated numbers, got {text!r}") from None


def _write_csv(path, header, rows):
    d = os.path.dirname(path)
    if d:
        os.makedirs(d, exist_ok=True)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def _curve_block(C, L, zeros):
    return {
        "curve": C.id,
        "field": {"p": C.field.p, "n": C.field.n, "q": C.q, "spec": str(C.field),
                  "modulus": list(C.field.modulus)},
        "g": C.genus,
        "L": [str(b) for b in L.b],
        "h": str(L.class_number()),
        "zeros": zeros.to_json(),
        "simple": zeros.simple,
        "max_rh_deviation": zeros.max_rh_deviation(),
    }


def _load(args):
    C = parse_curve(args.curve)
    L = curve_l_polynomial(C)
    return C, L, inverse_zeros(L)


# --- subcommands ------------------------------------------------------------------

def cmd_zeta(args):
    C, L, z = _load(args)
    out = _curve_block(C, L, z)
    out["point_counts"] = point_counts(C)
    return out, 0


def _check_xmax(x):
    if not 1 <= x <= MAX_XMAX:
        raise OutOfRangeError(f"--xmax must be in 1..{MAX_XMAX}")


def cmd_summatory(args):
    C, L, _ = _load(args)
    _check_xmax(args.xmax)
    kinds = ["kfree", "totient"] if args.kind == "both" else [args.kind]
    out = {"curve": C.id, "xmax": args.xmax, "tables": [], "oracle": None}
    places = places_from_l(L, args.xmax) if args.oracle else None
    status, agree = 0, True
    for kind in kinds:
        tab = summatory_kfree(L, args.k, args.xmax, C.id) if kind == "kfree" else summatory_totient(L, args.xmax, C.id)
        out["tables"].append(tab.to_json())
        if args.csv_dir:
            name = f"{kind}{args.k if kind == 'kfree' else ''}.csv"
            with open(os.path.join(args.csv_dir, name), "w") as fh:
                fh.write(tab.to_csv())
        if args.oracle:
            orc = (oracle_kfree(places, args.k, args.xmax, C.id) if kind == "kfree"
                   else oracle_totient(places, L.q, args.xmax, C.id))
            agree &= orc.values == tab.values
    if args.oracle:
        out["oracle"] = {"places": [str(p) for p in places], "equal": agree}
        if not agree:
            status = 2
    return out, status


def cmd_explicit(args):
    C, L, z = _load(args)
    _check_xmax(args.xmax)
    k = args.k if args.kind == "kfree" else None
    model = build_model(L, z, args.kind, k)
    tab = summatory_kfree(L, k, args.xmax, C.id) if args.kind == "kfree" else summatory_totient(L, args.xmax, C.id)
    out = {"curve": C.id, "model": model.to_json()}
    status = 0
    try:
        out["residual"] = residual_constant(tab, model.mt, model, (2, args.xmax))
        out["residual"]["constant"] = True
    except VerificationError as exc:
        out["residual"] = {"constant": False, "error": exc.to_json()}
        status = 2
    if args.kind == "kfree":
        bk = bound_kfree(model)
        out["bound"] = {"B_LI_conditional": bk["B"], "B_triangle": bk["B"], "argmax_a": bk["argmax_a"],
                        "residue_classes": [bound_residue_class(model, a) for a in range(k)]}
    else:
        B = bound_totient(model)
        out["bound"] = {"B_LI_conditional": B, "B_triangle": B}
    out["bound"]["empirical_sup"] = empirical_sup(model, args.N)
    out["bound"]["empirical_N"] = args.N
    out["normalizations"] = global_normalizations(model, k)
    if args.csv:
        rows = []
        for X in range(1, args.xmax + 1):
            r = normalized_error(tab, model.mt, X).r_tilde
            e = oscillatory_sum(model, X)
            rows.append([X, repr(r), repr(e), repr(r - e)])
        _write_csv(args.csv, ["X", "r_tilde_exact", "E_model", "residual"], rows)
    return out, status


def cmd_distribution(args):
    C, L, z = _load(args)
    k = args.k if args.kind == "kfree" else None
    model = build_model(L, z, args.kind, k)
    dens = density_kfree if args.kind == "kfree" else density_totient
    sweep = []
    for beta in args.betas:
        est = dens(model, beta, args.samples, args.seed, args.threads).to_json()
        est["exact_g1"] = exact_density(model, beta)
        sweep.append(est)
    edf = empirical_distribution(model, args.N)
    tor = torus_distribution(model, args.samples, args.seed, args.threads)
    fourier = []
    for y in args.ys:
        try:
            mu = fourier_transform(model, y)
        except FFSummatoryError as exc:
            mu = exc.to_json()
        fourier.append({"y": y, "mu_hat": mu, "empirical_cf": empirical_cf(edf, y)})
    out = {
        "curve": C.id, "kind": args.kind, "k": k, "seed": args.seed, "N": args.N, "samples": args.samples,
        "density": sweep, "fourier": fourier, "signs": sign_densities(edf),
        "kolmogorov_model_vs_torus": kolmogorov_distance(edf, tor),
    }
    if args.csv_dir:
        _write_csv(os.path.join(args.csv_dir, "density.csv"), ["beta", "delta", "stderr"],
                   [[s["beta"], repr(s["delta"]), repr(s["stderr"])] for s in sweep])
        _write_csv(os.path.join(args.csv_dir, "fourier.csv"), ["y", "mu_hat", "empirical_cf"],
                   [[f["y"], f["mu_hat"], repr(f["empirical_cf"])] for f in fourier])
        idx = np.linspace(0, edf.size - 1, min(edf.size, 1000)).astype(int)
        _write_csv(os.path.join(args.csv_dir, "edf.csv"), ["x", "edf"],
                   [[repr(float(edf.samples[i])), repr((i + 1) / edf.size)] for i in idx])
    return out, 0


def cmd_haar(args):
    est = [rmt.haar_probability_phi(args.g, b, args.samples, args.seed, args.threads).to_json() for b in args.betas]
    vals = rmt.haar_phi_values(args.g, args.samples, args.seed, args.threads)
    out = {"g": args.g, "seed": args.seed, "samples": args.samples, "estimates": est,
           "phi_min": float(vals[0]), "phi_median": float(np.median(vals))}
    if args.csv:
        _write_csv(args.csv, ["beta", "mu", "stderr"], [[e["beta"], repr(e["mu"]), repr(e["stderr"])] for e in est])
    return out, 0


def cmd_family(args):
    rep = rmt.family_sweep(args.q, args.g, args.kind, args.k, args.betas, args.haar_samples,
                           args.seed, args.threads, keep_rows=bool(args.csv))
    if args.csv:
        rows = [[" ".join(map(str, r["f"])), r["h"], " ".join(repr(t) for t in r["theta"]),
                 r["simple"], repr(r["btilde"]), repr(r["phi"])] for r in rep.rows]
        _write_csv(args.csv, ["f", "h", "theta", "simple", "btilde", "phi"], rows)
    return rep.to_json(), 0


def cmd_selftest(args):
    rep = acceptance.selftest(seed=args.seed, threads=args.threads, fault=args.inject_fault)
    return rep, 0 if rep["all_pass"] else 2


# --- parser -----------------------------------------------------------------------

def build_parser():
    p = _Parser(prog="ffsummatory", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)

    def common(sp, curve=True, seed=False):
        if curve:
            sp.add_argument("--curve", required=True, help='"q=<p>[^n];f=c0,c1,..."')
        if seed:
            sp.add_argument("--seed", type=int, required=True)
            sp.add_argument("--threads", type=int, default=1)
        sp.add_argument("--out", help="write JSON here instead of stdout")

    sp = sub.add_parser("zeta", help="L-polynomial, class number, inverse zeros")
    common(sp)
    sp.set_defaults(fn=cmd_zeta)

    sp = sub.add_parser("summatory", help="exact Q_k / F_Phi tables")
    common(sp)
    sp.add_argument("--k", type=int, default=2)
    sp.add_argument("--xmax", type=int, default=1024)
    sp.add_argument("--kind", choices=["kfree", "totient", "both"], default="both")
    sp.add_argument("--oracle", action="store_true", help="compare with the Euler product oracle")
    sp.add_argument("--csv-dir")
    sp.set_defaults(fn=cmd_summatory)

    sp = sub.add_parser("explicit", help="error-term model, residual check, bounds")
    common(sp)
    sp.add_argument("--kind", choices=["kfree", "totient"], default="kfree")
    sp.add_argument("--k", type=int, default=2)
    sp.add_argument("--xmax", type=int, default=40)
    sp.add_argument("--N", type=int, default=10**5, help="X range for the empirical sup")
    sp.add_argument("--csv")
    sp.set_defaults(fn=cmd_explicit)

    sp = sub.add_parser("distribution", help="densities, Fourier transform, EDF comparison")
    common(sp, seed=True)
    sp.add_argument("--kind", choices=["kfree", "totient"], default="kfree")
    sp.add_argument("--k", type=int, default=2)
    sp.add_argument("--N", type=int, default=10**6)
    sp.add_argument("--samples", type=int, default=10**6)
    sp.add_argument("--betas", type=_floats, default=[0.5, 1.0, 2.0])
    sp.add_argument("--ys", type=_floats, default=[0.5, 1.0, 2.0])
    sp.add_argument("--csv-dir")
    sp.set_defaults(fn=cmd_distribution)

    sp = sub.add_parser("haar", help="USp(2g) Haar statistics of phi")
    common(sp, curve=False, seed=True)
    sp.add_argument("--g", type=int, required=True)
    sp.add_argument("--samples", type=int, default=10**6)
    sp.add_argument("--betas", type=_floats, default=[1.0, 1.2, 1.5, 2.0])
    sp.add_argument("--csv")
    sp.set_defaults(fn=cmd_haar)

    sp = sub.add_parser("family", help="sweep over H_{2g+1,q}")
    common(sp, curve=False, seed=True)
    sp.add_argument("--q", required=True, help="p or p^n")
    sp.add_argument("--g", type=int, required=True)
    sp.add_argument("--kind", choices=["kfree", "totient"], default="totient")
    sp.add_argument("--k", type=int, default=2)
    sp.add_argument("--betas", type=_floats, default=[1.0, 1.2, 1.5, 2.0])
    sp.add_argument("--haar-samples", type=int, default=10**6)
    sp.add_argument("--csv")
    sp.set_defaults(fn=cmd_family)

    sp = sub.add_parser("selftest", help="run the acceptance suite")
    common(sp, curve=False, seed=True)
    sp.add_argument("--inject-fault", action="store_true", help="corrupt one L coefficient")
    sp.set_defaults(fn=cmd_selftest)
    return p


def _validate(args):
    if getattr(args, "threads", 1) < 1:
        raise UsageError("--threads must be >= 1")
    for name in ("N", "samples", "haar_samples"):
        if getattr(args, name, 1) < 0 or (name != "haar_samples" and getattr(args, name, 1) == 0):
            raise UsageError(f"--{name.replace('_', '-')} must be positive")
    if getattr(args, "k", 2) < 2:
        raise UsageError("--k must be >= 2")


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            raise UsageError(parser.format_usage().strip())
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                            format="%(levelname)s %(name)s: %(message)s")
        _validate(args)
        if getattr(args, "csv_dir", None):
            os.makedirs(args.csv_dir, exist_ok=True)
        out, status = args.fn(args)
    except FFSummatoryError as exc:
        status = 2 if isinstance(exc, VerificationError) else 1
        print(json.dumps(exc.to_json()), file=sys.stdout)
        print(f"error: {exc}", file=sys.stderr)
        return status
    text = json.dumps(out, indent=1, sort_keys=True, default=str)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    return status


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
