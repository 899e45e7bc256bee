"""Command-line front end.

Subcommands: ``kernel``, ``periodic``, ``branch``, ``solitary``, ``verify``
and ``report``.  Usage errors exit with status 2, solver or verification
failures with status 1.  Outputs go to files (written atomically) or stdout.
"""
from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import __version__
from .documents import (
    atomic_write,
    branch_to_doc,
    csv_table,
    doc_to_branch,
    doc_to_solitary,
    doc_to_wave,
    dumps,
    profile_csv,
    read_document,
    report_to_doc,
    solitary_to_doc,
    wave_to_doc,
)
from .exceptions import DomainError, FormatError, WhithamError
from .kernel import KernelEvaluator, PeriodizedKernel
from .solitary import extract_solitary, period_sweep
from .solver import NEWTON_TOL, continue_in_lambda, extreme_wave, resolve
from .verify import (
    VerificationReport,
    check_holder_exponent,
    check_touching,
    verify_periodic,
    verify_solitary,
)

logger = logging.getLogger(__name__)


@dataclass
class RunConfig:
    """Validated parameters of one CLI run."""

    command: str
    P: float | None = None
    lams: list = field(default_factory=list)
    N: int | None = None
    tol: float = NEWTON_TOL
    periods: list = field(default_factory=list)
    window: float = 10.0
    sweep_tol: float = 1e-8
    quad_tol: float = 1e-13

    def validate(self):
        if self.P is not None and not (math.isfinite(self.P) and self.P > 0):
            raise DomainError("period must be positive")
        for name in ("tol", "sweep_tol", "quad_tol", "window"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise DomainError(f"{name} must be positive")
        if any(not 0 < v <= 1 for v in self.lams):
            raise DomainError("relative heights must lie in (0, 1]")
        if any(b <= a for a, b in zip(self.lams, self.lams[1:])):
            raise DomainError("relative heights must be strictly increasing")
        if any(b <= a for a, b in zip(self.periods, self.periods[1:])):
            raise DomainError("period schedule must be strictly increasing")
        if self.N is not None and (self.N < 8 or self.N % 2):
            raise DomainError("N must be an even integer >= 8")
        return self


def _floats(text):
    try:
        return [float(t) for t in str(text).split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _emit(text, path):
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        atomic_write(path, text)


def _sidecar(path):
    # versions live beside the payload so the payload itself stays reproducible
    if path in (None, "-"):
        return
    meta = {"whitham": __version__, "numpy": np.__version__}
    try:
        import scipy
        meta["scipy"] = scipy.__version__
    except ImportError:  # pragma: no cover
        pass
    atomic_write(str(path) + ".meta.json", json.dumps(meta, indent=1, sort_keys=True) + "\n")


# ---------------------------------------------------------------- commands

def cmd_kernel(args, cfg):
    ev = KernelEvaluator(quadrature_tol=cfg.quad_tol)
    x = np.linspace(args.x_min, args.x_max, args.num)
    pks = [PeriodizedKernel(P, evaluator=ev) for P in args.periods]
    header = ["x", "K", "K_reg"] + [f"K_P[{P!r}]" for P in args.periods]
    K = ev(x)
    Kr = ev.regular(x)
    cols = [pk(x, method=args.method) for pk in pks]
    rows = [[xi, K[i], Kr[i]] + [c[i] for c in cols] for i, xi in enumerate(x)]
    _emit(csv_table(header, rows), args.out)
    return 0


def _periodic_wave(cfg, adaptive, cusp=False):
    lam = cfg.lams[0]
    if cusp:
        return extreme_wave(cfg.P, lam, N=cfg.N or (1 << 16), tol=cfg.tol)
    w = continue_in_lambda(cfg.P, [lam], tol=cfg.tol, N=cfg.N).points[-1]
    return resolve(w, tol=cfg.tol) if adaptive else w


def cmd_periodic(args, cfg):
    wave = _periodic_wave(cfg, args.adaptive, args.cusp)
    _emit(dumps(wave_to_doc(wave)), args.out)
    _sidecar(args.out)
    if args.csv:
        atomic_write(args.csv, profile_csv(wave.nodes, wave.values))
    report = verify_periodic(wave)
    if args.cusp:
        chk, _ = check_holder_exponent(wave)
        report = VerificationReport(report.subject, report.checks + (chk,))
    sys.stderr.write(report.table() + "\n")
    return 0


def cmd_branch(args, cfg):
    br = continue_in_lambda(cfg.P, cfg.lams, tol=cfg.tol, N=cfg.N)
    if args.adaptive:
        from .solver import Branch
        br = Branch(br.P, tuple(resolve(w, tol=cfg.tol) for w in br))
    _emit(dumps(branch_to_doc(br)), args.out)
    _sidecar(args.out)
    if args.csv:
        rows = [(w.lam, w.mu, w.N, w.residual_norm) for w in br]
        atomic_write(args.csv, csv_table(["lam", "mu", "N", "residual"], rows))
    return 0


def _schedule(args, cfg):
    if cfg.periods:
        return cfg.periods
    P, out = args.pmin, []
    while P <= args.pmax * (1 + 1e-12):
        out.append(P)
        P *= 2
    if len(out) < 3:
        raise DomainError("schedule from --pmin/--pmax has fewer than 3 periods")
    return out


def cmd_solitary(args, cfg):
    sweep = period_sweep(cfg.lams[0], _schedule(args, cfg), window=cfg.window, tol=cfg.sweep_tol,
                         newton_tol=cfg.tol)
    wave = extract_solitary(sweep)
    _emit(dumps(solitary_to_doc(wave)), args.out)
    _sidecar(args.out)
    if args.csv:
        atomic_write(args.csv, profile_csv(wave.x, wave.samples))
    report = verify_solitary(wave)
    sys.stderr.write(report.table() + "\n")
    return 0 if report.passed else 1


def _reports_for(doc):
    kind = doc["kind"]
    if kind == "periodic_wave":
        return [verify_periodic(doc_to_wave(doc))]
    if kind == "branch":
        return [verify_periodic(w) for w in doc_to_branch(doc)]
    if kind == "solitary_wave":
        return [verify_solitary(doc_to_solitary(doc))]
    raise FormatError(f"cannot verify a {kind} document")


def cmd_verify(args, cfg):
    doc = read_document(args.input)
    reports = _reports_for(doc)
    if args.against:
        other = read_document(args.against, "solitary_wave")
        if doc["kind"] != "solitary_wave":
            raise FormatError("--against compares two solitary waves")
        tr = check_touching(doc_to_solitary(doc), doc_to_solitary(other))
        reports.append(VerificationReport("touching pair", (tr.as_check(),)))
    text = "\n\n".join(r.table() for r in reports) + "\n"
    sys.stdout.write(text)
    if args.out:
        if len(reports) == 1:
            merged = reports[0]
        else:
            # one document per run: prefix each check with its subject
            merged = VerificationReport("; ".join(r.subject for r in reports), tuple(
                replace(c, name=f"{r.subject} :: {c.name}") for r in reports for c in r.checks))
        atomic_write(args.out, dumps(report_to_doc(merged)))
    return 0 if all(r.passed for r in reports) else 1


def _wave_rows(doc):
    kind = doc["kind"]
    if kind == "periodic_wave":
        return [(doc["lam"], doc["mu"], None, None, doc["residual_norm"])]
    if kind == "branch":
        return [r for w in doc["waves"] for r in _wave_rows(read_document(w, "periodic_wave"))]
    if kind == "solitary_wave":
        return [(doc["lam"], doc["mu"], doc["alpha"], doc["eta"], doc["sweep"].get("residual"))]
    return []


def _sweep_rows(doc):
    if doc["kind"] == "solitary_wave":
        s = doc.get("sweep", {})
        lam = doc["lam"]
    elif doc["kind"] == "period_sweep":
        s, lam = doc, doc["lam"]
    else:
        return []
    periods, speeds = s.get("periods", []), s.get("speeds", [])
    diffs = [None] + list(s.get("profile_diffs", []))
    dmu = [None] + list(s.get("speed_diffs", []))
    return [(lam, P, mu, dm, dp) for P, mu, dm, dp in zip(periods, speeds, dmu, diffs)]


def cmd_report(args, cfg):
    docs = [read_document(p) for p in args.inputs]
    waves = [r for d in docs for r in _wave_rows(d)]
    sweeps = [r for d in docs for r in _sweep_rows(d)]
    _emit(csv_table(["lam", "mu", "alpha", "eta", "residual"], waves), args.out)
    if args.sweep_out:
        atomic_write(args.sweep_out, csv_table(["lam", "P", "mu_P", "speed_diff", "profile_diff"], sweeps))
    return 0


# ---------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="whitham", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"whitham {__version__}")
    p.add_argument("--config", help="JSON file of option defaults; flags override it")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True)

    k = sub.add_parser("kernel", help="tabulate K, K_reg and periodised kernels as CSV")
    k.add_argument("--x-min", type=float, default=0.1)
    k.add_argument("--x-max", type=float, default=5.0)
    k.add_argument("--num", type=int, default=50)
    k.add_argument("--periods", type=_floats, default=[], help="comma-separated periods for K_P columns")
    k.add_argument("--method", choices=("spatial", "fourier"), default="fourier")
    k.add_argument("--quad-tol", type=float, default=1e-13)
    k.add_argument("--out", help="CSV path (default stdout)")

    for name, helptext in (("periodic", "solve one periodic wave"), ("branch", "continue a branch in lambda")):
        q = sub.add_parser(name, help=helptext)
        q.add_argument("--period", "-P", type=float, default=2 * math.pi)
        if name == "periodic":
            q.add_argument("--lambda", "--lam", dest="lam", type=float, required=True)
            q.add_argument("--cusp", action="store_true", help="near-highest wave on a fine grid")
        else:
            q.add_argument("--lambdas", "--lams", dest="lams", type=_floats, required=True)
        q.add_argument("--N", type=int, default=None, help="grid size (default from the resolution policy)")
        q.add_argument("--tol", type=float, default=NEWTON_TOL)
        q.add_argument("--adaptive", action=argparse.BooleanOptionalAction, default=True,
                       help="refine until the spectral tail is negligible")
        q.add_argument("--out", help="JSON document path (default stdout)")
        q.add_argument("--csv", help="CSV path for the profile or branch table")

    s = sub.add_parser("solitary", help="construct a solitary wave by a period sweep")
    s.add_argument("--lambda", "--lam", dest="lam", type=float, required=True)
    s.add_argument("--periods", type=_floats, default=[], help="explicit period schedule")
    s.add_argument("--pmin", type=float, default=32.0)
    s.add_argument("--pmax", type=float, default=256.0)
    s.add_argument("--window", type=float, default=10.0)
    s.add_argument("--sweep-tol", type=float, default=1e-8)
    s.add_argument("--tol", type=float, default=NEWTON_TOL)
    s.add_argument("--out", help="JSON document path (default stdout)")
    s.add_argument("--csv", help="CSV path for the profile")

    v = sub.add_parser("verify", help="check a wave document")
    v.add_argument("--in", dest="input", required=True)
    v.add_argument("--against", help="second solitary wave for the touching check")
    v.add_argument("--out", help="write the report document here")

    r = sub.add_parser("report", help="summary tables from wave/sweep documents")
    r.add_argument("--in", dest="inputs", nargs="*", default=[])
    r.add_argument("--out", help="wave table CSV (default stdout)")
    r.add_argument("--sweep-out", help="sweep table CSV")
    return p


def _config(args) -> RunConfig:
    if args.command == "kernel":
        if args.num < 1:
            raise DomainError("need at least one grid point")
        if np.any(np.linspace(args.x_min, args.x_max, args.num) == 0):
            raise DomainError("the kernel is singular at x = 0; choose a grid avoiding it")
        if any(not P > 0 for P in args.periods):
            raise DomainError("periods must be positive")
        x = np.linspace(args.x_min, args.x_max, args.num)
        for P in args.periods:
            if np.any(np.abs(x / P - np.round(x / P)) < 1e-14):
                raise DomainError(f"the grid hits the lattice {P!r} Z where K_P is singular")
    lams = []
    if getattr(args, "lam", None) is not None:
        lams = [args.lam]
    elif getattr(args, "lams", None) is not None:
        lams = list(args.lams)
    return RunConfig(
        command=args.command,
        P=getattr(args, "period", None),
        lams=lams,
        N=getattr(args, "N", None),
        tol=getattr(args, "tol", NEWTON_TOL),
        periods=list(getattr(args, "periods", []) or []) if args.command == "solitary" else [],
        window=getattr(args, "window", 10.0),
        sweep_tol=getattr(args, "sweep_tol", 1e-8),
        quad_tol=getattr(args, "quad_tol", 1e-13),
    ).validate()


COMMANDS = {
    "kernel": cmd_kernel,
    "periodic": cmd_periodic,
    "branch": cmd_branch,
    "solitary": cmd_solitary,
    "verify": cmd_verify,
    "report": cmd_report,
}


def _apply_config(parser, argv):
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    if not known.config:
        return
    try:
        cfg = json.loads(Path(known.config).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        parser.error(f"cannot read config {known.config}: {exc}")
    if not isinstance(cfg, dict):
        parser.error("config file must hold a JSON object")
    for action in parser._subparsers._group_actions:
        for sp in action.choices.values():
            sp.set_defaults(**cfg)


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    _apply_config(parser, argv)
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = _config(args)
    except DomainError as exc:
        parser.error(str(exc))
    try:
        return COMMANDS[args.command](args, cfg)
    except (WhithamError, OSError) as exc:
        diag = {"error": type(exc).__name__, "message": str(exc), "command": args.command}
        sys.stderr.write(json.dumps(diag, sort_keys=True) + "\n")
        return 1


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
