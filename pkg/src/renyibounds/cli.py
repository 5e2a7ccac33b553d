"""
Command line front end.

    renyibounds verify    --suite all --trials 200 --seed 42
    renyibounds reproduce --case l-distribution --m 4 --p0 0.7
    renyibounds ellipse   --m 4 --points 101 --out ellipse.csv
    renyibounds calc      fidelity a.json b.json

Exit codes: 0 success, 1 a bound was violated (or an equality case missed),
2 usage or input error.

Random streams: trial ``i`` of a run with seed ``s`` draws each of its
instances from ``Generator(Philox(SeedSequence(s, spawn_key=(i, k))))``
where ``k`` indexes the instance kind (see ``_INSTANCE_KINDS``). Records are
emitted in trial order, then in suite order within a trial.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import tempfile
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import bounds, optimal, states, strategies
from .divergences import fidelity, sandwiched
from .errors import RenyiBoundsError

SUITES = ("prop", "fano", "pgm", "recovery", "fidelity", "uncertainty", "monogamy", "quad", "beigi")
CASES = ("l-distribution", "bell-diagonal", "theta", "monogamy")
ALPHAS = (0.5, 1.0, 2.0, 3.0, math.inf)
EQUALITY_TOL = 1e-6

_INSTANCE_KINDS = ("dims", "cq", "bipartite", "tripartite", "classical", "sigma_c", "sigma_q")


class UsageError(Exception):
    pass


@dataclass(frozen=True)
class RunConfig:
    seed: int = 0
    trials: int = 1
    max_dim: int = 4
    tol: Optional[float] = None
    suite: tuple = SUITES
    format: str = "json"
    output_path: Optional[str] = None

    def __post_init__(self):
        if self.trials < 1:
            raise UsageError("--trials must be at least 1")
        if self.max_dim < 2:
            raise UsageError("--max-dim must be at least 2")
        if self.tol is not None and not self.tol > 0:
            raise UsageError("--tol must be positive")
        if not 0 <= self.seed < 2**64:
            raise UsageError("--seed must be an unsigned 64-bit integer")
        unknown = set(self.suite) - set(SUITES)
        if unknown:
            raise UsageError(f"unknown suite(s): {', '.join(sorted(unknown))}")


def trial_rng(seed: int, trial: int, kind: str) -> np.random.Generator:
    ss = np.random.SeedSequence(seed, spawn_key=(trial, _INSTANCE_KINDS.index(kind)))
    return np.random.Generator(np.random.Philox(ss))


# -- serialization -----------------------------------------------------------

def _plain(value):
    if isinstance(value, dict):
        return {k: _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        v = float(value)
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        if math.isnan(v):
            return "nan"
        return v
    return value


def _flatten(d, prefix=""):
    out = {}
    for k, v in d.items():
        key = f"{prefix}{k}"
        if isinstance(v, dict):
            out.update(_flatten(v, key + "."))
        elif isinstance(v, list):
            out[key] = json.dumps(v)
        else:
            out[key] = v
    return out


def render(records, fmt: str) -> str:
    rows = [_plain(r) for r in records]
    if fmt == "json":
        return "".join(json.dumps(r) + "\n" for r in rows)
    flat = [_flatten(r) for r in rows]
    columns = []
    for r in flat:
        for k in r:
            if k not in columns:
                columns.append(k)
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=columns, lineterminator="\n")
    writer.writeheader()
    for r in flat:
        writer.writerow({k: repr(v) if isinstance(v, float) else v for k, v in r.items()})
    return buf.getvalue()


def emit(text: str, path: Optional[str]) -> None:
    """Write to ``path`` atomically (temp file + rename), or to stdout."""
    if path is None:
        sys.stdout.write(text)
        return
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=".part")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


# -- verify ------------------------------------------------------------------

class _Trial:
    """Lazily built random instances and cached certified optima for one trial."""

    def __init__(self, seed: int, index: int, max_dim: int):
        self.seed, self.index = seed, index
        rng = trial_rng(seed, index, "dims")
        self.m, self.d_b, self.d_a, self.d_c, self.d_y = (
            int(v) for v in rng.integers(2, max_dim + 1, size=5))
        self._cache = {}

    def _get(self, key, build):
        if key not in self._cache:
            self._cache[key] = build()
        return self._cache[key]

    @property
    def cq(self):
        return self._get("cq", lambda: states.random_ensemble(
            self.m, self.d_b, trial_rng(self.seed, self.index, "cq")))

    @property
    def bipartite(self):
        return self._get("bip", lambda: states.random_state(
            (self.d_a, self.d_b), trial_rng(self.seed, self.index, "bipartite")))

    @property
    def tripartite(self):
        return self._get("tri", lambda: states.random_tripartite(
            self.d_a, self.d_b, self.d_c, trial_rng(self.seed, self.index, "tripartite"),
            pure_state=self.index % 2 == 0))

    @property
    def classical(self):
        return self._get("cl", lambda: states.random_ensemble(
            self.m, self.d_y, trial_rng(self.seed, self.index, "classical"), classical=True))

    @property
    def sigma_c(self):
        return self._get("sc", lambda: states.random_density(
            self.d_b, trial_rng(self.seed, self.index, "sigma_c")).matrix)

    @property
    def sigma_q(self):
        return self._get("sq", lambda: states.random_density(
            self.d_b, trial_rng(self.seed, self.index, "sigma_q")).matrix)

    @property
    def popt(self):
        return self._get("popt", lambda: optimal.p_opt(self.cq, tol=bounds.SDP_TOL))

    @property
    def ropt(self):
        return self._get("ropt", lambda: optimal.r_opt(self.bipartite, tol=bounds.SDP_TOL))


def _suite_reports(trial: _Trial, suite: str):
    if suite == "prop":
        optimal_strategy = trial.index % 2 == 1
        random_sigma = (trial.index // 2) % 2 == 1
        if optimal_strategy:
            povm, channel = trial.popt.primal_witness, trial.ropt.primal_witness
        else:
            povm = strategies.pgm(trial.cq)
            channel = strategies.pretty_good_recovery(trial.bipartite)
        sc = trial.sigma_c if random_sigma else None
        sq = trial.sigma_q if random_sigma else None
        extra = {"strategy": "optimal" if optimal_strategy else "pretty_good",
                 "sigma": "random" if random_sigma else "marginal"}
        for a in ALPHAS:
            yield bounds.check_prop_c(trial.cq, povm, sc, a), extra
            yield bounds.check_prop_q(trial.bipartite, channel, sq, a), extra
    elif suite == "fano":
        yield bounds.fano_classical(trial.cq, trial.popt), {}
        yield bounds.fano_quantum(trial.bipartite, trial.ropt), {}
    elif suite == "pgm":
        yield bounds.pgm_bound(trial.cq, trial.popt), {}
    elif suite == "recovery":
        yield bounds.recovery_bound(trial.bipartite, trial.ropt), {}
    elif suite == "fidelity":
        yield bounds.fidelity_bound_c(trial.cq, None, trial.popt), {}
        yield bounds.fidelity_bound_q(trial.bipartite, None, trial.ropt), {}
    elif suite == "uncertainty":
        yield bounds.uncertainty_check(trial.tripartite), {"pure": trial.index % 2 == 0}
    elif suite == "monogamy":
        yield bounds.monogamy_check(trial.tripartite), {"pure": trial.index % 2 == 0}
    elif suite == "quad":
        yield bounds.quad_bound(trial.classical), {}
        yield bounds.d3_quad_relation(trial.classical), {}
    elif suite == "beigi":
        yield bounds.beigi_check(trial.cq), {}


def run_trial(config: RunConfig, index: int) -> list:
    """All reports of one trial, in suite order, as plain dicts."""
    trial = _Trial(config.seed, index, config.max_dim)
    out = []
    for suite in SUITES:
        if suite not in config.suite:
            continue
        for report, extra in _suite_reports(trial, suite):
            if config.tol is not None:
                report = bounds.make_report(report.name, report.lhs, report.rhs, report.sense,
                                            config.tol, **report.context)
            rec = report.as_dict()
            rec["context"] = {**rec["context"], **extra, "suite": suite,
                              "trial": index, "seed": config.seed}
            out.append(rec)
    return out


def verify(config: RunConfig):
    """Run the configured sweep; returns ``(records, summary)``."""
    records = []
    for i in range(config.trials):
        records.extend(run_trial(config, i))
    passed = sum(r["satisfied"] for r in records)
    worst = min(records, key=lambda r: r["slack"]) if records else None
    summary = {
        "total": len(records),
        "passed": passed,
        "min_slack": worst["slack"] if worst else None,
        "argmin": {"name": worst["name"], **worst["context"]} if worst else None,
    }
    return records, summary


def cmd_verify(args) -> int:
    suites = SUITES if "all" in args.suite else tuple(s for s in SUITES if s in args.suite)
    config = RunConfig(seed=args.seed, trials=args.trials, max_dim=args.max_dim, tol=args.tol,
                       suite=suites, format=args.format, output_path=args.out)
    records, summary = verify(config)
    emit(render(records, config.format), config.output_path)
    sys.stderr.write("summary " + json.dumps(_plain(summary)) + "\n")
    return 0 if summary["passed"] == summary["total"] else 1


# -- reproduce ---------------------------------------------------------------

def _row(case, report, **params):
    return {"case": case, "bound": report.name, **params, "lhs": report.lhs, "rhs": report.rhs,
            "slack": report.slack, "equality": abs(report.slack) <= EQUALITY_TOL}


def reproduce(case: str, m=(4,), p0=(0.7,), d=(2,), theta=(math.pi / 4,)) -> list:
    rows = []
    if case == "l-distribution":
        for mm in m:
            for p in p0:
                E = states.Ensemble(states.l_distribution(mm, p), np.ones((mm, 1, 1)))
                rows.append(_row(case, bounds.pgm_bound(E), m=mm, p0=p, p_pg=strategies.p_pg(E)))
                rows.append(_row(case, bounds.fidelity_bound_c(E), m=mm, p0=p))
    elif case == "bell-diagonal":
        for dd in d:
            for p in p0:
                rho = states.bell_diagonal(dd, states.l_distribution(dd * dd, p))
                rows.append(_row(case, bounds.recovery_bound(rho), d=dd, p0=p))
                rows.append(_row(case, bounds.fidelity_bound_q(rho), d=dd, p0=p))
    elif case == "theta":
        for dd in d:
            for p in p0:
                rep = bounds.uncertainty_check(states.theta_state(dd, p))
                rows.append(_row(case, rep, d=dd, p0=p, x=rep.context["x"], z=rep.context["z"],
                                 ellipse_residual=rep.context["ellipse_residual"]))
    elif case == "monogamy":
        for dd in d:
            for th in theta:
                rep = bounds.monogamy_check(states.monogamy_state(dd, th))
                rows.append(_row(case, rep, d=dd, theta=th, x=rep.context["x"], z=rep.context["z"],
                                 ellipse_residual=rep.context["ellipse_residual"]))
    else:
        raise UsageError(f"unknown case {case!r}")
    return rows


def cmd_reproduce(args) -> int:
    kwargs = {k: getattr(args, k) for k in ("m", "p0", "d", "theta") if getattr(args, k) is not None}
    rows = reproduce(args.case, **kwargs)
    emit(render(rows, args.format), args.out)
    return 0 if all(r["equality"] for r in rows) else 1


# -- ellipse -----------------------------------------------------------------

def ellipse_points(m: int, points: int):
    """Upper boundary ``z = (sqrt(x) + sqrt(m-1) sqrt(1-x))^2 / m`` on ``[1/m, 1]``."""
    if m < 2 or points < 2:
        raise UsageError("need m >= 2 and points >= 2")
    xs = np.linspace(1.0 / m, 1.0, points)
    return [(float(x), min(max(bounds.fidelity_envelope(x, m) / m, 1.0 / m), 1.0)) for x in xs]


def cmd_ellipse(args) -> int:
    buf = io.StringIO()
    buf.write("x,z_upper\n")
    for x, z in ellipse_points(args.m, args.points):
        buf.write(f"{x!r},{z!r}\n")
    emit(buf.getvalue(), args.out)
    return 0


# -- calc --------------------------------------------------------------------

def cmd_calc(args) -> int:
    loaded = [states.load_state(p) for p in args.files]
    need = {"divergence": 2, "fidelity": 2, "popt": 1, "ropt": 1}[args.kind]
    if len(loaded) != need:
        raise UsageError(f"calc {args.kind} takes {need} state file(s)")
    if args.kind == "divergence":
        print(repr(sandwiched(loaded[0].matrix, loaded[1].matrix, args.alpha)))
    elif args.kind == "fidelity":
        print(repr(fidelity(loaded[0].matrix, loaded[1].matrix)))
    elif args.kind == "popt":
        cv = optimal.p_opt(states.ensemble_from_cq(loaded[0]), tol=args.tol)
        print(json.dumps(_plain(cv.as_dict())))
    else:
        cv = optimal.r_opt(states.require_bipartite(loaded[0]), tol=args.tol)
        print(json.dumps(_plain(cv.as_dict())))
    return 0


# -- argument parsing ----------------------------------------------------------

def _suite_list(text):
    names = [s.strip() for s in text.split(",") if s.strip()]
    bad = [s for s in names if s not in SUITES + ("all",)]
    if bad or not names:
        raise argparse.ArgumentTypeError(f"unknown suite {', '.join(bad) or text!r}; "
                                         f"choose from {', '.join(SUITES + ('all',))}")
    return names


def _alpha(text):
    if text.lower() in ("inf", "infinity"):
        return math.inf
    return float(text)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="renyibounds", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("verify", help="randomized verification sweeps")
    p.add_argument("--suite", type=_suite_list, action="extend", default=None,
                   help="comma separated; repeatable (default: all)")
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-dim", type=int, default=4)
    p.add_argument("--tol", type=float, default=None,
                   help="slack tolerance for every report (default: per-bound)")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("reproduce", help="equality-case tables")
    p.add_argument("--case", choices=CASES, required=True)
    p.add_argument("--m", type=int, nargs="+")
    p.add_argument("--p0", type=float, nargs="+")
    p.add_argument("--d", type=int, nargs="+")
    p.add_argument("--theta", type=float, nargs="+")
    p.add_argument("--format", choices=("json", "csv"), default="csv")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_reproduce)

    p = sub.add_parser("ellipse", help="boundary curve as CSV")
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--points", type=int, default=101)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_ellipse)

    p = sub.add_parser("calc", help="divergence / fidelity / optimum of JSON state files")
    p.add_argument("kind", choices=("divergence", "fidelity", "popt", "ropt"))
    p.add_argument("files", nargs="+")
    p.add_argument("--alpha", type=_alpha, default=2.0)
    p.add_argument("--tol", type=float, default=optimal.DEFAULT_TOL)
    p.set_defaults(func=cmd_calc)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if getattr(args, "suite", "unset") is None:
        args.suite = ["all"]
    try:
        return args.func(args)
    except (UsageError, RenyiBoundsError, OSError) as exc:
        invariant = getattr(exc, "invariant", None)
        note = f" (invariant: {invariant})" if invariant else ""
        sys.stderr.write(f"renyibounds: error: {exc}{note}\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())
