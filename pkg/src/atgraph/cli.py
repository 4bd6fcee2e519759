"""Command-line interface.

File formats
------------
labels    first line ``alpha=<real>``, then one 1-based label per line
edgelist  one ``u v`` pair per line (consecutive labels; a trailing odd end is dropped)
csv       header row, comma separated

Seeding
-------
Every stochastic command takes ``--seed`` (a 64-bit integer).  The seed feeds
``numpy.random.SeedSequence(seed).spawn(2)``: child 0 drives the arrival
schedule and child 1 drives the graph or test itself.  ``validate`` spawns
one child per criterion instead (see ``atgraph.validation``).

Exit codes: 0 success, 1 failed check or inconsistent input, 2 usage error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from pathlib import Path

import numpy as np

from . import validation
from .arrivals import schedule_from_spec
from .asymptotics import (
    degree_histogram, density_from_trajectory, limit_pmf, tail_exponent,
    trajectory_from_labels,
)
from .core import ArrivalSchedule, LabelSequence, multigraph_from_labels, validate_schedule
from .errors import AtGraphError, Inconsistent, InsufficientData, InsufficientTail
from .identities import IDENTITY_NAMES, IdentitySpec, run_identity, simulate_immigration_urn_many
from .likelihood import log_prob_labels
from .partition import phi, sample_urn
from .samplers import sample_db, sample_stick_breaking


class UsageError(Exception):
    pass


def _streams(seed):
    if seed is None:
        raise UsageError("--seed is required for stochastic commands")
    return [np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(2)]


def _is_stochastic(spec: str) -> bool:
    kind = spec.partition(":")[0]
    if kind == "doubled":
        return _is_stochastic(spec.partition(":")[2])
    return kind in ("geom", "poisplus", "crp")


def build_schedule(spec: str, n_ends: int, rng=None) -> ArrivalSchedule:
    """``schedule_from_spec`` plus ``fixed:t1,t2,...`` for explicit times."""
    if spec.startswith("fixed:"):
        return validate_schedule(spec[len("fixed:"):].split(",")).truncate(n_ends)
    if rng is None and _is_stochastic(spec):
        raise UsageError(f"arrival spec {spec!r} is random and needs --seed")
    return schedule_from_spec(spec, n_ends, rng)


# -- file formats -------------------------------------------------------------


def write_labels(labels, alpha, fh) -> None:
    fh.write(f"alpha={float(alpha)!r}\n")
    fh.write("".join(f"{x}\n" for x in labels))


def read_labels(path):
    """Returns ``(alpha, LabelSequence)``."""
    lines = [ln.strip() for ln in Path(path).read_text().splitlines() if ln.strip()]
    if not lines or not lines[0].startswith("alpha="):
        raise UsageError(f"{path}: first line must be 'alpha=<real>'")
    alpha = float(lines[0][len("alpha="):])
    return alpha, LabelSequence(tuple(int(x) for x in lines[1:]))


def write_edgelist(labels, fh) -> None:
    fh.write("".join(f"{u} {v}\n" for u, v in LabelSequence(tuple(labels)).edges()))


def write_csv(header, rows, fh) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)


def _fmt(x):
    return repr(float(x)) if isinstance(x, (float, np.floating)) else x


def _open_out(path):
    return sys.stdout if path in (None, "-") else open(path, "w", newline="")


def _emit(text, path):
    fh = _open_out(path)
    try:
        fh.write(text)
    finally:
        if fh is not sys.stdout:
            fh.close()


# -- commands -----------------------------------------------------------------


def _n_ends(args):
    if args.ends is not None:
        return args.ends
    if args.edges is not None:
        return 2 * args.edges
    raise UsageError("give --edges or --ends")


def cmd_generate(args):
    n = _n_ends(args)
    rs, rg = _streams(args.seed)
    sched = build_schedule(args.arrivals, n, rs)
    if args.method == "db":
        labels = sample_db(args.alpha, sched, n, rg).labels
    elif args.method == "stick":
        labels = sample_stick_breaking(args.alpha, sched, n, rg).labels
    else:
        labels = phi(sample_urn(args.alpha, sched, n, rg))
    buf = io.StringIO()
    if args.format == "edgelist":
        write_edgelist(labels, buf)
    else:
        write_labels(labels, args.alpha, buf)
    _emit(buf.getvalue(), args.out)
    return 0


def cmd_degrees(args):
    alpha, labels = read_labels(args.labels)
    view = multigraph_from_labels(labels)
    pmf, tail = degree_histogram(view, args.dmax)
    report = {"vertices": view.num_vertices, "ends": view.num_edge_ends,
              "histogram": {str(d): float(pmf[d]) for d in range(1, args.dmax + 1)},
              "tail_mass": float(tail)}
    try:
        fit = tail_exponent(np.asarray(view.degrees))
        report["tail"] = {"eta": fit.eta, "d_min": fit.d_min, "n_tail": fit.n_tail,
                          "power_law": fit.power_law, "lr_p_value": fit.lr_p_value}
    except InsufficientTail as e:
        report["tail"] = {"error": str(e)}
    try:
        dfit = density_from_trajectory(trajectory_from_labels(labels, alpha))
        report["density"] = {"sigma": dfit.sigma, "mu": dfit.mu, "epsilon": dfit.epsilon,
                             "in_regime": dfit.in_regime}
    except InsufficientData as e:
        report["density"] = {"error": str(e)}
    if args.format == "csv":
        buf = io.StringIO()
        write_csv(["d", "p"], [(d, _fmt(pmf[d])) for d in range(1, args.dmax + 1)]
                  + [(f">{args.dmax}", _fmt(tail))], buf)
        _emit(buf.getvalue(), args.out)
    else:
        _emit(json.dumps(report, indent=2) + "\n", args.out)
    return 0


def cmd_loglik(args):
    alpha, labels = read_labels(args.labels)
    if args.alpha is not None:
        alpha = args.alpha
    n = len(labels)
    rng = _streams(args.seed)[0] if args.seed is not None else None
    sched = build_schedule(args.arrivals, n, rng)
    lp = log_prob_labels(alpha, sched, labels)
    if lp == -np.inf:
        raise Inconsistent("labels contradict the arrival schedule")
    print(json.dumps({"logprob": lp, "n": n, "k": labels.num_vertices, "alpha": alpha}))
    return 0


def cmd_limit_pmf(args):
    pmf = limit_pmf(args.regime, args.alpha, args.dmax, args.mu)
    buf = io.StringIO()
    write_csv(["d", "p"], [(d, _fmt(pmf[d])) for d in range(1, args.dmax + 1)], buf)
    _emit(buf.getvalue(), args.out)
    return 0


def cmd_trajectory(args):
    n = _n_ends(args)
    rs, rg = _streams(args.seed)
    sched = build_schedule(args.arrivals, n, rs)
    if args.method == "db":
        labels = sample_db(args.alpha, sched, n, rg).labels
    else:
        labels = sample_stick_breaking(args.alpha, sched, n, rg).labels
    traj = trajectory_from_labels(labels, args.alpha, r=args.r)
    mat = traj.degree_matrix(args.r)
    rows = [(c.n, c.num_vertices, *(int(x) for x in mat[i])) for i, c in enumerate(traj.checkpoints)]
    buf = io.StringIO()
    write_csv(["n", "vertices"] + [f"deg{j}" for j in range(1, args.r + 1)], rows, buf)
    _emit(buf.getvalue(), args.out)
    return 0


def _parse_params(text):
    if not text:
        return {}
    try:
        out = json.loads(text)
    except json.JSONDecodeError as e:
        raise UsageError(f"--params must be a JSON object: {e}") from None
    if not isinstance(out, dict):
        raise UsageError("--params must be a JSON object")
    return out


def cmd_identity(args):
    which = tuple(args.which.split(",")) if args.which else ()
    if args.name == "PA_LIMITS":
        which = tuple(int(w) for w in which)
    spec = IdentitySpec(args.name, _parse_params(args.params), route=args.route, which=which,
                        n_sim=args.n_sim, runs=args.runs, ml_method=args.ml_method)
    rng = _streams(args.seed)[1]
    rep = run_identity(spec, args.samples, rng, seed=args.seed)
    _emit(json.dumps(rep.to_dict(), indent=2) + "\n", args.out)
    return 0 if rep.passed else 1


def cmd_urn(args):
    rng = _streams(args.seed)[1]
    white = simulate_immigration_urn_many(args.w, args.b, args.beta, args.n, args.runs, rng)
    scale = args.n ** (-(1 - args.beta))
    buf = io.StringIO()
    write_csv(["run", "white", "scaled"],
              [(i + 1, int(x), _fmt(x * scale)) for i, x in enumerate(white)], buf)
    _emit(buf.getvalue(), args.out)
    return 0


def cmd_validate(args):
    which = sorted({int(x) for x in args.only.split(",")}) if args.only else None
    if which and any(w not in validation.CRITERIA for w in which):
        raise UsageError(f"criteria are numbered 1..{validation.N_CRITERIA}")
    results = validation.run_all(args.seed, which, echo=lambda s: print(s, flush=True))
    rows = [row for res in results for row in res.rows()]
    if args.json:
        _emit(json.dumps(rows, indent=2) + "\n", args.json)
    failed = [r.number for r in results if not r.passed]
    print(f"{len(results) - len(failed)}/{len(results)} criteria passed"
          + (f"; failed: {failed}" if failed else ""))
    return 1 if failed else 0


# -- parser -------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="atgraph", description=__doc__.split("\n")[0])
    sub = p.add_subparsers(dest="command", required=True)

    def sized(sp):
        g = sp.add_mutually_exclusive_group()
        g.add_argument("--edges", type=int)
        g.add_argument("--ends", type=int)

    g = sub.add_parser("generate", help="sample a graph")
    g.add_argument("--alpha", type=float, required=True)
    g.add_argument("--arrivals", required=True,
                   help="constant:d | delta:c | geom:beta | poisplus:lambda | crp:alpha,theta | "
                        "file:path | fixed:t1,t2,... | doubled:<spec>")
    sized(g)
    g.add_argument("--seed", type=int)
    g.add_argument("--method", choices=("db", "stick", "urn"), default="db")
    g.add_argument("--format", choices=("labels", "edgelist"), default="labels")
    g.add_argument("--out")
    g.set_defaults(func=cmd_generate)

    d = sub.add_parser("degrees", help="degree histogram and exponent estimates")
    d.add_argument("--labels", required=True)
    d.add_argument("--dmax", type=int, default=50)
    d.add_argument("--format", choices=("json", "csv"), default="json")
    d.add_argument("--out")
    d.set_defaults(func=cmd_degrees)

    ll = sub.add_parser("loglik", help="exact log-probability of a labels file")
    ll.add_argument("--labels", required=True)
    ll.add_argument("--arrivals", required=True)
    ll.add_argument("--alpha", type=float, help="override the alpha in the file header")
    ll.add_argument("--seed", type=int)
    ll.set_defaults(func=cmd_loglik)

    lp = sub.add_parser("limit-pmf", help="limiting degree pmf table")
    lp.add_argument("--regime", choices=("sublinear", "linear"), required=True)
    lp.add_argument("--alpha", type=float, required=True)
    lp.add_argument("--mu", type=float)
    lp.add_argument("--dmax", type=int, default=20)
    lp.add_argument("--out")
    lp.set_defaults(func=cmd_limit_pmf)

    t = sub.add_parser("trajectory", help="checkpointed simulation")
    t.add_argument("--alpha", type=float, required=True)
    t.add_argument("--arrivals", required=True)
    sized(t)
    t.add_argument("--r", type=int, default=5)
    t.add_argument("--seed", type=int)
    t.add_argument("--method", choices=("db", "stick"), default="db")
    t.add_argument("--out")
    t.set_defaults(func=cmd_trajectory)

    i = sub.add_parser("identity", help="run a named distributional identity test")
    i.add_argument("--name", required=True, choices=IDENTITY_NAMES)
    i.add_argument("--params", help='JSON object, e.g. \'{"alpha": 0.5, "T": [1, 3]}\'')
    i.add_argument("--which", help="comma-separated component names")
    i.add_argument("--route", choices=("exact", "sim"), default="exact")
    i.add_argument("--samples", type=int, default=10**5)
    i.add_argument("--n-sim", type=int, default=10**5)
    i.add_argument("--runs", type=int, default=10**4)
    i.add_argument("--ml-method", choices=("exact", "crp"), default="exact")
    i.add_argument("--seed", type=int)
    i.add_argument("--out")
    i.set_defaults(func=cmd_identity)

    u = sub.add_parser("urn", help="immigration urn white counts")
    u.add_argument("--w", type=int, default=1)
    u.add_argument("--b", type=int, default=1)
    u.add_argument("--beta", type=float, default=0.5)
    u.add_argument("--n", type=int, required=True)
    u.add_argument("--runs", type=int, default=1000)
    u.add_argument("--seed", type=int)
    u.add_argument("--out")
    u.set_defaults(func=cmd_urn)

    v = sub.add_parser("validate", help="run the acceptance suite")
    v.add_argument("--seed", type=int, default=validation.DEFAULT_SEED)
    v.add_argument("--only", help="comma-separated criterion numbers")
    v.add_argument("--json", help="write per-check JSON records here")
    v.set_defaults(func=cmd_validate)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as e:
        print(f"atgraph: error: {e}", file=sys.stderr)
        return 2
    except Inconsistent as e:
        print(f"atgraph: Inconsistent: {e}", file=sys.stderr)
        return 1
    except (AtGraphError, OSError) as e:
        print(f"atgraph: {type(e).__name__}: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
