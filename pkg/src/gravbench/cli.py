"""Command line front end.

Exit codes: 0 all checks pass, 1 a mathematical check failed (the report
carries the counterexample), 2 usage or resource error.  Reports are JSON
written in a fixed key order, so equal arguments give equal bytes.
Results are cached on disk under $GRAVBENCH_CACHE (default
~/.cache/gravbench), keyed by command, target, parameters and a hash of the
package sources.
"""
import argparse
import hashlib
import json
import os
import sys
from pathlib import Path

from . import __version__

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2
CACHE_ENV = "GRAVBENCH_CACHE"


class UsageError(Exception):
    pass


# -- cache ---------------------------------------------------------------------

def code_hash():
    h = hashlib.sha256(__version__.encode())
    for p in sorted(Path(__file__).parent.glob("*.py")):
        h.update(p.name.encode())
        h.update(p.read_bytes())
    return h.hexdigest()[:16]


def cache_dir():
    return Path(os.environ.get(CACHE_ENV) or Path.home() / ".cache" / "gravbench")


def _cache_path(job):
    blob = json.dumps(job, sort_keys=True) + code_hash()
    return cache_dir() / (hashlib.sha256(blob.encode()).hexdigest() + ".json")


def cached(job, compute, use_cache=True):
    """(report, ok) for the job, computing it only on a cache miss."""
    path = _cache_path(job)
    if use_cache and path.exists():
        stored = json.loads(path.read_text())
        return stored["report"], stored["ok"]
    report, ok = compute()
    if use_cache:
        try:
            path.parent.mkdir(parents=True, exist_ok=True)
            tmp = path.with_suffix(".tmp")
            tmp.write_text(json.dumps({"report": report, "ok": ok}))
            tmp.replace(path)
        except OSError:
            pass  # a read-only cache only costs time
    return report, ok


# -- commands ----------------------------------------------------------------------

def _degrees(d):
    return {str(k): v for k, v in sorted(d.items())}


def _need_arity(args, lo=1, hi=None):
    if args.arity is None or args.arity < lo or (hi is not None and args.arity > hi):
        rng = f"{lo}..{hi}" if hi else f">= {lo}"
        raise UsageError(f"--arity must be in {rng} for target {args.target}")
    return args.arity


def cmd_dims(args):
    from .ger import GER
    from .graphs import GraphOperad, gra_basis
    from .trees import enumerate_M
    from .twist import tw_operad
    n = _need_arity(args)
    t = args.target
    if t == "Ger":
        out = {"total": GER.dim(n)}
        if args.by_degree:
            out["by_degree"] = _degrees(GER.dims_by_degree(n))
    elif t == "Grav":
        out = {"total": GER.grav_dim(n) if n > 1 else 0}
        if args.by_degree and n > 1:
            out["by_degree"] = _degrees(GER.grav_dims_by_degree(n))
    elif t == "M":
        out = {"total": len(enumerate_M(n))}
    elif t == "Gra":
        out = {"total": len(gra_basis(n, args.edges))}
    elif t == "TwGra":
        T = tw_operad(GraphOperad(max_edges=args.edges), args.trunc)
        out = {"total": len(T.basis(n))}
    else:
        raise UsageError(f"dims has no target {t}")
    return out, True


def cmd_homology(args):
    from .ger import GER
    from .mixed import cc_minus
    from .trees import m_circ_homology_dims, m_homology_dims
    n = _need_arity(args)
    t = args.target
    if t == "M":
        h = m_homology_dims(n)
    elif t == "Mcirc":
        h = m_circ_homology_dims(n)
    elif t == "Ger":
        h = cc_minus(GER.mixed_complex(n), args.trunc).homology()
    else:
        raise UsageError(f"homology has no target {t}")
    return {"total": sum(h.values()), "by_degree": _degrees(h)}, True


def _check_homology_vs_grav(args):
    from .ger import GER
    from .trees import m_circ_homology_dims
    n = _need_arity(args, 2)
    a = sum(m_circ_homology_dims(n).values())
    b = GER.grav_dim(n)
    return {"dim_H_Mcirc": a, "dim_Grav": b}, a == b


def _check_ger_exact(args):
    from .exactla import rank
    from .ger import GER
    n = _need_arity(args, 2)
    r = rank(GER.rotation_matrix(n))
    k = GER.grav_dim(n)
    return {"rank_R": r, "dim_ker_R": k}, r == k


def _check_m_rotational(args):
    from . import formal as fs
    from .operad import check_rotational
    from .trees import M, enumerate_M
    n = _need_arity(args, 1, 3)
    basis = {a: [fs.single(k) for k in enumerate_M(a)] for a in range(1, n + 1)}
    rep = check_rotational(M, basis)
    out = rep.to_json()
    out.pop("seconds")
    return out, rep.ok


def _check_gra_tadpoles(args):
    from . import formal as fs
    from .graphs import TadpoleResidue, gra_basis, gra_delta
    n = _need_arity(args, 1, 4)
    bad, count = [], 0
    for k in gra_basis(n, args.edges):
        count += 1
        try:
            dd = gra_delta(gra_delta(fs.single(k)))
        except TadpoleResidue as e:
            bad.append(str(e))
            continue
        if dd:
            bad.append(repr(k))
    return {"checked": count, "violations": bad[:20]}, not bad


def _check_vkgra_sigma(args):
    from .graphs import sigma_power, vkgra_differential, vkgra_sigma
    from .samples import random_vkgra_monomial, rng_for
    rng = rng_for(args.seed, "cli-sigma")
    bad, count = [], 0
    for _ in range(args.samples):
        m, n = rng.randint(1, 3), rng.randint(0, 4)
        x = random_vkgra_monomial(rng, m, n, 3, max_v=1)
        if not x:
            continue
        count += 1
        if sigma_power(x, n + 1) != x or vkgra_sigma(vkgra_differential(x)) != vkgra_differential(vkgra_sigma(x)):
            bad.append(repr(x))
    return {"checked": count, "violations": bad[:20]}, not bad


def _check_tw_d_squared(args):
    from .graphs import GraphOperad
    from .twist import tw_operad
    n = _need_arity(args, 1, 3)
    T = tw_operad(GraphOperad(max_edges=args.edges), args.trunc)
    rep = T.check_d_squared([{k: 1} for k in T.basis(n)])
    return {"checked": rep.checked, "boundary": len(rep.boundary),
            "violations": len(rep.violations)}, rep.ok


def _check_ger_to_graphs(args):
    from .twist import ger_to_graphs_check
    n = _need_arity(args, 1, 3)
    rep = ger_to_graphs_check(n)
    return {"checked": rep.checked, "ranks": {str(k): v for k, v in rep.ranks.items()},
            "violations": len(rep.violations)}, rep.ok


CHECKS = {
    ("Mcirc", "homology-vs-grav"): _check_homology_vs_grav,
    ("Ger", "exactness"): _check_ger_exact,
    ("M", "rotational"): _check_m_rotational,
    ("Gra", "tadpoles"): _check_gra_tadpoles,
    ("vKGra", "sigma"): _check_vkgra_sigma,
    ("TwGra", "d-squared"): _check_tw_d_squared,
    ("TwGra", "ger-to-graphs"): _check_ger_to_graphs,
}


def cmd_verify(args):
    fn = CHECKS.get((args.target, args.check))
    if fn is None:
        known = ", ".join(f"{t}/{c}" for t, c in CHECKS)
        raise UsageError(f"no check {args.check!r} for target {args.target}; known: {known}")
    return fn(args)


def _read_json(path):
    try:
        return json.loads(Path(path).read_text())
    except OSError as e:
        raise UsageError(f"cannot read {path}: {e}") from e
    except json.JSONDecodeError as e:
        raise UsageError(f"{path} is not JSON: {e}") from e


def cmd_act(args):
    from .graphs import sum_from_json
    from .poly import Polyvector, gra_act, vkgra_act
    try:
        gamma = sum_from_json(_read_json(args.graph))
        raw = _read_json(args.inputs)
        inputs = [Polyvector.from_json(x) for x in (raw if isinstance(raw, list) else [raw])]
    except (KeyError, TypeError, ValueError) as e:
        raise UsageError(f"bad input: {e}") from e
    if any(k.n for k in gamma):
        return vkgra_act(gamma, inputs).to_json(), True
    return gra_act(gamma, *inputs).to_json(), True


def cmd_export(args):
    from .ger import GER
    from .graphs import GraphOperad, gra_basis, graph_to_json, sum_to_json
    from .trees import enumerate_M, tree_to_json
    from .twist import tw_operad, tw_to_json
    n = _need_arity(args)
    t = args.target
    if t == "Gra":
        items = [graph_to_json(k) for k in gra_basis(n, args.edges)]
    elif t == "Ger":
        items = [sum_to_json(b) for b in GER.basis(n)]
    elif t == "M":
        items = [tree_to_json(k) for k in enumerate_M(n)]
    elif t == "TwGra":
        T = tw_operad(GraphOperad(max_edges=args.edges), args.trunc)
        items = [tw_to_json(k) for k in T.basis(n)]
    else:
        raise UsageError(f"export has no target {t}")
    return {"target": t, "arity": n, "basis": items}, True


COMMANDS = {"dims": cmd_dims, "homology": cmd_homology, "verify": cmd_verify,
            "act": cmd_act, "export": cmd_export}


def build_parser():
    p = argparse.ArgumentParser(prog="gravbench", description=__doc__.split("\n")[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, target=True):
        if target:
            sp.add_argument("--target", required=True)
            sp.add_argument("--arity", type=int)
        sp.add_argument("--edges", type=int, default=3, help="edge bound for graph bases")
        sp.add_argument("--trunc", type=int, default=2, help="truncation (u-power or internal vertices)")
        sp.add_argument("--samples", type=int, default=100)
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--output", "-o")
        sp.add_argument("--no-cache", action="store_true")

    sp = sub.add_parser("dims", help="dimension of a basis")
    common(sp)
    sp.add_argument("--by-degree", action="store_true")
    common(sub.add_parser("homology", help="homology dimensions"))
    sp = sub.add_parser("verify", help="run a verification check")
    common(sp)
    sp.add_argument("--check", required=True)
    sp = sub.add_parser("act", help="act with a graph on polyvector fields")
    common(sp, target=False)
    sp.add_argument("--graph", required=True)
    sp.add_argument("--inputs", required=True)
    common(sub.add_parser("export", help="export a basis as JSON"))
    return p


def _job(args):
    skip = {"output", "no_cache"}
    job = {k: v for k, v in sorted(vars(args).items()) if k not in skip}
    for key in ("graph", "inputs"):
        if job.get(key):
            job[key] = hashlib.sha256(Path(job[key]).read_bytes()).hexdigest()
    return job


def run(argv=None):
    """Run one job; returns (exit code, report text)."""
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as e:
        return (EXIT_USAGE if e.code else EXIT_OK), ""
    try:
        use_cache = not args.no_cache and args.command != "act"
        job = _job(args) if use_cache else None
        report, ok = cached(job, lambda: COMMANDS[args.command](args), use_cache)
    except UsageError as e:
        return EXIT_USAGE, json.dumps({"error": str(e)})
    except (ValueError, MemoryError, OSError) as e:
        return EXIT_USAGE, json.dumps({"error": f"{type(e).__name__}: {e}"})
    text = json.dumps(report, separators=(",", ":"))
    if args.output:
        Path(args.output).write_text(text + "\n")
    return (EXIT_OK if ok else EXIT_FAIL), text


def main(argv=None):
    code, text = run(argv)
    if text:
        stream = sys.stdout if code != EXIT_USAGE else sys.stderr
        print(text, file=stream)
    return code


if __name__ == "__main__":
    sys.exit(main())
