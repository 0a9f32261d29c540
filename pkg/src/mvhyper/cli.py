"""
Command-line interface: ``generate``, ``diffuse``, ``expand`` and ``check``.

Every file a command writes echoes the settings it ran with under a
``config`` key. Passing that file back through ``--config`` reruns the
command with the same settings and reproduces the output byte for byte.
"""
import argparse
import json
import math
import sys

from . import __version__
from .calculus import LaplaceParams, Variant
from .checks import DEFAULT_KINDS, Sizes, run_checks
from .diffusion import DiffusionConfig, diffuse, embed_random_octant
from .errors import ConvergenceError, DomainError, SingularityError
from .hypergraph import random_hypergraph
from .io import (
    ParseError,
    ValidationError,
    atomic_write_text,
    dumps_json,
    file_digest,
    hypergraph_to_document,
    load_hypergraph,
    save_hypergraph,
    save_trace,
)

EXIT_OK = 0
EXIT_VIOLATION = 1
EXIT_USAGE = 2
EXIT_UNCONVERGED = 3
EXIT_SINGULAR = 4

RNG_NAME = "numpy.random.default_rng (PCG64)"

GENERATE_DEFAULTS = {"n_vertices": None, "n_edges": None, "max_cardinality": None, "seed": None}
DIFFUSE_DEFAULTS = {
    "input": None, "variant": "frechet", "isotropic": True, "p": 2.0, "eta": 1,
    "tau": 0.1, "tol": 1e-8, "max_steps": 100000, "record_every": 100,
}
EXPAND_DEFAULTS = {"input": None}
CHECK_DEFAULTS = {"seeds": 50, "first_seed": 0, "manifolds": list(DEFAULT_KINDS),
                  "max_vertices": 20, "max_cardinality": 4, "max_edges": 6}


class UsageError(Exception):
    pass


def _echoed_config(path, command):
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as err:
        raise UsageError(f"cannot read config {path}: {err}") from None
    cfg = doc.get("config") or (doc.get("meta") or {}).get("config")
    if not isinstance(cfg, dict) or cfg.get("command") != command:
        raise UsageError(f"{path} has no echoed {command!r} config")
    return cfg


def _settings(args, command, defaults):
    """Defaults, then the echoed config file, then explicitly given flags."""
    out = dict(defaults)
    if args.config:
        cfg = _echoed_config(args.config, command)
        out.update({k: cfg[k] for k in defaults if k in cfg})
    for k in defaults:
        val = getattr(args, k, None)
        if val is not None:
            out[k] = val
    missing = [k for k, v in out.items() if v is None]
    if missing:
        raise UsageError("missing required setting(s): " + ", ".join("--" + k.replace("_", "-") for k in missing))
    return out


def _load_input(args, command, settings, need_features):
    path = settings["input"]
    g, M, f, meta = load_hypergraph(path)
    if need_features and f is None:
        raise UsageError(f"{path} has no vertex features")
    digest = file_digest(path)
    # an input taken from an echoed config must be the very file that run used
    expected = _echoed_config(args.config, command).get("input_sha256") if args.config and not args.input else None
    if expected is not None and expected != digest:
        raise UsageError(f"{path} changed since the echoed run (sha256 mismatch)")
    return g, M, f, meta, digest


# -- commands -------------------------------------------------------------------------------


def cmd_generate(args):
    s = _settings(args, "generate", GENERATE_DEFAULTS)
    g = random_hypergraph(s["n_vertices"], s["n_edges"], s["max_cardinality"], s["seed"])
    f = embed_random_octant(g, s["seed"])
    config = {"command": "generate", **s, "rng": RNG_NAME}
    save_hypergraph(args.out, g, f.manifold, f, meta={"config": config, "version": __version__})
    print(f"wrote {args.out}: {g.num_vertices} vertices, {g.num_edges} oriented edges "
          f"(connected: {'yes' if g.is_connected() else 'no'})")
    print("edge cardinality histogram (|in|, |out|): count")
    for (a, b), count in sorted(g.cardinality_histogram().items()):
        print(f"  ({a}, {b}): {count}")
    return EXIT_OK


def cmd_expand(args):
    s = _settings(args, "expand", EXPAND_DEFAULTS)
    g, M, f, meta, digest = _load_input(args, "expand", s, need_features=False)
    ex = g.expand_to_graph()
    config = {"command": "expand", "input": s["input"], "input_sha256": digest}
    out_meta = {"config": config, "source": meta, "version": __version__}
    save_hypergraph(args.out, ex, M, f.on(ex) if f is not None else None, meta=out_meta)
    print(f"wrote {args.out}: {ex.num_edges} graph edges from {g.num_edges} hyperedges")
    return EXIT_OK


def cmd_diffuse(args):
    s = _settings(args, "diffuse", DIFFUSE_DEFAULTS)
    g, M, f, meta, digest = _load_input(args, "diffuse", s, need_features=True)
    framework = "frechet" if s["variant"] == "graph" else s["variant"]
    if s["variant"] == "graph":
        f = f.on(g.expand_to_graph())
    params = LaplaceParams(float(s["p"]), int(s["eta"]), Variant.of(framework, bool(s["isotropic"])))
    cfg = DiffusionConfig(params, step_size=float(s["tau"]), max_steps=int(s["max_steps"]),
                          residual_tol=float(s["tol"]), record_every=int(s["record_every"]))
    config = {"command": "diffuse", **{k: s[k] for k in DIFFUSE_DEFAULTS}, "input_sha256": digest,
              "input_meta": meta, "version": __version__}
    trace = diffuse(f, cfg)
    sidecar = save_trace(args.out, trace, config)
    print(f"wrote {args.out} and {sidecar}: {trace.steps_taken} steps, residual {trace.residuals[-1]:.3e}, "
          f"vertex spread {trace.spreads[-1]:.3e}, {trace.classification()}")
    return EXIT_OK if trace.converged else EXIT_UNCONVERGED


def _finite(x):
    return x if math.isfinite(x) else repr(x)


def cmd_check(args):
    s = _settings(args, "check", CHECK_DEFAULTS)
    kinds = s["manifolds"]
    bad = [k for k in kinds if k not in DEFAULT_KINDS]
    if bad:
        raise UsageError(f"unknown manifold(s): {', '.join(bad)}")
    sizes = Sizes(s["max_vertices"], s["max_cardinality"], s["max_edges"])
    report = run_checks(s["seeds"], kinds, sizes, first_seed=s["first_seed"])
    for line in report.lines():
        print(line)
    props = []
    for r in report.results:
        entry = {"property": r.name, "manifold": r.kind, "instances": r.count,
                 "max_error": _finite(r.max_error), "tolerance": r.tolerance, "ok": r.ok}
        if r.failure is not None:
            inst = r.failure.instance
            repro = {"seed": r.failure.seed, "error": _finite(r.failure.error), "message": r.failure.message,
                     "instance": hypergraph_to_document(inst.graph, inst.manifold, inst) if inst else None}
            entry["reproducer"] = repro
            print(f"reproducer for {r.name} on {r.kind}: seed {repro['seed']}"
                  + (f" ({repro['message']})" if repro["message"] else ""))
            if repro["instance"] is not None:
                print(json.dumps(repro["instance"], separators=(",", ":")))
        props.append(entry)
    if args.out:
        config = {"command": "check", **s}
        atomic_write_text(args.out, dumps_json({"config": config, "ok": report.ok, "properties": props,
                                                "version": __version__}))
    print("all properties hold" if report.ok else "property violations found")
    return EXIT_OK if report.ok else EXIT_VIOLATION


# -- parser -----------------------------------------------------------------------------------


def _bool_flag(parser, name, help_text):
    group = parser.add_mutually_exclusive_group()
    group.add_argument(f"--{name}", dest=name, action="store_const", const=True, help=help_text)
    group.add_argument(f"--an{name}", dest=name, action="store_const", const=False,
                       help="use the anisotropic variant")


def build_parser():
    parser = argparse.ArgumentParser(prog="mvhyper", description="p-Laplacians on manifold-valued hypergraphs")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="random symmetric hypergraph with sphere-octant features")
    p.add_argument("--n-vertices", type=int)
    p.add_argument("--n-edges", type=int, help="number of base edges before symmetrization")
    p.add_argument("--max-cardinality", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--out", required=True)
    p.add_argument("--config", help="rerun with the config echoed in a generated document")
    p.set_defaults(run=cmd_generate)

    p = sub.add_parser("diffuse", help="explicit heat diffusion; writes a CSV trace and JSON sidecar")
    p.add_argument("input", nargs="?")
    p.add_argument("--variant", choices=["frechet", "pairwise", "graph"])
    _bool_flag(p, "isotropic", "use the isotropic variant (default)")
    p.add_argument("--p", type=float)
    p.add_argument("--eta", type=int, choices=[0, 1])
    p.add_argument("--tau", type=float, help="step size")
    p.add_argument("--tol", type=float, help="residual tolerance")
    p.add_argument("--max-steps", type=int)
    p.add_argument("--record-every", type=int)
    p.add_argument("--out", required=True, help="CSV path; the sidecar goes next to it with a .json suffix")
    p.add_argument("--config", help="rerun with the config echoed in a trace sidecar")
    p.set_defaults(run=cmd_diffuse)

    p = sub.add_parser("expand", help="replace every hyperedge by its unit-weight graph edges")
    p.add_argument("input", nargs="?")
    p.add_argument("--out", required=True)
    p.add_argument("--config", help="rerun with the config echoed in an expanded document")
    p.set_defaults(run=cmd_expand)

    p = sub.add_parser("check", help="run the property batteries on seeded random instances")
    p.add_argument("--seeds", type=int, help="instances per manifold kind")
    p.add_argument("--first-seed", type=int)
    p.add_argument("--manifolds", nargs="+", metavar="KIND", help=f"subset of {', '.join(DEFAULT_KINDS)}")
    p.add_argument("--max-vertices", type=int)
    p.add_argument("--max-cardinality", type=int)
    p.add_argument("--max-edges", type=int)
    p.add_argument("--out", help="also write the report as JSON")
    p.add_argument("--config", help="rerun with the config echoed in a JSON report")
    p.set_defaults(run=cmd_check)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.run(args)
    except (SingularityError, ConvergenceError) as err:
        print(f"error: numerical singularity: {err}", file=sys.stderr)
        return EXIT_SINGULAR
    except (UsageError, DomainError, ParseError, ValidationError, OSError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_USAGE

