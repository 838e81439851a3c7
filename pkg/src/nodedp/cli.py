"""Command-line entry point: ``nodedp {estimate,generate,experiment}``.

Exit codes: 0 success, 1 usage or configuration error, 2 I/O or parse
error, 3 audit failure. Randomized subcommands report the effective seed
on standard error.
"""

from __future__ import annotations

import argparse
import os
import sys

from . import __version__
from .edgelist import read_edge_list, write_edge_list
from .errors import ConfigError, EdgeListParseError, NodeDPError
from .estimators import (CdParams, ErParams, DEFAULT_SENS_CONST, estimate_concentrated,
                         estimate_er, naive_estimate)
from .graph import sample_er
from .harness import (FAMILIES, ExperimentConfig, audit_smoothness, run_grid,
                      verify_witnesses, write_csv)
from .noise import RandomStream
from .witnesses import witness_large_k, witness_small_k

EXIT_OK, EXIT_USAGE, EXIT_IO, EXIT_AUDIT = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _seed_stream(args, err):
    if args.deployment:
        if args.seed is not None:
            raise UsageError("--deployment draws noise from system entropy; drop --seed")
        print("seed=withheld (deployment mode)", file=err)
        return RandomStream.from_entropy()
    rng = RandomStream(args.seed) if args.seed is not None else RandomStream.from_entropy()
    print(f"seed={rng.seed}", file=err)
    return rng


def _fmt(v):
    return repr(v) if isinstance(v, float) else str(v)


def cmd_estimate(args, out, err):
    g = read_edge_list(args.graph)
    rng = _seed_stream(args, err)
    clamp = not args.no_clamp
    if args.mode == "naive":
        est = naive_estimate(g, args.eps, rng, clamp=clamp)
    elif args.mode == "concentrated":
        if args.k_star is None:
            raise UsageError("--mode concentrated requires --k-star")
        est = estimate_concentrated(g, CdParams(args.eps, args.k_star, args.sens_const, clamp), rng)
    else:
        est = estimate_er(g, ErParams(args.eps, alpha=args.alpha, sens_const=args.sens_const,
                                      clamp=clamp), rng)
    rec = est.to_record(deployment=args.deployment)
    if args.format == "csv":
        text = ",".join(rec) + "\n" + ",".join(_fmt(v) for v in rec.values()) + "\n"
    else:
        text = "".join(f"{k}={_fmt(v)}\n" for k, v in rec.items())
    _emit(text, args.output, out)
    return EXIT_OK


def _emit(text, path, out):
    if path is None or path == "-":
        out.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)


def cmd_generate(args, out, err):
    if args.kind == "er":
        _need(args, "n", "p")
        rng = RandomStream(args.seed) if args.seed is not None else RandomStream.from_entropy()
        print(f"seed={rng.seed}", file=err)
        g = sample_er(args.n, args.p, rng)
        if args.output is None:
            raise UsageError("generate er requires --output")
        write_edge_list(g, args.output, comments=[f"G(n={args.n}, p={args.p}) seed={rng.seed}"])
        return EXIT_OK
    if args.kind == "witness-large-k":
        _need(args, "n", "k", "eps")
        pair = witness_large_k(args.n, args.k, args.eps)
    else:
        _need(args, "n", "eps")
        pair = witness_small_k(args.n, args.eps)
    prefix = args.output or args.kind
    write_edge_list(pair.g0, f"{prefix}_g0.txt")
    write_edge_list(pair.g1, f"{prefix}_g1.txt")
    manifest = (f"kind={args.kind}\nn={args.n}\nk={pair.k}\n"
                f"node_distance_bound={pair.node_distance_bound}\n"
                f"density_gap={pair.density_gap!r}\nmembers={pair.members}\n"
                f"g0={os.path.basename(prefix)}_g0.txt\ng1={os.path.basename(prefix)}_g1.txt\n")
    with open(f"{prefix}_manifest.txt", "w", encoding="utf-8", newline="\n") as fh:
        fh.write(manifest)
    return EXIT_OK


def _need(args, *names):
    missing = [f"--{n.replace('_', '-')}" for n in names if getattr(args, n) is None]
    if missing:
        raise UsageError(f"generate {args.kind} requires {' '.join(missing)}")


_LIST_KEYS = {"n": int, "p": float, "eps": float, "estimators": str}
_SCALAR_KEYS = {"trials": int, "seed": int, "alpha": float, "sens_const": float}


def parse_grid_config(text: str) -> ExperimentConfig:
    """Parse the flat ``key = value`` grid format.

    Keys: ``n``, ``p``, ``eps``, ``estimators`` (comma-separated lists),
    ``trials``, ``seed``, ``alpha``, ``sens_const``, ``k_star``
    (``oracle`` or an integer) and ``clamp`` (``true``/``false``). ``#``
    starts a comment.
    """
    values = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw.strip()!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        try:
            if key in _LIST_KEYS:
                values[key] = [_LIST_KEYS[key](x.strip()) for x in value.split(",") if x.strip()]
            elif key in _SCALAR_KEYS:
                values[key] = _SCALAR_KEYS[key](value)
            elif key == "k_star":
                values[key] = value if value == "oracle" else int(value)
            elif key == "clamp":
                if value.lower() not in ("true", "false"):
                    raise ValueError(value)
                values[key] = value.lower() == "true"
            else:
                raise ConfigError(f"line {lineno}: unknown key {key!r}")
        except ValueError:
            raise ConfigError(f"line {lineno}: bad value for {key!r}: {value!r}") from None
    for key in ("n", "p", "eps"):
        if not values.get(key):
            raise ConfigError(f"grid is empty: no values for {key!r}")
    kwargs = dict(n_values=values.pop("n"), p_values=values.pop("p"),
                  eps_values=values.pop("eps"), trials=values.pop("trials", 100))
    if "estimators" in values:
        kwargs["estimators"] = values.pop("estimators")
    kwargs.update(values)
    config = ExperimentConfig(**kwargs)
    bad = config.invalid_cells()
    if bad:
        (n, p, eps), reason = bad[0]
        raise ConfigError(f"invalid cell (n={n}, p={p}, eps={eps}): {reason}")
    return config


def cmd_experiment(args, out, err):
    if args.config is None and args.audit is None:
        raise UsageError("experiment requires --config and/or --audit")
    status = EXIT_OK
    if args.config is not None:
        with open(args.config, encoding="utf-8") as fh:
            config = parse_grid_config(fh.read())
        if args.seed is not None:
            config = ExperimentConfig(**{**config.__dict__, "seed": args.seed})
        if args.trials is not None:
            config = ExperimentConfig(**{**config.__dict__, "trials": args.trials})
        if args.output is None:
            raise UsageError("--config requires --output for the CSV")
        print(f"seed={config.seed}", file=err)
        write_csv(run_grid(config), args.output, config)
    if args.audit is not None:
        if args.audit == "smoothness":
            seed = args.seed if args.seed is not None else 0
            print(f"seed={seed}", file=err)
            report = audit_smoothness(FAMILIES, args.pairs, RandomStream(seed),
                                      sens_const=args.sens_const)
        else:
            report = verify_witnesses(args.n, args.k, args.eps)
        text = report.format()
        if args.report is not None:
            _emit(text, args.report, out)
        else:
            err.write(text)
        if not report.passed:
            status = EXIT_AUDIT
    return status


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="nodedp", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    est = sub.add_parser("estimate", help="privately estimate the edge density of a graph file")
    est.add_argument("graph", help="edge-list file")
    est.add_argument("--mode", choices=("naive", "concentrated", "er"), default="er")
    est.add_argument("--eps", type=float, required=True)
    est.add_argument("--k-star", type=int)
    est.add_argument("--alpha", type=float)
    est.add_argument("--sens-const", type=float, default=DEFAULT_SENS_CONST)
    est.add_argument("--no-clamp", action="store_true")
    est.add_argument("--seed", type=int)
    est.add_argument("--deployment", action="store_true",
                     help="draw entropy and emit only the released value")
    est.add_argument("--format", choices=("kv", "csv"), default="kv")
    est.add_argument("--output", help="output file (default: stdout)")
    est.set_defaults(func=cmd_estimate)

    gen = sub.add_parser("generate", help="write G(n, p) samples or witness pairs")
    gen.add_argument("kind", choices=("er", "witness-large-k", "witness-small-k"))
    gen.add_argument("--n", type=int)
    gen.add_argument("--p", type=float)
    gen.add_argument("--k", type=int)
    gen.add_argument("--eps", type=float)
    gen.add_argument("--seed", type=int)
    gen.add_argument("--output", help="edge-list path (er) or file prefix (witnesses)")
    gen.set_defaults(func=cmd_generate)

    exp = sub.add_parser("experiment", help="run a Monte Carlo grid and/or an audit")
    exp.add_argument("--config", help="grid file of 'key = value' lines")
    exp.add_argument("--output", help="CSV output path")
    exp.add_argument("--seed", type=int)
    exp.add_argument("--trials", type=int)
    exp.add_argument("--audit", choices=("smoothness", "witnesses"))
    exp.add_argument("--report", help="audit report path (default: stderr)")
    exp.add_argument("--pairs", type=int, default=1000)
    exp.add_argument("--sens-const", type=float, default=DEFAULT_SENS_CONST)
    exp.add_argument("--n", type=int, default=100)
    exp.add_argument("--k", type=int, default=5)
    exp.add_argument("--eps", type=float, default=0.1)
    exp.set_defaults(func=cmd_experiment)
    return parser


def main(argv=None, out=None, err=None) -> int:
    out = out if out is not None else sys.stdout
    err = err if err is not None else sys.stderr
    try:
        args = build_parser().parse_args(argv)
        return args.func(args, out, err)
    except UsageError as exc:
        print(f"error: {exc}", file=err)
        return EXIT_USAGE
    except EdgeListParseError as exc:
        print(f"parse error: {exc}", file=err)
        return EXIT_IO
    except OSError as exc:
        print(f"I/O error: {exc}", file=err)
        return EXIT_IO
    except (ConfigError, NodeDPError) as exc:
        print(f"error: {exc}", file=err)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
