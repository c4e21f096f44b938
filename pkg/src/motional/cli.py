"""Command line: ``motional run | validate | preset | version``.

Exit codes: 0 success, 2 configuration error, 3 numerical error, 4 I/O error.
"""

import argparse
import hashlib
import logging
import os
import platform
import sys
import time
from pathlib import Path

import numpy as np
import scipy
import yaml

from . import __version__, config, experiments, io, kernels, presets
from .errors import ConfigError, MotionalError, ParameterDomainError

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL, EXIT_IO = 0, 2, 3, 4
THREADS_ENV = "MOTIONAL_THREADS"

log = logging.getLogger("motional")


def _versions():
    v = {"motional": __version__, "python": platform.python_version(),
         "numpy": np.__version__, "scipy": scipy.__version__}
    if kernels.HAVE_NUMBA:
        import numba
        v["numba"] = numba.__version__
    return v


def _threads(arg):
    raw = arg if arg is not None else os.environ.get(THREADS_ENV)
    if raw in (None, ""):
        return None
    try:
        n = int(raw)
    except ValueError:
        raise ConfigError([("threads", f"not an integer: {raw!r}")]) from None
    if n < 1:
        raise ConfigError([("threads", "must be >= 1")])
    return n


def _sha256(path):
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def execute(doc, out_dir, threads=None):
    """Run every experiment of a validated document into ``out_dir``."""
    out = Path(out_dir)
    effective = kernels.set_threads(threads)
    start = time.perf_counter()
    out.mkdir(parents=True, exist_ok=True)
    resolved = config.resolved(doc)
    files = []
    for exp, rexp in zip(doc.experiments, resolved["experiments"]):
        log.info("running %s (%s)", rexp["name"], exp.kind)
        for p in experiments.run_experiment(exp, doc.delta0, out / rexp["name"]):
            files.append({"path": str(p.relative_to(out)), "sha256": _sha256(p)})
    manifest = {
        "resolved_config": resolved,
        "seeds": {e["name"]: e["seed"] for e in resolved["experiments"]},
        "versions": _versions(),
        "backend": kernels.DEFAULT_BACKEND,
        "threads": {"requested": threads, "effective": effective},
        "wall_time_s": time.perf_counter() - start,
        "outputs": files,
    }
    io.write_json(out / "manifest.json", manifest)
    return manifest


def _load(args):
    if args.config is None:
        raise ConfigError([("config", "--config PATH is required")])
    try:
        text = Path(args.config).read_text(encoding="utf-8")
    except OSError as exc:
        raise OSError(f"cannot read config {args.config}: {exc}") from exc
    return config.parse(text)


def _apply_seed(doc, seed):
    return doc if seed is None else config.with_seed(doc, seed)


def cmd_run(args):
    doc = _apply_seed(_load(args), args.seed)
    execute(doc, args.out, _threads(args.threads))
    return EXIT_OK


def cmd_validate(args):
    doc = _load(args)
    sys.stdout.write(yaml.safe_dump(config.resolved(doc), sort_keys=False))
    return EXIT_OK


def cmd_preset(args):
    data = presets.get(args.name)
    doc = _apply_seed(config.parse(yaml.safe_dump(data)), args.seed)
    if args.show:
        sys.stdout.write(yaml.safe_dump(config.resolved(doc), sort_keys=False))
        return EXIT_OK
    execute(doc, args.out, _threads(args.threads))
    return EXIT_OK


def cmd_version(args):
    sys.stdout.write(f"motional {__version__} (backend {kernels.DEFAULT_BACKEND})\n")
    return EXIT_OK


def build_parser():
    p = argparse.ArgumentParser(prog="motional", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, out=True):
        sp.add_argument("--seed", type=int, default=None, help="override every seed")
        sp.add_argument("--threads", type=int, default=None,
                        help=f"worker threads (default: ${THREADS_ENV} or all cores)")
        if out:
            sp.add_argument("--out", default="out", help="output directory (default: out)")

    r = sub.add_parser("run", help="run the experiments of a config file")
    r.add_argument("--config", required=False)
    common(r)
    r.set_defaults(func=cmd_run)

    v = sub.add_parser("validate", help="print the resolved config or the error list")
    v.add_argument("--config", required=False)
    v.set_defaults(func=cmd_validate)

    s = sub.add_parser("preset", help="run a figure preset")
    s.add_argument("name", choices=sorted(presets.PRESETS))
    s.add_argument("--show", action="store_true", help="print the preset config and exit")
    common(s)
    s.set_defaults(func=cmd_preset)

    sub.add_parser("version", help="print the version").set_defaults(func=cmd_version)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (ConfigError, ParameterDomainError) as exc:
        errs = getattr(exc, "errors", [("", str(exc))])
        for path, msg in errs:
            print(f"config error: {path + ': ' if path else ''}{msg}", file=sys.stderr)
        return EXIT_CONFIG
    except MotionalError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
