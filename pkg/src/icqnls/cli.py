"""Command line: ``run``, ``verify``, ``sweep`` and ``inspect``."""
from __future__ import annotations

import argparse
import copy
import datetime as _dt
import itertools
import json
import sys
from pathlib import Path

from . import io as icio
from .scenarios import ConfigError, run_scenario

EXIT_OK = 0
EXIT_VERDICT_FAIL = 1
EXIT_VALIDATION = 2
EXIT_EARLY_TERMINATION = 3


def _write_outputs(rc: icio.RunConfigFile, result, outdir: Path) -> None:
    outdir.mkdir(parents=True, exist_ok=True)
    icio.emit_diagnostics(result.diagnostics, outdir / "diagnostics.csv")
    (outdir / "verdict.json").write_text(icio.dumps(result.verdict()))
    (outdir / "config.json").write_text(icio.dumps(icio.config_document(rc)))
    for t, w in result.checkpoints.items():
        icio.checkpoint_write(w, t, outdir / "phi_plus.icqn")
    if rc.output.emit_plots_data:
        cols = {c: [getattr(r, c) for r in result.diagnostics] for c in
                (result.diagnostics[0].columns() if result.diagnostics else [])}
        (outdir / "plot_data.json").write_text(icio.dumps({"diagnostics": cols, "derived": result.derived}))
    meta = {"finished": _dt.datetime.now(_dt.timezone.utc).isoformat(), "python": sys.version.split()[0]}
    (outdir / "meta.json").write_text(json.dumps(meta, indent=2) + "\n")


def execute(rc: icio.RunConfigFile, outdir: Path | None = None) -> int:
    outdir = Path(outdir or rc.output.directory)
    hook = None
    if rc.output.checkpoint_stride:
        ckdir = outdir / "checkpoints"
        ckdir.mkdir(parents=True, exist_ok=True)
        counter = itertools.count()
        stride = rc.output.checkpoint_stride

        def hook(t, u):
            i = next(counter)
            if i % stride == 0:
                icio.checkpoint_write(u, t, ckdir / f"u_{i:06d}.icqn")

    result = run_scenario(rc.scenario, hook=hook)
    _write_outputs(rc, result, outdir)
    if result.early_termination_error:
        return EXIT_EARLY_TERMINATION
    return EXIT_OK if result.passed else EXIT_VERDICT_FAIL


def cmd_run(args) -> int:
    try:
        rc = icio.load_config(args.config)
        return execute(rc, args.out)
    except (ConfigError, FileNotFoundError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


def cmd_verify(args) -> int:
    from .identities import identity_suite
    from .inequalities import (TestFunctionFamily, check_angular_decay, check_corollary_decay,
                               check_hardy_sobolev)

    report = {"suite": args.suite, "seed": args.seed, "n": args.n, "checks": []}
    ok = True
    if args.suite in ("identities", "all"):
        for c in identity_suite(args.n, args.seed):
            report["checks"].append({"name": c.name, "value": c.value, "tolerance": c.tolerance,
                                     "passed": c.passed})
            ok &= c.passed
    if args.suite in ("inequalities", "all"):
        fam = TestFunctionFamily("bumps", seed=args.seed, count=args.count)
        for rep in (check_angular_decay(fam, 0.5, n=args.n), check_corollary_decay(fam, 4.0, n=args.n),
                    check_hardy_sobolev(fam, 0.25, 4.0, n=args.n)):
            passed = rep.refinement_change < 0.1 and all(r > 0 for r in rep.ratios)
            d = rep.as_dict()
            d["passed"] = passed
            report["checks"].append(d)
            ok &= passed
    report["passed"] = ok
    text = icio.dumps(report)
    if args.report:
        Path(args.report).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK if ok else EXIT_VERDICT_FAIL


def _set_path(doc: dict, dotted: str, value) -> None:
    keys = dotted.split(".")
    cur = doc
    for k in keys[:-1]:
        cur = cur.setdefault(k, {})
    cur[keys[-1]] = value


def cmd_sweep(args) -> int:
    try:
        base = json.loads(Path(args.config).read_text())
    except (FileNotFoundError, json.JSONDecodeError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    axes = []
    for spec in args.param:
        if "=" not in spec:
            print(f"config error: --param expects key=v1,v2,..., got {spec!r}", file=sys.stderr)
            return EXIT_VALIDATION
        key, vals = spec.split("=", 1)
        axes.append((key, [json.loads(v) for v in vals.split(",")]))
    root = Path(args.out)
    summary, worst = [], EXIT_OK
    for combo in itertools.product(*[v for _, v in axes]):
        doc = copy.deepcopy(base)
        tag = []
        for (key, _), val in zip(axes, combo):
            _set_path(doc, key, val)
            tag.append(f"{key.split('.')[-1]}={val}")
        name = "_".join(tag) or "base"
        try:
            rc = icio.parse_config(doc)
            code = execute(rc, root / name)
        except ConfigError as exc:
            print(f"{name}: config error: {exc}", file=sys.stderr)
            code = EXIT_VALIDATION
        summary.append({"run": name, "params": dict(zip([k for k, _ in axes], combo)), "exit": code})
        worst = max(worst, code)
    root.mkdir(parents=True, exist_ok=True)
    (root / "sweep.json").write_text(icio.dumps(summary))
    return worst


def cmd_inspect(args) -> int:
    try:
        hdr = icio.checkpoint_header(Path(args.checkpoint).read_bytes())
    except (icio.CheckpointError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    print(json.dumps(hdr, indent=2))
    return EXIT_OK


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_VALIDATION, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="icqnls", description="Inhomogeneous cubic-quintic NLS lab")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    r = sub.add_parser("run", help="run one scenario config")
    r.add_argument("config")
    r.add_argument("--out", help="output directory (overrides output.directory)")
    r.set_defaults(func=cmd_run)
    v = sub.add_parser("verify", help="run identity and inequality property suites")
    v.add_argument("suite", choices=["inequalities", "identities", "all"])
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--n", type=int, default=128)
    v.add_argument("--count", type=int, default=50, help="samples per inequality")
    v.add_argument("--report", help="write the JSON report here instead of stdout")
    v.set_defaults(func=cmd_verify)
    s = sub.add_parser("sweep", help="cartesian product over parameter values")
    s.add_argument("config")
    s.add_argument("--param", action="append", default=[], metavar="KEY=V1,V2",
                   help="dotted config key and comma-separated JSON values")
    s.add_argument("--out", default="sweep")
    s.set_defaults(func=cmd_sweep)
    i = sub.add_parser("inspect", help="print a checkpoint header")
    i.add_argument("checkpoint")
    i.set_defaults(func=cmd_inspect)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
