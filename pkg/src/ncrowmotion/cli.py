"""Command-line entry point: ``ncrowmotion <subcommand> [flags]``.

Exit status is 0 when no check failed, 1 when at least one did and 2 for
usage or I/O errors.  JSON output is key-sorted so identical arguments give
byte-identical reports.
"""
from __future__ import annotations

import argparse
import json
import sys
from typing import Optional, Sequence

from .algebra import UNDEFINED, StructureError, parse_ring
from .poset import Poset, parse_poset_spec
from .rowmotion import Labeling, Orbit, random_labeling
from .slacks import SlackTable
from .verdict import FAIL
from . import verify as V

SUBCOMMANDS = ("orbit", "slacks", "verify", "conjecture", "claw", "invariant", "tropical")


class UsageError(Exception):
    pass


def _poset_arg(text: str) -> Poset:
    try:
        return parse_poset_spec(text)
    except StructureError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _ring_arg(text: str):
    try:
        return parse_ring(text)
    except StructureError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _positive(text: str) -> int:
    try:
        k = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if k < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {k}")
    return k


def _seed(text: str) -> int:
    try:
        k = int(text, 0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if k < 0:
        raise argparse.ArgumentTypeError("seed must be nonnegative")
    return k


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ncrowmotion",
        description="Exact experiments with noncommutative birational rowmotion.",
    )
    sub = parser.add_subparsers(dest="command", metavar="COMMAND", required=True)

    def common(p, poset_default: Optional[str] = "rect:2x2", ring_default: str = "mat:2", trials: int = 10):
        p.add_argument("--poset", type=_poset_arg, default=poset_default,
                       help="rect:PxQ, delta:P, nabla:P, tria:P, trap:P,S, claw, chain:N, "
                            "antichain:N, random:N,SEED or file:PATH (default %(default)s)")
        p.add_argument("--ring", type=_ring_arg, default=ring_default,
                       help="q, mat:N or trop (default %(default)s)")
        p.add_argument("--seed", type=_seed, default=0)
        p.add_argument("--trials", type=_positive, default=trials)
        p.add_argument("--max-iter", type=_positive, default=None, dest="max_iter")
        p.add_argument("--bound", type=_positive, default=9, help="entry bound for random labels")
        p.add_argument("--labeling", metavar="FILE", help="labeling JSON to use instead of a random one")
        p.add_argument("--output", metavar="FILE", help="write the JSON report here")
        p.add_argument("--json", action="store_true", help="print JSON instead of a table")

    common(sub.add_parser("orbit", help="print f, Rf, R^2 f, ..."), trials=1)
    common(sub.add_parser("slacks", help="dump down/up slacks along an orbit prefix"), trials=1)
    p = sub.add_parser("verify", help="check the rectangle theorems and general identities")
    common(p)
    p.add_argument("--slacks", action="store_true", help="also run the slack and conversion sweeps")
    common(sub.add_parser("conjecture", help="probe the triangle/trapezoid periodicity conjectures"),
           poset_default="delta:3")
    p = sub.add_parser("claw", help="the claw labeling whose orbit never closes")
    p.add_argument("--max-iter", type=_positive, default=60, dest="max_iter")
    p.add_argument("--output", metavar="FILE")
    p.add_argument("--json", action="store_true")
    common(sub.add_parser("invariant", help="cover-ratio invariant and bottom-top identity"),
           poset_default="claw")
    common(sub.add_parser("tropical", help="plain periodicity over max-plus"), ring_default="trop", trials=20)
    return parser


def parse_args(argv: Optional[Sequence[str]] = None) -> argparse.Namespace:
    """Parse and validate; argparse exits with status 2 on bad input."""
    parser = build_parser()
    # argparse applies type= to string defaults too, so specs are always objects here
    return parser.parse_args(argv)


def load_labeling(path: str, poset: Poset) -> Labeling:
    try:
        with open(path) as fh:
            obj = json.load(fh)
    except OSError as exc:
        raise UsageError(f"cannot read labeling {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise UsageError(f"labeling {path} is not valid JSON: {exc}") from None
    try:
        return Labeling.from_json(poset, obj)
    except StructureError as exc:
        raise UsageError(f"labeling {path}: {exc}") from None


def dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def save_report(path: str, report) -> None:
    try:
        with open(path, "w") as fh:
            fh.write(dumps(report))
    except OSError as exc:
        raise UsageError(f"cannot write report {path}: {exc.strerror}") from None


def _start(args) -> Labeling:
    if args.labeling:
        return load_labeling(args.labeling, args.poset)
    return random_labeling(args.poset, args.ring, args.seed, args.bound)


def _config(args, **kw) -> V.TrialConfig:
    labeling = load_labeling(args.labeling, args.poset) if args.labeling else None
    opts = dict(
        poset_spec=args.poset,
        ring=args.ring,
        seed=args.seed,
        entry_bound=args.bound,
        max_iterations=args.max_iter,
        trials=args.trials,
        labeling=labeling,
    )
    opts.update(kw)
    return V.TrialConfig(**opts)


def _default_horizon(poset: Poset) -> int:
    return sum(poset.params) if poset.family == "rect" else 4


# ---------------------------------------------------------------------------
# subcommands; each returns (report, human-readable text, failed?)


def cmd_orbit(args):
    f = _start(args)
    steps = args.max_iter or _default_horizon(args.poset)
    states = Orbit(f).prefix(steps)
    report = {
        "command": "orbit",
        "poset": args.poset.spec,
        "ring": f.ring.descriptor.spec,
        "seed": None if args.labeling else args.seed,
        "orbit": ["undefined" if s is UNDEFINED else s.to_json() for s in states],
    }
    lines = []
    for l, s in enumerate(states):
        if s is UNDEFINED:
            lines.append(f"R^{l} f = undefined")
            break
        ext = s.ext
        lines.append(f"R^{l} f:")
        lines.extend(f"  {ext.name(v):>8}  {s.ring.format(x)}" for v, x in enumerate(s.values))
    return report, "\n".join(lines), False


def cmd_slacks(args):
    f = _start(args)
    steps = args.max_iter or _default_horizon(args.poset)
    table = SlackTable(Orbit(f))
    ring, ext = f.ring, f.ext

    def fmt(x):
        return "undef" if x is UNDEFINED else ring.to_json(x)

    def show(x):
        return "undef" if x is UNDEFINED else ring.format(x)

    rows = {}
    lines = []
    for l in range(steps + 1):
        for v in ext.elements():
            down, up = table.down(v, l), table.up(v, l)
            rows[json.dumps([ext.name(v), l])] = {"down": fmt(down), "up": fmt(up)}
            lines.append(f"l={l:<3} {ext.name(v):>8}  down={show(down)}  up={show(up)}")
    report = {
        "command": "slacks",
        "poset": args.poset.spec,
        "ring": ring.descriptor.spec,
        "seed": None if args.labeling else args.seed,
        "slacks": rows,
    }
    return report, "\n".join(lines), False


def _verdict_report(command: str, args, verdicts: list):
    failed = any(v.status == FAIL for v in verdicts)
    report = {
        "command": command,
        "status": "fail" if failed else "pass",
        "verdicts": [v.to_json() for v in verdicts],
    }
    if hasattr(args, "poset"):
        report.update({"poset": args.poset.spec, "ring": args.ring.descriptor.spec,
                       "seed": args.seed, "trials": args.trials, "bound": args.bound})
    width = max(len(v.check) for v in verdicts)
    lines = []
    for v in verdicts:
        counts = ", ".join(f"{k}={n}" for k, n in sorted(v.counts.items()))
        extra = v.detail.get("summary", "")
        lines.append(f"{v.check:<{width}}  {v.status:<15} {counts}  {extra}".rstrip())
        for w in v.failures[:3]:
            lines.append(f"    at {json.dumps(w.get('location'), sort_keys=True)}")
    return report, "\n".join(lines), failed


def cmd_verify(args):
    cfg = _config(args)
    P = args.poset
    vs = []
    if P.family == "rect":
        vs += [V.verify_periodicity(cfg), V.verify_reciprocity(cfg), V.verify_reciprocity_implies_periodicity(cfg)]
    vs += [
        V.verify_bottom_top(cfg),
        V.verify_implicit_recurrence(cfg),
        V.verify_extension_independence(cfg),
        V.verify_toggle_commutation(cfg),
        V.verify_well_definedness(cfg),
        V.verify_normalize_bottom(cfg),
    ]
    if args.slacks:
        vs.append(V.verify_slacks(cfg))
        if P.family == "rect":
            vs.append(V.verify_conversion(cfg))
    return _verdict_report("verify", args, vs)


def cmd_conjecture(args):
    fam = args.poset.family
    if fam not in V.CONJECTURE_FAMILIES.values():
        raise UsageError(f"argument --poset: no periodicity conjecture for {args.poset.spec or 'this poset'}")
    return _verdict_report("conjecture", args, [V.probe_conjecture(fam, _config(args))])


def cmd_claw(args):
    v = V.claw_counterexample(max_m=args.max_iter)
    report, text, failed = _verdict_report("claw", args, [v])
    r6 = v.detail.get("R6")
    if r6:
        text += f"\nR^6 f lies in the family at (y, z) = ({r6['y']}, {r6['z']})"
    return report, text, failed


def cmd_invariant(args):
    cfg = _config(args, unit_boundary=True)
    return _verdict_report("invariant", args, [V.verify_invariant_sum(cfg), V.verify_bottom_top(_config(args))])


def cmd_tropical(args):
    if args.ring.descriptor.kind != "tropical_max_plus":
        raise UsageError("argument --ring: the tropical command needs --ring trop")
    if args.poset.family != "rect":
        raise UsageError("argument --poset: the tropical command needs rect:PxQ")
    return _verdict_report("tropical", args, [V.tropical_periodicity(_config(args))])


COMMANDS = {
    "orbit": cmd_orbit,
    "slacks": cmd_slacks,
    "verify": cmd_verify,
    "conjecture": cmd_conjecture,
    "claw": cmd_claw,
    "invariant": cmd_invariant,
    "tropical": cmd_tropical,
}


def run(args) -> int:
    try:
        report, text, failed = COMMANDS[args.command](args)
        if args.output:
            save_report(args.output, report)
    except (UsageError, StructureError) as exc:
        print(f"ncrowmotion {args.command}: error: {exc}", file=sys.stderr)
        return 2
    sys.stdout.write(dumps(report) if args.json else text + "\n")
    return 1 if failed else 0


def main(argv: Optional[Sequence[str]] = None) -> int:
    return run(parse_args(argv))


if __name__ == "__main__":
    sys.exit(main())
