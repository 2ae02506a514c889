"""Command-line interface.

JSON goes to stdout, diagnostics to stderr.  Exit status is 0 on success,
1 on usage errors, 2 on domain errors (with an ``{"error": ...}`` JSON body).
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from collections import Counter
from contextlib import nullcontext
from fractions import Fraction

from . import __version__
from .behavior import (
    SCHEMA,
    Behavior,
    TFDistribution,
    as_fraction,
    behavior_from_distribution,
    check_no_signalling,
    format_fraction,
    mix_distributions,
)
from .errors import InvalidInput, TransferFnError
from .localpoly import (
    DEFAULT_DENOMINATOR_BOUND,
    LP_BUDGET,
    SymmetricSingletScenario,
    bell_expression,
    derive_symmetric_probabilities,
    local_membership,
)
from .quantum import THIRDS, singlet_behavior
from .scenario import (
    DEFAULT_SEED,
    ChainedScenario,
    JointTFDistribution,
    anticorrelation_escape_check,
    detect_backward_causality,
    parse_relay,
)
from .spacetime import NULL_EPSILON, generate_configuration, minimal_pigeonhole_n, pigeonhole_infeasible
from .tfcore import (
    DEFAULT_BUDGET,
    ExperimentShape,
    classify_signalling,
    count_transfer_functions,
    enumerate_transfer_functions,
    format_transfer_function,
    is_product_form,
    parse_transfer_function,
    party_name,
)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        sys.exit(1)


def _positive_int(text):
    value = int(text)
    if value <= 0:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return value


def _positive_float(text):
    value = float(text)
    if not (value > 0 and math.isfinite(value)):
        raise argparse.ArgumentTypeError(f"expected a positive number, got {text}")
    return value


def _rational(text):
    try:
        return as_fraction(text)
    except InvalidInput as exc:
        raise argparse.ArgumentTypeError(str(exc))


def _load_json(path):
    try:
        if path == "-":
            return json.load(sys.stdin)
        with open(path) as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise InvalidInput(f"cannot read JSON from {path}: {exc}") from None


def _angles(text, exact_flag=False):
    if text.strip() == "exact-thirds":
        return list(THIRDS), True
    try:
        return [float(a) for a in text.split(",")], exact_flag
    except ValueError:
        raise UsageError(f"bad angle list {text!r}") from None


# --- subcommands -------------------------------------------------------------

def cmd_enumerate(args):
    shape = ExperimentShape.parse(args.shape)
    count = count_transfer_functions(shape)
    out = {"schema": SCHEMA, "shape": str(shape), "count": count}
    if not args.count_only:
        functions = []
        for f in enumerate_transfer_functions(shape, args.budget):
            functions.append({"tf": format_transfer_function(f), "class": classify_signalling(f).label})
        out["functions"] = functions
    return out


def _class_json(f):
    cls = classify_signalling(f)
    ok = is_product_form(f)
    return {"tf": format_transfer_function(f), "class": cls.label, "description": cls.description,
            "signals": [[party_name(x), party_name(y)] for x, y in sorted(cls.pairs)],
            "product_form": ok}


def cmd_classify(args):
    shape = ExperimentShape.parse(args.shape)
    if args.census:
        counts = Counter(classify_signalling(f).label
                         for f in enumerate_transfer_functions(shape, args.budget))
        return {"schema": SCHEMA, "shape": str(shape), "counts": dict(sorted(counts.items())),
                "total": sum(counts.values())}
    if not args.tf:
        raise UsageError("classify needs --tf or --census")
    out = _class_json(parse_transfer_function(args.tf, shape))
    out["schema"] = SCHEMA
    return out


def cmd_mix(args):
    d = TFDistribution.from_json(_load_json(args.dist))
    if args.dist2:
        d = mix_distributions(d, TFDistribution.from_json(_load_json(args.dist2)), args.lam)
    return behavior_from_distribution(d).to_json()


def cmd_check_ns(args):
    b = Behavior.from_json(_load_json(args.behavior))
    result = check_no_signalling(b)
    return {"schema": SCHEMA, "no_signalling": not any(result.values()),
            "pairs": [{"from": party_name(x), "to": party_name(y), "signals": v}
                      for (x, y), v in sorted(result.items())]}


def cmd_lp(args):
    b = Behavior.from_json(_load_json(args.behavior))
    out = {"schema": SCHEMA}
    out.update(local_membership(b, args.lp_budget).to_json())
    return out


def cmd_bell(args):
    angles, exact = _angles(args.angles, args.exact_thirds)
    if len(angles) != 3:
        raise UsageError("bell needs exactly three angles")
    b = singlet_behavior(angles, exact=exact, max_denominator=args.max_denominator)
    values = {str(k): bell_expression(b, k) for k in (1, 2, 3)}
    worst = min(values.values())
    solved = derive_symmetric_probabilities(SymmetricSingletScenario(3), b)
    return {"schema": SCHEMA, "angles": angles, "exact": exact,
            "expressions": {k: format_fraction(v) for k, v in values.items()},
            "violation": format_fraction(worst) if worst < 0 else None,
            "violated": worst < 0,
            "P": {k: format_fraction(v) for k, v in solved.values.items()},
            "lp": local_membership(b, args.lp_budget).to_json()}


def cmd_quantum(args):
    angles, exact = _angles(args.angles, args.exact_thirds)
    return singlet_behavior(angles, exact=exact, max_denominator=args.max_denominator).to_json()


def cmd_spacetime_config(args):
    tau = None if args.tau == "auto" else float(args.tau)
    config = generate_configuration(args.n, args.l, args.phi, tau)
    if args.csv:
        fields = ["k", "velocity", "event", "t", "x", "y", "z"]
        with (open(args.csv, "w", newline="") if args.csv != "-" else nullcontext(sys.stderr)) as fh:
            writer = csv.DictWriter(fh, fieldnames=fields, lineterminator="\n")
            writer.writeheader()
            writer.writerows(config.event_rows())
    rel = config.relations(args.epsilon)
    return {"schema": SCHEMA, "N": config.n, "L": config.length, "phi": config.phi, "tau": config.tau,
            "events": config.event_rows(), "relations": rel}


def cmd_pigeonhole(args):
    n = minimal_pigeonhole_n(args.p)
    m = args.m or 2 * n + 1
    result = pigeonhole_infeasible(args.p, m, use_lp=m <= args.lp_limit, limit=args.lp_limit)
    out = {"schema": SCHEMA, "N": n}
    out.update(result.to_json())
    return out


def cmd_chain(args):
    relay = parse_relay(args.relay)
    if args.joint:
        joint = JointTFDistribution.from_json(_load_json(args.joint))
        scenario = ChainedScenario.from_joint(joint, relay)
    else:
        if not (args.exp1 and args.exp2):
            raise UsageError("chain needs --exp1 and --exp2, or --joint")
        scenario = ChainedScenario((TFDistribution.from_json(_load_json(args.exp1)),
                                    TFDistribution.from_json(_load_json(args.exp2))), relay)
    result = detect_backward_causality(scenario, mode=args.mode, samples=args.samples, seed=args.seed)
    return result.to_json()


def cmd_escape(args):
    joint = JointTFDistribution.from_json(_load_json(args.joint)) if args.joint else None
    m = args.m
    if m is None and joint is None:
        m = 2 * minimal_pigeonhole_n(args.p) + 1
    return anticorrelation_escape_check(args.p, m, joint).to_json()


# --- parser ------------------------------------------------------------------

def _common():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--budget", type=_positive_int, default=DEFAULT_BUDGET,
                        help="enumeration budget (default %(default)s)")
    common.add_argument("--lp-budget", type=_positive_int, default=LP_BUDGET,
                        help="max product-form atoms in the LP (default %(default)s)")
    common.add_argument("--max-denominator", type=_positive_int, default=DEFAULT_DENOMINATOR_BOUND,
                        help="rationalization denominator bound (default %(default)s)")
    common.add_argument("--epsilon", type=_positive_float, default=NULL_EPSILON,
                        help="relative null-cone tolerance (default %(default)s)")
    common.add_argument("--seed", type=int, default=DEFAULT_SEED,
                        help="seed for Monte-Carlo modes (default %(default)s)")
    return common


def _add_pigeonhole(sub, common):
    p = sub.add_parser("pigeonhole", parents=[common], help="pigeonhole bound and LP")
    p.add_argument("--p", type=_rational, required=True, help="signalling probability, e.g. 1/4")
    p.add_argument("--m", type=_positive_int, help="number of experiments (default 2N+1)")
    p.add_argument("--lp-limit", type=_positive_int, default=15, help="largest M solved by LP")
    p.set_defaults(func=cmd_pigeonhole)


def _add_chain(sub, common):
    p = sub.add_parser("chain", parents=[common], help="detect backward-causal witnesses")
    p.add_argument("--exp1", help="distribution JSON of the upstream experiment")
    p.add_argument("--exp2", help="distribution JSON of the downstream experiment")
    p.add_argument("--joint", help="joint distribution JSON over both experiments")
    p.add_argument("--relay", required=True, help='A outcome -> A setting, e.g. "+:1,-:2"')
    p.add_argument("--mode", choices=["exhaustive", "monte-carlo"], default="exhaustive")
    p.add_argument("--samples", type=_positive_int, default=10_000)
    p.set_defaults(func=cmd_chain)


def _add_escape(sub, common):
    p = sub.add_parser("escape", parents=[common], help="can correlations avoid co-signalling?")
    p.add_argument("--p", type=_rational, required=True)
    p.add_argument("--m", type=_positive_int)
    p.add_argument("--joint", help="joint distribution JSON to audit")
    p.set_defaults(func=cmd_escape)


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = _Parser(prog="transferfn", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("enumerate", parents=[common], help="enumerate transfer functions")
    p.add_argument("--shape", required=True, help="e.g. 2x2:2x2 (settings x outcomes per party)")
    p.add_argument("--count-only", action="store_true")
    p.set_defaults(func=cmd_enumerate)

    p = sub.add_parser("classify", parents=[common], help="signalling class of a transfer function")
    p.add_argument("--shape", required=True)
    p.add_argument("--tf", help='e.g. "[+-,+-]" or "{00->++,...}"')
    p.add_argument("--census", action="store_true", help="classify every function of the shape")
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("mix", parents=[common], help="behavior of a distribution over transfer functions")
    p.add_argument("--dist", required=True)
    p.add_argument("--dist2", help="second distribution to mix in")
    p.add_argument("--lam", type=_rational, default=Fraction(1, 2), help="weight of --dist")
    p.set_defaults(func=cmd_mix)

    p = sub.add_parser("check-ns", parents=[common], help="behavior-level signalling check")
    p.add_argument("--behavior", required=True)
    p.set_defaults(func=cmd_check_ns)

    p = sub.add_parser("lp", parents=[common], help="local polytope membership")
    p.add_argument("--behavior", required=True)
    p.set_defaults(func=cmd_lp)

    for name, func, text in (("bell", cmd_bell, "three-angle Bell expressions for the singlet"),
                             ("quantum", cmd_quantum, "singlet behavior at the given angles")):
        p = sub.add_parser(name, parents=[common], help=text)
        p.add_argument("--angles", required=True, help="comma-separated radians, or exact-thirds")
        p.add_argument("--exact-thirds", action="store_true",
                       help="exact rationals for differences that are multiples of pi/3 or pi/2")
        p.set_defaults(func=func)

    st = sub.add_parser("spacetime", help="boosted configuration and pigeonhole")
    st_sub = st.add_subparsers(dest="spacetime_command", required=True, parser_class=_Parser)
    p = st_sub.add_parser("config", parents=[common], help="events of the boosted configuration")
    p.add_argument("--n", type=_positive_int, required=True)
    p.add_argument("--l", type=_positive_float, required=True)
    p.add_argument("--phi", type=_positive_float, required=True)
    p.add_argument("--tau", default="auto", help="proper-time delay, or auto for L sinh(phi)/100")
    p.add_argument("--csv", help="also write the event table as CSV ('-' for stderr)")
    p.set_defaults(func=cmd_spacetime_config)
    _add_pigeonhole(st_sub, common)
    _add_pigeonhole(sub, common)

    sc = sub.add_parser("scenario", help="chained experiments")
    sc_sub = sc.add_subparsers(dest="scenario_command", required=True, parser_class=_Parser)
    _add_chain(sc_sub, common)
    _add_escape(sc_sub, common)
    _add_chain(sub, common)
    _add_escape(sub, common)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        out = args.func(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        sys.stderr.write(f"transferfn: error: {exc}\n")
        return 1
    except TransferFnError as exc:
        sys.stderr.write(f"transferfn: {exc.name}: {exc}\n")
        print(json.dumps({"schema": SCHEMA, "error": exc.name, "message": str(exc)}))
        return 2
    print(json.dumps(out, indent=2))
    return 0


if __name__ == "__main__":
    sys.exit(main())
