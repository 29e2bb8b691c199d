"""Command-line front end.

Every subcommand emits one JSON report on stdout (and, with --json, to a
file as well). Reports are deterministic given arguments and seed: they
echo the command, digest every input file, and render all rational values
both exactly and as advisory 6-place decimals. Wall-clock timing goes to
stderr only, so re-runs are byte-identical.

Exit codes: 0 success, 1 input error, 2 property or assertion failure
(a refused synthesis, a rejected certificate, a failed coincidence check,
a failing suite property), 3 internal error.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import time
from fractions import Fraction

from . import __version__
from .approximation import FormulaSynthesizer
from .errors import CertificateFormatError, NotWinnableError, ParameterError, PTSError
from .evaluator import eval_fo, eval_modal
from .formula import (
    modal_rank,
    parse_fo,
    parse_modal,
    quantifier_rank,
    render_fo,
    render_modal,
    standard_translation,
)
from .game import (
    certificate_from_dict,
    certificate_to_dict,
    exhaustive_spoiler,
    game_distance,
    synthesize_duplicator_strategy,
    verify_certificate,
)
from .metrics import behavioural_distance
from .rational import decimal_repr, format_rational, parse_rational
from .suite import run_suite
from .system import disjoint_union, load_system, restrict, system_to_dict, unravel

DEFAULT_MAX_DEPTH = 8


def _max_depth() -> int:
    raw = os.environ.get("PTSM_MAX_DEPTH", "")
    if not raw:
        return DEFAULT_MAX_DEPTH
    try:
        cap = int(raw)
    except ValueError:
        raise ParameterError(f"PTSM_MAX_DEPTH must be an integer, got {raw!r}")
    if cap < 0:
        raise ParameterError("PTSM_MAX_DEPTH must be non-negative")
    return cap


def _check_depth(n: int) -> int:
    cap = _max_depth()
    if n < 0:
        raise ParameterError("depth must be non-negative")
    if n > cap:
        raise ParameterError(
            f"depth {n} exceeds the cap {cap}; raise PTSM_MAX_DEPTH to override"
        )
    return n


def _rat(q: Fraction) -> dict:
    return {"exact": format_rational(q), "decimal": decimal_repr(q)}


def _matrix(level) -> dict:
    return {
        "labels": list(level.labels),
        "rows": [[format_rational(v) for v in row] for row in level.rows],
        "rows_decimal": [[decimal_repr(v) for v in row] for row in level.rows],
    }


def _digest(path) -> dict:
    with open(path, "rb") as fh:
        return {"path": str(path), "sha256": hashlib.sha256(fh.read()).hexdigest()}


def _emit(args, inputs: dict, outputs: dict) -> None:
    report = {
        "command": list(args.raw_argv),
        "inputs": inputs,
        "outputs": outputs,
        "seed": getattr(args, "seed", None),
        "version": __version__,
    }
    text = json.dumps(report, indent=2, sort_keys=True) + "\n"
    sys.stdout.write(text)
    if getattr(args, "json", None):
        with open(args.json, "w", encoding="utf-8") as fh:
            fh.write(text)


def _load_main(args):
    inputs = {"system": _digest(args.system)}
    system = load_system(args.system)
    system_b = None
    if getattr(args, "system_b", None):
        inputs["system_b"] = _digest(args.system_b)
        system_b = load_system(args.system_b)
    return system, system_b, inputs


def _split_pair(text: str):
    if "," not in text:
        raise ParameterError(f"state pair {text!r} must be written as 'labelA,labelB'")
    a, b = text.split(",", 1)
    return a.strip(), b.strip()


def _pair_ids(system, system_b, text):
    a_lab, b_lab = _split_pair(text)
    other = system if system_b is None else system_b
    return system.state_by_label(a_lab), other.state_by_label(b_lab), a_lab, b_lab


# ---------------------------------------------------------------------------
# Subcommands


def cmd_validate(args) -> int:
    inputs = {"system": _digest(args.system)}
    try:
        system = load_system(args.system)
    except PTSError as exc:
        _emit(args, inputs, {"valid": False, "error": str(exc)})
        return 1
    _emit(
        args,
        inputs,
        {
            "valid": True,
            "states": system.n_states,
            "atoms": list(system.atoms),
            "terminating": [
                system.labels[i]
                for i in range(system.n_states)
                if system.is_terminating(i)
            ],
        },
    )
    return 0


def cmd_eval(args) -> int:
    system, _, inputs = _load_main(args)
    if args.modal is not None:
        formula = parse_modal(args.modal)
        if args.state is None:
            raise ParameterError("--state is required for modal evaluation")
        a = system.state_by_label(args.state)
        value = eval_modal(system, formula, a)
        outputs = {
            "logic": "modal",
            "formula": render_modal(formula),
            "rank": modal_rank(formula),
            "state": args.state,
            "value": _rat(value),
        }
    else:
        formula, free = parse_fo(args.fo)
        env = {}
        for binding in args.bind:
            if "=" not in binding:
                raise ParameterError(f"binding {binding!r} must be 'var=label'")
            var, lab = binding.split("=", 1)
            env[var.strip()] = system.state_by_label(lab.strip())
        if args.state is not None:
            unbound = [v for v in free if v not in env]
            if len(unbound) == 1:
                env[unbound[0]] = system.state_by_label(args.state)
            elif unbound:
                raise ParameterError(
                    "--state is ambiguous with several free variables; use --bind"
                )
        value = eval_fo(system, formula, env)
        outputs = {
            "logic": "fo",
            "formula": render_fo(formula),
            "rank": quantifier_rank(formula),
            "environment": {
                v: system.labels[s] for v, s in sorted(env.items())
            },
            "value": _rat(value),
        }
    _emit(args, inputs, outputs)
    return 0


def _chain_outputs(chain, n):
    return {
        "labels": list(chain.system.labels),
        "levels": [_matrix(level) for level in chain.levels],
        "depth": n,
    }


def _pair_entries(chain, system, system_b, pair_texts, n, method):
    entries = []
    for text in pair_texts:
        a, b, a_lab, b_lab = _pair_ids(system, system_b, text)
        ua, ub = chain.offsets[0] + a, chain.offsets[-1] + b
        entry = {
            "a": a_lab,
            "b": b_lab,
            "values": [_rat(chain.value(m, ua, ub)) for m in range(n + 1)],
        }
        if n > 0 and method == "W":
            key = (n - 1, min(ua, ub), max(ua, ub))
            plan = chain.couplings.get(key)
            if plan is not None:
                entry["coupling"] = [
                    {
                        "a": chain.system.labels[i],
                        "b": chain.system.labels[j],
                        "mass": format_rational(w),
                    }
                    for (i, j), w in sorted(plan.weights.items())
                ]
        if n > 0 and method == "K":
            key = (n - 1, min(ua, ub), max(ua, ub))
            price = chain.prices.get(key)
            if price is not None:
                entry["price"] = {
                    chain.system.labels[s]: format_rational(v)
                    for s, v in sorted(price.values.items())
                }
        entries.append(entry)
    return entries


def cmd_distance(args) -> int:
    system, system_b, inputs = _load_main(args)
    n = _check_depth(args.depth)
    method = args.method.upper()
    if args.assert_coincide:
        w = behavioural_distance(system, system_b, n, "W")
        k = behavioural_distance(system, system_b, n, "K")
        for m in range(n + 1):
            if w.levels[m].rows != k.levels[m].rows:
                mismatch = _first_mismatch(w.levels[m], k.levels[m])
                _emit(
                    args,
                    inputs,
                    {
                        "coincide": False,
                        "level": m,
                        "mismatch": mismatch,
                    },
                )
                return 2
        outputs = {"coincide": True, "methods": ["W", "K", "G"]}
        outputs.update(_chain_outputs(w, n))
        if args.pair:
            outputs["pairs"] = _pair_entries(w, system, system_b, args.pair, n, "W")
        _emit(args, inputs, outputs)
        return 0
    lift = "W" if method in ("W", "G") else "K"
    chain = behavioural_distance(system, system_b, n, lift)
    outputs = {"method": method}
    outputs.update(_chain_outputs(chain, n))
    if args.pair:
        outputs["pairs"] = _pair_entries(chain, system, system_b, args.pair, n, method)
    _emit(args, inputs, outputs)
    return 0


def _first_mismatch(level_w, level_k):
    for i in range(level_w.size):
        for j in range(level_w.size):
            if level_w.rows[i][j] != level_k.rows[i][j]:
                return {
                    "a": level_w.labels[i],
                    "b": level_w.labels[j],
                    "transport": format_rational(level_w.rows[i][j]),
                    "dual": format_rational(level_k.rows[i][j]),
                }
    return None


def cmd_witness(args) -> int:
    system, system_b, inputs = _load_main(args)
    n = _check_depth(args.depth)
    delta = parse_rational(args.delta, "--delta")
    a, b, a_lab, b_lab = _pair_ids(system, system_b, args.pair)
    chain = behavioural_distance(system, system_b, n, "W")
    synth = FormulaSynthesizer(chain)
    ua, ub = chain.offsets[0] + a, chain.offsets[-1] + b
    phi = synth.witness(ua, ub, n, delta)
    vals = synth.values_of(phi)
    d = chain.value(n, ua, ub)
    gap = abs(vals[ua] - vals[ub])
    _emit(
        args,
        inputs,
        {
            "formula": render_modal(phi),
            "rank": modal_rank(phi),
            "depth": n,
            "delta": _rat(delta),
            "a": a_lab,
            "b": b_lab,
            "value_a": _rat(vals[ua]),
            "value_b": _rat(vals[ub]),
            "gap": _rat(gap),
            "distance": _rat(d),
            "certified_floor": _rat(max(d - delta, Fraction(0))),
        },
    )
    return 0


def cmd_game(args) -> int:
    system, system_b, inputs = _load_main(args)
    if args.mode == "verify":
        if not args.certificate:
            raise ParameterError("game verify needs --certificate")
        inputs["certificate"] = _digest(args.certificate)
        with open(args.certificate, "r", encoding="utf-8") as fh:
            try:
                doc = json.load(fh)
            except json.JSONDecodeError as exc:
                raise CertificateFormatError(
                    f"{args.certificate}: invalid JSON: {exc}"
                ) from exc
        cert = certificate_from_dict(doc, system, system_b)
        ok, reason = verify_certificate(cert, system, system_b)
        agrees = exhaustive_spoiler(cert, system, system_b)
        outputs = {
            "valid": ok,
            "spoiler_accepts": agrees,
        }
        if reason is not None:
            outputs["reason"] = reason
        _emit(args, inputs, outputs)
        return 0 if ok and agrees else 2
    if args.depth is None:
        raise ParameterError(f"game {args.mode} needs --depth")
    if not args.pair:
        raise ParameterError(f"game {args.mode} needs --pair")
    n = _check_depth(args.depth)
    a, b, a_lab, b_lab = _pair_ids(system, system_b, args.pair)
    chain = behavioural_distance(system, system_b, n, "W")
    value = game_distance(system, system_b, a, b, n, chain=chain)
    if args.mode == "value":
        _emit(
            args,
            inputs,
            {"a": a_lab, "b": b_lab, "depth": n, "value": _rat(value)},
        )
        return 0
    epsilon = (
        value if args.epsilon is None else parse_rational(args.epsilon, "--epsilon")
    )
    cert = synthesize_duplicator_strategy(
        system, system_b, a, b, n, epsilon, chain=chain
    )
    doc = certificate_to_dict(cert, system, system_b)
    ok, reason = verify_certificate(cert, system, system_b)
    if not ok:
        raise AssertionError(f"synthesized certificate failed to verify: {reason}")
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            json.dump(doc, fh, indent=2, sort_keys=True)
            fh.write("\n")
    _emit(
        args,
        inputs,
        {
            "a": a_lab,
            "b": b_lab,
            "depth": n,
            "epsilon": _rat(epsilon),
            "game_value": _rat(value),
            "certificate": doc,
        },
    )
    return 0


def cmd_transform(args) -> int:
    if args.op == "translate":
        if not args.modal:
            raise ParameterError("transform translate needs --modal")
        formula = parse_modal(args.modal)
        translated = standard_translation(formula, args.var)
        _emit(
            args,
            {},
            {
                "modal": render_modal(formula),
                "fo": render_fo(translated),
                "modal_rank": modal_rank(formula),
                "quantifier_rank": quantifier_rank(translated),
                "variable": args.var,
            },
        )
        return 0
    if not args.system:
        raise ParameterError(f"transform {args.op} needs --system")
    system, system_b, inputs = _load_main(args)
    if args.op == "union":
        if system_b is None:
            raise ParameterError("transform union needs --system-b")
        union, offsets = disjoint_union([system, system_b])
        outputs = {"system": system_to_dict(union), "offsets": offsets}
    elif args.op == "restrict":
        if args.state is None:
            raise ParameterError("transform restrict needs --state")
        a = system.state_by_label(args.state)
        sub, state_map = restrict(system, a, args.radius)
        outputs = {
            "system": system_to_dict(sub),
            "center": args.state,
            "radius": args.radius,
            "state_map": {
                system.labels[old]: sub.labels[new]
                for old, new in sorted(state_map.items())
            },
        }
    else:
        if args.state is None:
            raise ParameterError("transform unravel needs --state")
        n = _check_depth(args.depth)
        a = system.state_by_label(args.state)
        tree, root = unravel(system, a, n)
        outputs = {
            "system": system_to_dict(tree),
            "root": tree.labels[root],
            "depth": n,
        }
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            json.dump(outputs["system"], fh, indent=2, sort_keys=True)
            fh.write("\n")
    _emit(args, inputs, outputs)
    return 0


def cmd_suite(args) -> int:
    n = _check_depth(args.depth)
    try:
        sizes = [int(s) for s in args.sizes.split(",") if s.strip()]
    except ValueError:
        raise ParameterError(f"--sizes must be a comma list of integers, got {args.sizes!r}")
    if args.trials < 0:
        raise ParameterError("--trials must be non-negative")

    def progress(entry):
        line = f"{entry['status'].upper():4s} {entry['property']} ({entry['trials']} trials)"
        print(line, file=sys.stderr)

    summary = run_suite(args.seed, sizes, n, args.trials, progress=progress)
    _emit(args, {}, summary)
    return 0 if summary["passed"] else 2


# ---------------------------------------------------------------------------
# Parser


class _ArgumentParser(argparse.ArgumentParser):
    # Usage errors are input errors, exit code 1 rather than argparse's 2.
    def error(self, message):
        self.exit(1, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _ArgumentParser(
        prog="ptsm",
        description="Exact behavioural distances, games and witness formulas "
        "for probabilistic transition systems.",
    )
    parser.add_argument("--version", action="version", version=f"ptsm {__version__}")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    def common(p, system=True, depth=False, seed=False):
        if system:
            p.add_argument("--system", "-s", required=True, help="system JSON file")
            p.add_argument("--system-b", help="second system JSON file")
        p.add_argument("--json", help="also write the report to this path")
        if depth:
            p.add_argument(
                "--depth", "-n", type=int, required=True, help="chain depth / rounds"
            )
        if seed:
            p.add_argument("--seed", type=int, default=0, help="random seed")

    p = sub.add_parser("validate", help="check a system file")
    common(p)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("eval", help="evaluate a formula on a system")
    common(p)
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--modal", help="modal formula text")
    group.add_argument("--fo", help="first-order formula text")
    p.add_argument("--state", help="state label (modal, or sole free variable)")
    p.add_argument(
        "--bind",
        action="append",
        default=[],
        metavar="VAR=LABEL",
        help="bind a first-order variable (repeatable)",
    )
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("distance", help="depth-indexed behavioural distances")
    common(p, depth=True)
    p.add_argument(
        "--method",
        choices=["w", "k", "g", "W", "K", "G"],
        default="w",
        help="transport, dual LP, or game-labelled transport",
    )
    p.add_argument(
        "--pair",
        action="append",
        default=[],
        metavar="A,B",
        help="report this state pair in detail (repeatable)",
    )
    p.add_argument(
        "--assert-coincide",
        action="store_true",
        help="compute all methods and fail on any mismatch",
    )
    p.set_defaults(func=cmd_distance)

    p = sub.add_parser("witness", help="synthesize a separating formula")
    common(p, depth=True)
    p.add_argument("--pair", required=True, metavar="A,B", help="state pair")
    p.add_argument("--delta", required=True, help="slack budget, e.g. 1/32")
    p.set_defaults(func=cmd_witness)

    p = sub.add_parser("game", help="bisimulation game tools")
    p.add_argument("mode", choices=["synth", "verify", "value"])
    common(p)
    p.add_argument("--pair", metavar="A,B", help="state pair (synth, value)")
    p.add_argument("--depth", "-n", type=int, default=None, help="rounds")
    p.add_argument("--epsilon", help="allowed deviation (synth; default: the value)")
    p.add_argument("--certificate", help="certificate file (verify)")
    p.add_argument("--out", help="write the certificate JSON here (synth)")
    p.set_defaults(func=cmd_game)

    p = sub.add_parser("transform", help="system and formula transforms")
    p.add_argument("op", choices=["restrict", "unravel", "union", "translate"])
    p.add_argument("--system", "-s", help="system JSON file")
    p.add_argument("--system-b", help="second system JSON file (union)")
    p.add_argument("--json", help="also write the report to this path")
    p.add_argument("--state", help="center / root state label")
    p.add_argument("--radius", "-k", type=int, default=1, help="restriction radius")
    p.add_argument("--depth", "-n", type=int, default=1, help="unravelling depth")
    p.add_argument("--modal", help="modal formula to translate")
    p.add_argument("--var", default="x", help="free variable for the translation")
    p.add_argument("--out", help="write the transformed system here")
    p.set_defaults(func=cmd_transform)

    p = sub.add_parser("suite", help="run the randomized invariant suite")
    common(p, system=False, seed=True)
    p.add_argument("--trials", type=int, default=50, help="trials per property")
    p.add_argument("--sizes", default="12", help="comma list of system sizes")
    p.add_argument("--depth", "-n", type=int, default=4, help="chain depth")
    p.set_defaults(func=cmd_suite)

    return parser


def main(argv=None) -> int:
    if argv is None:
        argv = sys.argv[1:]
    parser = build_parser()
    args = parser.parse_args(argv)
    args.raw_argv = list(argv)
    start = time.perf_counter()
    try:
        code = args.func(args)
    except NotWinnableError as exc:
        print(f"ptsm: {exc}", file=sys.stderr)
        code = 2
    except PTSError as exc:
        print(f"ptsm: error: {exc}", file=sys.stderr)
        code = 1
    except OSError as exc:
        print(f"ptsm: error: {exc}", file=sys.stderr)
        code = 1
    except Exception as exc:  # pragma: no cover - canary for genuine bugs
        print(f"ptsm: internal error: {exc!r}", file=sys.stderr)
        code = 3
    finally:
        elapsed = time.perf_counter() - start
        print(f"elapsed: {elapsed:.3f}s", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
