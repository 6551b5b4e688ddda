"""Command line entry point.

    gresilience run --scenario scenarios/reference.json --technique both --out out/
    gresilience compare --logs out/wsm.json out/game.json --out out/report.json
    gresilience solve-game --attrs scenarios/reference_attrs.json --epsilon 0.5
    gresilience solve-score --attrs scenarios/reference_attrs.json --epsilon 0.5 --weights 0.3,0.3,0.4
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import game, report, wsm
from .errors import ConfigError, DomainError, GResilienceError
from .harness import DEFAULT_MAX_ITERATIONS, Technique, TechniqueOptions, compare, run_experiment
from .measurement import AttributeVector, CandidateAction
from .simulator import load_config

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_RUNTIME = 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def _weights(text: str) -> wsm.WeightVector:
    try:
        return wsm.WeightVector.parse(text)
    except DomainError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def load_actions(path: str | Path) -> list[CandidateAction]:
    path = Path(path)
    try:
        data = json.loads(path.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(str(path), f"cannot read attributes: {exc}") from exc
    items = data.get("actions") if isinstance(data, dict) else data
    if not isinstance(items, list):
        raise ConfigError("actions", "expected a list of actions")
    actions = []
    for i, a in enumerate(items):
        try:
            actions.append(
                CandidateAction(str(a["id"]), a["kind"], AttributeVector(a["e_t"], a["e_co2"], a["h"]))
            )
        except KeyError as exc:
            raise ConfigError(f"actions[{i}].{exc.args[0]}", "missing required field") from None
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"actions[{i}]", str(exc)) from None
    return actions


def _print_json(data) -> None:
    print(json.dumps(data, indent=2, allow_nan=False))


def cmd_run(args) -> int:
    cfg = load_config(args.scenario)
    if args.seed is not None:
        cfg = cfg.with_seed(args.seed)
    opts = TechniqueOptions(wsm_mode=wsm.WsmMode(args.wsm_mode), weights=args.weights, max_rounds=args.max_rounds)
    techniques = [Technique.WSM, Technique.GAME] if args.technique == "both" else [Technique.parse(args.technique)]
    out = Path(args.out)
    logs = []
    for t in techniques:
        lg = run_experiment(cfg, t, opts, args.max_iterations)
        logs.append(lg)
        path = report.emit(lg, args.format, out / f"{t.value.lower()}.{args.format}")
        s = lg.summary
        print(
            f"{t.value}: iterations={s.iterations_to_recover} recovered={s.recovered} "
            f"elapsed_s={s.total_elapsed_s!r} co2_g={s.total_co2_g!r} human={s.total_human} -> {path}"
        )
    if len(logs) > 1:
        path = report.emit(compare(logs), args.format, out / f"comparison.{args.format}")
        print(f"comparison -> {path}")
    return EXIT_OK


def cmd_compare(args) -> int:
    logs = [report.load_log(p) for p in args.logs]
    rep = compare(logs)
    if args.out:
        fmt = "csv" if str(args.out).endswith(".csv") else "json"
        report.emit(rep, fmt, args.out)
    else:
        sys.stdout.write(report.to_json(rep))
    return EXIT_OK


def cmd_solve_game(args) -> int:
    actions = load_actions(args.attrs)
    a1, a2 = game.action_pair(actions)
    _print_json(game.solve(game.build_payoff_matrix(a1, a2, args.epsilon)).to_dict())
    return EXIT_OK


def cmd_solve_score(args) -> int:
    actions = load_actions(args.attrs)
    mode = wsm.WsmMode.SEARCH if args.search else wsm.WsmMode.FIXED
    d = wsm.select_action(actions, args.epsilon, mode, args.weights)
    _print_json(
        {
            "mode": d.mode.value,
            "selected": d.selected,
            "tie_note": d.tie_note,
            "scores": [
                {"id": s.action_id, "score": s.score, "weights": list(s.weights.as_tuple())} for s in d.scored
            ],
        }
    )
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="gresilience", description="Greenness/resilience recovery-action experiments")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    run = sub.add_parser("run", help="run the experiment protocol on a scenario")
    run.add_argument("--scenario", required=True)
    run.add_argument("--technique", choices=["wsm", "game", "both"], default="both")
    run.add_argument("--wsm-mode", choices=["fixed", "search"], default="fixed")
    run.add_argument("--weights", type=_weights, default=wsm.EQUAL_WEIGHTS, help="w_t,w_h,w_co2")
    run.add_argument("--seed", type=int, default=None, help="overrides the scenario seed")
    run.add_argument("--max-iterations", type=int, default=DEFAULT_MAX_ITERATIONS)
    run.add_argument("--max-rounds", type=int, default=game.DEFAULT_MAX_ROUNDS)
    run.add_argument("--out", required=True)
    run.add_argument("--format", choices=["csv", "json"], default="json")
    run.set_defaults(func=cmd_run)

    cmp_ = sub.add_parser("compare", help="compare JSON experiment logs")
    cmp_.add_argument("--logs", nargs="+", required=True)
    cmp_.add_argument("--out", default=None, help=".json or .csv; stdout when omitted")
    cmp_.set_defaults(func=cmd_compare)

    sg = sub.add_parser("solve-game", help="payoff matrix and equilibria for two actions")
    sg.add_argument("--attrs", required=True)
    sg.add_argument("--epsilon", type=float, required=True)
    sg.set_defaults(func=cmd_solve_game)

    ss = sub.add_parser("solve-score", help="weighted-sum scores for candidate actions")
    ss.add_argument("--attrs", required=True)
    ss.add_argument("--epsilon", type=float, required=True)
    ss.add_argument("--weights", type=_weights, default=wsm.EQUAL_WEIGHTS, help="w_t,w_h,w_co2")
    ss.add_argument("--search", action="store_true", help="search the best weights per action")
    ss.set_defaults(func=cmd_solve_score)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (GResilienceError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
