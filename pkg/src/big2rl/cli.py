"""Command-line entry points.

Subcommands: train, eval, stats, replay, inspect-obs.
Exit codes: 0 success, 1 config error, 2 runtime fault.
"""

from __future__ import annotations

import argparse
import json
import sys

from .agents import PolicyAgent, ValueAgent, make_heuristic
from .config import ConfigError, load_config
from .encoders import encode_observation, format_observation
from .evaluation import branching_stats, tournament
from .game import deal, legal_actions, apply_action
from .nn import load_checkpoint
from .orchestrator import Transcript, replay_transcript
from .rng import make_rng

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_RUNTIME = 2


def cmd_train(args) -> int:
    try:
        cfg = load_config(args.config)
    except (ConfigError, FileNotFoundError, TypeError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    from .trainer import train  # deferred: torch import is slow

    try:
        final = train(cfg)
    except Exception as exc:  # noqa: BLE001 - report and exit with fault code
        print(f"training fault: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    print(f"training complete; final checkpoint: {final}")
    return EXIT_OK


def _load_agent(checkpoint_path: str):
    model, meta = load_checkpoint(checkpoint_path)
    if model.config.value_head:
        return PolicyAgent(model, sample=True)
    return ValueAgent(model, epsilon=0.0)


def cmd_eval(args) -> int:
    if args.checkpoint:
        agent = _load_agent(args.checkpoint)
        label = args.checkpoint
    elif args.agent:
        agent = make_heuristic(args.agent)
        label = args.agent
    else:
        print("eval needs --checkpoint or --agent", file=sys.stderr)
        return EXIT_CONFIG
    result = tournament(agent, args.opponent, n_games=args.games, seed=args.seed)
    print(f"{label} vs 3x {args.opponent}: {result.summary()}")
    if args.json:
        print(
            json.dumps(
                {
                    "agent": label,
                    "opponent": args.opponent,
                    "games": result.games,
                    "win_rate": result.win_rate,
                    "avg_score": result.avg_score,
                    "ci_half_width": result.ci_half_width,
                    "seed": result.seed,
                }
            )
        )
    return EXIT_OK


def cmd_stats(args) -> int:
    stats = branching_stats(n_games=args.games, seed=args.seed)
    print(stats.summary())
    if args.histogram:
        for k in sorted(stats.histogram):
            print(f"{k}\t{stats.histogram[k]}\t{stats.control_histogram.get(k, 0)}")
    return EXIT_OK


def cmd_replay(args) -> int:
    bad = 0
    with open(args.transcript) as f:
        for lineno, line in enumerate(f, 1):
            line = line.strip()
            if not line:
                continue
            transcript = Transcript.from_json(line)
            ok, message = replay_transcript(transcript)
            status = "ok" if ok else "INVALID"
            print(f"game {lineno}: {status} - {message}")
            if not ok:
                bad += 1
    return EXIT_OK if bad == 0 else EXIT_RUNTIME


def cmd_inspect_obs(args) -> int:
    rng = make_rng(args.seed)
    state = deal(rng)
    for _ in range(args.plies):
        if state.is_terminal:
            break
        legal = legal_actions(state)
        state = apply_action(state, legal[int(rng.integers(len(legal)))])
    if state.is_terminal:
        print("game ended before the requested ply")
        return EXIT_RUNTIME
    obs = encode_observation(state, state.current_player)
    print(f"seat {state.current_player} after {args.plies} random plies (seed {args.seed}):")
    print(format_observation(obs))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="big2rl", description="Big 2 simulator and self-play RL framework"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="run a training loop from a YAML config")
    p.add_argument("config", help="path to the run configuration file")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="tournament against a heuristic opponent pool")
    p.add_argument("--checkpoint", help="checkpoint file of the agent to evaluate")
    p.add_argument(
        "--agent", choices=["random", "greedy", "smart"], help="heuristic agent instead"
    )
    p.add_argument(
        "--opponent", default="random", choices=["random", "greedy", "smart"]
    )
    p.add_argument("--games", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--json", action="store_true", help="also print a JSON record")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("stats", help="branching-factor study under random play")
    p.add_argument("--games", type=int, default=10000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--histogram", action="store_true", help="dump the full histogram")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("replay", help="validate a line-delimited transcript file")
    p.add_argument("transcript")
    p.set_defaults(func=cmd_replay)

    p = sub.add_parser("inspect-obs", help="dump an observation as labeled text")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--plies", type=int, default=0, help="random plies before the dump")
    p.set_defaults(func=cmd_inspect_obs)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
