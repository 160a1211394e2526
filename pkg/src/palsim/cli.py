"""Command-line entry points.

Subcommands: ``serve`` (the TCP simulator), ``generate`` (seeded task
instances), ``tournament`` (full orchestration; flags mirror the classic
launcher), ``plan`` (run the planner over PDDL files), ``agent`` (baseline
agents), ``replay`` (deterministic scripted run), and ``bench``.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import os
import signal
import sys

from . import bench, planner, tasks
from .client import LoopbackTransport, PalClient
from .costs import load_cost_table
from .server import PalServer, ServerConfig
from .session import Session
from .tournament import TournamentConfig, run_tournament


def _add_serve(sub):
    p = sub.add_parser("serve", help="run the simulator server")
    p.add_argument("--agent-port", type=int, default=None)
    p.add_argument("--control-port", type=int, default=None)
    p.add_argument("--fps", type=float, default=None)
    p.add_argument("--task", help="task file to arm at startup")
    p.add_argument("--task-root", default=".",
                   help="base directory for relative task paths")
    p.add_argument("--screen-format", default=None,
                   choices=["PNG", "BMP", "JPEG", "JPG", "WBMP", "GIF"])
    p.add_argument("--aigym", action="store_true", default=None,
                   help="append a SENSE_ALL payload to every reply")
    p.add_argument("--report-screen", action="store_true", default=None,
                   help="append a screen payload to every reply (with --aigym)")
    p.add_argument("--width", type=int, default=None)
    p.add_argument("--height", type=int, default=None)
    p.add_argument("--no-dev", action="store_true",
                   help="reject agent-issued RESET/CHAT/TELEPORT")
    p.add_argument("--costs", help="JSON cost-table override")
    p.set_defaults(func=cmd_serve)


def cmd_serve(args) -> int:
    logging.basicConfig(
        level=logging.INFO, stream=sys.stdout,
        format="%(asctime)s %(name)s %(levelname)s %(message)s")
    overrides = {}
    for key, value in (("agent_port", args.agent_port),
                       ("control_port", args.control_port),
                       ("fps", args.fps),
                       ("screen_format", args.screen_format),
                       ("aigym_reporting", args.aigym),
                       ("report_screen", args.report_screen),
                       ("width", args.width),
                       ("height", args.height)):
        if value is not None:
            overrides[key] = value
    config = ServerConfig.from_env(
        task_root=args.task_root, dev_mode=not args.no_dev, **overrides)
    costs = load_cost_table(args.costs) if args.costs else None
    initial = tasks.load_task(args.task) if args.task else None
    server = PalServer(config, initial_task=initial, costs=costs)
    server.start()
    signal.signal(signal.SIGTERM, lambda *_: server._shutdown.set())
    try:
        while not server.wait(timeout=0.5):
            pass
    except KeyboardInterrupt:
        pass
    server.stop()
    return 0


def _add_generate(sub):
    p = sub.add_parser("generate", help="emit seeded task instances")
    p.add_argument("task", choices=["pogo", "huga"])
    p.add_argument("--count", "-n", type=int, default=100)
    p.add_argument("--seed", type=int, default=1,
                   help="seed of the first instance; instance i uses seed+i")
    p.add_argument("--out", "-o", default=".", help="output directory")
    p.add_argument("--distribution", default="Uninformed",
                   choices=["Uninformed", "PreNovelty", "Novelty"])
    p.set_defaults(func=cmd_generate)


def cmd_generate(args) -> int:
    generator = tasks.generate_pogo if args.task == "pogo" else tasks.generate_huga
    os.makedirs(args.out, exist_ok=True)
    for i in range(args.count):
        seed = args.seed + i
        name = tasks.InstanceName.build(args.task.upper(), seed=seed, index=i,
                                        count=args.count).format()
        task = generator(seed, distribution=args.distribution, name=name)
        path = os.path.join(args.out, f"{name}.json")
        tasks.save_task(task, path)
    print(f"wrote {args.count} {args.task} instances to {args.out}")
    return 0


def _add_tournament(sub):
    p = sub.add_parser("tournament", help="run a full tournament")
    p.add_argument("-c", "--game-count", type=int, default=100,
                   help="how many games to run")
    p.add_argument("-t", "--tournament-name",
                   default="POGO_L00_T01_S01_X0100_A_U9999")
    p.add_argument("-g", "--games-folder", default="../pogo_100_PN",
                   help="where games are located")
    p.add_argument("-a", "--agent-name", default="MY_AGENT_ID")
    p.add_argument("-d", "--agent-dir", default="",
                   help="working directory for the agent command")
    p.add_argument("-x", "--agent-command", default="python pogo_agent.py",
                   help="shell command that launches the agent")
    p.add_argument("-i", "--seconds-per-game", type=float, default=300)
    p.add_argument("-m", "--max-tournament-minutes", type=float, default=2880)
    p.add_argument("--fps", type=float, default=20)
    p.add_argument("--agent-port", type=int, default=0)
    p.add_argument("--control-port", type=int, default=0)
    p.add_argument("--output-dir", default="")
    p.set_defaults(func=cmd_tournament)


def cmd_tournament(args) -> int:
    config = TournamentConfig(
        games_folder=args.games_folder,
        agent_command=args.agent_command,
        tournament_name=args.tournament_name,
        game_count=args.game_count,
        agent_name=args.agent_name,
        agent_dir=args.agent_dir,
        seconds_per_game=args.seconds_per_game,
        max_tournament_minutes=args.max_tournament_minutes,
        fps=args.fps,
        agent_port=args.agent_port,
        control_port=args.control_port,
        output_dir=args.output_dir,
    )
    summary = run_tournament(config)
    print(json.dumps(summary, indent=2))
    return 0 if summary["completed"] else 1


def _add_plan(sub):
    p = sub.add_parser("plan", help="run the planner over PDDL files")
    p.add_argument("--domain", required=True)
    p.add_argument("--problem", required=True)
    p.add_argument("--format", choices=["steps", "json"], default="steps")
    p.set_defaults(func=cmd_plan)


def cmd_plan(args) -> int:
    with open(args.domain, "r", encoding="utf-8") as fh:
        domain_text = fh.read()
    with open(args.problem, "r", encoding="utf-8") as fh:
        problem_text = fh.read()
    try:
        domain, problem = planner.parse_pddl(domain_text, problem_text)
    except planner.PddlError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    steps = planner.plan(domain, problem)
    if steps is planner.NO_PLAN:
        print("NO_PLAN")
        return 1
    if args.format == "steps":
        for action in steps:
            print(action.signature)
    else:
        print(json.dumps([{"name": a.name, "args": list(a.args)} for a in steps]))
    return 0


def _add_agent(sub):
    p = sub.add_parser("agent", help="run a baseline agent")
    p.add_argument("kind", choices=["pogo", "huga"])
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int,
                   default=int(os.environ.get("PAL_AGENT_PORT", 9000)))
    p.add_argument("--nav", choices=["tp", "move"], default="tp",
                   help="navigation mode for the pogo agent")
    p.add_argument("--max-instances", type=int, default=None)
    p.set_defaults(func=cmd_agent)


def cmd_agent(args) -> int:
    logging.basicConfig(
        level=logging.INFO, stream=sys.stdout,
        format="%(asctime)s %(name)s %(message)s")
    from .agents import HugaAgent, PogoAgent

    client = PalClient(host=args.host, port=args.port)
    try:
        client.connect()
    except OSError as exc:
        print(f"error: cannot reach server at {args.host}:{args.port}: {exc}",
              file=sys.stderr)
        return 1
    try:
        if args.kind == "pogo":
            agent = PogoAgent(client, nav_mode=args.nav)
        else:
            agent = HugaAgent(client)
        return agent.run_forever(max_instances=args.max_instances)
    finally:
        client.close()


def _add_replay(sub):
    p = sub.add_parser("replay", help="run a command script deterministically")
    p.add_argument("--task", required=True)
    p.add_argument("--script", required=True,
                   help="file with one command per line")
    p.add_argument("--out", help="write the envelope stream here (JSONL)")
    p.set_defaults(func=cmd_replay)


def cmd_replay(args) -> int:
    task = tasks.load_task(args.task)
    # A frozen clock removes wall time from the run: no timeout can fire and
    # the envelope stream is a pure function of task + script.
    session = Session(clock=lambda: 0.0)
    session.load_task(task)
    transport = LoopbackTransport(session)
    transport.send("START")
    lines = []
    with open(args.script, "r", encoding="utf-8") as fh:
        for raw in fh:
            command = raw.strip()
            if not command or command.startswith("#"):
                continue
            lines.append(json.dumps(transport.send(command)))
    stream = "\n".join(lines) + "\n"
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(stream)
    digest = hashlib.sha256(stream.encode("utf-8")).hexdigest()
    print(f"envelopes: {len(lines)}")
    print(f"stream sha256: {digest}")
    print(f"final state sha256: {session.state.digest()}")
    return 0


def _add_bench(sub):
    p = sub.add_parser("bench", help="performance measurements")
    which = p.add_subparsers(dest="bench_kind", required=True)
    render = which.add_parser("render", help="compare raster kernels")
    render.add_argument("--frames", type=int, default=200)
    render.add_argument("--size", type=int, default=256)
    render.set_defaults(func=cmd_bench_render)
    thr = which.add_parser("throughput", help="sustained commands/s over TCP")
    thr.add_argument("--duration", type=float, default=10.0)
    thr.add_argument("--format", default="NONE",
                     choices=["NONE", "PNG", "BMP", "JPEG", "JPG", "WBMP", "GIF"])
    thr.add_argument("--fps", type=float, default=1000.0)
    thr.set_defaults(func=cmd_bench_throughput)


def cmd_bench_render(args) -> int:
    results = bench.bench_render(frames=args.frames, width=args.size,
                                 height=args.size)
    print(json.dumps(results, indent=2))
    return 0


def cmd_bench_throughput(args) -> int:
    results = bench.bench_throughput(duration=args.duration,
                                     image_format=args.format, fps=args.fps)
    print(json.dumps(results, indent=2))
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="palsim",
        description="Headless grid-world evaluation stack speaking the PAL "
                    "line protocol.")
    sub = parser.add_subparsers(dest="command", required=True)
    _add_serve(sub)
    _add_generate(sub)
    _add_tournament(sub)
    _add_plan(sub)
    _add_agent(sub)
    _add_replay(sub)
    _add_bench(sub)
    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
