"""Command-line front end.

Three subcommands: ``search`` runs the genetic search and writes the run
artifact directory, ``describe`` prints the layer table and resource
figures for a single candidate, and ``pareto`` merges one or more run
histories into a combined non-dominated front.

Exit codes: 0 success, 1 usage or configuration error, 2 evaluator
failure. Interrupting a search flushes the history written so far and
still produces the derived artifacts for the partial run.
"""

from __future__ import annotations

import argparse
import contextlib
import json
import os
import signal
import sys
import time
from pathlib import Path

from . import artifacts
from .arch_model import count_parameters, instantiate
from .evaluator import BackendError, ExternalBackend, SurrogateBackend, SurrogateParams
from .evolution import (
    EvaluatedCandidate,
    SearchConfig,
    cumulative_pareto_fraction,
    fitness_evolution,
    pareto_front,
    run_search,
)
from .fitness import Constraints, FitnessWeights
from .resources import estimate_flash, estimate_ram
from .search_space import (
    COLORS,
    RESOLUTIONS,
    Candidate,
    DataConfig,
    ModelConfig,
    validate,
)
from .supernet_cache import DEFAULT_FINETUNE_STEPS, DEFAULT_PRETRAIN_STEPS, SupernetCache

KIB = 1024
MIB = 1024 * KIB

# Memory budgets of the three reference device classes.
PRESETS = {
    "large": Constraints(max_ram_bytes=512 * KIB, max_flash_bytes=2 * MIB),
    "medium": Constraints(max_ram_bytes=320 * KIB, max_flash_bytes=1 * MIB),
    "small": Constraints(max_ram_bytes=256 * KIB, max_flash_bytes=1 * MIB),
}

ARTIFACT_ROOT_ENV = "DATANAS_ARTIFACT_ROOT"

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_EVALUATOR = 2
EXIT_INTERRUPTED = 130

HARDWARE_AWARE_RESOLUTION = 224
HARDWARE_AWARE_COLOR = "rgb"


class UsageError(Exception):
    """Bad flags or config file contents; maps to exit code 1."""


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on usage errors; this tool reserves 2 for
    # evaluator failures, so remap to 1.
    def error(self, message: str):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise SystemExit(EXIT_USAGE)


_CONFIG_KEYS = frozenset(
    {
        "preset", "max_ram_bytes", "max_flash_bytes",
        "evaluator", "external_command",
        "budget_evals", "budget_seconds", "seed",
        "population_size", "tournament_size", "crossover_rate", "mutation_rate",
        "hardware_aware", "fixed_resolution", "fixed_color",
        "pretrain_steps", "finetune_steps", "noise_amplitude",
        "w1", "w2", "w3", "w4", "w5",
    }
)


def _load_config_file(path: str) -> dict:
    """A flat JSON object whose keys mirror the search flags."""
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise UsageError(f"cannot read config file {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise UsageError(f"config file {path} is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise UsageError(f"config file {path} must hold a JSON object")
    unknown = sorted(set(data) - _CONFIG_KEYS)
    if unknown:
        raise UsageError(f"config file {path}: unknown keys {', '.join(unknown)}")
    return data


class _Settings:
    """Effective search settings: flags override config file values."""

    def __init__(self, args: argparse.Namespace):
        self._file = _load_config_file(args.config) if args.config else {}
        self._args = args

    def get(self, name: str, default=None):
        flag = getattr(self._args, name, None)
        if flag is not None:
            return flag
        if name in self._file:
            return self._file[name]
        return default

    def require_type(self, name: str, kind, default=None):
        value = self.get(name, default)
        if value is None:
            return None
        if kind is float and isinstance(value, int) and not isinstance(value, bool):
            value = float(value)
        if kind is bool and not isinstance(value, bool):
            raise UsageError(f"{name} must be true or false, got {value!r}")
        if not isinstance(value, kind) or isinstance(value, bool) and kind is int:
            raise UsageError(f"{name} must be {kind.__name__}, got {value!r}")
        return value


def _resolve_constraints(settings: _Settings) -> tuple[str | None, Constraints]:
    preset = settings.get("preset")
    if preset is not None and preset not in PRESETS:
        raise UsageError(f"unknown preset {preset!r}; choose from {', '.join(PRESETS)}")
    ram = settings.require_type("max_ram_bytes", int)
    flash = settings.require_type("max_flash_bytes", int)
    if preset is not None:
        ram = ram if ram is not None else PRESETS[preset].max_ram_bytes
        flash = flash if flash is not None else PRESETS[preset].max_flash_bytes
    if ram is None or flash is None:
        raise UsageError("no constraints: pass --preset, or both --max-ram and --max-flash")
    try:
        return preset, Constraints(max_ram_bytes=ram, max_flash_bytes=flash)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def _resolve_search(settings: _Settings):
    """Build (SearchConfig, preset name, mode, steps, noise) from settings."""
    preset, constraints = _resolve_constraints(settings)

    hardware_aware = bool(settings.require_type("hardware_aware", bool, False))
    fixed_resolution = settings.require_type("fixed_resolution", int)
    fixed_color = settings.get("fixed_color")
    if hardware_aware:
        # Hardware-aware baseline: the data configuration is pinned, by
        # default to the conventional full-size camera input.
        fixed_resolution = fixed_resolution or HARDWARE_AWARE_RESOLUTION
        fixed_color = fixed_color or HARDWARE_AWARE_COLOR

    evaluator = settings.get("evaluator", "surrogate")
    if evaluator not in ("surrogate", "external"):
        raise UsageError(f"evaluator must be surrogate or external, got {evaluator!r}")

    try:
        weights = FitnessWeights(
            *(settings.require_type(f"w{i}", float, 0.2) for i in range(1, 6))
        )
        config = SearchConfig(
            constraints=constraints,
            population_size=settings.require_type("population_size", int, 25),
            tournament_size=settings.require_type("tournament_size", int, 3),
            crossover_rate=settings.require_type("crossover_rate", float, 0.9),
            mutation_rate=settings.require_type("mutation_rate", float, 0.15),
            max_evaluations=settings.require_type("budget_evals", int),
            max_seconds=settings.require_type("budget_seconds", float),
            seed=settings.require_type("seed", int, 0),
            weights=weights,
            evaluator=evaluator,
            fixed_resolution=fixed_resolution,
            fixed_color=fixed_color,
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from exc

    steps = (
        settings.require_type("pretrain_steps", int, DEFAULT_PRETRAIN_STEPS),
        settings.require_type("finetune_steps", int, DEFAULT_FINETUNE_STEPS),
    )
    noise = settings.require_type("noise_amplitude", float, 0.05)
    mode = "hardware-aware" if hardware_aware else "data-aware"
    return config, preset, mode, steps, noise


def _make_backend(settings: _Settings, config: SearchConfig, noise: float):
    if config.evaluator == "surrogate":
        return SurrogateBackend(SurrogateParams(noise_amplitude=noise, seed=config.seed))
    command = settings.get("external_command")
    if not command:
        raise UsageError("--external-command is required with --evaluator external")
    return ExternalBackend(command)


def _resolve_output_dir(flag: str | None, seed: int) -> Path:
    if flag:
        path = Path(flag)
    else:
        root = Path(os.environ.get(ARTIFACT_ROOT_ENV, "runs"))
        stamp = time.strftime("%Y%m%d-%H%M%S")
        path = root / f"search-{stamp}-seed{seed}"
        suffix = 1
        while path.exists():
            suffix += 1
            path = root / f"search-{stamp}-seed{seed}-{suffix}"
    path.mkdir(parents=True, exist_ok=True)
    return path


def _config_label(dc: DataConfig) -> str:
    return f"{dc.resolution}x{dc.resolution} {dc.color}"


def _best_record(records) -> EvaluatedCandidate | None:
    ok = [r for r in records if r.ok]
    if not ok:
        return None
    return max(ok, key=lambda r: (r.fitness_value, -r.eval_index))


def cmd_search(args: argparse.Namespace) -> int:
    settings = _Settings(args)
    config, preset, mode, (pretrain_steps, finetune_steps), noise = _resolve_search(settings)
    out = _resolve_output_dir(args.output_dir, config.seed)

    try:
        backend = _make_backend(settings, config, noise)
    except BackendError as exc:
        print(f"evaluator startup failed: {exc}", file=sys.stderr)
        return EXIT_EVALUATOR

    cache = SupernetCache(
        backend, pretrain_steps=pretrain_steps, finetune_steps=finetune_steps
    )

    records: list[EvaluatedCandidate] = []
    interrupted = False
    previous_term = signal.signal(signal.SIGTERM, _raise_interrupt)
    started = time.monotonic()
    try:
        with contextlib.ExitStack() as stack:
            if isinstance(backend, ExternalBackend):
                stack.enter_context(backend)
            writer = stack.enter_context(
                artifacts.HistoryWriter(out / artifacts.HISTORY_NAME)
            )

            def tap(record: EvaluatedCandidate) -> None:
                records.append(record)
                writer.append(record)

            try:
                run_search(config, cache.evaluate, on_record=tap)
            except KeyboardInterrupt:
                interrupted = True
                print("interrupted; flushing partial run", file=sys.stderr)
    finally:
        signal.signal(signal.SIGTERM, previous_term)
    elapsed = time.monotonic() - started

    front = pareto_front(records)
    artifacts.write_pareto(out / artifacts.PARETO_NAME, front)
    artifacts.write_series_csv(
        out / artifacts.FITNESS_SERIES_NAME,
        ("eval_index", "mean_fitness"),
        fitness_evolution(records),
    )
    artifacts.write_series_csv(
        out / artifacts.PARETO_SERIES_NAME,
        ("eval_index", "pareto_fraction"),
        cumulative_pareto_fraction(records),
    )

    best = _best_record(records)
    failures = sum(1 for r in records if not r.ok)
    summary = {
        "config": {
            "mode": mode,
            "preset": preset,
            "max_ram_bytes": config.constraints.max_ram_bytes,
            "max_flash_bytes": config.constraints.max_flash_bytes,
            "population_size": config.population_size,
            "tournament_size": config.tournament_size,
            "crossover_rate": config.crossover_rate,
            "mutation_rate": config.mutation_rate,
            "budget_evals": config.max_evaluations,
            "budget_seconds": config.max_seconds,
            "seed": config.seed,
            "weights": {
                "w1": config.weights.w1, "w2": config.weights.w2,
                "w3": config.weights.w3, "w4": config.weights.w4,
                "w5": config.weights.w5,
            },
            "evaluator": config.evaluator,
            "external_command": settings.get("external_command"),
            "fixed_resolution": config.fixed_resolution,
            "fixed_color": config.fixed_color,
            "pretrain_steps": pretrain_steps,
            "finetune_steps": finetune_steps,
            "noise_amplitude": noise,
        },
        "counters": {
            "evaluations": cache.evaluation_count,
            "pretrains": cache.pretrain_count,
            "supernets": {
                _config_label(dc): state.status
                for dc, state in sorted(
                    cache.statuses().items(),
                    key=lambda item: (item[0].resolution, item[0].color),
                )
            },
        },
        "totals": {
            "evaluations": len(records),
            "failures": failures,
            "pareto_size": len(front),
            "wall_seconds": elapsed,
        },
        "interrupted": interrupted,
        "best": None if best is None else artifacts.record_to_dict(best),
    }
    artifacts.write_json(out / artifacts.SUMMARY_NAME, summary)

    if best is not None:
        print(
            f"best fitness {best.fitness_value:.6f} "
            f"(accuracy {best.metrics.accuracy:.4f}) at evaluation {best.eval_index}",
            file=sys.stderr,
        )
    print(out)
    if interrupted:
        return EXIT_INTERRUPTED
    if records and not any(r.ok for r in records):
        print("all evaluations failed; check the evaluator", file=sys.stderr)
        return EXIT_EVALUATOR
    return EXIT_OK


def _raise_interrupt(signum, frame):
    raise KeyboardInterrupt


def _parse_depths(text: str) -> tuple[int, int, int, int, int]:
    parts = text.split(",")
    if len(parts) != 5:
        raise UsageError(f"--depths needs 5 comma-separated integers, got {text!r}")
    try:
        values = tuple(int(p) for p in parts)
    except ValueError as exc:
        raise UsageError(f"--depths needs integers, got {text!r}") from exc
    return values


def _format_shape(shape: tuple[int, int, int]) -> str:
    return "x".join(str(extent) for extent in shape)


def _format_bytes(n: int) -> str:
    return f"{n} B ({n / KIB:.1f} KiB)"


def cmd_describe(args: argparse.Namespace) -> int:
    candidate = Candidate(
        DataConfig(args.resolution, args.color),
        ModelConfig(_parse_depths(args.depths), args.alpha),
    )
    problem = validate(candidate)
    if problem is not None:
        print(f"invalid candidate: {problem}", file=sys.stderr)
        return EXIT_USAGE
    graph = instantiate(candidate)

    rows = [
        (layer.kind, _format_shape(layer.input_shape),
         _format_shape(layer.output_shape), str(layer.param_count))
        for layer in graph.layers
    ]
    header = ("layer", "input", "output", "params")
    widths = [
        max(len(header[i]), *(len(row[i]) for row in rows)) for i in range(4)
    ]
    print("  ".join(h.ljust(widths[i]) for i, h in enumerate(header)))
    for row in rows:
        print("  ".join(cell.ljust(widths[i]) for i, cell in enumerate(row)))

    flash = estimate_flash(graph)
    ram = estimate_ram(graph)
    print(f"parameters: {count_parameters(graph)}")
    print(f"flash: {_format_bytes(flash)}")
    print(f"ram: {_format_bytes(ram)}")
    for name, preset in PRESETS.items():
        excesses = []
        if ram > preset.max_ram_bytes:
            excesses.append(f"RAM {ram} > {preset.max_ram_bytes}")
        if flash > preset.max_flash_bytes:
            excesses.append(f"flash {flash} > {preset.max_flash_bytes}")
        if excesses:
            print(f"{name}: exceeds {name} preset ({'; '.join(excesses)})")
        else:
            print(f"{name}: fits {name} preset")
    return EXIT_OK


def cmd_pareto(args: argparse.Namespace) -> int:
    merged: list[EvaluatedCandidate] = []
    for history_path in args.histories:
        merged.extend(artifacts.load_history(history_path))
    front = pareto_front(merged)
    out = Path(args.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    artifacts.write_pareto(out / artifacts.PARETO_NAME, front)
    artifacts.write_frontier_csv(out / artifacts.FRONTIER_NAME, front)
    print(
        f"front of {len(front)} from {len(merged)} records "
        f"across {len(args.histories)} run(s)",
        file=sys.stderr,
    )
    print(out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="datanas",
        description="Joint search over input data configurations and model architectures "
        "under device memory constraints.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    search = sub.add_parser("search", help="run a search and write its artifact directory")
    search.add_argument("--config", help="JSON config file; flags override its values")
    search.add_argument("--preset", help="device constraints: large, medium, or small")
    search.add_argument("--max-ram", dest="max_ram_bytes", type=int, help="RAM budget in bytes")
    search.add_argument("--max-flash", dest="max_flash_bytes", type=int, help="flash budget in bytes")
    search.add_argument("--evaluator", help="surrogate (default) or external")
    search.add_argument("--external-command", help="evaluator child process command line")
    search.add_argument("--budget-evals", dest="budget_evals", type=int, help="stop after N evaluations")
    search.add_argument("--budget-seconds", dest="budget_seconds", type=float, help="stop after S seconds")
    search.add_argument("--seed", type=int, help="search RNG seed (default 0)")
    search.add_argument("--population-size", dest="population_size", type=int)
    search.add_argument("--tournament-size", dest="tournament_size", type=int)
    search.add_argument("--crossover-rate", dest="crossover_rate", type=float)
    search.add_argument("--mutation-rate", dest="mutation_rate", type=float)
    search.add_argument(
        "--hardware-aware", dest="hardware_aware", action="store_true", default=None,
        help="freeze the data configuration (defaults to 224 rgb) and search models only",
    )
    search.add_argument("--fixed-resolution", dest="fixed_resolution", type=int)
    search.add_argument("--fixed-color", dest="fixed_color", choices=COLORS)
    search.add_argument("--pretrain-steps", dest="pretrain_steps", type=int)
    search.add_argument("--finetune-steps", dest="finetune_steps", type=int)
    search.add_argument("--noise-amplitude", dest="noise_amplitude", type=float,
                        help="surrogate noise half-width (default 0.05)")
    search.add_argument("--output-dir", dest="output_dir",
                        help=f"artifact directory (default under ${ARTIFACT_ROOT_ENV} or ./runs)")
    search.set_defaults(func=cmd_search)

    describe = sub.add_parser("describe", help="layer table and resource figures for one candidate")
    describe.add_argument("--resolution", type=int, required=True, choices=RESOLUTIONS)
    describe.add_argument("--color", required=True, choices=COLORS)
    describe.add_argument("--depths", required=True,
                          help="comma-separated block counts for the five searched stages")
    describe.add_argument("--alpha", type=float, required=True)
    describe.set_defaults(func=cmd_describe)

    pareto = sub.add_parser("pareto", help="merge run histories into one front")
    pareto.add_argument("histories", nargs="+", metavar="HISTORY")
    pareto.add_argument("--output-dir", dest="output_dir", default=".")
    pareto.set_defaults(func=cmd_pareto)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except artifacts.ArtifactError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except BackendError as exc:
        print(f"evaluator failure: {exc}", file=sys.stderr)
        return EXIT_EVALUATOR


if __name__ == "__main__":
    sys.exit(main())
