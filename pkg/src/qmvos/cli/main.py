"""
QMVOS CLI.

Command-line interface for synthetic data, training, segmentation,
evaluation, gradient checks, benchmarks and ablations.
"""

import logging
from collections.abc import Iterator
from contextlib import contextmanager
from pathlib import Path
from typing import Any

import typer
from rich.console import Console
from rich.logging import RichHandler
from rich.table import Table

# Import component modules to register affinities and scenarios
from qmvos import evalsynth, membank  # noqa: F401
from qmvos.config import (
    RunConfig,
    configure,
    dump_config_text,
    get_settings,
    merge_configs,
    validate_run_config,
    write_config,
)
from qmvos.core import ComponentRegistry, InputError, QMVOSError
from qmvos.evalsynth import SyntheticVideo, evaluate_sequence, gen_synthetic
from qmvos.pipelines import (
    GRADCHECK_THRESHOLD,
    ToyProtocol,
    bench_overhead,
    init_model_weights,
    load_model_weights,
    run_ablation,
    run_gradcheck_suite,
    segment_video,
    train_toy,
)
from qmvos.presets import get_preset, list_presets
from qmvos.tensorlab import ParamStore, save_params
from qmvos.utils import (
    load_label_sequence,
    load_video,
    read_pgm,
    save_label_sequence,
    save_video,
    write_json,
)

app = typer.Typer(
    name="qmvos",
    help="Query-based video object segmentation at desk scale",
    no_args_is_help=True,
)
console = Console()

logger = logging.getLogger(__name__)

DEFAULT_ABLATION = ["full", "no-interaction", "first-frame-queries"]


def setup_logging(verbose: bool = False) -> None:
    """Configure logging with rich output."""
    level = logging.DEBUG if verbose else get_settings().log_level
    logging.basicConfig(
        level=level,
        format="%(message)s",
        datefmt="[%X]",
        handlers=[RichHandler(rich_tracebacks=True)],
        force=True,
    )


@contextmanager
def _handle_errors() -> Iterator[None]:
    """Report package and missing-file errors in red and exit 1."""
    try:
        yield
    except (QMVOSError, FileNotFoundError) as e:
        console.print(f"[red]❌ {e}[/red]")
        raise typer.Exit(1) from e


def _run_config(**overrides: Any) -> RunConfig:
    """Effective RunConfig with the non-None command-line overrides applied."""
    given = {key: value for key, value in overrides.items() if value is not None}
    if not given:
        return get_settings().run
    return validate_run_config(merge_configs(get_settings().run.model_dump(), given))


def _parse_size(size: str) -> tuple[int, int]:
    """'64' -> (64, 64); '48x64' -> (48, 64)."""
    parts = size.lower().split("x")
    try:
        dims = [int(p) for p in parts]
    except ValueError as e:
        raise InputError("size", f"expected N or HxW, got '{size}'") from e
    if len(dims) == 1:
        return dims[0], dims[0]
    if len(dims) == 2:
        return dims[0], dims[1]
    raise InputError("size", f"expected N or HxW, got '{size}'")


def _weights_for(cfg: RunConfig, path: Path | None) -> ParamStore:
    if path is None:
        logger.warning("⚠️  No --weights given, using seeded initial weights")
        return init_model_weights(cfg)
    return load_model_weights(path, cfg)


@app.callback()
def main(
    verbose: bool = typer.Option(False, "--verbose", "-v", help="Enable debug logging"),
    config: Path | None = typer.Option(
        None, "--config", "-c", help="Run config file (key = value or YAML)"
    ),
):
    """QMVOS: memory-based video object segmentation with object queries."""
    with _handle_errors():
        configure(config_path=config)
    setup_logging(verbose)


# === Data Commands ===


@app.command()
def synth(
    seed: int = typer.Option(0, "--seed", help="Generator seed"),
    objects: int = typer.Option(2, "--objects", "-n", help="Number of objects"),
    frames: int = typer.Option(16, "--frames", "-t", help="Number of frames"),
    size: str = typer.Option("64", "--size", help="Frame size: N or HxW (multiples of 16)"),
    scenario: str = typer.Option("distinct", "--scenario", help="distinct, similar, occluding"),
    out: Path = typer.Option(..., "--out", "-o", help="Output video directory"),
):
    """Generate a synthetic video with ground-truth masks."""
    with _handle_errors():
        height, width = _parse_size(size)
        video = gen_synthetic(seed, objects, frames, height, width, scenario)
        save_video(out, video.frames, video.labels)
    console.print(
        f"[green]✅ {scenario} video: {frames} frames, {objects} objects, "
        f"{height}x{width} -> {out}[/green]"
    )


# === Model Commands ===


@app.command()
def train(
    data: list[Path] = typer.Option(..., "--data", "-d", help="Video directory (repeatable)"),
    steps: int | None = typer.Option(None, "--steps", help="Training steps"),
    lr: float | None = typer.Option(None, "--lr", help="Learning rate"),
    seq_len: int | None = typer.Option(None, "--seq-len", help="Frames per clip"),
    seed: int | None = typer.Option(None, "--seed", help="Initialisation and sampling seed"),
    out_weights: Path = typer.Option(..., "--out-weights", "-o", help="QMVW1 output file"),
    losses: Path | None = typer.Option(
        None, "--losses", help="Loss curve JSON (default: <out-weights>.losses.json)"
    ),
):
    """Train on video directories that carry ground-truth masks."""
    with _handle_errors():
        cfg = _run_config(steps=steps, lr=lr, seq_len=seq_len, seed=seed)
        dataset = []
        for directory in data:
            frames, labels = load_video(directory)
            if labels is None:
                raise InputError("data", f"{directory} has no ground-truth masks")
            dataset.append(SyntheticVideo(frames=frames, labels=labels, scenario=directory.name))

        result = train_toy(dataset, cfg)
        save_params(result.weights, out_weights)
        curve_path = losses or out_weights.with_suffix(".losses.json")
        write_json(
            curve_path,
            {"losses": result.losses, "skipped_videos": result.skipped_videos},
        )

    console.print(f"[green]✅ Weights: {out_weights}[/green]")
    console.print(f"   Loss: {result.initial_loss:.4f} -> {result.final_loss:.4f}")
    console.print(f"   Curve: {curve_path}")


@app.command()
def segment(
    video: Path = typer.Option(..., "--video", help="Video directory"),
    first_mask: Path | None = typer.Option(
        None, "--first-mask", help="Frame-0 PGM annotation (default: the video's first mask)"
    ),
    weights: Path | None = typer.Option(None, "--weights", "-w", help="QMVW1 weights"),
    out: Path = typer.Option(..., "--out", "-o", help="Output directory for label maps"),
    timing: Path | None = typer.Option(None, "--timing", help="Write a timing report JSON"),
):
    """Segment a video from its first-frame annotation."""
    with _handle_errors():
        cfg = _run_config()
        frames, labels = load_video(video)
        if first_mask is not None:
            annotation = read_pgm(first_mask)
        elif labels is not None:
            annotation = labels[0]
        else:
            raise InputError("first_mask", f"{video} has no masks; pass --first-mask")

        result = segment_video(frames, annotation, _weights_for(cfg, weights), cfg)
        save_label_sequence(out, result.labels)
        if timing is not None:
            write_json(timing, result.timing_report())

    console.print(f"[green]✅ {result.n_frames} label maps -> {out}[/green]")
    console.print(f"   Memorised frames: {result.memorized_frames}")


@app.command("eval")
def evaluate(
    pred: Path = typer.Option(..., "--pred", help="Predicted label directory"),
    gt: Path = typer.Option(..., "--gt", help="Ground-truth directory"),
    report: Path = typer.Option(..., "--report", "-o", help="MetricReport JSON output"),
):
    """Score predicted label maps with J, F and J&F."""
    with _handle_errors():
        result = evaluate_sequence(list(load_label_sequence(pred)), list(load_label_sequence(gt)))
        report.parent.mkdir(parents=True, exist_ok=True)
        report.write_text(result.to_json())

    table = Table(title=f"Evaluation ({len(result.frames)} frames)")
    table.add_column("Object", style="cyan")
    table.add_column("J", style="green")
    table.add_column("F", style="green")
    for n, (j, f) in enumerate(zip(result.j_per_object, result.f_per_object, strict=True)):
        table.add_row(str(n + 1), f"{j:.4f}", f"{f:.4f}")
    table.add_row("[bold]mean[/bold]", f"{result.j_mean:.4f}", f"{result.f_mean:.4f}")
    console.print(table)
    console.print(f"[bold]J&F: {result.j_and_f:.4f}[/bold]  -> {report}")


# === Diagnostics ===


@app.command()
def gradcheck(
    seeds: int = typer.Option(10, "--seeds", help="Random instances per block"),
    threshold: float = typer.Option(GRADCHECK_THRESHOLD, "--threshold", help="Max rel. error"),
):
    """Check analytic gradients against finite differences; exit 2 above threshold."""
    with _handle_errors():
        results = run_gradcheck_suite(_run_config(), seeds=range(seeds))

    table = Table(title="Gradient check")
    table.add_column("Block", style="cyan")
    table.add_column("Max rel. error", style="magenta")
    table.add_column("Status")
    for r in results:
        status = "[green]ok[/green]" if r.passed(threshold) else "[red]FAIL[/red]"
        table.add_row(r.name, f"{r.max_rel_error:.3e}", status)
    console.print(table)

    failed = [r.name for r in results if not r.passed(threshold)]
    if failed:
        console.print(f"[red]❌ Above {threshold:g}: {', '.join(failed)}[/red]")
        raise typer.Exit(2)
    console.print(f"[green]✅ All {len(results)} blocks below {threshold:g}[/green]")


@app.command()
def bench(
    video: Path = typer.Option(..., "--video", help="Video directory with masks"),
    weights: Path | None = typer.Option(None, "--weights", "-w", help="QMVW1 weights"),
    baseline: bool = typer.Option(False, "--baseline", help="Bypass the query modules"),
    runs: int = typer.Option(3, "--runs", help="Timed runs"),
    out: Path | None = typer.Option(None, "--out", "-o", help="Report JSON output"),
):
    """Measure per-frame inference time and the query-module share."""
    with _handle_errors():
        cfg = _run_config()
        frames, labels = load_video(video)
        if labels is None:
            raise InputError("video", f"{video} has no masks for the first frame")
        report = bench_overhead(
            frames, labels[0], _weights_for(cfg, weights), cfg, baseline=baseline, runs=runs
        )
        if out is not None:
            write_json(out, report.to_dict())

    table = Table(title=f"Overhead ({report.mode}, {report.frames} frames x {report.runs})")
    table.add_column("Stage", style="cyan")
    table.add_column("Seconds", style="magenta")
    for stage, seconds in sorted(report.stage_seconds.items()):
        table.add_row(stage, f"{seconds:.4f}")
    console.print(table)
    console.print(
        f"[bold]{report.per_frame_ms:.2f} ms/frame, "
        f"query modules {100.0 * report.query_share:.1f}%[/bold]"
    )


@app.command()
def ablate(
    presets: list[str] | None = typer.Option(
        None, "--preset", "-p", help="Preset name (repeatable)"
    ),
    seeds: int = typer.Option(3, "--seeds", help="Seeds 0..N-1"),
    steps: int = typer.Option(1000, "--steps", help="Training steps per arm"),
    scenario: str = typer.Option("similar", "--scenario", help="Synthetic scenario"),
    out: Path | None = typer.Option(None, "--out", "-o", help="Results JSON output"),
):
    """Train and evaluate ablation presets on synthetic videos."""
    with _handle_errors():
        names = presets or DEFAULT_ABLATION
        for name in names:
            get_preset(name)
        ComponentRegistry.get_scenario(scenario)
        results = run_ablation(
            names,
            seeds=range(seeds),
            base=_run_config(),
            protocol=ToyProtocol(scenario=scenario, steps=steps),
        )
        if out is not None:
            write_json(out, [arm.to_dict() for arm in results])

    table = Table(title=f"Ablation ({scenario}, {seeds} seeds, {steps} steps)")
    table.add_column("Preset", style="cyan")
    table.add_column("J&F per seed", style="dim")
    table.add_column("Mean J&F", style="green")
    for arm in results:
        per_seed = ", ".join(f"{s:.3f}" for s in arm.j_and_f)
        table.add_row(arm.preset, per_seed, f"{arm.mean_j_and_f:.4f}")
    console.print(table)


# === Utility Commands ===


@app.command("list-presets")
def list_presets_command():
    """List all ablation presets."""
    console.print("\n[bold]Ablation Presets:[/bold]")
    for name in list_presets():
        console.print(f"  • {name}: {get_preset(name).description}")


@app.command("config-show")
def config_show():
    """Print the effective run configuration."""
    console.print(dump_config_text(get_settings().run), end="", markup=False, highlight=False)


@app.command("config-write")
def config_write(
    path: Path = typer.Argument(..., help="Destination file"),
):
    """Write the effective run configuration as key = value text."""
    with _handle_errors():
        write_config(get_settings().run, path)
    console.print(f"[green]✅ Config -> {path}[/green]")


def cli():
    """Entry point for the CLI."""
    app()


if __name__ == "__main__":
    cli()
