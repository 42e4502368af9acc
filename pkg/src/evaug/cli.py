"""Command-line front end for offline dataset work and verification.

Subcommands: integrate, augment, simulate, verify-commute, bench, stats,
dump-frames. Exit codes: 0 on success, 1 when some per-file work failed,
2 for argument errors. Commands that write datasets also write a
``manifest.json`` recording a checksum for every output file.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import statistics
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Sequence

import numpy as np

from . import report
from .events import (
    EventStream,
    FrameTensor,
    LabeledSample,
    integrate_frames,
    one_hot,
    resize_spatial,
)
from .io import (
    FormatError,
    parse_bin,
    parse_text_events,
    read_frames,
    write_bin,
    write_frames,
    write_text_events,
)
from .metrics import fire_rate, sparsity
from .policy import Policy, augment_sample
from .rng import stream_rng
from .simulate import (
    SimConfig,
    Trajectory,
    render_trajectory,
    run_commutativity_suite,
    simulate_events,
)


class CliError(Exception):
    """An argument-level problem discovered after parsing."""


@dataclass
class RunManifest:
    """Record of one dataset command: inputs, checksummed outputs, failures."""

    command: str
    seed: int | None = None
    flags: dict = field(default_factory=dict)
    inputs: list[str] = field(default_factory=list)
    outputs: dict[str, str] = field(default_factory=dict)
    failures: dict[str, str] = field(default_factory=dict)
    elapsed_s: float = 0.0

    def add_output(self, out_dir: Path, path: Path) -> None:
        digest = hashlib.sha256(path.read_bytes()).hexdigest()
        self.outputs[str(path.relative_to(out_dir))] = digest

    def write(self, out_dir: Path) -> None:
        payload = {
            "command": self.command,
            "seed": self.seed,
            "flags": self.flags,
            "inputs": sorted(self.inputs),
            "outputs": dict(sorted(self.outputs.items())),
            "failures": dict(sorted(self.failures.items())),
            "elapsed_s": round(self.elapsed_s, 6),
        }
        (out_dir / "manifest.json").write_text(json.dumps(payload, indent=2) + "\n")


def _parse_dims(text: str, flag: str) -> tuple[int, int]:
    parts = text.lower().split("x")
    if len(parts) != 2:
        raise CliError(f"{flag} expects AxB, got {text!r}")
    try:
        a, b = int(parts[0]), int(parts[1])
    except ValueError:
        raise CliError(f"{flag} expects integers, got {text!r}") from None
    if a < 1 or b < 1:
        raise CliError(f"{flag} dimensions must be positive")
    return a, b


def _parse_policy(args: argparse.Namespace) -> Policy:
    text = getattr(args, "policy", None) or ""
    config = getattr(args, "config", None)
    if config and not text:
        text = Path(config).read_text().replace("\n", ",")
    try:
        policy = Policy.from_config(text) if text else Policy()
    except ValueError as exc:
        raise CliError(str(exc)) from exc
    if getattr(args, "seed", None) is not None:
        policy = replace(policy, seed=args.seed)
    return policy


def _discover(in_dir: Path, suffixes: Sequence[str]) -> list[Path]:
    if not in_dir.is_dir():
        raise CliError(f"input directory {in_dir} does not exist")
    found = [
        p
        for p in sorted(in_dir.rglob("*"))
        if p.is_file() and any(p.name.endswith(s) for s in suffixes)
    ]
    return found


def _load_stream(path: Path, sensor: tuple[int, int]) -> EventStream:
    if path.name.endswith(".evt.txt"):
        return parse_text_events(path.read_text())
    if path.suffix == ".bin":
        width, height = sensor
        return parse_bin(path.read_bytes(), width=width, height=height)
    raise FormatError(f"unknown event-file format: {path.name}")


def _out_name(rel: Path) -> Path:
    name = rel.name
    for suffix in (".evt.txt", ".bin"):
        if name.endswith(suffix):
            name = name[: -len(suffix)]
            break
    return rel.with_name(name + ".ndaf")


# ---------------------------------------------------------------------------
# integrate


def cmd_integrate(args: argparse.Namespace) -> int:
    started = time.perf_counter()
    in_dir, out_dir = Path(args.in_dir), Path(args.out_dir)
    sensor = _parse_dims(args.sensor_size, "--sensor-size")
    resize = _parse_dims(args.resize, "--resize") if args.resize else None
    if args.bins < 1:
        raise CliError("--bins must be at least 1")
    if args.split is not None and not (0.0 < args.split < 1.0):
        raise CliError("--split expects a train fraction strictly between 0 and 1")
    files = _discover(in_dir, (".bin", ".evt.txt"))
    out_dir.mkdir(parents=True, exist_ok=True)
    manifest = RunManifest(
        command="integrate",
        seed=args.seed,
        flags={
            "bins": args.bins,
            "mode": args.mode,
            "resize": args.resize,
            "binarize": args.binarize,
            "sensor_size": args.sensor_size,
            "split": args.split,
        },
    )

    def process(path: Path) -> tuple[Path, Path | None, str | None]:
        rel = path.relative_to(in_dir)
        try:
            stream = _load_stream(path, sensor)
            frames = integrate_frames(stream, args.bins, mode=args.mode, binarize=args.binarize)
            if resize:
                frames = resize_spatial(frames, *resize)
            out_path = out_dir / _out_name(rel)
            out_path.parent.mkdir(parents=True, exist_ok=True)
            out_path.write_bytes(write_frames(frames))
            return rel, out_path, None
        except (FormatError, ValueError, OSError) as exc:
            return rel, None, str(exc)

    if args.workers > 1:
        with ThreadPoolExecutor(max_workers=args.workers) as pool:
            results = list(pool.map(process, files))
    else:
        results = [process(p) for p in files]

    for rel, out_path, error in results:
        manifest.inputs.append(str(rel))
        if error is None and out_path is not None:
            manifest.add_output(out_dir, out_path)
        else:
            manifest.failures[str(rel)] = error or "unknown error"
            print(f"failed: {rel}: {error}", file=sys.stderr)
    if args.split is not None:
        # Convenience train/valid listings over the written containers,
        # seeded so reruns produce the same partition.
        names = sorted(manifest.outputs)
        order = stream_rng(args.seed, "split").permutation(len(names))
        cut = int(round(args.split * len(names)))
        train = sorted(names[i] for i in order[:cut])
        valid = sorted(names[i] for i in order[cut:])
        for listing, chosen in (("train.txt", train), ("valid.txt", valid)):
            path = out_dir / listing
            path.write_text("\n".join(chosen) + ("\n" if chosen else ""))
            manifest.add_output(out_dir, path)
    manifest.elapsed_s = time.perf_counter() - started
    manifest.write(out_dir)
    written = sum(1 for name in manifest.outputs if name.endswith(".ndaf"))
    print(f"integrated {written}/{len(files)} files into {out_dir}")
    return 1 if manifest.failures else 0


# ---------------------------------------------------------------------------
# augment


def _load_labels(in_dir: Path, names: list[str]) -> dict[str, int]:
    sidecar = in_dir / "labels.txt"
    if not sidecar.is_file():
        raise CliError(
            f"CutMix is enabled but no label sidecar found at {sidecar}; "
            "provide labels.txt (one 'filename class_index' per line) or pass "
            "--policy cutmix=off"
        )
    labels: dict[str, int] = {}
    for lineno, line in enumerate(sidecar.read_text().splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        fields = line.split()
        if len(fields) != 2:
            raise CliError(f"{sidecar}:{lineno}: expected 'filename class_index'")
        labels[fields[0]] = int(fields[1])
    missing = [n for n in names if n not in labels]
    if missing:
        raise CliError(f"{sidecar}: missing labels for {missing[:3]}{'...' if len(missing) > 3 else ''}")
    return labels


def cmd_augment(args: argparse.Namespace) -> int:
    started = time.perf_counter()
    in_dir, out_dir = Path(args.in_dir), Path(args.out_dir)
    policy = _parse_policy(args)
    if args.copies < 1:
        raise CliError("--copies must be at least 1")
    files = _discover(in_dir, (".ndaf",))
    out_dir.mkdir(parents=True, exist_ok=True)
    manifest = RunManifest(
        command="augment",
        seed=policy.seed,
        flags={"policy": policy.to_config(), "copies": args.copies},
    )

    names = [str(p.relative_to(in_dir)) for p in files]
    class_of: dict[str, int] = {}
    num_classes = 1
    if policy.cutmix_enabled:
        class_of = _load_labels(in_dir, names)
        num_classes = max(class_of.values()) + 1 if class_of else 1

    def load_sample(idx: int) -> LabeledSample:
        frames = read_frames(files[idx].read_bytes())
        if policy.cutmix_enabled:
            label = one_hot(class_of[names[idx]], num_classes)
        else:
            label = np.ones(1)
        return LabeledSample(frames, label)

    partner_of = stream_rng(policy.seed, "partners").permutation(len(files))
    soft_labels: list[tuple[str, np.ndarray]] = []
    failures = 0
    for i, path in enumerate(files):
        rel = names[i]
        manifest.inputs.append(rel)
        try:
            sample = load_sample(i)
            partner = load_sample(int(partner_of[i])) if policy.cutmix_enabled else None
            rel_path = Path(rel)
            stem = (
                rel_path.name[: -len(".ndaf")]
                if rel_path.name.endswith(".ndaf")
                else rel_path.stem
            )
            for j in range(args.copies):
                out = augment_sample(sample, partner, policy, i * args.copies + j)
                out_path = out_dir / rel_path.parent / f"{stem}_aug{j:02d}.ndaf"
                out_path.parent.mkdir(parents=True, exist_ok=True)
                out_path.write_bytes(write_frames(out.frames))
                manifest.add_output(out_dir, out_path)
                if policy.cutmix_enabled:
                    soft_labels.append((str(out_path.relative_to(out_dir)), out.label))
        except (FormatError, ValueError, OSError, KeyError) as exc:
            failures += 1
            manifest.failures[rel] = str(exc)
            print(f"failed: {rel}: {exc}", file=sys.stderr)
    if soft_labels:
        lines = [
            name + " " + " ".join(f"{w:.10g}" for w in label)
            for name, label in soft_labels
        ]
        labels_path = out_dir / "labels.txt"
        labels_path.write_text("\n".join(lines) + "\n")
        manifest.add_output(out_dir, labels_path)
    manifest.elapsed_s = time.perf_counter() - started
    manifest.write(out_dir)
    print(f"wrote {len([k for k in manifest.outputs if k.endswith('.ndaf')])} augmented files to {out_dir}")
    return 1 if manifest.failures else 0


# ---------------------------------------------------------------------------
# simulate


def _load_image(path: Path) -> np.ndarray:
    if path.suffix == ".npy":
        img = np.load(path)
    elif path.suffix == ".pgm":
        img = _read_pgm(path)
    else:
        import matplotlib.image as mpimg

        img = mpimg.imread(path)
    img = np.asarray(img, dtype=np.float64)
    if img.ndim == 3:
        # Rec.601 luminance for color inputs.
        img = img[..., 0] * 0.299 + img[..., 1] * 0.587 + img[..., 2] * 0.114
    if img.size and img.max() > 1.0:
        img = img / 255.0
    return np.clip(img, 0.0, 1.0)


def _parse_trajectory(text: str, steps: int) -> Trajectory:
    kind, _, rest = text.partition(":")
    try:
        if kind == "static":
            return Trajectory(kind="static", num_steps=steps)
        if kind == "translate":
            dx, dy = (float(v) for v in rest.split(","))
            return Trajectory(kind="translate", dx=dx, dy=dy, num_steps=steps)
        if kind == "rotate":
            return Trajectory(
                kind="rotate-about-center", degrees_per_step=float(rest), num_steps=steps
            )
    except ValueError as exc:
        raise CliError(f"bad trajectory parameters in {text!r}: {exc}") from exc
    raise CliError(
        f"unknown trajectory {text!r}; use static, translate:DX,DY or rotate:DEG"
    )


def cmd_simulate(args: argparse.Namespace) -> int:
    image = _load_image(Path(args.image))
    traj = _parse_trajectory(args.trajectory, args.steps)
    try:
        cfg = SimConfig(threshold=args.alpha)
    except ValueError as exc:
        raise CliError(str(exc)) from exc
    seq = render_trajectory(image, traj)
    stream = simulate_events(seq, cfg)
    out = Path(args.out)
    if out.name.endswith(".evt.txt"):
        out.write_text(write_text_events(stream))
    elif out.suffix == ".bin":
        out.write_bytes(write_bin(stream))
    else:
        raise CliError(f"output must end in .evt.txt or .bin, got {out.name}")
    print(f"events={len(stream)} duration_us={stream.duration} -> {out}")
    return 0


# ---------------------------------------------------------------------------
# verify-commute


def cmd_verify_commute(args: argparse.Namespace) -> int:
    if args.scene_suite != "default":
        raise CliError(f"unknown scene suite {args.scene_suite!r}")
    result = run_commutativity_suite(threshold=args.alpha, num_bins=args.bins)
    scene_names = [name for name, _ in result.rows[0].per_scene]
    header = ["augmentation", "mean_f1", *[f"f1[{s}]" for s in scene_names]]
    rows = [
        [row.name, f"{row.mean_f1:.4f}", *[f"{r.f1:.4f}" for _, r in row.per_scene]]
        for row in result.rows
    ]
    width = max(len(h) for h in header) + 2
    print("  ".join(h.ljust(width) for h in header).rstrip())
    for row in rows:
        print("  ".join(str(v).ljust(width) for v in row).rstrip())
    print(f"ordering_holds={result.ordering_holds}")

    if args.report:
        out_dir = Path(args.report)
        out_dir.mkdir(parents=True, exist_ok=True)
        report.write_table(out_dir / "commute_report.tsv", header, rows)
        report.write_json(
            out_dir / "commute_report.json",
            {
                "ordering_holds": result.ordering_holds,
                "rows": [
                    {
                        "augmentation": row.name,
                        "mean_f1": row.mean_f1,
                        "scenes": {s: r.f1 for s, r in row.per_scene},
                    }
                    for row in result.rows
                ],
            },
        )
        report.render_bars(
            out_dir / "commute_f1.png",
            [row.name for row in result.rows],
            [row.mean_f1 for row in result.rows],
            ylabel="dual-path F1",
            highlight="photometric",
        )
    return 0 if result.ordering_holds else 1


# ---------------------------------------------------------------------------
# bench


def _synthetic_samples(count: int, shape: tuple[int, int, int, int], seed: int):
    rng = stream_rng(seed, "bench-data")
    num_classes = 10
    for index in range(count):
        data = rng.integers(0, 4, size=shape, dtype=np.int32)
        label = one_hot(int(rng.integers(0, num_classes)), num_classes)
        yield LabeledSample(FrameTensor(data), label)


def run_benchmark(
    num_samples: int,
    policy: Policy,
    shape: tuple[int, int, int, int] = (10, 2, 48, 48),
    iters: int = 1,
    samples: list[LabeledSample] | None = None,
) -> list[float]:
    """Per-call augment latencies in milliseconds (generation not timed)."""
    latencies: list[float] = []
    for _ in range(iters):
        previous: LabeledSample | None = None
        source = samples if samples is not None else _synthetic_samples(num_samples, shape, policy.seed)
        for index, sample in enumerate(source):
            partner = previous if previous is not None else sample
            t0 = time.perf_counter()
            augment_sample(sample, partner if policy.cutmix_enabled else None, policy, index)
            latencies.append((time.perf_counter() - t0) * 1000.0)
            previous = sample
    return latencies


def cmd_bench(args: argparse.Namespace) -> int:
    if args.iters < 1:
        raise CliError("--iters must be at least 1")
    policy = _parse_policy(args)
    samples = None
    count = args.synthetic
    if args.in_dir:
        files = _discover(Path(args.in_dir), (".ndaf",))
        if not files:
            raise CliError(f"no .ndaf files under {args.in_dir}")
        dummy = np.ones(1)
        samples = [LabeledSample(read_frames(p.read_bytes()), dummy) for p in files]
        count = len(samples)
    latencies = run_benchmark(count, policy, iters=args.iters, samples=samples)
    mean_ms = statistics.fmean(latencies)
    median_ms = statistics.median(latencies)
    print(f"samples={len(latencies)}")
    print(f"policy={policy.to_config()}")
    print(f"mean_ms={mean_ms:.4f}")
    print(f"median_ms={median_ms:.4f}")
    print(f"p95_ms={float(np.percentile(latencies, 95)):.4f}")
    print(f"max_ms={max(latencies):.4f}")
    if args.report:
        out_dir = Path(args.report)
        out_dir.mkdir(parents=True, exist_ok=True)
        report.write_table(
            out_dir / "bench.tsv",
            ["samples", "mean_ms", "median_ms", "p95_ms", "max_ms"],
            [[len(latencies), f"{mean_ms:.4f}", f"{median_ms:.4f}",
              f"{float(np.percentile(latencies, 95)):.4f}", f"{max(latencies):.4f}"]],
        )
        report.render_hist(out_dir / "bench_latency.png", latencies, "augment latency (ms)")
    return 0


# ---------------------------------------------------------------------------
# stats


def cmd_stats(args: argparse.Namespace) -> int:
    files = _discover(Path(args.in_dir), (".ndaf",))
    rows = []
    failures = {}
    for path in files:
        rel = str(path.relative_to(Path(args.in_dir)))
        try:
            frames = read_frames(path.read_bytes())
            rate = fire_rate(frames)  # rejects count tensors
            rows.append(
                [
                    rel,
                    f"{rate:.6f}",
                    int(frames.data.sum()),
                    frames.data.size,
                    f"{sparsity(frames):.6f}",
                ]
            )
            print(
                f"file={rel} fire_rate={rate:.6f} active={int(frames.data.sum())} "
                f"total={frames.data.size} sparsity={sparsity(frames):.6f}"
            )
        except (FormatError, ValueError, OSError) as exc:
            failures[rel] = str(exc)
            print(f"failed: {rel}: {exc}", file=sys.stderr)
    if args.report:
        out_dir = Path(args.report)
        out_dir.mkdir(parents=True, exist_ok=True)
        header = ["file", "fire_rate", "active", "total", "sparsity"]
        report.write_table(out_dir / "stats.tsv", header, rows)
        report.write_json(
            out_dir / "stats.json",
            {
                "files": [dict(zip(header, row)) for row in rows],
                "failures": failures,
            },
        )
        if rows:
            report.render_bars(
                out_dir / "fire_rates.png",
                [row[0] for row in rows],
                [float(row[1]) for row in rows],
                ylabel="fire rate",
            )
    return 1 if failures else 0


# ---------------------------------------------------------------------------
# dump-frames


def _write_pgm(path: Path, image: np.ndarray) -> None:
    h, w = image.shape
    lines = [f"P2\n{w} {h}\n255"]
    for row in image:
        lines.append(" ".join(str(int(v)) for v in row))
    path.write_text("\n".join(lines) + "\n")


def _read_pgm(path: Path) -> np.ndarray:
    tokens = []
    for line in path.read_text().splitlines():
        line = line.split("#", 1)[0]
        tokens.extend(line.split())
    if not tokens or tokens[0] != "P2":
        raise CliError(f"{path}: only ASCII PGM (P2) is supported")
    w, h, maxval = int(tokens[1]), int(tokens[2]), int(tokens[3])
    data = np.array(tokens[4 : 4 + w * h], dtype=np.float64).reshape(h, w)
    return data / maxval


def cmd_dump_frames(args: argparse.Namespace) -> int:
    in_path = Path(args.in_file)
    out_dir = Path(args.out_dir)
    frames = read_frames(in_path.read_bytes())
    out_dir.mkdir(parents=True, exist_ok=True)
    t_bins, polarities, _, _ = frames.shape
    peak = max(int(frames.data.max()), 1)
    stem = in_path.name[: -len(".ndaf")] if in_path.name.endswith(".ndaf") else in_path.stem
    count = 0
    for t in range(t_bins):
        for p in range(polarities):
            image = (frames.data[t, p].astype(np.float64) * (255.0 / peak)).round()
            _write_pgm(out_dir / f"{stem}_t{t:03d}_p{p}.pgm", image)
            count += 1
    print(f"wrote {count} slices to {out_dir}")
    return 0


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="evaug",
        description="Event-camera dataset tooling: integrate, augment, simulate, verify.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("integrate", help="events-to-frames integration for a directory")
    p.add_argument("in_dir")
    p.add_argument("out_dir")
    p.add_argument("--bins", type=int, default=10, help="time bins per sample (default 10)")
    p.add_argument("--mode", choices=["equal-duration", "equal-count"], default="equal-duration")
    p.add_argument("--resize", default=None, metavar="HxW", help="sum-pool to this size, e.g. 48x48")
    p.add_argument("--binarize", action="store_true", help="clamp counts to 0/1")
    p.add_argument("--sensor-size", default="34x34", metavar="WxH",
                   help="sensor geometry for .bin inputs (default 34x34)")
    p.add_argument("--workers", type=int, default=1, help="parallel file workers")
    p.add_argument("--split", type=float, default=None, metavar="FRAC",
                   help="also write train.txt/valid.txt listings, e.g. 0.9 for 9:1")
    p.add_argument("--seed", type=int, default=0, help="seed for the split shuffle")
    p.set_defaults(func=cmd_integrate)

    p = sub.add_parser("augment", help="write augmented copies of .ndaf samples")
    p.add_argument("in_dir")
    p.add_argument("out_dir")
    p.add_argument("--policy", default="", metavar="CFG", help="e.g. m=1,n=2,flip_prob=0.5,cutmix=on")
    p.add_argument("--config", default=None, help="file of key=value policy lines; flags win")
    p.add_argument("--copies", type=int, default=1, help="augmented copies per input")
    p.add_argument("--seed", type=int, default=None, help="overrides the policy seed")
    p.set_defaults(func=cmd_augment)

    p = sub.add_parser("simulate", help="render a trajectory and emit sensor events")
    p.add_argument("image", help=".npy, .pgm or common image file with values in [0, 1]")
    p.add_argument("out", help="output event file (.evt.txt or .bin)")
    p.add_argument("--trajectory", default="translate:1,0",
                   help="static | translate:DX,DY | rotate:DEG (per step)")
    p.add_argument("--steps", type=int, default=20)
    p.add_argument("--alpha", type=float, default=0.3, help="contrast threshold")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("verify-commute", help="dual-path consistency suite")
    p.add_argument("--scene-suite", default="default")
    p.add_argument("--alpha", type=float, default=0.3)
    p.add_argument("--bins", type=int, default=10)
    p.add_argument("--report", default=None, metavar="DIR",
                   help="write TSV/JSON tables and a figure here")
    p.set_defaults(func=cmd_verify_commute)

    p = sub.add_parser("bench", help="augmentation latency benchmark")
    p.add_argument("in_dir", nargs="?", default=None, help=".ndaf directory (synthetic data if omitted)")
    p.add_argument("--policy", default="m=1,n=2", metavar="CFG")
    p.add_argument("--config", default=None)
    p.add_argument("--synthetic", type=int, default=9000, help="synthetic sample count")
    p.add_argument("--iters", type=int, default=1, help="passes over the sample set")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--report", default=None, metavar="DIR")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("stats", help="fire-rate/sparsity report for binarized .ndaf files")
    p.add_argument("in_dir")
    p.add_argument("--report", default=None, metavar="DIR")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("dump-frames", help="dump (bin, polarity) slices as PGM images")
    p.add_argument("in_file")
    p.add_argument("out_dir")
    p.set_defaults(func=cmd_dump_frames)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
