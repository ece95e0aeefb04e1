"""Command-line pipeline: score, metrics, demo, corrupt, bench, pool.

Every run writes a manifest (resolved options, input digests, stage
timings) next to its outputs, and every output file carries the manifest
digest so results can be traced back to the exact run that produced
them.  Exit codes: 0 success, 2 input error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
import time
from contextlib import contextmanager
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import __version__
from .errors import (
    InvalidArgumentError,
    NumericalFailureError,
    QipfError,
    TrainingFailureError,
)
from .hermite_modes import QipfConfig, decompose, uncertainty_score
from .kernel_field import WeightField, effective_sigma, evaluate_field
from .shift_lab import (
    CORRUPTION_KINDS,
    corrupt,
    make_sine_dataset,
    read_image_csv,
    read_image_pgm,
    write_image_csv,
    write_image_pgm,
)
from .toy_mlp import (
    TrainConfig,
    ensemble_uncertainty,
    model_to_bundle,
    predict,
    train,
)
from .uq_metrics import ScoredDataset, metrics_report
from .weight_ingest import WeightBundle, load_bundle, load_predictions, pool_weights

__all__ = ["main", "run_bench", "BenchResult", "score_model_on_grid"]


# -----------------------------
# Manifest plumbing
# -----------------------------


@dataclass
class RunManifest:
    command: str
    options: dict
    inputs: dict = field(default_factory=dict)
    timings_ms: dict = field(default_factory=dict)
    outputs: list = field(default_factory=list)

    def digest(self) -> str:
        # timings and output paths are excluded so reruns from the same
        # inputs/options produce the same digest (and thus identical files)
        core = {
            "tool": "qipf",
            "version": __version__,
            "command": self.command,
            "options": self.options,
            "inputs": self.inputs,
        }
        blob = json.dumps(core, sort_keys=True, separators=(",", ":")).encode()
        return hashlib.sha256(blob).hexdigest()

    def add_input(self, name: str, path) -> None:
        data = Path(path).read_bytes()
        self.inputs[name] = {
            "path": str(path),
            "sha256": hashlib.sha256(data).hexdigest(),
        }

    def write(self, out_path) -> str:
        digest = self.digest()
        doc = {
            "tool": "qipf",
            "version": __version__,
            "command": self.command,
            "options": self.options,
            "inputs": self.inputs,
            "outputs": self.outputs,
            "timings_ms": {k: round(v, 3) for k, v in self.timings_ms.items()},
            "digest": digest,
        }
        Path(out_path).write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")
        return digest


class _StageClock:
    """Times pipeline stages and tags escaping errors with the stage name."""

    def __init__(self, manifest: RunManifest):
        self.manifest = manifest

    @contextmanager
    def stage(self, name: str):
        start = time.perf_counter()
        try:
            yield
        except Exception as exc:
            if not hasattr(exc, "stage"):
                exc.stage = name
            raise
        self.manifest.timings_ms[name] = (time.perf_counter() - start) * 1000.0


def _manifest_path(out_path) -> Path:
    return Path(str(out_path) + ".manifest.json")


def _write_csv(path, digest: str, header: str, rows) -> None:
    lines = [f"# manifest={digest}", header]
    lines.extend(rows)
    Path(path).write_text("\n".join(lines) + "\n")


def _fmt(v: float) -> str:
    return repr(float(v))


# -----------------------------
# score
# -----------------------------


def _filter_biases(bundle: WeightBundle) -> WeightBundle:
    kept = [l for l in bundle.layers if not l.name.endswith("bias")]
    if not kept:
        raise InvalidArgumentError("--exclude-biases removed every layer")
    return WeightBundle(layers=kept, meta=bundle.meta)


def cmd_score(args) -> int:
    config = QipfConfig(
        num_modes=args.modes,
        sigma_factor=args.sigma_factor,
        include_mode_zero_in_score=args.include_mode_zero,
        pool_target=args.pool_target,
    )
    out = Path(args.out or "scores.csv")
    manifest = RunManifest(
        command="score",
        options={
            "modes": config.num_modes,
            "sigma_factor": config.sigma_factor,
            "pool_target": config.pool_target,
            "include_mode_zero": config.include_mode_zero_in_score,
            "exclude_biases": args.exclude_biases,
            "calibration": str(args.calibration) if args.calibration else None,
        },
    )
    clock = _StageClock(manifest)
    with clock.stage("load-weights"):
        manifest.add_input("weights", args.weights)
        bundle = load_bundle(args.weights)
        if args.exclude_biases:
            bundle = _filter_biases(bundle)
    with clock.stage("load-predictions"):
        manifest.add_input("predictions", args.predictions)
        records = load_predictions(args.predictions)
    with clock.stage("pool"):
        pooled = pool_weights(bundle, config.pool_target)
    with clock.stage("bandwidth"):
        sigma = effective_sigma(pooled, config.sigma_factor)
        field_ = WeightField(pooled, sigma)
    eval_points = [r.y_eval for r in records]
    calibration = None
    if args.calibration:
        with clock.stage("load-calibration"):
            manifest.add_input("calibration", args.calibration)
            calibration = [r.y_eval for r in load_predictions(args.calibration)]
    with clock.stage("decompose"):
        decomp = decompose(field_, eval_points, calibration, config)
        scores = uncertainty_score(decomp, config)
    with clock.stage("write"):
        k = config.num_modes
        header = ",".join(["id", "score"] + [f"V_{i}" for i in range(1, k + 1)] + ["clamped"])
        any_clamped = decomp.clamped_flags.any(axis=0)
        rows = []
        for j, rec in enumerate(records):
            mode_cols = [_fmt(decomp.mode_values[i, j]) for i in range(1, k + 1)]
            rows.append(
                ",".join([rec.id, _fmt(scores[j])] + mode_cols + [str(int(any_clamped[j]))])
            )
        manifest.outputs.append(str(out))
        digest = manifest.write(_manifest_path(out))
        _write_csv(out, digest, header, rows)
    print(f"wrote {out} ({len(records)} rows, {k} modes, sigma={sigma:.6g})")
    return 0


# -----------------------------
# metrics
# -----------------------------


def _read_scores_csv(path) -> dict[str, float]:
    lines = Path(path).read_text().splitlines()
    lines = [l for l in lines if l and not l.startswith("#")]
    if not lines:
        raise InvalidArgumentError(f"{path}: empty scores file")
    header = lines[0].split(",")
    if header[:2] != ["id", "score"]:
        raise InvalidArgumentError(f"{path}: expected 'id,score,...' header, got {lines[0]!r}")
    out: dict[str, float] = {}
    for line in lines[1:]:
        parts = line.split(",")
        out[parts[0]] = float(parts[1])
    return out


def cmd_metrics(args) -> int:
    manifest = RunManifest(command="metrics", options={"bins": args.bins})
    clock = _StageClock(manifest)
    with clock.stage("load-scores"):
        manifest.add_input("scores", args.scores)
        score_by_id = _read_scores_csv(args.scores)
    with clock.stage("load-predictions"):
        manifest.add_input("predictions", args.predictions)
        records = load_predictions(args.predictions)
    with clock.stage("join"):
        pred_ids = {r.id for r in records}
        score_ids = set(score_by_id)
        if pred_ids != score_ids or len(records) != len(score_by_id):
            orphans = sorted(pred_ids ^ score_ids)[:10]
            raise InvalidArgumentError(
                f"scores and predictions do not join 1:1; orphan ids: {orphans}"
            )
        data = ScoredDataset(
            scores=[score_by_id[r.id] for r in records],
            errors=[r.is_error for r in records],
            confidences=[r.confidence for r in records],
        )
    with clock.stage("metrics"):
        report = metrics_report(data, num_bins=args.bins)
    out = args.out
    if out:
        manifest.outputs.append(str(out))
        digest = manifest.write(_manifest_path(out))
        report["manifest_digest"] = digest
        Path(out).write_text(json.dumps(report, indent=2, sort_keys=True) + "\n")
    else:
        report["manifest_digest"] = manifest.digest()
    print(json.dumps(report, indent=2, sort_keys=True))
    return 0


# -----------------------------
# demo
# -----------------------------


def sine_demo_curves(
    seed: int = 0,
    num_modes: int = 4,
    samples: int = 500,
    noise_sd: float = 0.02,
    sigma: float = 1.4,
    grid_span: float = 4.2,
    grid_points: int = 181,
    denom_epsilon: float = 0.2,
):
    """Mode curves of a sine signal over its value space.

    Returns (grid, ipf values, decomposition, signal).  The grid spans
    grid_span sample standard deviations either side of the sample mean,
    so points beyond 3 standard deviations probe the value-space tails.
    """
    config = QipfConfig(num_modes=num_modes, denom_epsilon=denom_epsilon)
    dataset = make_sine_dataset(
        n_train=samples, seed=seed, noise_sd=noise_sd, seen_intervals=((-2.0, 2.49),)
    )
    signal = dataset.train_ys
    mean, sd = float(signal.mean()), float(signal.std())
    grid = np.linspace(mean - grid_span * sd, mean + grid_span * sd, grid_points)
    field_ = WeightField(signal, sigma)
    decomp = decompose(field_, grid, config=config)
    ipf = np.array([evaluate_field(field_, y).value for y in grid])
    return grid, ipf, decomp, signal


def cmd_demo_sine(args) -> int:
    out = Path(args.out or "demo_sine.csv")
    manifest = RunManifest(
        command="demo-sine",
        options={
            "modes": args.modes,
            "seed": args.seed,
            "samples": args.samples,
            "sigma": args.sigma,
            "noise_sd": args.noise_sd,
            "grid_span": args.grid_span,
            "grid_points": args.grid_points,
            "denom_epsilon": args.denom_epsilon,
        },
    )
    clock = _StageClock(manifest)
    with clock.stage("decompose"):
        grid, ipf, decomp, _ = sine_demo_curves(
            seed=args.seed,
            num_modes=args.modes,
            samples=args.samples,
            noise_sd=args.noise_sd,
            sigma=args.sigma,
            grid_span=args.grid_span,
            grid_points=args.grid_points,
            denom_epsilon=args.denom_epsilon,
        )
    with clock.stage("write"):
        header = ",".join(["y", "ipf"] + [f"V_{k}" for k in range(args.modes + 1)])
        rows = []
        for j, y in enumerate(grid):
            cols = [_fmt(y), _fmt(ipf[j])]
            cols += [_fmt(decomp.mode_values[k, j]) for k in range(args.modes + 1)]
            rows.append(",".join(cols))
        manifest.outputs.append(str(out))
        digest = manifest.write(_manifest_path(out))
        _write_csv(out, digest, header, rows)
    print(f"wrote {out}")
    return 0


def score_model_on_grid(dataset, model, config: QipfConfig, sigma: float | None = None):
    """Pooled-weight QIPF scores at the model's grid predictions.

    With sigma=None the width comes from the bandwidth rule times the
    config factor; the toy demo passes a fixed width instead so heavily
    regularized (shrunken-weight) models stay comparable.  Returns
    (predictions, scores); shared by the regression demo and the
    acceptance suite.
    """
    preds = predict(model, dataset.grid_xs)[0]
    pooled = pool_weights(model_to_bundle(model), config.pool_target)
    if sigma is None:
        sigma = effective_sigma(pooled, config.sigma_factor)
    field_ = WeightField(pooled, sigma)
    decomp = decompose(field_, preds, config=config)
    return preds, uncertainty_score(decomp, config)


def cmd_demo_regression(args) -> int:
    l2_values = [float(v) for v in args.l2.split(",")]
    config = QipfConfig(
        num_modes=args.modes,
        sigma_factor=args.sigma_factor,
        pool_target=args.pool_target,
        denom_epsilon=args.denom_epsilon,
    )
    sigma = args.sigma if args.sigma > 0 else None
    train_config = TrainConfig(epochs=args.epochs, seed=args.seed)
    out_dir = Path(args.out or ".")
    out_dir.mkdir(parents=True, exist_ok=True)
    manifest = RunManifest(
        command="demo-regression",
        options={
            "l2": l2_values,
            "modes": args.modes,
            "sigma": args.sigma,
            "sigma_factor": args.sigma_factor,
            "pool_target": args.pool_target,
            "denom_epsilon": args.denom_epsilon,
            "seed": args.seed,
            "epochs": args.epochs,
            "ensemble_size": args.ensemble_size,
            "dropout_samples": args.dropout_samples,
            "dropout_rate": args.dropout_rate,
            "noise_sd": args.noise_sd,
        },
    )
    clock = _StageClock(manifest)
    with clock.stage("dataset"):
        dataset = make_sine_dataset(n_train=120, seed=args.seed, noise_sd=args.noise_sd)
    outputs = []
    for l2 in l2_values:
        tag = str(l2).replace(".", "p")
        with clock.stage(f"train-l2-{tag}"):
            model = train(dataset, model_init_seed=args.seed, l2=l2, config=train_config)
        with clock.stage(f"score-l2-{tag}"):
            preds, scores = score_model_on_grid(dataset, model, config, sigma=sigma)
            ens = ensemble_uncertainty(
                dataset, T=args.ensemble_size, l2=l2, config=train_config
            )
            mc_model = replace(model, dropout_rate=args.dropout_rate)
            mc = predict(
                mc_model, dataset.grid_xs, dropout_samples=args.dropout_samples, seed=args.seed
            ).std(axis=0)
        outputs.append((l2, preds, scores, ens, mc))
    with clock.stage("write"):
        header = "x,prediction,qipf_score,ensemble_std,mc_dropout_std,seen_mask"
        paths = []
        for l2, preds, scores, ens, mc in outputs:
            path = out_dir / f"demo_regression_l2_{str(l2).replace('.', 'p')}.csv"
            manifest.outputs.append(str(path))
            paths.append((path, preds, scores, ens, mc))
        digest = manifest.write(_manifest_path(out_dir / "demo_regression"))
        for path, preds, scores, ens, mc in paths:
            rows = [
                ",".join(
                    [
                        _fmt(x),
                        _fmt(preds[j]),
                        _fmt(scores[j]),
                        _fmt(ens[j]),
                        _fmt(mc[j]),
                        str(int(dataset.grid_seen_mask[j])),
                    ]
                )
                for j, x in enumerate(dataset.grid_xs)
            ]
            _write_csv(path, digest, header, rows)
            print(f"wrote {path}")
    return 0


# -----------------------------
# corrupt
# -----------------------------


def _read_image(path):
    return read_image_pgm(path) if str(path).endswith(".pgm") else read_image_csv(path)


def cmd_corrupt(args) -> int:
    manifest = RunManifest(
        command="corrupt", options={"kind": args.kind, "intensity": args.intensity}
    )
    clock = _StageClock(manifest)
    with clock.stage("load-image"):
        manifest.add_input("image", args.image)
        image = _read_image(args.image)
    with clock.stage("corrupt"):
        result = corrupt(image, args.kind, args.intensity)
    out = Path(args.out or f"corrupted_{args.kind}.csv")
    with clock.stage("write"):
        manifest.outputs.append(str(out))
        digest = manifest.write(_manifest_path(out))
        if str(out).endswith(".pgm"):
            write_image_pgm(result, out, comment=f"manifest={digest}")
        else:
            body = [f"{result.height},{result.width}"]
            body += [",".join(repr(float(v)) for v in row) for row in result.pixels]
            Path(out).write_text(f"# manifest={digest}\n" + "\n".join(body) + "\n")
    print(f"wrote {out}")
    return 0


# -----------------------------
# pool
# -----------------------------


def cmd_pool(args) -> int:
    manifest = RunManifest(
        command="pool",
        options={"pool_target": args.pool_target, "exclude_biases": args.exclude_biases},
    )
    clock = _StageClock(manifest)
    with clock.stage("load-weights"):
        manifest.add_input("weights", args.weights)
        bundle = load_bundle(args.weights)
        if args.exclude_biases:
            bundle = _filter_biases(bundle)
    with clock.stage("pool"):
        pooled = pool_weights(bundle, args.pool_target)
    out = Path(args.out or "pooled.csv")
    with clock.stage("write"):
        manifest.outputs.append(str(out))
        digest = manifest.write(_manifest_path(out))
        _write_csv(out, digest, "value", [_fmt(v) for v in pooled])
    print(f"wrote {out} ({pooled.size} pooled values from {bundle.total_params()} params)")
    return 0


# -----------------------------
# bench
# -----------------------------


@dataclass
class BenchResult:
    rows: list  # (n, modes, ms_per_sample)
    n_exponent: float
    additive_fit: tuple[float, float, float]  # (a, b, c) for t = a + b*n + c*K
    max_additive_residual: float

    def delta_at(self, n: int, k_lo: int, k_hi: int) -> float:
        by = {(r[0], r[1]): r[2] for r in self.rows}
        return by[(n, k_hi)] - by[(n, k_lo)]


def run_bench(
    n_values=(256, 512, 1024, 2048, 4096, 8192),
    mode_values=(4, 8),
    samples: int = 192,
    repeats: int = 9,
    seed: int = 0,
) -> BenchResult:
    """Measure per-sample decompose+score time over a (n, modes) grid.

    Mode counts are timed interleaved (and each cell keeps its best of
    `repeats`) so slow drift hits every cell equally and the small
    per-mode cost is not buried under it.  Reports the log-log slope of
    time vs n at the smallest mode count and a least-squares fit of the
    additive model t = a + b*n + c*K.
    """
    rng = np.random.default_rng(seed)
    ys = rng.uniform(-3.0, 3.0, samples)
    rows = []
    for n in n_values:
        points = rng.normal(0.0, 1.0, n)
        sigma = effective_sigma(points, 80.0) if n >= 2 else 1.0
        field_ = WeightField(points, sigma)
        configs = [QipfConfig(num_modes=max(k, 1)) for k in mode_values]
        for config in configs:
            decompose(field_, ys[: min(8, samples)], config=config)  # warmup
        best = [float("inf")] * len(configs)
        for _ in range(repeats):
            for i, config in enumerate(configs):
                start = time.perf_counter()
                decomp = decompose(field_, ys, config=config)
                uncertainty_score(decomp, config)
                best[i] = min(best[i], time.perf_counter() - start)
        for k, b in zip(mode_values, best):
            rows.append((int(n), int(k), b / samples * 1000.0))

    k0 = mode_values[0]
    pts = [(n, t) for n, k, t in rows if k == k0]
    if len(pts) >= 2:
        log_n = np.log([p[0] for p in pts])
        log_t = np.log([p[1] for p in pts])
        n_exponent = float(np.polyfit(log_n, log_t, 1)[0])
    else:
        n_exponent = float("nan")

    if len(rows) >= 3:
        a_mat = np.array([[1.0, n, k] for n, k, _ in rows])
        t_vec = np.array([t for _, _, t in rows])
        coeffs, *_ = np.linalg.lstsq(a_mat, t_vec, rcond=None)
        fit = a_mat @ coeffs
        max_resid = float(np.max(np.abs(fit - t_vec) / t_vec))
    else:
        coeffs = (float("nan"),) * 3
        max_resid = float("nan")
    return BenchResult(
        rows=rows,
        n_exponent=n_exponent,
        additive_fit=tuple(float(c) for c in coeffs),
        max_additive_residual=max_resid,
    )


def cmd_bench(args) -> int:
    n_values = tuple(int(v) for v in args.n_grid.split(","))
    mode_values = tuple(int(v) for v in args.modes_grid.split(","))
    manifest = RunManifest(
        command="bench",
        options={
            "n_grid": list(n_values),
            "modes_grid": list(mode_values),
            "samples": args.samples,
            "repeats": args.repeats,
            "seed": args.seed,
        },
    )
    clock = _StageClock(manifest)
    with clock.stage("bench"):
        result = run_bench(
            n_values, mode_values, samples=args.samples, repeats=args.repeats, seed=args.seed
        )
    out = Path(args.out or "bench.csv")
    with clock.stage("write"):
        manifest.outputs.append(str(out))
        digest = manifest.write(_manifest_path(out))
        rows = [f"{n},{k},{_fmt(t)}" for n, k, t in result.rows]
        _write_csv(out, digest, "n,modes,ms_per_sample", rows)
    print(f"wrote {out}")
    print(f"fitted n exponent: {result.n_exponent:.4f}")
    print(f"additive fit t = a + b*n + c*K: {result.additive_fit}")
    print(f"max additive residual: {result.max_additive_residual:.3%}")
    return 0


# -----------------------------
# parser / entry point
# -----------------------------


def _add_common(parser, *, modes=True, sigma=True, pool=True, seed=True):
    if modes:
        parser.add_argument("--modes", type=int, default=4, help="number of modes K")
    if sigma:
        parser.add_argument(
            "--sigma-factor", type=float, default=80.0, help="bandwidth multiplier"
        )
    if pool:
        parser.add_argument(
            "--pool-target", type=int, default=1024, help="pooled weight count target"
        )
    if seed:
        parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--out", type=str, default=None, help="output path")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qipf",
        description="Weight-field mode decomposition for model uncertainty scoring",
    )
    parser.add_argument("--version", action="version", version=f"qipf {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("score", help="score predictions against a weight bundle")
    p.add_argument("--weights", required=True, help="QWB weight bundle")
    p.add_argument("--predictions", required=True, help="predictions CSV")
    p.add_argument("--calibration", default=None, help="held-out predictions CSV for offsets")
    p.add_argument("--include-mode-zero", action="store_true")
    p.add_argument("--exclude-biases", action="store_true")
    _add_common(p, seed=False)
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("metrics", help="evaluate scores against outcomes")
    p.add_argument("--scores", required=True)
    p.add_argument("--predictions", required=True)
    p.add_argument("--bins", type=int, default=10, help="calibration bins")
    p.add_argument("--out", type=str, default=None)
    p.set_defaults(func=cmd_metrics)

    demo = sub.add_parser("demo", help="generate plot-ready demo data")
    demo_sub = demo.add_subparsers(dest="which", required=True)

    p = demo_sub.add_parser("sine", help="mode curves over a sine signal's value space")
    p.add_argument("--samples", type=int, default=500)
    p.add_argument("--sigma", type=float, default=1.4, help="kernel width in value space")
    p.add_argument("--noise-sd", type=float, default=0.02)
    p.add_argument("--grid-span", type=float, default=4.2, help="grid half-width in sample stds")
    p.add_argument("--grid-points", type=int, default=181)
    p.add_argument("--denom-epsilon", type=float, default=0.2)
    _add_common(p, sigma=False, pool=False)
    p.set_defaults(func=cmd_demo_sine)

    p = demo_sub.add_parser("regression", help="seen/unseen uncertainty on the toy task")
    p.add_argument("--l2", type=str, default="0.0,0.01,0.2", help="comma-separated list")
    p.add_argument("--epochs", type=int, default=800)
    p.add_argument("--sigma", type=float, default=0.5, help="kernel width; <= 0 selects by rule")
    p.add_argument("--denom-epsilon", type=float, default=0.2)
    p.add_argument("--ensemble-size", type=int, default=10)
    p.add_argument("--dropout-samples", type=int, default=100)
    p.add_argument("--dropout-rate", type=float, default=0.1)
    p.add_argument("--noise-sd", type=float, default=0.1)
    _add_common(p)
    p.set_defaults(func=cmd_demo_regression)

    p = sub.add_parser("corrupt", help="apply a corruption to an image")
    p.add_argument("--image", required=True, help=".csv or .pgm input")
    p.add_argument("--kind", required=True, choices=CORRUPTION_KINDS)
    p.add_argument("--intensity", type=float, required=True)
    p.add_argument("--out", type=str, default=None)
    p.set_defaults(func=cmd_corrupt)

    p = sub.add_parser("bench", help="per-sample timing across field sizes and modes")
    p.add_argument("--n-grid", type=str, default="256,512,1024,2048,4096,8192")
    p.add_argument("--modes-grid", type=str, default="4,8")
    p.add_argument("--samples", type=int, default=96)
    p.add_argument("--repeats", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", type=str, default=None)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("pool", help="pool a weight bundle to field points")
    p.add_argument("--weights", required=True)
    p.add_argument("--exclude-biases", action="store_true")
    _add_common(p, modes=False, sigma=False, seed=False)
    p.set_defaults(func=cmd_pool)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (NumericalFailureError, TrainingFailureError) as exc:
        stage = getattr(exc, "stage", "compute")
        print(f"qipf: numerical failure [{stage}]: {exc}", file=sys.stderr)
        return 3
    except (QipfError, FileNotFoundError, OSError) as exc:
        stage = getattr(exc, "stage", "input")
        print(f"qipf: error [{stage}]: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
