"""Weight bundle (QWB) and prediction-file ingestion, plus layer pooling.

QWB is a single file: a JSON manifest, one newline, then a raw
little-endian float32 payload.  The manifest looks like

    {"qwb_version": 1,
     "layers": [{"name": ..., "shape": [...], "dtype": "f32",
                 "offset": ..., "length": ...}, ...],
     "meta": {...}}

where offset/length index floats (not bytes) into the payload.

Predictions are CSV with the exact header
"id,y_eval,confidence,true_label,predicted_label".
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import FormatError, InvalidArgumentError

__all__ = [
    "Layer",
    "WeightBundle",
    "PredictionRecord",
    "load_bundle",
    "save_bundle",
    "pool_weights",
    "load_predictions",
]

PREDICTIONS_HEADER = ["id", "y_eval", "confidence", "true_label", "predicted_label"]


@dataclass(frozen=True)
class Layer:
    name: str
    shape: tuple[int, ...]
    values: np.ndarray  # flat, row-major

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=np.float64).ravel()
        if any(s <= 0 for s in self.shape):
            raise InvalidArgumentError(f"layer {self.name!r}: shape entries must be positive")
        expect = int(np.prod(self.shape))
        if vals.size != expect:
            raise FormatError(
                f"layer {self.name!r}: {vals.size} values but shape {list(self.shape)} "
                f"implies {expect}"
            )
        if not np.all(np.isfinite(vals)):
            raise FormatError(f"layer {self.name!r} contains non-finite values")
        vals.flags.writeable = False
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "shape", tuple(int(s) for s in self.shape))


@dataclass(frozen=True)
class WeightBundle:
    layers: list[Layer]
    meta: dict[str, str] = field(default_factory=dict)

    def total_params(self) -> int:
        return sum(layer.values.size for layer in self.layers)


def _split_manifest(blob: bytes, path) -> tuple[bytes, bytes]:
    """Split file bytes into the manifest JSON and the float payload.

    Scans for the closing brace of the top-level object, tracking string
    and escape state so braces inside strings don't end the manifest.
    """
    if not blob.startswith(b"{"):
        raise FormatError(f"{path}: expected JSON manifest at start of file")
    depth = 0
    in_string = False
    escaped = False
    for i, byte in enumerate(blob):
        ch = chr(byte)
        if in_string:
            if escaped:
                escaped = False
            elif ch == "\\":
                escaped = True
            elif ch == '"':
                in_string = False
            continue
        if ch == '"':
            in_string = True
        elif ch == "{":
            depth += 1
        elif ch == "}":
            depth -= 1
            if depth == 0:
                end = i + 1
                if blob[end : end + 1] != b"\n":
                    raise FormatError(f"{path}: manifest must be followed by one newline")
                return blob[:end], blob[end + 1 :]
    raise FormatError(f"{path}: unterminated JSON manifest")


def load_bundle(path) -> WeightBundle:
    """Read a QWB file into a validated WeightBundle (upcast to float64)."""
    path = Path(path)
    blob = path.read_bytes()
    manifest_bytes, payload = _split_manifest(blob, path)
    try:
        manifest = json.loads(manifest_bytes)
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: manifest is not valid JSON: {exc}") from exc
    if manifest.get("qwb_version") != 1:
        raise FormatError(f"{path}: unsupported qwb_version {manifest.get('qwb_version')!r}")
    if len(payload) % 4 != 0:
        raise FormatError(f"{path}: payload length {len(payload)} is not a multiple of 4")
    floats = np.frombuffer(payload, dtype="<f4")
    layers = []
    for i, spec in enumerate(manifest.get("layers", [])):
        where = f"{path}: layers[{i}]"
        try:
            name = spec["name"]
            shape = tuple(int(s) for s in spec["shape"])
            dtype = spec["dtype"]
            offset = int(spec["offset"])
            length = int(spec["length"])
        except (KeyError, TypeError, ValueError) as exc:
            raise FormatError(f"{where}: bad or missing field ({exc})") from exc
        if dtype != "f32":
            raise FormatError(f"{where} ({name!r}): unsupported dtype {dtype!r}")
        if offset < 0 or offset + length > floats.size:
            raise FormatError(
                f"{where} ({name!r}): offset {offset} + length {length} "
                f"outside payload of {floats.size} floats"
            )
        layers.append(Layer(name=name, shape=shape, values=floats[offset : offset + length]))
    if not layers:
        raise FormatError(f"{path}: bundle has no layers")
    meta = manifest.get("meta", {})
    if not isinstance(meta, dict):
        raise FormatError(f"{path}: meta must be an object")
    return WeightBundle(layers=layers, meta={str(k): str(v) for k, v in meta.items()})


def save_bundle(bundle: WeightBundle, path) -> None:
    """Write a WeightBundle as QWB (values stored as float32)."""
    if not bundle.layers:
        raise InvalidArgumentError("cannot save an empty bundle")
    specs = []
    chunks = []
    offset = 0
    for layer in bundle.layers:
        vals = layer.values.astype("<f4")
        specs.append(
            {
                "name": layer.name,
                "shape": list(layer.shape),
                "dtype": "f32",
                "offset": offset,
                "length": int(vals.size),
            }
        )
        chunks.append(vals.tobytes())
        offset += vals.size
    manifest = {"qwb_version": 1, "layers": specs, "meta": dict(bundle.meta)}
    blob = json.dumps(manifest, separators=(",", ":")).encode() + b"\n" + b"".join(chunks)
    Path(path).write_bytes(blob)


def pool_weights(bundle: WeightBundle, pool_target: int) -> np.ndarray:
    """Average-pool each layer's flat values down to roughly pool_target total.

    One global window size ceil(total / pool_target) is applied per layer;
    the trailing partial window is averaged over its actual length, which
    keeps every layer's mean exactly preserved under length weighting.
    """
    if pool_target < 1:
        raise InvalidArgumentError(f"pool_target must be >= 1, got {pool_target}")
    if not bundle.layers:
        raise InvalidArgumentError("cannot pool an empty bundle")
    total = bundle.total_params()
    window = max(1, math.ceil(total / pool_target))
    pooled = []
    for layer in bundle.layers:
        vals = layer.values
        starts = np.arange(0, vals.size, window)
        sums = np.add.reduceat(vals, starts)
        counts = np.minimum(starts + window, vals.size) - starts
        pooled.append(sums / counts)
    return np.concatenate(pooled)


@dataclass(frozen=True)
class PredictionRecord:
    """One test sample: evaluation point (max logit), confidence, labels."""

    id: str
    y_eval: float
    confidence: float
    true_label: int
    predicted_label: int

    @property
    def is_error(self) -> int:
        return int(self.true_label != self.predicted_label)


def load_predictions(path) -> list[PredictionRecord]:
    """Read and validate a predictions CSV."""
    path = Path(path)
    records = []
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise FormatError(f"{path}: empty predictions file") from None
        # tolerate a manifest comment line above the header
        if header and header[0].startswith("#"):
            header = next(reader, None)
        if header != PREDICTIONS_HEADER:
            raise FormatError(
                f"{path}: header must be {','.join(PREDICTIONS_HEADER)!r}, got {header!r}"
            )
        for row_num, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 5:
                raise FormatError(f"{path}: row {row_num}: expected 5 fields, got {len(row)}")
            rid, y_raw, conf_raw, true_raw, pred_raw = row
            try:
                y_eval = float(y_raw)
                confidence = float(conf_raw)
                true_label = int(true_raw)
                predicted_label = int(pred_raw)
            except ValueError as exc:
                raise FormatError(f"{path}: row {row_num}: {exc}") from exc
            if not math.isfinite(y_eval):
                raise FormatError(f"{path}: row {row_num}: y_eval must be finite")
            if not (0.0 <= confidence <= 1.0):
                raise FormatError(
                    f"{path}: row {row_num}: confidence {confidence} outside [0, 1]"
                )
            if true_label < 0 or predicted_label < 0:
                raise FormatError(f"{path}: row {row_num}: labels must be >= 0")
            records.append(
                PredictionRecord(
                    id=rid,
                    y_eval=y_eval,
                    confidence=confidence,
                    true_label=true_label,
                    predicted_label=predicted_label,
                )
            )
    if not records:
        raise FormatError(f"{path}: no prediction rows")
    return records
