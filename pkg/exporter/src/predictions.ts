/**
 * Per-sample prediction dumps.
 *
 * Each row records the evaluation point used by the scoring engine (the
 * maximum pre-softmax logit), the maximum softmax probability, and the
 * true/predicted labels, in the exact CSV schema the engine ingests:
 *
 *   id,y_eval,confidence,true_label,predicted_label
 */

import { ExportableModel, ExportError } from "./model.js";

export const PREDICTIONS_HEADER = "id,y_eval,confidence,true_label,predicted_label";

export interface PredictionRow {
  id: string;
  yEval: number;
  confidence: number;
  trueLabel: number;
  predictedLabel: number;
}

/** Numerically stable max-softmax probability and argmax of a logit vector. */
export function summarizeLogits(logits: Float32Array | number[]): {
  yEval: number;
  confidence: number;
  predictedLabel: number;
} {
  if (logits.length === 0) {
    throw new ExportError("empty logit vector");
  }
  let maxVal = -Infinity;
  let argmax = 0;
  for (let i = 0; i < logits.length; i++) {
    const v = logits[i];
    if (!Number.isFinite(v)) {
      throw new ExportError(`non-finite logit at index ${i}`);
    }
    if (v > maxVal) {
      maxVal = v;
      argmax = i;
    }
  }
  let denom = 0;
  for (let i = 0; i < logits.length; i++) {
    denom += Math.exp(logits[i] - maxVal);
  }
  return { yEval: maxVal, confidence: 1 / denom, predictedLabel: argmax };
}

export function predictionRows(
  model: ExportableModel,
  inputs: Float32Array[],
  labels: number[],
): PredictionRow[] {
  if (labels.length !== inputs.length) {
    throw new ExportError(
      `labels length ${labels.length} does not match inputs length ${inputs.length}`,
    );
  }
  let width: number | null = null;
  return inputs.map((input, i) => {
    const label = labels[i];
    if (!Number.isInteger(label) || label < 0) {
      throw new ExportError(`label at index ${i} must be a nonnegative integer, got ${label}`);
    }
    const logits = model.logits(input);
    if (width === null) width = logits.length;
    else if (logits.length !== width) {
      throw new ExportError(
        `logit vector at index ${i} has length ${logits.length}, expected ${width}`,
      );
    }
    const { yEval, confidence, predictedLabel } = summarizeLogits(logits);
    return { id: String(i), yEval, confidence, trueLabel: label, predictedLabel };
  });
}

export function encodePredictionsCsv(rows: PredictionRow[]): string {
  const lines = [PREDICTIONS_HEADER];
  for (const r of rows) {
    lines.push(`${r.id},${r.yEval},${r.confidence},${r.trueLabel},${r.predictedLabel}`);
  }
  return lines.join("\n") + "\n";
}
