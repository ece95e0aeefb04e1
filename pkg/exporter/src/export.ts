/**
 * Top-level export entry points: model -> QWB file, model -> predictions CSV.
 */

import * as fs from "node:fs";
import * as path from "node:path";

import { ExportableModel, ExportError, ParameterTensor } from "./model.js";
import { encodePredictionsCsv, predictionRows } from "./predictions.js";
import { encodeQwb } from "./qwb.js";

export interface ExportSpec {
  /** Destination for the QWB bundle. */
  weightsPath: string;
  /** Keep only tensors whose name matches (default: all). */
  include?: RegExp;
  /** Drop tensors whose name matches (applied after include). */
  exclude?: RegExp;
  /** Free-form provenance recorded in the bundle manifest. */
  meta?: Record<string, string>;
}

function selectTensors(model: ExportableModel, spec: ExportSpec): ParameterTensor[] {
  let tensors = model.parameters();
  if (spec.include) tensors = tensors.filter((t) => spec.include!.test(t.name));
  if (spec.exclude) tensors = tensors.filter((t) => !spec.exclude!.test(t.name));
  if (tensors.length === 0) {
    throw new ExportError("no parameters left to export after include/exclude filters");
  }
  return tensors;
}

/** Write the model's parameters as a QWB bundle; returns the byte count. */
export function exportWeights(model: ExportableModel, spec: ExportSpec): number {
  const blob = encodeQwb(selectTensors(model, spec), spec.meta ?? {});
  fs.mkdirSync(path.dirname(path.resolve(spec.weightsPath)), { recursive: true });
  fs.writeFileSync(spec.weightsPath, blob);
  return blob.length;
}

/** Write per-sample prediction rows for the given inputs and labels. */
export function exportPredictions(
  model: ExportableModel,
  inputs: Float32Array[],
  labels: number[],
  outPath: string,
): number {
  const csv = encodePredictionsCsv(predictionRows(model, inputs, labels));
  fs.mkdirSync(path.dirname(path.resolve(outPath)), { recursive: true });
  fs.writeFileSync(outPath, csv, "utf8");
  return csv.length;
}
