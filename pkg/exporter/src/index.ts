export { ExportError, tensorLength, validateTensor } from "./model.js";
export type { ExportableModel, ParameterTensor } from "./model.js";
export { decodeQwb, encodeQwb } from "./qwb.js";
export type { QwbLayerSpec, QwbManifest } from "./qwb.js";
export {
  PREDICTIONS_HEADER,
  encodePredictionsCsv,
  predictionRows,
  summarizeLogits,
} from "./predictions.js";
export type { PredictionRow } from "./predictions.js";
export { exportPredictions, exportWeights } from "./export.js";
export type { ExportSpec } from "./export.js";
export { DenseModel, seededDenseModel } from "./dense.js";
export type { DenseLayer } from "./dense.js";
