/**
 * QWB weight-bundle format.
 *
 * Layout: a compact JSON manifest, exactly one newline, then a raw
 * little-endian IEEE-754 float32 payload. Manifest offsets/lengths index
 * floats (not bytes) into the payload:
 *
 *   {"qwb_version":1,
 *    "layers":[{"name","shape","dtype":"f32","offset","length"}, ...],
 *    "meta":{...}}
 */

import { ExportError, ParameterTensor, tensorLength, validateTensor } from "./model.js";

export interface QwbLayerSpec {
  name: string;
  shape: number[];
  dtype: "f32";
  offset: number;
  length: number;
}

export interface QwbManifest {
  qwb_version: 1;
  layers: QwbLayerSpec[];
  meta: Record<string, string>;
}

/** Serialize tensors into QWB bytes (deterministic for identical input). */
export function encodeQwb(
  tensors: ParameterTensor[],
  meta: Record<string, string> = {},
): Buffer {
  if (tensors.length === 0) {
    throw new ExportError("cannot export a model with no parameters");
  }
  const names = new Set<string>();
  const layers: QwbLayerSpec[] = [];
  let offset = 0;
  for (const t of tensors) {
    validateTensor(t);
    if (names.has(t.name)) {
      throw new ExportError(`duplicate tensor name ${t.name}`);
    }
    names.add(t.name);
    layers.push({
      name: t.name,
      shape: [...t.shape],
      dtype: "f32",
      offset,
      length: t.values.length,
    });
    offset += t.values.length;
  }
  const manifest: QwbManifest = { qwb_version: 1, layers, meta };
  const head = Buffer.from(JSON.stringify(manifest) + "\n", "utf8");
  const payload = Buffer.alloc(offset * 4);
  let pos = 0;
  for (const t of tensors) {
    for (const v of t.values) {
      payload.writeFloatLE(v, pos);
      pos += 4;
    }
  }
  return Buffer.concat([head, payload]);
}

/**
 * Parse QWB bytes back into tensors (used to verify round trips).
 *
 * Scans for the top-level closing brace with string/escape tracking so
 * braces inside layer names or meta values do not truncate the manifest.
 */
export function decodeQwb(blob: Buffer): { tensors: ParameterTensor[]; meta: Record<string, string> } {
  if (blob.length === 0 || blob[0] !== 0x7b) {
    throw new ExportError("expected JSON manifest at start of file");
  }
  let depth = 0;
  let inString = false;
  let escaped = false;
  let end = -1;
  for (let i = 0; i < blob.length; i++) {
    const ch = blob[i];
    if (inString) {
      if (escaped) escaped = false;
      else if (ch === 0x5c) escaped = true;
      else if (ch === 0x22) inString = false;
      continue;
    }
    if (ch === 0x22) inString = true;
    else if (ch === 0x7b) depth += 1;
    else if (ch === 0x7d) {
      depth -= 1;
      if (depth === 0) {
        end = i + 1;
        break;
      }
    }
  }
  if (end < 0) throw new ExportError("unterminated JSON manifest");
  if (blob[end] !== 0x0a) throw new ExportError("manifest must be followed by one newline");
  const manifest = JSON.parse(blob.subarray(0, end).toString("utf8")) as QwbManifest;
  if (manifest.qwb_version !== 1) {
    throw new ExportError(`unsupported qwb_version ${manifest.qwb_version}`);
  }
  const payload = blob.subarray(end + 1);
  if (payload.length % 4 !== 0) {
    throw new ExportError(`payload length ${payload.length} is not a multiple of 4`);
  }
  const totalFloats = payload.length / 4;
  const tensors: ParameterTensor[] = [];
  for (const layer of manifest.layers) {
    if (layer.dtype !== "f32") {
      throw new ExportError(`layer ${layer.name}: unsupported dtype ${layer.dtype}`);
    }
    if (layer.length !== tensorLength(layer.shape)) {
      throw new ExportError(`layer ${layer.name}: length does not match shape`);
    }
    if (layer.offset < 0 || layer.offset + layer.length > totalFloats) {
      throw new ExportError(`layer ${layer.name}: slice outside payload`);
    }
    const values = new Float32Array(layer.length);
    for (let i = 0; i < layer.length; i++) {
      values[i] = payload.readFloatLE((layer.offset + i) * 4);
    }
    tensors.push({ name: layer.name, shape: [...layer.shape], values });
  }
  return { tensors, meta: manifest.meta ?? {} };
}
