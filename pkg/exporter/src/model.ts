/**
 * Model-side contracts for export.
 *
 * Any framework binding works as long as it can enumerate parameters as
 * named row-major arrays and (for prediction dumps) produce one logit
 * vector per input.
 */

export interface ParameterTensor {
  /** Unique layer name, e.g. "dense0.weight". */
  name: string;
  /** Tensor shape; values are flattened row-major. */
  shape: number[];
  values: Float32Array;
}

export interface ExportableModel {
  parameters(): ParameterTensor[];
  /** Pre-softmax class scores for one input. */
  logits(input: Float32Array): Float32Array;
}

export class ExportError extends Error {
  constructor(message: string) {
    super(message);
    this.name = "ExportError";
  }
}

export function tensorLength(shape: number[]): number {
  return shape.reduce((a, b) => a * b, 1);
}

export function validateTensor(t: ParameterTensor): void {
  if (t.shape.length === 0 || t.shape.some((s) => !Number.isInteger(s) || s <= 0)) {
    throw new ExportError(`tensor ${t.name}: shape must be positive integers, got [${t.shape}]`);
  }
  if (!(t.values instanceof Float32Array)) {
    throw new ExportError(`tensor ${t.name}: values must be a Float32Array`);
  }
  if (t.values.length !== tensorLength(t.shape)) {
    throw new ExportError(
      `tensor ${t.name}: ${t.values.length} values but shape [${t.shape}] implies ` +
        `${tensorLength(t.shape)}`,
    );
  }
  for (const v of t.values) {
    if (!Number.isFinite(v)) {
      throw new ExportError(`tensor ${t.name}: non-finite value`);
    }
  }
}
