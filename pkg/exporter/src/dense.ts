/**
 * Minimal dense-network adapter used by the tests and as a reference for
 * wiring real framework models into ExportableModel.
 */

import { ExportableModel, ExportError, ParameterTensor, tensorLength } from "./model.js";

export interface DenseLayer {
  /** Weight matrix [fanIn x fanOut], row-major. */
  weight: Float32Array;
  bias: Float32Array;
  fanIn: number;
  fanOut: number;
  activation: "tanh" | "linear";
}

export class DenseModel implements ExportableModel {
  constructor(private readonly layers: DenseLayer[]) {
    if (layers.length === 0) {
      throw new ExportError("dense model needs at least one layer");
    }
    for (const [i, l] of layers.entries()) {
      if (l.weight.length !== l.fanIn * l.fanOut || l.bias.length !== l.fanOut) {
        throw new ExportError(`layer ${i}: inconsistent shapes`);
      }
    }
  }

  parameters(): ParameterTensor[] {
    const out: ParameterTensor[] = [];
    this.layers.forEach((l, i) => {
      out.push({ name: `dense${i}.weight`, shape: [l.fanIn, l.fanOut], values: l.weight });
      out.push({ name: `dense${i}.bias`, shape: [l.fanOut], values: l.bias });
    });
    return out;
  }

  logits(input: Float32Array): Float32Array {
    let act = input;
    for (const l of this.layers) {
      if (act.length !== l.fanIn) {
        throw new ExportError(`input length ${act.length} does not match fan-in ${l.fanIn}`);
      }
      const next = new Float32Array(l.fanOut);
      for (let j = 0; j < l.fanOut; j++) {
        let z = l.bias[j];
        for (let i = 0; i < l.fanIn; i++) {
          z += act[i] * l.weight[i * l.fanOut + j];
        }
        next[j] = l.activation === "tanh" ? Math.tanh(z) : z;
      }
      act = next;
    }
    return act;
  }
}

/** Deterministic seeded model for tests (mulberry32 PRNG). */
export function seededDenseModel(sizes: number[], seed: number): DenseModel {
  let state = seed >>> 0;
  const next = () => {
    state = (state + 0x6d2b79f5) >>> 0;
    let t = state;
    t = Math.imul(t ^ (t >>> 15), t | 1);
    t ^= t + Math.imul(t ^ (t >>> 7), t | 61);
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  };
  const layers: DenseLayer[] = [];
  for (let i = 0; i + 1 < sizes.length; i++) {
    const fanIn = sizes[i];
    const fanOut = sizes[i + 1];
    const weight = new Float32Array(tensorLength([fanIn, fanOut]));
    for (let j = 0; j < weight.length; j++) {
      weight[j] = (next() * 2 - 1) / Math.sqrt(fanIn);
    }
    layers.push({
      weight,
      bias: new Float32Array(fanOut),
      fanIn,
      fanOut,
      activation: i + 2 === sizes.length ? "linear" : "tanh",
    });
  }
  return new DenseModel(layers);
}
