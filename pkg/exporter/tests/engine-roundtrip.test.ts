/**
 * Cross-language round trip: files written here must load bit-exactly in
 * the scoring engine's own Python reader, and feed its CLI end to end.
 * Skipped when the engine package is not importable on this machine.
 */

import { execFileSync, spawnSync } from "node:child_process";
import * as fs from "node:fs";
import * as os from "node:os";
import * as path from "node:path";

import { afterAll, describe, expect, it } from "vitest";

import { seededDenseModel } from "../src/dense.js";
import { exportPredictions, exportWeights } from "../src/export.js";

const tmp = fs.mkdtempSync(path.join(os.tmpdir(), "engine-rt-"));
afterAll(() => fs.rmSync(tmp, { recursive: true, force: true }));

function engineAvailable(): boolean {
  const probe = spawnSync("python3", ["-c", "import qipf"], { timeout: 30000 });
  return probe.status === 0;
}

describe.skipIf(!engineAvailable())("engine round trip", () => {
  it("load_bundle reconstructs every float32 bit-exactly", () => {
    const model = seededDenseModel([1, 4, 1], 123);
    const qwbPath = path.join(tmp, "toy.qwb");
    exportWeights(model, { weightsPath: qwbPath, meta: { origin: "exporter-test" } });

    // the engine upcasts to float64 on load; round-tripping back through
    // float32 must reproduce the original bit patterns
    const script = [
      "import json, sys",
      "import numpy as np",
      "from qipf.weight_ingest import load_bundle",
      "b = load_bundle(sys.argv[1])",
      "out = {l.name: l.values.astype('<f4').view('<u4').tolist() for l in b.layers}",
      "print(json.dumps(out))",
    ].join("\n");
    const raw = execFileSync("python3", ["-c", script, qwbPath], { encoding: "utf8" });
    const loaded = JSON.parse(raw) as Record<string, number[]>;

    for (const t of model.parameters()) {
      const ours = Array.from(new Uint32Array(t.values.buffer));
      expect(loaded[t.name], t.name).toEqual(ours);
    }
  });

  it("exported files drive the scoring CLI end to end", () => {
    const model = seededDenseModel([4, 16, 3], 7);
    const qwbPath = path.join(tmp, "clf.qwb");
    const predPath = path.join(tmp, "preds.csv");
    exportWeights(model, { weightsPath: qwbPath });

    const inputs: Float32Array[] = [];
    const labels: number[] = [];
    let state = 99;
    const next = () => {
      state = (state * 1103515245 + 12345) % 2147483648;
      return state / 2147483648;
    };
    for (let i = 0; i < 12; i++) {
      inputs.push(Float32Array.from([next(), next(), next(), next()]));
      labels.push(i % 3);
    }
    exportPredictions(model, inputs, labels, predPath);

    const outPath = path.join(tmp, "scores.csv");
    const run = spawnSync(
      "python3",
      [
        "-m", "qipf.cli", "score",
        "--weights", qwbPath,
        "--predictions", predPath,
        "--out", outPath,
        "--pool-target", "64",
      ],
      { encoding: "utf8", timeout: 120000 },
    );
    expect(run.status, run.stderr).toBe(0);
    const lines = fs.readFileSync(outPath, "utf8").trimEnd().split("\n");
    expect(lines[1]).toBe("id,score,V_1,V_2,V_3,V_4,clamped");
    expect(lines.length).toBe(2 + 12);
  });
});
