import * as fs from "fs";
import * as path from "path";

import { loadCheckpoint } from "./checkpoint";
import { MeanPoolEncoder } from "./encoder";
import { readSentences } from "./sentences";
import { formatTable } from "./tsv";

export interface ExportJob {
  /** Input file of "id<TAB>text" lines. */
  input: string;
  /** JSON word-vector checkpoint: {"dim": d, "vocab": {token: [..d..]}}. */
  checkpoint: string;
  /** Output embedding TSV path. */
  output: string;
  /** Sentences encoded per batch; output is independent of this. */
  batchSize?: number;
  /** L2-normalize non-zero vectors. */
  normalize?: boolean;
}

export interface ExportResult {
  rows: number;
  dim: number;
  output: string;
}

/** Encode every input sentence and write the embedding TSV.
 *
 * Deterministic: a fixed checkpoint and input always produce the same
 * bytes, so reruns are free to overwrite. One output row per input id,
 * in input order.
 */
export function runExport(job: ExportJob): ExportResult {
  const batchSize = job.batchSize ?? 64;
  if (!Number.isInteger(batchSize) || batchSize < 1) {
    throw new RangeError(`batch size must be a positive integer, got ${batchSize}`);
  }
  const checkpoint = loadCheckpoint(job.checkpoint);
  const encoder = new MeanPoolEncoder(checkpoint, job.normalize ?? false);
  const sentences = readSentences(job.input);

  const rows: Array<[string, Float64Array]> = [];
  for (let start = 0; start < sentences.length; start += batchSize) {
    const batch = sentences.slice(start, start + batchSize);
    const vectors = encoder.encodeBatch(batch.map((s) => s.text));
    for (let i = 0; i < batch.length; i++) {
      rows.push([batch[i]!.id, vectors[i]!]);
    }
  }

  const dir = path.dirname(job.output);
  if (dir && dir !== ".") fs.mkdirSync(dir, { recursive: true });
  fs.writeFileSync(job.output, formatTable(encoder.dim, rows), "utf-8");
  return { rows: rows.length, dim: encoder.dim, output: job.output };
}
