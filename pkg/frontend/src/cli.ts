#!/usr/bin/env node
// Command-line entry point for the encoder gateway.
//
//   export     encode a dataset TSV into an SEMB1 embedding file
//   finetune   fit a linear adapter on pair targets and save it
//   train-head fit a logistic head on encoded (optionally adapted) rows
//   predict    emit a predictions TSV from a saved head
//
// Every subcommand takes --config <file> with flat "key = value" lines;
// command-line flags override config values.

import { parseArgs } from "node:util";
import { readFileSync, writeFileSync, renameSync } from "node:fs";
import { dirname, join } from "node:path";
import { randomBytes } from "node:crypto";

import { loadEncoder, type Encoder } from "./encoder.js";
import { writeSemb } from "./semb.js";
import { parseDataset, parsePairs, formatPredictions, type DatasetRow } from "./tsv.js";
import {
  trainAdapter,
  identityAdapter,
  applyAdapter,
  serializeAdapter,
  deserializeAdapter,
  type Adapter,
  type PairBatch,
} from "./adapter.js";
import {
  trainHead,
  headProb,
  headLabel,
  serializeHead,
  deserializeHead,
} from "./classifier.js";
import { parseConfig, requireKey } from "./config.js";

function atomicWrite(path: string, data: Buffer | string): void {
  const temp = join(dirname(path), `.tmp-${randomBytes(6).toString("hex")}`);
  writeFileSync(temp, data);
  renameSync(temp, path);
}

interface Options {
  values: Record<string, string | undefined>;
  config: Map<string, string>;
}

function readOptions(argv: string[], flags: string[]): Options {
  const spec: Record<string, { type: "string" }> = { config: { type: "string" } };
  for (const flag of flags) spec[flag] = { type: "string" };
  const { values } = parseArgs({ args: argv, options: spec, allowPositionals: false });
  const config = values.config
    ? parseConfig(readFileSync(values.config as string, "utf-8"))
    : new Map<string, string>();
  return { values: values as Record<string, string | undefined>, config };
}

function opt(options: Options, key: string): string | undefined {
  return options.values[key] ?? options.config.get(key);
}

function req(options: Options, key: string): string {
  const value = opt(options, key);
  if (value === undefined) throw new Error(`missing required option --${key} (or config key ${key})`);
  return value;
}

function num(options: Options, key: string, fallback: number): number {
  const raw = opt(options, key);
  if (raw === undefined) return fallback;
  const value = Number(raw);
  if (!Number.isFinite(value)) throw new Error(`bad numeric value for ${key}: ${raw}`);
  return value;
}

async function encodeDataset(
  encoder: Encoder,
  rows: DatasetRow[],
  adapter?: Adapter,
): Promise<{ ids: string[]; dim: number; vectors: Float32Array[] }> {
  const encoded = await encoder.encode(rows.map((r) => r.text));
  const dim = adapter ? adapter.dim : encoder.dim;
  const vectors = encoded.map((row) => {
    if (adapter) {
      if (row.length !== adapter.dim) {
        throw new Error(`adapter dim ${adapter.dim} != embedding dim ${row.length}`);
      }
      return Float32Array.from(applyAdapter(adapter, row));
    }
    return row;
  });
  return { ids: rows.map((r) => r.id), dim, vectors };
}

function packRows(dim: number, vectors: Float32Array[]): Float32Array {
  const rows = new Float32Array(vectors.length * dim);
  vectors.forEach((v, i) => rows.set(v, i * dim));
  return rows;
}

function maybeAdapter(options: Options): Adapter | undefined {
  const path = opt(options, "adapter");
  if (!path) return undefined;
  return deserializeAdapter(readFileSync(path, "utf-8")).adapter;
}

async function cmdExport(argv: string[]): Promise<void> {
  const options = readOptions(argv, ["encoder", "dataset", "out", "adapter"]);
  const encoder = await loadEncoder(req(options, "encoder"));
  const rows = parseDataset(readFileSync(req(options, "dataset"), "utf-8"));
  const adapter = maybeAdapter(options);
  const { ids, dim, vectors } = await encodeDataset(encoder, rows, adapter);
  atomicWrite(req(options, "out"), writeSemb({ ids, dim, rows: packRows(dim, vectors) }));
  process.stderr.write(`wrote ${ids.length} embeddings of dim ${dim}\n`);
}

async function cmdFinetune(argv: string[]): Promise<void> {
  const options = readOptions(argv, [
    "encoder",
    "dataset",
    "pairs",
    "out",
    "epochs",
    "learning-rate",
  ]);
  const spec = req(options, "encoder");
  const encoder = await loadEncoder(spec);
  const rows = parseDataset(readFileSync(req(options, "dataset"), "utf-8"));
  const pairs = parsePairs(readFileSync(req(options, "pairs"), "utf-8"));
  const epochs = num(options, "epochs", 50);
  const learningRate = num(options, "learning-rate", 0.01);
  if (!Number.isInteger(epochs) || epochs < 0) throw new Error(`bad epochs ${epochs}`);

  const byId = new Map(rows.map((r) => [r.id, r]));
  for (const pair of pairs) {
    for (const id of [pair.idA, pair.idB]) {
      if (!byId.has(id)) throw new Error(`pair references unknown sentence id ${id}`);
    }
  }
  const { vectors } = await encodeDataset(encoder, rows);
  const vecById = new Map(rows.map((r, i) => [r.id, Float64Array.from(vectors[i])]));
  const dim = encoder.dim;

  let result: { adapter: Adapter; finalLoss: number };
  if (epochs === 0) {
    result = { adapter: identityAdapter(dim), finalLoss: NaN };
  } else {
    const batch: PairBatch = {
      embA: pairs.map((p) => vecById.get(p.idA)!),
      embB: pairs.map((p) => vecById.get(p.idB)!),
      targets: pairs.map((p) => p.target),
    };
    result = trainAdapter(batch, dim, epochs, learningRate);
  }
  atomicWrite(req(options, "out"), serializeAdapter(result.adapter, spec));
  process.stderr.write(
    `adapter trained for ${epochs} epochs` +
      (Number.isFinite(result.finalLoss) ? ` (final loss ${result.finalLoss.toExponential(4)})` : "") +
      "\n",
  );
}

async function cmdTrainHead(argv: string[]): Promise<void> {
  const options = readOptions(argv, [
    "encoder",
    "dataset",
    "out",
    "adapter",
    "epochs",
    "learning-rate",
    "l2",
    "threshold",
  ]);
  const spec = req(options, "encoder");
  const encoder = await loadEncoder(spec);
  const rows = parseDataset(readFileSync(req(options, "dataset"), "utf-8"));
  const adapter = maybeAdapter(options);
  const { vectors } = await encodeDataset(encoder, rows, adapter);
  const head = trainHead(
    vectors.map((v) => Float64Array.from(v)),
    rows.map((r) => r.label),
    {
      epochs: num(options, "epochs", 500),
      learningRate: num(options, "learning-rate", 0.5),
      l2: num(options, "l2", 1e-4),
      threshold: num(options, "threshold", 0.5),
    },
  );
  atomicWrite(req(options, "out"), serializeHead(head, spec));
  process.stderr.write(`trained head on ${rows.length} rows\n`);
}

async function cmdPredict(argv: string[]): Promise<void> {
  const options = readOptions(argv, ["encoder", "dataset", "head", "out", "adapter"]);
  const encoder = await loadEncoder(req(options, "encoder"));
  const rows = parseDataset(readFileSync(req(options, "dataset"), "utf-8"));
  const adapter = maybeAdapter(options);
  const { head } = deserializeHead(readFileSync(req(options, "head"), "utf-8"));
  const { dim, vectors } = await encodeDataset(encoder, rows, adapter);
  if (dim !== head.dim) throw new Error(`head dim ${head.dim} != embedding dim ${dim}`);
  const predictions = rows.map((row, i) => {
    const prob = headProb(head, vectors[i]);
    return { id: row.id, label: headLabel(head, prob), prob };
  });
  atomicWrite(req(options, "out"), formatPredictions(predictions));
  process.stderr.write(`wrote ${predictions.length} predictions\n`);
}

const COMMANDS: Record<string, (argv: string[]) => Promise<void>> = {
  export: cmdExport,
  finetune: cmdFinetune,
  "train-head": cmdTrainHead,
  predict: cmdPredict,
};

export async function main(argv: string[]): Promise<number> {
  const [command, ...rest] = argv;
  if (!command || !(command in COMMANDS)) {
    process.stderr.write(
      `usage: encoder-gateway <${Object.keys(COMMANDS).join("|")}> [options]\n`,
    );
    return 2;
  }
  try {
    await COMMANDS[command](rest);
    return 0;
  } catch (error) {
    process.stderr.write(`error: ${error instanceof Error ? error.message : String(error)}\n`);
    return 1;
  }
}

const invokedDirectly =
  process.argv[1] !== undefined && import.meta.url.endsWith(process.argv[1].split("/").pop()!);
if (invokedDirectly) {
  main(process.argv.slice(2)).then((code) => {
    process.exitCode = code;
  });
}
