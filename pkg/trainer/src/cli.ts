#!/usr/bin/env node
/** senclu-trainer: fine-tune the group encoder on a triplet dataset and emit
 * EMB1 embeddings, speaking the embedding-provider contract.
 *
 *   senclu-trainer init  <model-dir> [--dim N] [--vocab N] [--seed N]
 *   senclu-trainer train <triplets.jsonl> <model-dir> [--base DIR]
 *                        [--margin X] [--epochs N] [--lr X]
 *                        [--dim N] [--vocab N] [--seed N]
 *   senclu-trainer embed <model-dir> <out.bin>   (group texts JSONL on stdin)
 *
 * `train` reads margin/epochs defaults from `<triplets>.config.json` when
 * present. `embed` writes one unit-normalized row per input line, in input
 * order, plus the `<out>.idx.jsonl` sidecar.
 */

import * as fs from 'fs';
import * as path from 'path';

import { DEFAULT_CONFIG, Encoder, EncoderConfig } from './encoder';
import { writeEmb1, writeIndexSidecar, RowIndexEntry } from './emb1';
import { readSidecar, readTripletFile } from './triplets';
import { trainEncoder } from './train';

interface Flags {
  positional: string[];
  options: Map<string, string>;
}

function parseArgs(argv: string[]): Flags {
  const positional: string[] = [];
  const options = new Map<string, string>();
  for (let i = 0; i < argv.length; i++) {
    const arg = argv[i];
    if (arg.startsWith('--')) {
      const value = argv[i + 1];
      if (value === undefined) throw new Error(`missing value for ${arg}`);
      options.set(arg.slice(2), value);
      i++;
    } else {
      positional.push(arg);
    }
  }
  return { positional, options };
}

function numberFlag(flags: Flags, name: string, fallback: number): number {
  const raw = flags.options.get(name);
  if (raw === undefined) return fallback;
  const value = Number(raw);
  if (!Number.isFinite(value)) throw new Error(`--${name} expects a number, got ${raw}`);
  return value;
}

function encoderConfig(flags: Flags): EncoderConfig {
  return {
    dim: numberFlag(flags, 'dim', DEFAULT_CONFIG.dim),
    vocabSize: numberFlag(flags, 'vocab', DEFAULT_CONFIG.vocabSize),
    seed: numberFlag(flags, 'seed', DEFAULT_CONFIG.seed),
  };
}

function cmdInit(flags: Flags): void {
  const [dir] = flags.positional;
  if (!dir) throw new Error('usage: senclu-trainer init <model-dir> [--dim N] [--vocab N] [--seed N]');
  const encoder = Encoder.init(encoderConfig(flags));
  encoder.save(dir, { trained: false });
  console.log(`initialized base encoder (dim=${encoder.config.dim}) in ${dir}`);
}

function cmdTrain(flags: Flags): void {
  const [tripletPath, outDir] = flags.positional;
  if (!tripletPath || !outDir) {
    throw new Error('usage: senclu-trainer train <triplets.jsonl> <model-dir> [options]');
  }
  const sidecar = readSidecar(tripletPath);
  const options = {
    margin: numberFlag(flags, 'margin', sidecar.margin ?? 0.16),
    epochs: numberFlag(flags, 'epochs', sidecar.epochs ?? 4),
    learningRate: numberFlag(flags, 'lr', 0.05),
  };
  const base = flags.options.get('base');
  const encoder = base ? Encoder.load(base) : Encoder.init(encoderConfig(flags));
  const triplets = readTripletFile(tripletPath);
  console.log(
    `training on ${triplets.length} triplets: margin=${options.margin} ` +
      `epochs=${options.epochs} lr=${options.learningRate}` +
      (base ? ` base=${base}` : ''),
  );
  const stats = trainEncoder(encoder, triplets, options, (line) => console.log(line));
  encoder.save(outDir, { trained: true });
  const logPayload = {
    triplets: triplets.length,
    margin: options.margin,
    epochs: options.epochs,
    learningRate: options.learningRate,
    base: base ?? null,
    encoder: encoder.config,
    epochLog: stats,
  };
  fs.writeFileSync(path.join(outDir, 'train_log.json'), JSON.stringify(logPayload, null, 2) + '\n');
  console.log(`saved fine-tuned encoder to ${outDir}`);
}

function readStdin(): string {
  return fs.readFileSync(0, 'utf-8');
}

function cmdEmbed(flags: Flags): void {
  const [modelDir, outPath] = flags.positional;
  if (!modelDir || !outPath) {
    throw new Error('usage: senclu-trainer embed <model-dir> <out.bin>  (JSONL on stdin)');
  }
  const encoder = Encoder.load(modelDir);
  const rows: Float32Array[] = [];
  const index: RowIndexEntry[] = [];
  const lines = readStdin().split('\n');
  for (let i = 0; i < lines.length; i++) {
    if (!lines[i].trim()) continue;
    let record: any;
    try {
      record = JSON.parse(lines[i]);
    } catch {
      throw new Error(`stdin line ${i + 1}: invalid JSON`);
    }
    if (typeof record.text !== 'string') {
      throw new Error(`stdin line ${i + 1}: missing "text"`);
    }
    rows.push(encoder.embedText(record.text));
    index.push({
      row: rows.length - 1,
      doc: typeof record.doc === 'string' ? record.doc : '',
      group: typeof record.group === 'number' ? record.group : rows.length - 1,
    });
  }
  writeEmb1(outPath, rows, encoder.config.dim);
  writeIndexSidecar(outPath, index);
  console.log(`embedded ${rows.length} groups (dim=${encoder.config.dim}) -> ${outPath}`);
}

export function main(argv: string[]): number {
  const [command, ...rest] = argv;
  try {
    const flags = parseArgs(rest);
    switch (command) {
      case 'init':
        cmdInit(flags);
        return 0;
      case 'train':
        cmdTrain(flags);
        return 0;
      case 'embed':
        cmdEmbed(flags);
        return 0;
      default:
        throw new Error(`unknown command ${command ?? '(none)'}; expected init, train, or embed`);
    }
  } catch (err) {
    console.error(`error: ${err instanceof Error ? err.message : err}`);
    return 1;
  }
}

if (require.main === module) {
  process.exit(main(process.argv.slice(2)));
}
