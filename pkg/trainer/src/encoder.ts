/** A small trainable sentence-group encoder: hashed token embeddings, mean
 * pooled and L2-normalized. Deliberately self-contained so fine-tuning runs
 * anywhere node does; the embedding table is the only trainable tensor. */

import * as fs from 'fs';
import * as path from 'path';
import * as tf from '@tensorflow/tfjs';

import { tokenIds } from './tokenizer';

export interface EncoderConfig {
  dim: number;
  vocabSize: number;
  seed: number;
}

export const DEFAULT_CONFIG: EncoderConfig = { dim: 64, vocabSize: 4096, seed: 0 };

const MODEL_FILE = 'model.json';
const MODEL_FORMAT = 'senclu-encoder';

/** Deterministic 32-bit PRNG so encoder init is reproducible across runs. */
export function mulberry32(seed: number): () => number {
  let state = seed | 0;
  return () => {
    state = (state + 0x6d2b79f5) | 0;
    let t = Math.imul(state ^ (state >>> 15), 1 | state);
    t = (t + Math.imul(t ^ (t >>> 7), 61 | t)) ^ t;
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  };
}

export class Encoder {
  readonly config: EncoderConfig;
  readonly table: tf.Variable<tf.Rank.R2>;

  private constructor(config: EncoderConfig, weights: Float32Array) {
    this.config = config;
    this.table = tf.variable(
      tf.tensor2d(weights, [config.vocabSize, config.dim]),
      true,
    ) as tf.Variable<tf.Rank.R2>;
  }

  static init(config: EncoderConfig = DEFAULT_CONFIG): Encoder {
    const rand = mulberry32(config.seed);
    const scale = 1 / Math.sqrt(config.dim);
    const weights = new Float32Array(config.vocabSize * config.dim);
    for (let i = 0; i < weights.length; i++) {
      weights[i] = (rand() * 2 - 1) * scale;
    }
    return new Encoder(config, weights);
  }

  static load(dir: string): Encoder {
    const file = path.join(dir, MODEL_FILE);
    const parsed = JSON.parse(fs.readFileSync(file, 'utf-8'));
    if (parsed.format !== MODEL_FORMAT) {
      throw new Error(`${file}: not a ${MODEL_FORMAT} model`);
    }
    const config: EncoderConfig = {
      dim: parsed.dim,
      vocabSize: parsed.vocabSize,
      seed: parsed.seed,
    };
    const raw = Buffer.from(parsed.weights, 'base64');
    const weights = new Float32Array(raw.buffer, raw.byteOffset, raw.byteLength / 4);
    if (weights.length !== config.vocabSize * config.dim) {
      throw new Error(`${file}: weight payload does not match vocabSize*dim`);
    }
    return new Encoder(config, weights.slice());
  }

  save(dir: string, extra: Record<string, unknown> = {}): void {
    fs.mkdirSync(dir, { recursive: true });
    const weights = this.table.dataSync() as Float32Array;
    const payload = {
      format: MODEL_FORMAT,
      dim: this.config.dim,
      vocabSize: this.config.vocabSize,
      seed: this.config.seed,
      weights: Buffer.from(weights.buffer, weights.byteOffset, weights.byteLength).toString(
        'base64',
      ),
      ...extra,
    };
    fs.writeFileSync(path.join(dir, MODEL_FILE), JSON.stringify(payload) + '\n');
  }

  /** Differentiable text embedding: mean of token rows, unit length. */
  embedTensor(text: string): tf.Tensor1D {
    const ids = tokenIds(text, this.config.vocabSize);
    const gathered = tf.gather(this.table, tf.tensor1d(ids, 'int32'));
    const mean = tf.mean(gathered, 0) as tf.Tensor1D;
    const norm = tf.norm(mean);
    return tf.div(mean, tf.add(norm, 1e-9)) as tf.Tensor1D;
  }

  /** Inference-only embedding as plain floats. */
  embedText(text: string): Float32Array {
    return tf.tidy(() => this.embedTensor(text)).dataSync() as Float32Array;
  }

  dispose(): void {
    this.table.dispose();
  }
}

export function tripletLossValue(dAP: number, dAN: number, margin: number): number {
  return Math.max(dAP - dAN + margin, 0);
}
