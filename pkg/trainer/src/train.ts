/** Fine-tuning loop: margin-based triplet loss over anchor/positive/negative
 * group texts. Texts are tokenized once into padded id/mask matrices and
 * trained in minibatches (pure-JS tensor ops are far too slow per-triplet). */

import * as tf from '@tensorflow/tfjs';

import { Encoder } from './encoder';
import { tokenIds } from './tokenizer';
import { TripletTexts } from './triplets';

export interface TrainOptions {
  margin: number;
  epochs: number;
  learningRate: number;
  batchSize?: number;
}

export interface EpochStats {
  epoch: number;
  meanLoss: number;
}

interface PaddedBatch {
  bags: tf.Tensor2D; // (n, vocabSize): count(token)/len per row
}

function padTexts(texts: string[], vocabSize: number): PaddedBatch {
  const n = texts.length;
  const bags = new Float32Array(n * vocabSize);
  texts.forEach((text, row) => {
    const ids = tokenIds(text, vocabSize);
    const weight = 1 / ids.length;
    for (const id of ids) {
      bags[row * vocabSize + id] += weight;
    }
  });
  return { bags: tf.tensor2d(bags, [n, vocabSize]) };
}

/** Unit-length mean-pooled embeddings for one padded batch: (n, dim).
 *
 * The lookup runs as bag-of-buckets x table matmul rather than tf.gather:
 * the CPU backend's gather gradient (segment sum) is orders of magnitude
 * slower than the equivalent matmul backward. The bag matrix already folds
 * in the mask and the 1/length factor, so each row is the token mean. */
function embedBatch(table: tf.Variable<tf.Rank.R2>, batch: PaddedBatch): tf.Tensor2D {
  const means = tf.matMul(batch.bags, table); // (n, dim)
  const norms = tf.norm(means, 'euclidean', 1, true);
  return tf.div(means, tf.add(norms, 1e-9)) as tf.Tensor2D;
}

function rowDistances(a: tf.Tensor2D, b: tf.Tensor2D): tf.Tensor1D {
  return tf.sqrt(tf.sum(tf.square(tf.sub(a, b)), 1)) as tf.Tensor1D;
}

export function trainEncoder(
  encoder: Encoder,
  triplets: TripletTexts[],
  options: TrainOptions,
  log: (line: string) => void = () => {},
): EpochStats[] {
  const { margin, epochs, learningRate } = options;
  const batchSize = options.batchSize ?? 32;
  if (margin <= 0) throw new Error(`margin must be > 0, got ${margin}`);
  if (epochs < 1) throw new Error(`epochs must be >= 1, got ${epochs}`);
  if (batchSize < 1) throw new Error(`batch size must be >= 1, got ${batchSize}`);

  const vocab = encoder.config.vocabSize;
  const batches: { anchor: PaddedBatch; positive: PaddedBatch; negative: PaddedBatch; n: number }[] = [];
  for (let start = 0; start < triplets.length; start += batchSize) {
    const slice = triplets.slice(start, start + batchSize);
    batches.push({
      anchor: padTexts(slice.map((t) => t.anchor), vocab),
      positive: padTexts(slice.map((t) => t.positive), vocab),
      negative: padTexts(slice.map((t) => t.negative), vocab),
      n: slice.length,
    });
  }

  const optimizer = tf.train.adam(learningRate);
  const stats: EpochStats[] = [];
  for (let epoch = 1; epoch <= epochs; epoch++) {
    let total = 0;
    for (const batch of batches) {
      const cost = optimizer.minimize(
        () => {
          const a = embedBatch(encoder.table, batch.anchor);
          const p = embedBatch(encoder.table, batch.positive);
          const n = embedBatch(encoder.table, batch.negative);
          const violations = tf.relu(tf.add(tf.sub(rowDistances(a, p), rowDistances(a, n)), margin));
          return tf.mean(violations) as tf.Scalar;
        },
        true,
        [encoder.table],
      );
      total += cost!.dataSync()[0] * batch.n;
      cost!.dispose();
    }
    const meanLoss = total / triplets.length;
    stats.push({ epoch, meanLoss });
    log(`epoch ${epoch}/${epochs}: mean loss ${meanLoss.toFixed(6)}`);
  }
  optimizer.dispose();
  for (const batch of batches) {
    batch.anchor.bags.dispose();
    batch.positive.bags.dispose();
    batch.negative.bags.dispose();
  }
  return stats;
}

/** Fraction of triplets whose positive sits strictly closer than the negative. */
export function marginSatisfaction(encoder: Encoder, triplets: TripletTexts[]): number {
  if (triplets.length === 0) return 0;
  let satisfied = 0;
  for (const triplet of triplets) {
    const a = encoder.embedText(triplet.anchor);
    const p = encoder.embedText(triplet.positive);
    const n = encoder.embedText(triplet.negative);
    if (euclidean(a, p) < euclidean(a, n)) satisfied++;
  }
  return satisfied / triplets.length;
}

export function euclidean(a: Float32Array, b: Float32Array): number {
  let sum = 0;
  for (let i = 0; i < a.length; i++) {
    const diff = a[i] - b[i];
    sum += diff * diff;
  }
  return Math.sqrt(sum);
}
