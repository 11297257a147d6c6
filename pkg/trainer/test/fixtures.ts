/** Synthetic separable triplets: two disjoint topic vocabularies, anchors and
 * positives share one, negatives come from the other. */

import { mulberry32 } from '../src/encoder';
import { TripletTexts } from '../src/triplets';

// Vocabularies wide enough that anchor/positive pairs rarely share tokens:
// a random-init encoder scores noticeably below the trained one.
const VOCAB_A = Array.from({ length: 40 }, (_, i) => `aurora${i}`);
const VOCAB_B = Array.from({ length: 40 }, (_, i) => `basalt${i}`);

function sentence(vocab: string[], rand: () => number, words = 5): string {
  const picked = [];
  for (let i = 0; i < words; i++) {
    picked.push(vocab[Math.floor(rand() * vocab.length)]);
  }
  return picked.join(' ') + '.';
}

export function separableTriplets(count: number, seed: number): TripletTexts[] {
  const rand = mulberry32(seed);
  const triplets: TripletTexts[] = [];
  for (let i = 0; i < count; i++) {
    const own = i % 2 === 0 ? VOCAB_A : VOCAB_B;
    const other = i % 2 === 0 ? VOCAB_B : VOCAB_A;
    triplets.push({
      anchor: sentence(own, rand),
      positive: sentence(own, rand),
      negative: sentence(other, rand),
    });
  }
  return triplets;
}

export function tripletFileLines(triplets: TripletTexts[]): string {
  return (
    triplets
      .map((t, i) =>
        JSON.stringify({
          anchor: { doc: `d${i}`, group: 0, text: t.anchor },
          positive: { doc: `d${i}`, group: 1, text: t.positive },
          negative: { doc: `other${i}`, group: 0, text: t.negative },
        }),
      )
      .join('\n') + '\n'
  );
}
