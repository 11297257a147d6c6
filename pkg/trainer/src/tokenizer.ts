/** Lowercased alphanumeric-run tokens, hashed into a fixed bucket space. */

const TOKEN_RE = /[\p{L}\p{N}]+/gu;

export function tokenize(text: string): string[] {
  return text.toLowerCase().match(TOKEN_RE) ?? [];
}

/** FNV-1a 32-bit hash. */
export function fnv1a(token: string): number {
  let hash = 0x811c9dc5;
  for (let i = 0; i < token.length; i++) {
    hash ^= token.charCodeAt(i);
    hash = Math.imul(hash, 0x01000193) >>> 0;
  }
  return hash >>> 0;
}

/** Bucket ids for a text; empty texts map to the reserved bucket 0. */
export function tokenIds(text: string, vocabSize: number): number[] {
  const tokens = tokenize(text);
  if (tokens.length === 0) {
    return [0];
  }
  return tokens.map((t) => fnv1a(t) % vocabSize);
}
