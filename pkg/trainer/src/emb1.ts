/** EMB1 binary format: "BOSEMB1\0", u32 rows, u32 dim (little-endian), then
 * row-major float32 data. A `<path>.idx.jsonl` sidecar maps rows to groups. */

import * as fs from 'fs';

export const MAGIC = Buffer.from('BOSEMB1\0', 'latin1');
const HEADER_SIZE = MAGIC.length + 8;

export interface RowIndexEntry {
  row: number;
  doc: string;
  group: number;
}

export function writeEmb1(path: string, rows: Float32Array[], dim: number): void {
  const header = Buffer.alloc(HEADER_SIZE);
  MAGIC.copy(header, 0);
  header.writeUInt32LE(rows.length, MAGIC.length);
  header.writeUInt32LE(dim, MAGIC.length + 4);
  const chunks = [header];
  for (const row of rows) {
    if (row.length !== dim) {
      throw new Error(`row has ${row.length} values, expected ${dim}`);
    }
    const buf = Buffer.alloc(dim * 4);
    for (let i = 0; i < dim; i++) {
      buf.writeFloatLE(row[i], i * 4);
    }
    chunks.push(buf);
  }
  fs.writeFileSync(path, Buffer.concat(chunks));
}

export function readEmb1(path: string): { count: number; dim: number; data: Float32Array } {
  const raw = fs.readFileSync(path);
  if (raw.length < HEADER_SIZE || !raw.subarray(0, MAGIC.length).equals(MAGIC)) {
    throw new Error(`${path}: not an EMB1 file`);
  }
  const count = raw.readUInt32LE(MAGIC.length);
  const dim = raw.readUInt32LE(MAGIC.length + 4);
  const expected = HEADER_SIZE + count * dim * 4;
  if (raw.length !== expected) {
    throw new Error(`${path}: expected ${expected} bytes, file ends at byte ${raw.length}`);
  }
  const data = new Float32Array(count * dim);
  for (let i = 0; i < data.length; i++) {
    data[i] = raw.readFloatLE(HEADER_SIZE + i * 4);
  }
  return { count, dim, data };
}

export function writeIndexSidecar(path: string, entries: RowIndexEntry[]): void {
  const lines = entries.map((e) => JSON.stringify(e));
  fs.writeFileSync(`${path}.idx.jsonl`, lines.length ? lines.join('\n') + '\n' : '');
}
