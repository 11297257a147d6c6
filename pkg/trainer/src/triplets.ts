/** Triplet dataset file: one JSON object per line, anchor/positive/negative
 * each holding {doc, group, text}. A `<path>.config.json` sidecar carries the
 * margin and epoch count chosen at dataset-construction time. */

import * as fs from 'fs';

export interface TripletTexts {
  anchor: string;
  positive: string;
  negative: string;
}

export function readTripletFile(path: string): TripletTexts[] {
  const raw = fs.readFileSync(path, 'utf-8');
  const triplets: TripletTexts[] = [];
  const lines = raw.split('\n');
  for (let i = 0; i < lines.length; i++) {
    const line = lines[i];
    if (!line.trim()) continue;
    let record: any;
    try {
      record = JSON.parse(line);
    } catch {
      throw new Error(`${path}: line ${i + 1}: invalid JSON`);
    }
    for (const role of ['anchor', 'positive', 'negative'] as const) {
      if (typeof record?.[role]?.text !== 'string') {
        throw new Error(`${path}: line ${i + 1}: missing ${role} text`);
      }
    }
    triplets.push({
      anchor: record.anchor.text,
      positive: record.positive.text,
      negative: record.negative.text,
    });
  }
  if (triplets.length === 0) {
    throw new Error(`${path}: triplet file is empty`);
  }
  return triplets;
}

export interface SidecarConfig {
  margin?: number;
  epochs?: number;
}

export function readSidecar(tripletPath: string): SidecarConfig {
  const sidecar = `${tripletPath}.config.json`;
  if (!fs.existsSync(sidecar)) {
    return {};
  }
  const parsed = JSON.parse(fs.readFileSync(sidecar, 'utf-8'));
  const out: SidecarConfig = {};
  if (typeof parsed.margin === 'number') out.margin = parsed.margin;
  if (typeof parsed.epochs === 'number') out.epochs = parsed.epochs;
  return out;
}
