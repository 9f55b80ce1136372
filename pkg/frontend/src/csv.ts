/**
 * Snapshot CSV loading with schema validation and the abs cross-check.
 *
 * Snapshot schema (frozen by the solver): header `x,re_u,im_u,abs_u`,
 * one row per grid point, plain decimal floats, no quoting.
 */

import { readFileSync } from "node:fs";
import Papa from "papaparse";

export interface Snapshot {
  x: number[];
  re: number[];
  im: number[];
  abs: number[];
}

export class SchemaError extends Error {}

const REQUIRED = ["x", "re_u", "im_u", "abs_u"] as const;
const ABS_TOLERANCE = 1e-9;

export function parseSnapshot(text: string, label = "<snapshot>"): Snapshot {
  if (text.trim().length === 0) {
    throw new SchemaError(`${label}: empty file`);
  }
  const parsed = Papa.parse<Record<string, string>>(text.trim(), {
    header: true,
    skipEmptyLines: true,
  });
  if (parsed.errors.length > 0) {
    const e = parsed.errors[0];
    throw new SchemaError(`${label}: parse error at row ${e.row}: ${e.message}`);
  }
  const fields = parsed.meta.fields ?? [];
  for (const col of REQUIRED) {
    if (!fields.includes(col)) {
      throw new SchemaError(`${label}: missing column '${col}'`);
    }
  }
  if (fields.length !== REQUIRED.length) {
    const extra = fields.filter((f) => !(REQUIRED as readonly string[]).includes(f));
    throw new SchemaError(`${label}: unexpected columns ${JSON.stringify(extra)}`);
  }

  const n = parsed.data.length;
  if (n === 0) {
    throw new SchemaError(`${label}: no data rows`);
  }
  const out: Snapshot = { x: [], re: [], im: [], abs: [] };
  for (let i = 0; i < n; i++) {
    const row = parsed.data[i];
    const x = Number(row.x);
    const re = Number(row.re_u);
    const im = Number(row.im_u);
    const abs = Number(row.abs_u);
    if (![x, re, im, abs].every(Number.isFinite)) {
      throw new SchemaError(`${label}: non-numeric entry at row ${i}`);
    }
    const expected = Math.hypot(re, im);
    const scale = Math.max(1.0, expected);
    if (Math.abs(abs - expected) > ABS_TOLERANCE * scale) {
      throw new SchemaError(
        `${label}: abs_u inconsistent with sqrt(re^2+im^2) at row ${i}: ` +
          `${abs} vs ${expected}`,
      );
    }
    out.x.push(x);
    out.re.push(re);
    out.im.push(im);
    out.abs.push(abs);
  }
  return out;
}

export function loadSnapshot(path: string): Snapshot {
  return parseSnapshot(readFileSync(path, "utf8"), path);
}
