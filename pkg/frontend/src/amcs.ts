/**
 * Client-side model of the adjacency matrix view.
 *
 * The service ships the matrix as a sparse entry list plus streamline
 * group boundaries, and optionally a pre-rendered PPM image.  This module
 * turns that payload into pixel-space draw data and maps hover positions
 * back to (segment i, segment j) ids.  kNN matrices are drawn as-is with
 * no symmetry assumption; the symmetric flag only affects labelling.
 */

import type { AmcsPayload } from "./api.js";

export interface DecodedImage {
  width: number;
  height: number;
  /** Interleaved RGB, 3 bytes per pixel. */
  pixels: Uint8Array;
}

/** Decode a binary P6 PPM (maxval 255) as produced by the matrix endpoint. */
export function decodePpm(bytes: Uint8Array): DecodedImage {
  let pos = 0;
  const token = (): string => {
    while (pos < bytes.length && /\s/.test(String.fromCharCode(bytes[pos]))) pos++;
    if (pos < bytes.length && bytes[pos] === 0x23) {
      // comment line
      while (pos < bytes.length && bytes[pos] !== 0x0a) pos++;
      return token();
    }
    const start = pos;
    while (pos < bytes.length && !/\s/.test(String.fromCharCode(bytes[pos]))) pos++;
    return String.fromCharCode(...bytes.subarray(start, pos));
  };
  const magic = token();
  if (magic !== "P6") throw new Error(`not a P6 PPM (magic ${JSON.stringify(magic)})`);
  const width = parseInt(token(), 10);
  const height = parseInt(token(), 10);
  const maxval = parseInt(token(), 10);
  if (!(width > 0 && height > 0)) throw new Error("bad PPM dimensions");
  if (maxval !== 255) throw new Error(`unsupported PPM maxval ${maxval}`);
  pos++; // single whitespace byte after the header
  const expected = width * height * 3;
  const pixels = bytes.subarray(pos, pos + expected);
  if (pixels.length !== expected) throw new Error("truncated PPM payload");
  return { width, height, pixels: new Uint8Array(pixels) };
}

export function decodeBase64(text: string): Uint8Array {
  if (typeof atob === "function") {
    const bin = atob(text);
    const out = new Uint8Array(bin.length);
    for (let i = 0; i < bin.length; i++) out[i] = bin.charCodeAt(i);
    return out;
  }
  return new Uint8Array(Buffer.from(text, "base64"));
}

export interface MatrixCell {
  row: number;
  col: number;
  /** Original dataset segment ids for the hover readout. */
  segmentI: number;
  segmentJ: number;
}

export class AmcsModel {
  readonly n: number;
  readonly symmetric: boolean;
  readonly ordering: number[];
  readonly entries: [number, number][];
  readonly groupBounds: number[];

  constructor(payload: AmcsPayload) {
    this.n = payload.n;
    this.symmetric = payload.symmetric;
    this.ordering = payload.ordering;
    this.entries = payload.entries;
    this.groupBounds = payload.group_bounds;
  }

  /** Filled cells with matrix position and the segment ids behind them. */
  cells(): MatrixCell[] {
    return this.entries.map(([row, col]) => ({
      row,
      col,
      segmentI: this.ordering[row],
      segmentJ: this.ordering[col],
    }));
  }

  /**
   * Map a pixel hover position to the cell underneath it, or null when
   * the cursor is outside the matrix.  `cellSize` is pixels per matrix
   * row at the current zoom, so zooming rescales both cells and the
   * separator lines by the same factor and they stay aligned.
   */
  cellAt(px: number, py: number, cellSize: number): MatrixCell | null {
    const row = Math.floor(py / cellSize);
    const col = Math.floor(px / cellSize);
    if (row < 0 || col < 0 || row >= this.n || col >= this.n) return null;
    return { row, col, segmentI: this.ordering[row], segmentJ: this.ordering[col] };
  }

  /** Pixel offsets of the streamline separators at the given zoom. */
  separatorPositions(cellSize: number): number[] {
    return this.groupBounds.map((b) => b * cellSize);
  }

  /** True when the sparse entry set is symmetric under transposition. */
  isMirrorEqual(): boolean {
    const seen = new Set(this.entries.map(([r, c]) => `${r},${c}`));
    return this.entries.every(([r, c]) => seen.has(`${c},${r}`));
  }
}
