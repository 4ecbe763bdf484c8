/**
 * Parameter panels: form models plus client-side validation mirroring
 * the server preconditions, so obviously bad configs never hit the API.
 */

import type { DetectionParams, NeighborParams } from "./api.js";

export const MEASURES = ["shortest", "average", "longest"] as const;

/** Opacity filter presets for dimming non-selected communities. */
export const OPACITY_TEMPLATES = ["large_isolated", "large_dispersed", "small_connected"] as const;

export const MATRIX_PALETTES = ["gray", "heat"] as const;

export interface RenderingParams {
  template: (typeof OPACITY_TEMPLATES)[number] | null;
  dimOpacity: number;
}

export interface MatrixParams {
  palette: string;
  maxPixels: number;
}

export interface ValidationResult {
  ok: boolean;
  errors: string[];
}

function result(errors: string[]): ValidationResult {
  return { ok: errors.length === 0, errors };
}

export function defaultNeighborParams(): Required<NeighborParams> {
  return { strategy: "knn", k: 10, radius: null, measure: "longest" };
}

export function defaultDetectionParams(): Required<DetectionParams> {
  return { resolution: 1.0, seed: 0 };
}

export function defaultRenderingParams(): RenderingParams {
  return { template: null, dimOpacity: 0.15 };
}

export function defaultMatrixParams(): MatrixParams {
  return { palette: "gray", maxPixels: 512 };
}

export function validateNeighborParams(p: NeighborParams): ValidationResult {
  const errors: string[] = [];
  if (p.strategy !== "knn" && p.strategy !== "rbn") {
    errors.push(`strategy must be knn or rbn, got ${JSON.stringify(p.strategy)}`);
  }
  if (p.strategy === "knn") {
    const k = p.k ?? 0;
    if (!Number.isInteger(k) || k < 1) {
      errors.push("k must be an integer >= 1");
    }
  }
  if (p.strategy === "rbn" && p.radius != null) {
    if (!Number.isFinite(p.radius) || p.radius <= 0) {
      errors.push("radius must be positive (leave empty for the dataset default)");
    }
  }
  if (p.measure !== undefined && !MEASURES.includes(p.measure)) {
    errors.push(`measure must be one of ${MEASURES.join(", ")}`);
  }
  return result(errors);
}

export function validateDetectionParams(p: DetectionParams): ValidationResult {
  const errors: string[] = [];
  if (p.resolution !== undefined && (!Number.isFinite(p.resolution) || p.resolution <= 0)) {
    errors.push("resolution must be a positive finite number");
  }
  if (p.seed !== undefined && !Number.isInteger(p.seed)) {
    errors.push("seed must be an integer");
  }
  return result(errors);
}

export function validateMatrixParams(p: MatrixParams): ValidationResult {
  const errors: string[] = [];
  if (!Number.isInteger(p.maxPixels) || p.maxPixels < 16 || p.maxPixels > 4096) {
    errors.push("max_pixels must be an integer in [16, 4096]");
  }
  if (!MATRIX_PALETTES.includes(p.palette as (typeof MATRIX_PALETTES)[number])) {
    errors.push(`palette must be one of ${MATRIX_PALETTES.join(", ")}`);
  }
  return result(errors);
}

export function validateRenderingParams(p: RenderingParams): ValidationResult {
  const errors: string[] = [];
  if (p.template !== null && !OPACITY_TEMPLATES.includes(p.template)) {
    errors.push(`template must be one of ${OPACITY_TEMPLATES.join(", ")}`);
  }
  if (!(p.dimOpacity >= 0 && p.dimOpacity <= 1)) {
    errors.push("dim opacity must lie in [0, 1]");
  }
  return result(errors);
}

/**
 * Suggested kNN neighbor count for a dataset: roughly 0.01% to 0.05% of
 * the segment count works well in practice, clamped to at least 2.
 */
export function kHint(nSegments: number): { low: number; high: number; text: string } {
  const low = Math.max(2, Math.round(nSegments * 0.0001));
  const high = Math.max(low, Math.round(nSegments * 0.0005));
  return {
    low,
    high,
    text: `suggested k for ${nSegments} segments: ${low} to ${high} (0.01% to 0.05%)`,
  };
}
