/**
 * Stable community colors.
 *
 * Every panel (3D view, community graph, matrix header) calls the same
 * hash, so a community keeps one color no matter where it appears or in
 * which order the server listed it.  The hash keys on the community node
 * id alone; refinement commands that leave a node untouched leave its
 * color untouched too.
 */

export interface Rgb {
  r: number;
  g: number;
  b: number;
}

/** 32-bit FNV-1a over the decimal digits of the id. */
export function stableHash(id: number): number {
  const text = `community:${id}`;
  let h = 0x811c9dc5;
  for (let i = 0; i < text.length; i++) {
    h ^= text.charCodeAt(i);
    h = Math.imul(h, 0x01000193) >>> 0;
  }
  return h >>> 0;
}

function hslToRgb(h: number, s: number, l: number): Rgb {
  const c = (1 - Math.abs(2 * l - 1)) * s;
  const x = c * (1 - Math.abs(((h / 60) % 2) - 1));
  const m = l - c / 2;
  let rp = 0;
  let gp = 0;
  let bp = 0;
  if (h < 60) [rp, gp, bp] = [c, x, 0];
  else if (h < 120) [rp, gp, bp] = [x, c, 0];
  else if (h < 180) [rp, gp, bp] = [0, c, x];
  else if (h < 240) [rp, gp, bp] = [0, x, c];
  else if (h < 300) [rp, gp, bp] = [x, 0, c];
  else [rp, gp, bp] = [c, 0, x];
  return {
    r: Math.round((rp + m) * 255),
    g: Math.round((gp + m) * 255),
    b: Math.round((bp + m) * 255),
  };
}

/**
 * Deterministic color for a community node id.  Hue comes from the hash;
 * saturation and lightness cycle through a few readable steps so nearby
 * hues still separate visually.
 */
export function communityColor(id: number): Rgb {
  const h = stableHash(id);
  const hue = h % 360;
  const sat = 0.55 + 0.15 * ((h >>> 9) % 3);
  const light = 0.4 + 0.1 * ((h >>> 13) % 3);
  return hslToRgb(hue, sat, light);
}

export function cssColor(id: number, alpha = 1): string {
  const { r, g, b } = communityColor(id);
  return alpha >= 1 ? `rgb(${r},${g},${b})` : `rgba(${r},${g},${b},${alpha})`;
}
