/** Display formatting; the only "math" the UI performs on API values. */

export function fmt(value: number, digits = 5): string {
  if (!Number.isFinite(value)) {
    return String(value);
  }
  const out = value.toPrecision(digits);
  return out.includes(".") ? out.replace(/\.?0+$/, "") : out;
}

export function fmtVector(values: number[], digits = 4): string {
  return `(${values.map((v) => fmt(v, digits)).join(", ")})`;
}
