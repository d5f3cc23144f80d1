/** Render one coordinate at 9 significant digits.
 *
 * The shortest decimal string for the rounded value keeps files small
 * and is stable across runs (pure function of the input). The reader
 * contract only requires parseable decimals, so "0.5" is preferred
 * over "0.500000000".
 */
export function formatValue(value: number): string {
  if (!Number.isFinite(value)) {
    throw new RangeError(`cannot serialize non-finite value ${value}`);
  }
  const rounded = Number(value.toPrecision(9));
  return Object.is(rounded, -0) ? "0" : String(rounded);
}

/** One embedding row: "id<TAB>v1 v2 ... vd". */
export function formatRow(id: string, vector: Float64Array): string {
  if (id.includes("\t") || id.includes("\n")) {
    throw new RangeError(`id ${JSON.stringify(id)} contains a tab or newline`);
  }
  const values = new Array<string>(vector.length);
  for (let i = 0; i < vector.length; i++) values[i] = formatValue(vector[i]!);
  return `${id}\t${values.join(" ")}`;
}

/** Whole-file render: "#dim=<d>" header, then one row per id. */
export function formatTable(dim: number, rows: Array<[string, Float64Array]>): string {
  const lines = [`#dim=${dim}`];
  for (const [id, vector] of rows) {
    if (vector.length !== dim) {
      throw new RangeError(
        `vector for ${JSON.stringify(id)} has ${vector.length} entries, expected ${dim}`,
      );
    }
    lines.push(formatRow(id, vector));
  }
  return lines.join("\n") + "\n";
}
