import * as fs from "fs";

export interface Sentence {
  id: string;
  text: string;
}

/** Raised for malformed input rows; always carries the 1-based line. */
export class InputError extends Error {
  override name = "InputError";
  constructor(
    message: string,
    readonly line: number,
  ) {
    super(`line ${line}: ${message}`);
  }
}

/** Parse "id<TAB>text" lines. Blank lines are allowed and skipped;
 * everything else must have a tab, a non-empty id, and a fresh id. */
export function readSentences(path: string): Sentence[] {
  const content = fs.readFileSync(path, "utf-8");
  const out: Sentence[] = [];
  const seen = new Set<string>();
  const lines = content.split("\n");
  for (let i = 0; i < lines.length; i++) {
    const line = lines[i]!.replace(/\r$/, "");
    if (line.trim() === "") continue;
    const tab = line.indexOf("\t");
    if (tab < 0) {
      throw new InputError("expected id<TAB>text", i + 1);
    }
    const id = line.slice(0, tab);
    if (id.trim() === "") {
      throw new InputError("empty id", i + 1);
    }
    if (seen.has(id)) {
      throw new InputError(`duplicate id ${JSON.stringify(id)}`, i + 1);
    }
    seen.add(id);
    out.push({ id, text: line.slice(tab + 1) });
  }
  return out;
}
