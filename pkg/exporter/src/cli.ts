#!/usr/bin/env node
import { SetupError } from "./checkpoint";
import { runExport } from "./export";
import { InputError } from "./sentences";

const USAGE = `usage: embed-export --input sentences.tsv --checkpoint vectors.json --output embeddings.tsv
                    [--batch-size N] [--normalize]

Reads "id<TAB>text" lines, encodes each text with the mean-pooled
word-vector checkpoint, and writes the "#dim=<d>" embedding TSV.`;

interface Args {
  input?: string;
  checkpoint?: string;
  output?: string;
  batchSize: number;
  normalize: boolean;
}

function parseArgs(argv: string[]): Args {
  const args: Args = { batchSize: 64, normalize: false };
  for (let i = 0; i < argv.length; i++) {
    const flag = argv[i]!;
    const next = () => {
      const value = argv[++i];
      if (value === undefined) throw new Error(`${flag} needs a value`);
      return value;
    };
    switch (flag) {
      case "--input":
        args.input = next();
        break;
      case "--checkpoint":
        args.checkpoint = next();
        break;
      case "--output":
        args.output = next();
        break;
      case "--batch-size":
        args.batchSize = Number(next());
        break;
      case "--normalize":
        args.normalize = true;
        break;
      case "--help":
      case "-h":
        console.log(USAGE);
        process.exit(0);
        break;
      default:
        throw new Error(`unknown flag ${flag}`);
    }
  }
  if (!args.input || !args.checkpoint || !args.output) {
    throw new Error("--input, --checkpoint, and --output are required");
  }
  return args;
}

function main(): number {
  let args: Args;
  try {
    args = parseArgs(process.argv.slice(2));
  } catch (err) {
    console.error(`error: ${(err as Error).message}`);
    console.error(USAGE);
    return 2;
  }
  try {
    const result = runExport({
      input: args.input!,
      checkpoint: args.checkpoint!,
      output: args.output!,
      batchSize: args.batchSize,
      normalize: args.normalize,
    });
    console.error(`wrote ${result.rows} rows (dim ${result.dim}) to ${result.output}`);
    return 0;
  } catch (err) {
    if (err instanceof SetupError || err instanceof InputError || err instanceof RangeError) {
      console.error(`error: ${err.message}`);
      return 1;
    }
    throw err;
  }
}

process.exit(main());
