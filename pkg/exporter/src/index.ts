export { Checkpoint, SetupError, loadCheckpoint } from "./checkpoint";
export { MeanPoolEncoder, tokenize } from "./encoder";
export { ExportJob, ExportResult, runExport } from "./export";
export { InputError, Sentence, readSentences } from "./sentences";
export { formatRow, formatTable, formatValue } from "./tsv";
