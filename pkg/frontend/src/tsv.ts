// Text formats shared with the pipeline: dataset TSV, pairs TSV,
// predictions TSV. No quoting; tabs and newlines are forbidden inside
// fields.

export interface DatasetRow {
  id: string;
  text: string;
  label: "SUBJ" | "OBJ";
}

export interface PairRow {
  idA: string;
  idB: string;
  target: number;
}

export function parseDataset(raw: string): DatasetRow[] {
  const lines = raw.split(/\r?\n/).filter((l) => l.length > 0);
  if (lines[0] !== "sentence_id\tsentence\tlabel") {
    throw new Error(`bad dataset header: ${lines[0]}`);
  }
  const seen = new Set<string>();
  return lines.slice(1).map((line, i) => {
    const fields = line.split("\t");
    if (fields.length !== 3) throw new Error(`line ${i + 2}: expected 3 fields`);
    const [id, text, rawLabel] = fields;
    const label = rawLabel.trim().toUpperCase();
    if (label !== "SUBJ" && label !== "OBJ") throw new Error(`line ${i + 2}: bad label ${rawLabel}`);
    if (seen.has(id)) throw new Error(`line ${i + 2}: duplicate id ${id}`);
    seen.add(id);
    return { id, text, label };
  });
}

export function parsePairs(raw: string): PairRow[] {
  const lines = raw.split(/\r?\n/).filter((l) => l.length > 0);
  if (lines[0] !== "id_a\tid_b\ttarget") {
    throw new Error(`bad pairs header: ${lines[0]}`);
  }
  return lines.slice(1).map((line, i) => {
    const fields = line.split("\t");
    if (fields.length !== 3) throw new Error(`line ${i + 2}: expected 3 fields`);
    const target = Number(fields[2]);
    if (!Number.isFinite(target)) throw new Error(`line ${i + 2}: bad target ${fields[2]}`);
    return { idA: fields[0], idB: fields[1], target };
  });
}

export function formatPredictions(
  rows: { id: string; label: "SUBJ" | "OBJ"; prob: number }[],
): string {
  const lines = ["sentence_id\tlabel\tprob"];
  for (const row of rows) {
    if (row.prob < 0 || row.prob > 1) throw new Error(`prob out of range for ${row.id}`);
    lines.push(`${row.id}\t${row.label}\t${row.prob.toFixed(6)}`);
  }
  return lines.join("\n") + "\n";
}
