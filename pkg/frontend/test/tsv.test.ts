import { describe, expect, it } from "vitest";
import { parseDataset, parsePairs, formatPredictions } from "../src/tsv.js";

describe("dataset TSV", () => {
  it("parses rows and normalizes label case", () => {
    const rows = parseDataset("sentence_id\tsentence\tlabel\nd1\thello there\tsubj\nd2\tfacts only\tOBJ\n");
    expect(rows).toEqual([
      { id: "d1", text: "hello there", label: "SUBJ" },
      { id: "d2", text: "facts only", label: "OBJ" },
    ]);
  });

  it("rejects bad header, bad label, and duplicate ids with line numbers", () => {
    expect(() => parseDataset("id\ttext\tlabel\n")).toThrow(/header/);
    expect(() => parseDataset("sentence_id\tsentence\tlabel\nd1\tx\tmaybe\n")).toThrow(/line 2/);
    expect(() =>
      parseDataset("sentence_id\tsentence\tlabel\nd1\tx\tSUBJ\nd1\ty\tOBJ\n"),
    ).toThrow(/line 3.*duplicate/);
  });
});

describe("pairs TSV", () => {
  it("parses numeric targets", () => {
    const pairs = parsePairs("id_a\tid_b\ttarget\na\tb\t0.750000\nb\ta\t-0.250000\n");
    expect(pairs).toEqual([
      { idA: "a", idB: "b", target: 0.75 },
      { idA: "b", idB: "a", target: -0.25 },
    ]);
  });

  it("rejects non-numeric targets", () => {
    expect(() => parsePairs("id_a\tid_b\ttarget\na\tb\thigh\n")).toThrow(/line 2/);
  });
});

describe("predictions TSV", () => {
  it("formats with six decimal places and a trailing newline", () => {
    const out = formatPredictions([
      { id: "s1", label: "SUBJ", prob: 0.9 },
      { id: "s2", label: "OBJ", prob: 0.125 },
    ]);
    expect(out).toBe("sentence_id\tlabel\tprob\ns1\tSUBJ\t0.900000\ns2\tOBJ\t0.125000\n");
  });

  it("rejects out-of-range probabilities", () => {
    expect(() => formatPredictions([{ id: "s1", label: "SUBJ", prob: 1.5 }])).toThrow(/range/);
  });
});
