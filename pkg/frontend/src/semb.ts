// SEMB1 binary container: magic "SEMB", version 0x01, u32 LE count,
// u32 LE dim, then per-row u16 LE id byte-length + UTF-8 id bytes,
// then n*d float32 LE values row-major. Must stay bit-compatible with
// the pipeline's reader.

export interface EmbeddingMatrix {
  ids: string[];
  dim: number;
  rows: Float32Array; // length ids.length * dim, row-major
}

const MAGIC = Buffer.from("SEMB");
const VERSION = 1;

export function writeSemb(m: EmbeddingMatrix): Buffer {
  const n = m.ids.length;
  if (m.rows.length !== n * m.dim) {
    throw new Error(`rows length ${m.rows.length} != ${n} * ${m.dim}`);
  }
  const idBuffers = m.ids.map((id) => {
    const encoded = Buffer.from(id, "utf-8");
    if (encoded.length > 0xffff) throw new Error(`id too long: ${id}`);
    const record = Buffer.alloc(2 + encoded.length);
    record.writeUInt16LE(encoded.length, 0);
    encoded.copy(record, 2);
    return record;
  });
  const header = Buffer.alloc(13);
  MAGIC.copy(header, 0);
  header.writeUInt8(VERSION, 4);
  header.writeUInt32LE(n, 5);
  header.writeUInt32LE(m.dim, 9);
  const values = Buffer.alloc(n * m.dim * 4);
  for (let i = 0; i < m.rows.length; i++) {
    values.writeFloatLE(m.rows[i], i * 4);
  }
  return Buffer.concat([header, ...idBuffers, values]);
}

export function readSemb(raw: Buffer): EmbeddingMatrix {
  if (!raw.subarray(0, 4).equals(MAGIC)) {
    throw new Error(`bad magic ${raw.subarray(0, 4).toString("hex")}`);
  }
  if (raw.readUInt8(4) !== VERSION) throw new Error(`unsupported version ${raw.readUInt8(4)}`);
  const n = raw.readUInt32LE(5);
  const dim = raw.readUInt32LE(9);
  let offset = 13;
  const ids: string[] = [];
  for (let i = 0; i < n; i++) {
    const len = raw.readUInt16LE(offset);
    offset += 2;
    ids.push(raw.subarray(offset, offset + len).toString("utf-8"));
    offset += len;
  }
  if (raw.length - offset !== n * dim * 4) {
    throw new Error(`expected ${n * dim * 4} value bytes, got ${raw.length - offset}`);
  }
  const rows = new Float32Array(n * dim);
  for (let i = 0; i < rows.length; i++) {
    rows[i] = raw.readFloatLE(offset + i * 4);
  }
  return { ids, dim, rows };
}
