// Sentence encoders behind one interface. Two backends:
//
//  "hash:<dim>"  deterministic offline encoder (FNV-1a seeded PRNG per
//                text, unit-normalized); exists so the gateway and its
//                conformance tests run with no model downloads.
//  "hf:<model>"  transformers.js feature-extraction pipeline with mean
//                pooling; requires @huggingface/transformers to be
//                installed and the model to be resolvable.

export interface Encoder {
  readonly model: string;
  readonly dim: number;
  encode(texts: string[]): Promise<Float32Array[]>;
}

function fnv1a(text: string): number {
  let hash = 0x811c9dc5;
  for (let i = 0; i < text.length; i++) {
    hash ^= text.charCodeAt(i);
    hash = Math.imul(hash, 0x01000193);
  }
  return hash >>> 0;
}

function mulberry32(seed: number): () => number {
  let state = seed >>> 0;
  return () => {
    state = (state + 0x6d2b79f5) | 0;
    let t = Math.imul(state ^ (state >>> 15), 1 | state);
    t = (t + Math.imul(t ^ (t >>> 7), 61 | t)) ^ t;
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  };
}

class HashEncoder implements Encoder {
  readonly model: string;
  readonly dim: number;

  constructor(dim: number) {
    this.model = `hash:${dim}`;
    this.dim = dim;
  }

  async encode(texts: string[]): Promise<Float32Array[]> {
    return texts.map((text) => {
      const next = mulberry32(fnv1a(text));
      const row = new Float32Array(this.dim);
      let norm = 0;
      for (let i = 0; i < this.dim; i++) {
        row[i] = next() * 2 - 1;
        norm += row[i] * row[i];
      }
      norm = Math.sqrt(norm) || 1;
      for (let i = 0; i < this.dim; i++) row[i] = Math.fround(row[i] / norm);
      return row;
    });
  }
}

class TransformersEncoder implements Encoder {
  readonly model: string;
  dim = 0;
  private extractor: any;

  constructor(model: string) {
    this.model = model;
  }

  async init(): Promise<void> {
    let transformers: any;
    try {
      transformers = await import("@huggingface/transformers");
    } catch {
      throw new Error(
        "hf: backend needs the @huggingface/transformers package (npm install @huggingface/transformers)",
      );
    }
    this.extractor = await transformers.pipeline("feature-extraction", this.model);
  }

  async encode(texts: string[]): Promise<Float32Array[]> {
    const out: Float32Array[] = [];
    for (const text of texts) {
      const tensor = await this.extractor(text, { pooling: "mean", normalize: true });
      const row = Float32Array.from(tensor.data as Float32Array);
      if (this.dim === 0) this.dim = row.length;
      else if (row.length !== this.dim) throw new Error(`inconsistent dim ${row.length} vs ${this.dim}`);
      out.push(row);
    }
    return out;
  }
}

export async function loadEncoder(spec: string): Promise<Encoder> {
  if (spec.startsWith("hash:")) {
    const dim = Number(spec.slice(5));
    if (!Number.isInteger(dim) || dim <= 0) throw new Error(`bad hash encoder dim in ${spec}`);
    return new HashEncoder(dim);
  }
  if (spec.startsWith("hf:")) {
    const encoder = new TransformersEncoder(spec.slice(3));
    await encoder.init();
    return encoder;
  }
  throw new Error(`unknown encoder spec ${spec}; expected hash:<dim> or hf:<model>`);
}
