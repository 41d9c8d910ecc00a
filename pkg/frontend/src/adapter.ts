// Linear adapter fine-tuned on pair targets with a cosine-similarity
// regression loss. Full-batch gradient descent from identity with a
// step-halving safeguard; zero epochs leaves the adapter at identity so
// a follow-up export reproduces the base embeddings.

export interface Adapter {
  dim: number;
  matrix: Float64Array; // row-major d x d
}

export interface PairBatch {
  embA: Float64Array[]; // base embeddings of the first element
  embB: Float64Array[];
  targets: number[];
}

export function identityAdapter(dim: number): Adapter {
  const matrix = new Float64Array(dim * dim);
  for (let i = 0; i < dim; i++) matrix[i * dim + i] = 1;
  return { dim, matrix };
}

export function applyAdapter(a: Adapter, e: ArrayLike<number>): Float64Array {
  const out = new Float64Array(a.dim);
  for (let i = 0; i < a.dim; i++) {
    let acc = 0;
    for (let j = 0; j < a.dim; j++) acc += a.matrix[i * a.dim + j] * e[j];
    out[i] = acc;
  }
  return out;
}

function dot(x: Float64Array, y: Float64Array): number {
  let acc = 0;
  for (let i = 0; i < x.length; i++) acc += x[i] * y[i];
  return acc;
}

export function pairLoss(a: Adapter, batch: PairBatch): number {
  let total = 0;
  for (let p = 0; p < batch.targets.length; p++) {
    const u = applyAdapter(a, batch.embA[p]);
    const v = applyAdapter(a, batch.embB[p]);
    const cos = dot(u, v) / (Math.sqrt(dot(u, u)) * Math.sqrt(dot(v, v)));
    total += (cos - batch.targets[p]) ** 2;
  }
  return total / batch.targets.length;
}

function pairLossGradient(a: Adapter, batch: PairBatch): Float64Array {
  const d = a.dim;
  const grad = new Float64Array(d * d);
  const count = batch.targets.length;
  for (let p = 0; p < count; p++) {
    const ea = batch.embA[p];
    const eb = batch.embB[p];
    const u = applyAdapter(a, ea);
    const v = applyAdapter(a, eb);
    const nu = Math.sqrt(dot(u, u));
    const nv = Math.sqrt(dot(v, v));
    if (nu === 0 || nv === 0) throw new Error("adapted embedding with zero norm");
    const cos = dot(u, v) / (nu * nv);
    const scale = (2 * (cos - batch.targets[p])) / count;
    for (let i = 0; i < d; i++) {
      const gu = v[i] / (nu * nv) - (cos * u[i]) / (nu * nu);
      const gv = u[i] / (nu * nv) - (cos * v[i]) / (nv * nv);
      for (let j = 0; j < d; j++) {
        grad[i * d + j] += scale * (gu * ea[j] + gv * eb[j]);
      }
    }
  }
  return grad;
}

export function trainAdapter(
  batch: PairBatch,
  dim: number,
  epochs: number,
  learningRate: number,
): { adapter: Adapter; finalLoss: number } {
  let adapter = identityAdapter(dim);
  let loss = pairLoss(adapter, batch);
  let lr = learningRate;
  for (let epoch = 0; epoch < epochs; epoch++) {
    const grad = pairLossGradient(adapter, batch);
    for (;;) {
      const matrix = new Float64Array(adapter.matrix);
      for (let i = 0; i < matrix.length; i++) matrix[i] -= lr * grad[i];
      const candidate = { dim, matrix };
      const newLoss = pairLoss(candidate, batch);
      if (!Number.isFinite(newLoss)) throw new Error("adapter training diverged");
      if (newLoss <= loss) {
        adapter = candidate;
        loss = newLoss;
        break;
      }
      lr /= 2;
      if (lr < 1e-18) break;
    }
  }
  return { adapter, finalLoss: loss };
}

export function serializeAdapter(a: Adapter, model: string): string {
  return JSON.stringify({ model, dim: a.dim, matrix: Array.from(a.matrix) });
}

export function deserializeAdapter(raw: string): { adapter: Adapter; model: string } {
  const parsed = JSON.parse(raw);
  if (!Number.isInteger(parsed.dim) || !Array.isArray(parsed.matrix)) {
    throw new Error("bad adapter file");
  }
  if (parsed.matrix.length !== parsed.dim * parsed.dim) {
    throw new Error(`adapter matrix length ${parsed.matrix.length} != dim^2`);
  }
  return {
    adapter: { dim: parsed.dim, matrix: Float64Array.from(parsed.matrix) },
    model: String(parsed.model ?? ""),
  };
}
