// Logistic head over sentence embeddings: SUBJ is the positive class.
// Training is plain full-batch gradient descent with L2 shrinkage; the
// checkpoint is a JSON file with weights, bias, and threshold.

export interface Head {
  dim: number;
  weights: Float64Array;
  bias: number;
  threshold: number;
}

function sigmoid(z: number): number {
  return z >= 0 ? 1 / (1 + Math.exp(-z)) : Math.exp(z) / (1 + Math.exp(z));
}

export function headProb(head: Head, emb: ArrayLike<number>): number {
  let z = head.bias;
  for (let i = 0; i < head.dim; i++) z += head.weights[i] * emb[i];
  return sigmoid(z);
}

export function headLabel(head: Head, prob: number): "SUBJ" | "OBJ" {
  return prob >= head.threshold ? "SUBJ" : "OBJ";
}

export interface HeadTrainOptions {
  epochs: number;
  learningRate: number;
  l2: number;
  threshold: number;
}

export function trainHead(
  embeddings: Float64Array[],
  labels: ("SUBJ" | "OBJ")[],
  options: HeadTrainOptions,
): Head {
  const n = embeddings.length;
  if (n === 0) throw new Error("no training rows");
  if (labels.length !== n) throw new Error("labels/embeddings length mismatch");
  const dim = embeddings[0].length;
  const weights = new Float64Array(dim);
  let bias = 0;
  const y = labels.map((l) => (l === "SUBJ" ? 1 : 0));
  for (let epoch = 0; epoch < options.epochs; epoch++) {
    const gradW = new Float64Array(dim);
    let gradB = 0;
    for (let r = 0; r < n; r++) {
      let z = bias;
      const emb = embeddings[r];
      for (let i = 0; i < dim; i++) z += weights[i] * emb[i];
      const err = (sigmoid(z) - y[r]) / n;
      for (let i = 0; i < dim; i++) gradW[i] += err * emb[i];
      gradB += err;
    }
    for (let i = 0; i < dim; i++) {
      weights[i] -= options.learningRate * (gradW[i] + options.l2 * weights[i]);
    }
    bias -= options.learningRate * gradB;
  }
  return { dim, weights, bias, threshold: options.threshold };
}

export function serializeHead(head: Head, model: string): string {
  return JSON.stringify({
    model,
    dim: head.dim,
    weights: Array.from(head.weights),
    bias: head.bias,
    threshold: head.threshold,
  });
}

export function deserializeHead(raw: string): { head: Head; model: string } {
  const parsed = JSON.parse(raw);
  if (!Number.isInteger(parsed.dim) || !Array.isArray(parsed.weights)) {
    throw new Error("bad head file");
  }
  if (parsed.weights.length !== parsed.dim) {
    throw new Error(`head weights length ${parsed.weights.length} != dim ${parsed.dim}`);
  }
  return {
    head: {
      dim: parsed.dim,
      weights: Float64Array.from(parsed.weights),
      bias: Number(parsed.bias),
      threshold: Number(parsed.threshold ?? 0.5),
    },
    model: String(parsed.model ?? ""),
  };
}
