// Optional dependency loaded dynamically at runtime; no local types.
declare module "@huggingface/transformers";
