// Flat "key = value" configuration, the same shape the pipeline reads:
// one assignment per line, '#' starts a comment, keys may be dotted.

export function parseConfig(raw: string): Map<string, string> {
  const out = new Map<string, string>();
  const lines = raw.split(/\r?\n/);
  for (let i = 0; i < lines.length; i++) {
    let line = lines[i];
    const hash = line.indexOf("#");
    if (hash >= 0) line = line.slice(0, hash);
    line = line.trim();
    if (line.length === 0) continue;
    const eq = line.indexOf("=");
    if (eq < 0) throw new Error(`line ${i + 1}: expected key = value`);
    const key = line.slice(0, eq).trim();
    const value = line.slice(eq + 1).trim();
    if (key.length === 0) throw new Error(`line ${i + 1}: empty key`);
    out.set(key, value);
  }
  return out;
}

export function requireKey(config: Map<string, string>, key: string): string {
  const value = config.get(key);
  if (value === undefined) throw new Error(`missing required config key ${key}`);
  return value;
}
