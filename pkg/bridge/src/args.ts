/** Tiny flag parser for the two bridge commands. */

export interface ParsedArgs {
  values: Map<string, string>;
}

export function parseArgs(argv: string[], allowed: Set<string>): ParsedArgs {
  const values = new Map<string, string>();
  for (let i = 0; i < argv.length; i++) {
    const arg = argv[i];
    if (!arg.startsWith('--')) {
      throw new Error(`unexpected argument ${JSON.stringify(arg)}`);
    }
    const name = arg.slice(2);
    if (!allowed.has(name)) {
      throw new Error(`unknown flag --${name}; known flags: ${[...allowed].map((f) => `--${f}`).join(', ')}`);
    }
    const value = argv[i + 1];
    if (value === undefined || value.startsWith('--')) {
      throw new Error(`flag --${name} needs a value`);
    }
    values.set(name, value);
    i++;
  }
  return { values };
}

export function required(parsed: ParsedArgs, name: string): string {
  const value = parsed.values.get(name);
  if (value === undefined) {
    throw new Error(`missing required flag --${name}`);
  }
  return value;
}
