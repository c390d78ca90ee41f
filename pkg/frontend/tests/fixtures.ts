import { readFileSync } from "node:fs";
import { fileURLToPath } from "node:url";

export function fixtureText(name: string): string {
  return readFileSync(
    fileURLToPath(new URL(`./fixtures/${name}`, import.meta.url)),
    "utf-8"
  );
}

export function fixtureJson(name: string): unknown {
  return JSON.parse(fixtureText(name));
}
