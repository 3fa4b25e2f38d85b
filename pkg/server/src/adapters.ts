/**
 * Model adapters behind the wire protocol.
 *
 * A GPU-backed adapter wrapping a real region-aware checkpoint implements
 * this same interface; this package ships the two adapters that need no
 * accelerator: fixtures (content-addressed canned answers) and echo
 * (deterministic synthetic answers for integration tests).
 */

import { readFileSync } from "node:fs";
import { completeDigest, inferDigest, type Generation } from "./protocol.js";

export class FixtureMissError extends Error {}

export interface ModelAdapter {
  /** Returns the model's answer string untrimmed; trimming is the caller's job. */
  infer(image: Buffer, mask: Buffer, prompt: string, generation: Generation): Promise<string>;
  complete(prompt: string, generation: Generation): Promise<string>;
}

export interface FixtureFile {
  infer?: Record<string, string>;
  complete?: Record<string, string>;
  default_answer?: string;
  default_text?: string;
}

export class FixtureAdapter implements ModelAdapter {
  constructor(private fixtures: FixtureFile) {}

  static fromFile(path: string): FixtureAdapter {
    return new FixtureAdapter(JSON.parse(readFileSync(path, "utf8")) as FixtureFile);
  }

  async infer(image: Buffer, mask: Buffer, prompt: string): Promise<string> {
    const digest = inferDigest(image, mask, prompt);
    const hit = this.fixtures.infer?.[digest];
    if (hit !== undefined) return hit;
    if (this.fixtures.default_answer !== undefined) return this.fixtures.default_answer;
    throw new FixtureMissError(`no fixture for digest ${digest}`);
  }

  async complete(prompt: string): Promise<string> {
    const hit = this.fixtures.complete?.[completeDigest(prompt)];
    if (hit !== undefined) return hit;
    if (this.fixtures.default_text !== undefined) return this.fixtures.default_text;
    throw new FixtureMissError("no fixture for prompt");
  }
}

/** Deterministic answers derived from request content; no fixtures needed. */
export class EchoAdapter implements ModelAdapter {
  async infer(image: Buffer, mask: Buffer, prompt: string): Promise<string> {
    return `echo:${inferDigest(image, mask, prompt).slice(0, 16)}`;
  }

  async complete(prompt: string): Promise<string> {
    return `echo:${prompt}`;
  }
}
