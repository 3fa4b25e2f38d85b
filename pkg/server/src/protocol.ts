/**
 * Wire-protocol request validation and content digests.
 *
 * Mirrors the harness-side schema exactly: POST /v1/infer takes
 * {image, mask, prompt, generation} with base64 PNG image fields, and
 * POST /v1/complete takes {prompt, generation}. Malformed requests are
 * 400s; the digest identifying an infer request is sha256 over
 * image-bytes, NUL, mask-bytes, NUL, utf8(prompt).
 */

import { createHash } from "node:crypto";

const PNG_SIGNATURE = Buffer.from([0x89, 0x50, 0x4e, 0x47, 0x0d, 0x0a, 0x1a, 0x0a]);
const NUL = Buffer.from([0]);

export interface Generation {
  temperature: number;
  top_p: number;
  num_beams: number;
  max_new_tokens: number;
}

export interface InferRequest {
  image: Buffer;
  mask: Buffer;
  prompt: string;
  generation: Generation;
}

export interface CompleteRequest {
  prompt: string;
  generation: Generation;
}

export class ValidationError extends Error {}

function decodePngField(value: unknown, field: string): Buffer {
  if (typeof value !== "string") {
    throw new ValidationError(`"${field}" must be a base64 string`);
  }
  // Buffer.from() silently ignores junk; re-encode to verify round-trip.
  const raw = Buffer.from(value, "base64");
  if (raw.length === 0 || raw.toString("base64").replace(/=+$/, "") !==
      value.replace(/\s+/g, "").replace(/=+$/, "")) {
    throw new ValidationError(`"${field}" is not valid base64`);
  }
  if (raw.length < PNG_SIGNATURE.length ||
      !raw.subarray(0, PNG_SIGNATURE.length).equals(PNG_SIGNATURE)) {
    throw new ValidationError(`"${field}" is not a PNG`);
  }
  return raw;
}

function validateGeneration(value: unknown): Generation {
  if (typeof value !== "object" || value === null || Array.isArray(value)) {
    throw new ValidationError('"generation" must be an object');
  }
  const gen = value as Record<string, unknown>;
  const numberFields = ["temperature", "top_p"];
  const intFields = ["num_beams", "max_new_tokens"];
  for (const field of [...numberFields, ...intFields]) {
    if (!(field in gen)) {
      throw new ValidationError(`"generation.${field}" is required`);
    }
    const v = gen[field];
    if (typeof v !== "number" || Number.isNaN(v)) {
      throw new ValidationError(`"generation.${field}" has the wrong type`);
    }
    if (intFields.includes(field) && !Number.isInteger(v)) {
      throw new ValidationError(`"generation.${field}" must be an integer`);
    }
  }
  return gen as unknown as Generation;
}

export function parseInferRequest(body: Record<string, unknown>): InferRequest {
  for (const field of ["image", "mask", "prompt", "generation"]) {
    if (!(field in body)) {
      throw new ValidationError(`"${field}" is required`);
    }
  }
  const image = decodePngField(body.image, "image");
  const mask = decodePngField(body.mask, "mask");
  if (typeof body.prompt !== "string" || body.prompt.length === 0) {
    throw new ValidationError('"prompt" must be a non-empty string');
  }
  return { image, mask, prompt: body.prompt, generation: validateGeneration(body.generation) };
}

export function parseCompleteRequest(body: Record<string, unknown>): CompleteRequest {
  for (const field of ["prompt", "generation"]) {
    if (!(field in body)) {
      throw new ValidationError(`"${field}" is required`);
    }
  }
  if (typeof body.prompt !== "string" || body.prompt.length === 0) {
    throw new ValidationError('"prompt" must be a non-empty string');
  }
  return { prompt: body.prompt, generation: validateGeneration(body.generation) };
}

export function inferDigest(image: Buffer, mask: Buffer, prompt: string): string {
  return createHash("sha256")
    .update(image).update(NUL)
    .update(mask).update(NUL)
    .update(Buffer.from(prompt, "utf8"))
    .digest("hex");
}

export function completeDigest(prompt: string): string {
  return createHash("sha256").update(Buffer.from(prompt, "utf8")).digest("hex");
}
