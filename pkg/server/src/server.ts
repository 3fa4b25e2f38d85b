/**
 * HTTP server implementing the wire protocol around a model adapter.
 *
 * Status mapping is contractual: 200 ok, 400 malformed request, 404
 * unknown route or fixture miss, 503 queue full (the client retries).
 */

import { createServer as createHttpServer, type IncomingMessage, type Server, type ServerResponse } from "node:http";
import { FixtureMissError, type ModelAdapter } from "./adapters.js";
import { parseCompleteRequest, parseInferRequest, ValidationError } from "./protocol.js";
import { QueueFullError, RequestQueue } from "./queue.js";

export interface ServerOptions {
  adapter: ModelAdapter;
  queueCapacity?: number;
  /** Logged only; names the checkpoint a GPU-backed adapter would serve. */
  modelId?: string;
}

function send(res: ServerResponse, status: number, payload: unknown): void {
  const body = JSON.stringify(payload);
  res.writeHead(status, {
    "Content-Type": "application/json",
    "Content-Length": Buffer.byteLength(body),
  });
  res.end(body);
}

async function readBody(req: IncomingMessage): Promise<string> {
  const chunks: Buffer[] = [];
  for await (const chunk of req) {
    chunks.push(chunk as Buffer);
  }
  return Buffer.concat(chunks).toString("utf8");
}

export function createServer(options: ServerOptions): Server {
  const queue = new RequestQueue(options.queueCapacity ?? 32);
  const adapter = options.adapter;

  return createHttpServer(async (req, res) => {
    if (req.method !== "POST" ||
        (req.url !== "/v1/infer" && req.url !== "/v1/complete")) {
      send(res, 404, { error: `unknown path ${req.url ?? ""}` });
      return;
    }

    let body: Record<string, unknown>;
    try {
      const raw = await readBody(req);
      const parsed: unknown = JSON.parse(raw);
      if (typeof parsed !== "object" || parsed === null || Array.isArray(parsed)) {
        send(res, 400, { error: "request body must be a JSON object" });
        return;
      }
      body = parsed as Record<string, unknown>;
    } catch {
      send(res, 400, { error: "request body is not valid JSON" });
      return;
    }

    try {
      if (req.url === "/v1/infer") {
        const request = parseInferRequest(body);
        const answer = await queue.run(() =>
          adapter.infer(request.image, request.mask, request.prompt, request.generation));
        send(res, 200, { answer });
      } else {
        const request = parseCompleteRequest(body);
        const text = await queue.run(() =>
          adapter.complete(request.prompt, request.generation));
        send(res, 200, { text });
      }
    } catch (err) {
      if (err instanceof ValidationError) {
        send(res, 400, { error: err.message });
      } else if (err instanceof FixtureMissError) {
        send(res, 404, { error: err.message });
      } else if (err instanceof QueueFullError) {
        send(res, 503, { error: "busy" });
      } else {
        send(res, 500, { error: `internal error: ${String(err)}` });
      }
    }
  });
}
