/**
 * CLI entry point.
 *
 *   node dist/main.js [--port N] [--fixtures path] [--model id]
 *                     [--queue-capacity N]
 *
 * With --fixtures the server answers from content-addressed canned
 * responses; without it, echo mode produces deterministic synthetic
 * answers. --model records which checkpoint a GPU-backed adapter would
 * load; no such adapter ships here, so it is informational.
 */

import { EchoAdapter, FixtureAdapter, type ModelAdapter } from "./adapters.js";
import { createServer } from "./server.js";

interface CliArgs {
  port: number;
  fixtures?: string;
  model?: string;
  queueCapacity: number;
}

function parseArgs(argv: string[]): CliArgs {
  const args: CliArgs = { port: 8000, queueCapacity: 32 };
  for (let i = 0; i < argv.length; i += 1) {
    const flag = argv[i];
    const value = () => {
      i += 1;
      if (i >= argv.length) {
        throw new Error(`${flag} needs a value`);
      }
      return argv[i];
    };
    switch (flag) {
      case "--port":
        args.port = Number(value());
        break;
      case "--fixtures":
        args.fixtures = value();
        break;
      case "--model":
        args.model = value();
        break;
      case "--queue-capacity":
        args.queueCapacity = Number(value());
        break;
      default:
        throw new Error(`unknown flag ${flag}`);
    }
  }
  if (!Number.isInteger(args.port) || args.port < 0 || args.port > 65535) {
    throw new Error("--port must be an integer in [0, 65535]");
  }
  return args;
}

function main(): void {
  let args: CliArgs;
  try {
    args = parseArgs(process.argv.slice(2));
  } catch (err) {
    console.error(String(err instanceof Error ? err.message : err));
    process.exit(1);
  }

  let adapter: ModelAdapter;
  if (args.fixtures) {
    adapter = FixtureAdapter.fromFile(args.fixtures);
    console.error(`fixture mode: ${args.fixtures}`);
  } else {
    adapter = new EchoAdapter();
    console.error("echo mode (no fixtures given)");
  }
  if (args.model) {
    console.error(`model id (informational): ${args.model}`);
  }

  const server = createServer({ adapter, queueCapacity: args.queueCapacity });
  server.listen(args.port, "127.0.0.1", () => {
    const address = server.address();
    const port = typeof address === "object" && address ? address.port : args.port;
    // The harness-facing startup line; tests parse it to find the port.
    console.log(`listening on 127.0.0.1:${port}`);
  });

  const shutdown = () => server.close(() => process.exit(0));
  process.on("SIGINT", shutdown);
  process.on("SIGTERM", shutdown);
}

main();
