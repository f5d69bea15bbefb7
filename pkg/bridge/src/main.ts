import { Evaluator, loadConfig } from "./evaluator.js";
import { serve } from "./server.js";

async function main(): Promise<number> {
  const args = process.argv.slice(2);
  if (args.length !== 1) {
    process.stderr.write("usage: node dist/main.js BRIDGE_CONFIG.json\n");
    return 2;
  }
  let evaluator: Evaluator;
  try {
    evaluator = Evaluator.fromConfig(loadConfig(args[0]));
  } catch (error) {
    // Fatal load problems end the process before any handshake.
    const message = error instanceof Error ? error.message : String(error);
    process.stderr.write(`bridge failed to start: ${message}\n`);
    return 1;
  }
  await serve(evaluator, process.stdin, process.stdout);
  return 0;
}

main().then((code) => {
  process.exitCode = code;
});
