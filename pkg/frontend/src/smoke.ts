import { ClientSession, Envelope } from "./client";

const ENVELOPE_KEYS = ["goal", "command_result", "step", "gameOver"];

function checkEnvelope(env: Envelope, context: string): void {
  for (const key of ENVELOPE_KEYS) {
    if (!(key in env)) {
      throw new Error(`${context}: reply is missing key "${key}"`);
    }
  }
}

export interface SmokeOptions {
  host: string;
  port: number;
  task: string;
}

/** The canonical five-command session against a live server. */
export async function runSmoke(options: SmokeOptions): Promise<void> {
  const session = new ClientSession(options.host, options.port);
  await session.connect();
  try {
    const script = [
      "START",
      `RESET domain ${options.task}`,
      "SENSE_RECIPES",
      "SENSE_ALL",
      "SELECT_ITEM minecraft:iron_pickaxe",
    ];
    let last: Envelope | null = null;
    for (const command of script) {
      const env = await session.mc(command);
      checkEnvelope(env, command);
      console.log(`${command} -> ${env.command_result.result}`);
      last = env;
    }
    const cost = last!.command_result.stepCost;
    if (last!.command_result.result !== "SUCCESS" || cost !== 120) {
      throw new Error(
        `SELECT_ITEM expected SUCCESS with stepCost 120, got ` +
        `${last!.command_result.result} / ${cost}`,
      );
    }
    console.log("smoke ok: envelope keys present, stepCost 120 observed");
  } finally {
    session.close();
  }
}

function parseArgs(argv: string[]): SmokeOptions {
  const options: SmokeOptions = {
    host: "127.0.0.1",
    port: Number(process.env.PAL_AGENT_PORT ?? 9000),
    task: "",
  };
  for (let i = 0; i < argv.length; i += 1) {
    const flag = argv[i];
    if (flag === "--host") options.host = argv[++i];
    else if (flag === "--port") options.port = Number(argv[++i]);
    else if (flag === "--task") options.task = argv[++i];
    else {
      console.error(`unknown flag: ${flag}`);
      process.exit(2);
    }
  }
  if (!options.task) {
    console.error("usage: example_client --host <h> --port <p> --task <instance.json>");
    process.exit(2);
  }
  return options;
}

if (require.main === module) {
  runSmoke(parseArgs(process.argv.slice(2)))
    .then(() => process.exit(0))
    .catch((err) => {
      console.error(`smoke failed: ${err.message ?? err}`);
      process.exit(1);
    });
}
