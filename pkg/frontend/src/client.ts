import * as net from "net";

// The server replies with exactly one newline-terminated JSON document per
// command. Replies can be far bigger than one TCP segment (map payloads,
// base64 screens), so data is drained in 4 KiB chunks and accumulated until
// the newline terminator shows up.
const BUFF_SIZE = 4096;

export interface CommandResult {
  command: string;
  argument: string;
  result: "SUCCESS" | "FAIL";
  message: string;
  stepCost: number;
}

export interface Envelope {
  goal: { goalType: string; goalAchieved: boolean; Distribution: string };
  command_result: CommandResult;
  step: number;
  gameOver: boolean;
  [augmentation: string]: unknown;
}

interface Pending {
  resolve: (line: string) => void;
  reject: (err: Error) => void;
}

export class ClientSession {
  readonly host: string;
  readonly port: number;
  private sock: net.Socket | null = null;
  private buffer: Buffer = Buffer.alloc(0);
  private pending: Pending | null = null;

  constructor(host = "127.0.0.1", port = 9000) {
    this.host = host;
    this.port = port;
  }

  connect(timeoutMs = 10_000): Promise<void> {
    return new Promise((resolve, reject) => {
      const sock = net.createConnection({ host: this.host, port: this.port });
      const timer = setTimeout(() => {
        sock.destroy();
        reject(new Error(`connect timeout after ${timeoutMs}ms`));
      }, timeoutMs);
      sock.once("connect", () => {
        clearTimeout(timer);
        this.sock = sock;
        sock.on("readable", () => this.drain());
        sock.on("error", (err) => this.fail(err));
        sock.on("close", () => this.fail(new Error("connection closed")));
        resolve();
      });
      sock.once("error", (err) => {
        clearTimeout(timer);
        reject(err);
      });
    });
  }

  private drain(): void {
    if (!this.sock) return;
    let chunk: Buffer | null;
    while ((chunk = this.sock.read(BUFF_SIZE) ?? this.sock.read()) !== null) {
      this.buffer = Buffer.concat([this.buffer, chunk]);
    }
    const end = this.buffer.indexOf(0x0a);
    if (end >= 0 && this.pending) {
      const line = this.buffer.subarray(0, end).toString("utf-8");
      this.buffer = this.buffer.subarray(end + 1);
      const pending = this.pending;
      this.pending = null;
      pending.resolve(line);
    }
  }

  private fail(err: Error): void {
    if (this.pending) {
      const pending = this.pending;
      this.pending = null;
      pending.reject(err);
    }
  }

  /** Send one command line and block until its full reply arrives. */
  async mc(command: string): Promise<Envelope> {
    if (!this.sock) throw new Error("not connected");
    if (this.pending) throw new Error("one in-flight command at a time");
    const reply = new Promise<string>((resolve, reject) => {
      this.pending = { resolve, reject };
    });
    this.sock.write(command + "\n");
    const line = await reply;
    return JSON.parse(line) as Envelope;
  }

  close(): void {
    if (this.sock) {
      this.sock.removeAllListeners("close");
      this.sock.destroy();
      this.sock = null;
    }
  }
}
