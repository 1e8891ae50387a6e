import { execFileSync } from "node:child_process";
import * as fs from "node:fs";
import * as os from "node:os";
import * as path from "node:path";
import { fileURLToPath } from "node:url";
import { describe, expect, it } from "vitest";

const CLI = fileURLToPath(new URL("../dist/cli.js", import.meta.url));
const SWEEP = fileURLToPath(
  new URL("../../frontend_data/sweep.csv", import.meta.url),
);

function run(args: string[]): { status: number; stdout: string; stderr: string } {
  try {
    const stdout = execFileSync("node", [CLI, ...args], { encoding: "utf8" });
    return { status: 0, stdout, stderr: "" };
  } catch (err) {
    const e = err as { status: number; stdout: string; stderr: string };
    return { status: e.status, stdout: String(e.stdout), stderr: String(e.stderr) };
  }
}

function tmpDir(): string {
  return fs.mkdtempSync(path.join(os.tmpdir(), "plots-"));
}

describe("plots render", () => {
  it("writes one figure per code from a sweep csv in under ten seconds", () => {
    const out = tmpDir();
    const start = Date.now();
    const res = run(["render", SWEEP, "--out", out]);
    const elapsed = Date.now() - start;
    expect(res.status).toBe(0);
    expect(elapsed).toBeLessThan(10_000);
    const file = path.join(out, "T25.svg");
    expect(res.stdout.trim()).toBe(file);
    const svg = fs.readFileSync(file, "utf8");
    expect(svg).toContain("<svg");
    expect(svg).toContain("word error rate");
    expect(svg).toContain("bit error rate");
  });

  it("restricts panels with --metric", () => {
    const out = tmpDir();
    const res = run(["render", SWEEP, "--out", out, "--metric", "ber"]);
    expect(res.status).toBe(0);
    const svg = fs.readFileSync(path.join(out, "T25.svg"), "utf8");
    expect(svg).toContain("bit error rate");
    expect(svg).not.toContain("word error rate");
  });

  it("overlays --points markers", () => {
    const out = tmpDir();
    const pts = path.join(out, "points.csv");
    fs.writeFileSync(
      pts,
      "code,L,k,p,wer,wer_sigma,ber,ber_sigma\nT25,2,6,0.01,0.66,0.02,0.66,0.01\n",
    );
    const res = run(["render", SWEEP, "--out", out, "--points", pts]);
    expect(res.status).toBe(0);
    const svg = fs.readFileSync(path.join(out, "T25.svg"), "utf8");
    expect(svg).toContain('class="point"');
  });

  it("reports missing columns on stderr and exits 2", () => {
    const out = tmpDir();
    const bad = path.join(out, "bad.csv");
    fs.writeFileSync(bad, "code,L,k,p,wer\nT25,1,4,0.01,0.5\n");
    const res = run(["render", bad, "--out", out]);
    expect(res.status).toBe(2);
    expect(res.stderr).toMatch(/missing column\(s\).*wer_sigma/);
  });

  it("rejects an unknown metric", () => {
    const res = run(["render", SWEEP, "--out", tmpDir(), "--metric", "per"]);
    expect(res.status).toBe(2);
    expect(res.stderr).toContain("--metric must be wer or ber");
  });

  it("requires --out", () => {
    const res = run(["render", SWEEP]);
    expect(res.status).toBe(2);
    expect(res.stderr).toContain("--out is required");
  });

  it("fails cleanly on a missing input file", () => {
    const res = run(["render", "/no/such/file.csv", "--out", tmpDir()]);
    expect(res.status).toBe(2);
    expect(res.stderr).toContain("no such file");
  });
});
