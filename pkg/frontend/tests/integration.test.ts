/** Round trip against the real service: load the bundled fixture cohort,
 * work the whole queue through the same code path the adjudication form
 * uses, and check the metrics panel output. Skipped automatically when the
 * Python package is not importable in this environment. */

import { spawn, execFileSync, type ChildProcess } from 'node:child_process';
import { mkdtempSync, readFileSync, rmSync } from 'node:fs';
import { tmpdir } from 'node:os';
import { join } from 'node:path';
import { afterAll, beforeAll, describe, expect, it } from 'vitest';

import { ApiClient, ApiError } from '../src/api.js';
import { metricsPanelModel, metricsPendingModel } from '../src/format.js';
import { adjudicationFromForm } from '../src/app.js';
import { renderMetricsPanel, renderQueueView } from '../src/render.js';

const PYTHON = process.env.PYTHON ?? 'python3';
const PORT = 8200 + Math.floor(Math.random() * 1000);
const BASE = `http://127.0.0.1:${PORT}`;

function pythonHasPackage(): boolean {
  try {
    execFileSync(PYTHON, ['-c', 'import radqa'], { stdio: 'ignore' });
    return true;
  } catch {
    return false;
  }
}

const available = pythonHasPackage();
const suite = available ? describe : describe.skip;

suite('fixture round trip against the live service', () => {
  let workDir: string;
  let server: ChildProcess;
  let client: ApiClient;
  let scriptLines: Record<string, string>[];

  beforeAll(async () => {
    workDir = mkdtempSync(join(tmpdir(), 'radqa-ui-'));
    const cohort = join(workDir, 'cohort');
    const log = join(workDir, 'events.jsonl');
    execFileSync(PYTHON, ['-m', 'radqa.cli', 'fixture', '--out', cohort]);
    execFileSync(PYTHON, [
      '-m', 'radqa.cli', 'ingest',
      join(cohort, 'studies.jsonl'),
      join(cohort, 'findings.jsonl'),
      join(cohort, 'reports.jsonl'),
      '--log', log,
    ]);
    scriptLines = readFileSync(join(cohort, 'adjudications.jsonl'), 'utf-8')
      .split('\n')
      .filter((line) => line.trim())
      .map((line) => JSON.parse(line) as Record<string, string>);

    server = spawn(PYTHON, [
      '-m', 'radqa.cli', 'serve', '--log', log, '--port', String(PORT),
    ], { stdio: 'ignore' });
    client = new ApiClient(BASE);

    for (let attempt = 0; attempt < 100; attempt += 1) {
      try {
        await client.fetchWorklist();
        return;
      } catch {
        await new Promise((resolve) => setTimeout(resolve, 200));
      }
    }
    throw new Error('service never became reachable');
  }, 60_000);

  afterAll(() => {
    server?.kill();
    if (workDir) rmSync(workDir, { recursive: true, force: true });
  });

  it('shows 29 items in the queue and a pending metrics panel', async () => {
    const items = await client.fetchQueue();
    expect(items).toHaveLength(29);
    expect(renderQueueView(items, {})).toContain('29 pending cases');

    const error = await client.fetchMetrics().catch((e: unknown) => e);
    expect(error).toBeInstanceOf(ApiError);
    const panel = renderMetricsPanel(
      metricsPendingModel((error as ApiError).pending ?? 0));
    expect(panel).toContain('29 cases pending adjudication');
  }, 30_000);

  it('drains the queue through the adjudication form path', async () => {
    for (const line of scriptLines) {
      // Fill the form exactly as a reviewer would, then submit through the
      // same parsing + client call the DOM handler uses.
      const form = new FormData();
      form.set('outcome', line.outcome as string);
      form.set('reviewer_id', line.reviewer_id as string);
      const values = adjudicationFromForm(form);
      const updated = await client.submitAdjudication(line.study_id as string, values);
      expect(updated.status).toBe('ADJUDICATED');
    }
    expect(await client.fetchQueue()).toHaveLength(0);
  }, 120_000);

  it('then displays 0.53% / 2.62% / 98.50% in the metrics panel', async () => {
    const metrics = await client.fetchMetrics();
    const model = metricsPanelModel(metrics);
    expect(model.flaggedRate).toBe('0.53%');
    expect(model.nonflaggedRate).toBe('2.62%');
    expect(model.effortReduction).toBe('98.50%');

    const html = renderMetricsPanel(model);
    expect(html).toContain('0.53%');
    expect(html).toContain('2.62%');
    expect(html).toContain('98.50%');
  }, 30_000);

  it('rejects a double submission with the service error', async () => {
    const first = scriptLines[0];
    expect(first).toBeDefined();
    const form = new FormData();
    form.set('outcome', 'OTHER');
    form.set('reviewer_id', 'second-reviewer');
    const error = await client
      .submitAdjudication(first!.study_id as string, adjudicationFromForm(form))
      .catch((e: unknown) => e);
    expect(error).toBeInstanceOf(ApiError);
    expect((error as ApiError).code).toBe('already_adjudicated');
  }, 30_000);
});
