// Client contract tests: consent gate, collapsed restore, revisit posting,
// quota meter and button locking, submission banners.

import { beforeEach, describe, expect, it } from "vitest";

import { ApiError, type ApiClient } from "../src/api";
import { QuestionPanel } from "../src/panel";
import type { HintPayload, SessionPayload } from "../src/types";

const tick = () => new Promise((resolve) => setTimeout(resolve, 0));

class FakeApi {
  consents: string[] = [];
  hintBodies: unknown[] = [];
  revisited: string[] = [];
  rated: [string, string][] = [];
  submitted: unknown[] = [];
  remaining = 5;
  sessionPayload: SessionPayload;
  hintFailure: number | null = null;
  submitFailure = false;
  private counter = 0;

  constructor(sessionPayload: SessionPayload) {
    this.sessionPayload = sessionPayload;
  }

  async session(): Promise<SessionPayload> {
    return this.sessionPayload;
  }

  async consent(studentId: string) {
    this.consents.push(studentId);
    return { consented: true };
  }

  async requestHint(body: { hint_type: string; reflection: string }) {
    this.hintBodies.push(body);
    if (this.hintFailure !== null) throw new ApiError(this.hintFailure, "failed");
    this.remaining -= 1;
    this.counter += 1;
    const hint: HintPayload = {
      hint_id: `h${this.counter}`,
      hint_type: body.hint_type as HintPayload["hint_type"],
      hint_text: `generated ${this.counter}`,
      reflection: body.reflection,
      requested_at: 1,
      delivered_at: 2,
      collapsed: false,
    };
    return { hint, remaining_quota: this.remaining };
  }

  async revisit(hintId: string) {
    this.revisited.push(hintId);
    return { revisit_count: this.revisited.filter((h) => h === hintId).length };
  }

  async rate(hintId: string, rating: "up" | "down") {
    this.rated.push([hintId, rating]);
    return { rating };
  }

  async submit(body: unknown) {
    if (this.submitFailure) throw new TypeError("network down");
    this.submitted.push(body);
    return { score: 1.0, solved: true, status: "passed" };
  }

  async questions() {
    return [];
  }

  async hintTypeDescriptions() {
    return {
      planning: "steps",
      debugging: "find and fix a bug",
      optimization: "improve performance",
    };
  }
}

function session(overrides: Partial<SessionPayload> = {}): SessionPayload {
  return {
    student_id: "s1",
    question_id: "a1q1",
    consent_given: false,
    remaining_quota: 5,
    solved: false,
    best_score: 0,
    hints: [],
    submissions: [],
    ...overrides,
  };
}

function storedHint(id: string): HintPayload {
  return {
    hint_id: id,
    hint_type: "debugging",
    hint_text: `stored ${id}`,
    reflection: "",
    requested_at: 1,
    delivered_at: 2,
    collapsed: true,
    rating: "unrated",
    revisit_count: 0,
  };
}

async function mount(fake: FakeApi): Promise<{ panel: QuestionPanel; root: HTMLElement }> {
  document.body.innerHTML = "";
  const root = document.createElement("div");
  document.body.appendChild(root);
  const panel = new QuestionPanel(root, fake as unknown as ApiClient, {
    studentId: "s1",
    questionId: "a1q1",
    promptText: "Write add(a, b).",
    starterCode: "def add(a, b): ...",
  });
  await panel.init();
  return { panel, root };
}

function click(element: Element | null): void {
  expect(element).not.toBeNull();
  (element as HTMLElement).click();
}

const q = (selector: string) => document.querySelector(selector);
const qa = (selector: string) => Array.from(document.querySelectorAll(selector));

beforeEach(() => {
  document.body.innerHTML = "";
});

describe("consent gate", () => {
  it("blocks the first hint request until accepted", async () => {
    const fake = new FakeApi(session());
    await mount(fake);

    click(q('[data-role="hint-button"][data-hint-type="planning"]'));
    await tick();
    expect(q('[data-role="consent-modal"]')).not.toBeNull();
    expect(fake.consents).toHaveLength(0);
    expect(fake.hintBodies).toHaveLength(0);

    // Declining sends nothing at all.
    click(q('[data-role="consent-decline"]'));
    await tick();
    expect(q('[data-role="consent-modal"]')).toBeNull();
    expect(fake.consents).toHaveLength(0);
    expect(fake.hintBodies).toHaveLength(0);

    // Accepting consents once, then the reflection dialog leads to the request.
    click(q('[data-role="hint-button"][data-hint-type="planning"]'));
    await tick();
    click(q('[data-role="consent-accept"]'));
    await tick();
    expect(fake.consents).toEqual(["s1"]);
    const reflection = q('[data-role="reflection-input"]') as HTMLTextAreaElement;
    reflection.value = "I am stuck on the loop";
    click(q('[data-role="reflection-submit"]'));
    await tick();
    await tick();
    expect(fake.hintBodies).toHaveLength(1);
    expect(fake.hintBodies[0]).toMatchObject({
      hint_type: "planning",
      reflection: "I am stuck on the loop",
    });
    expect(qa('[data-role="hint-widget"]')).toHaveLength(1);
  });

  it("skips the modal once the session says consent was given", async () => {
    const fake = new FakeApi(session({ consent_given: true }));
    await mount(fake);
    click(q('[data-role="hint-button"][data-hint-type="debugging"]'));
    await tick();
    expect(q('[data-role="consent-modal"]')).toBeNull();
    expect(q('[data-role="reflection-modal"]')).not.toBeNull();
  });
});

describe("widget restore and revisits", () => {
  it("renders restored widgets collapsed after a reload", async () => {
    const fake = new FakeApi(session({ hints: [storedHint("h1"), storedHint("h2")] }));
    await mount(fake);
    const widgets = qa('[data-role="hint-widget"]');
    expect(widgets).toHaveLength(2);
    expect(widgets.every((w) => (w as HTMLElement).dataset.collapsed === "true")).toBe(true);
    expect(qa('[data-role="widget-body"]')).toHaveLength(0);
  });

  it("posts exactly one revisit per expansion", async () => {
    const fake = new FakeApi(session({ hints: [storedHint("h1")] }));
    await mount(fake);

    click(q('[data-role="widget-toggle"]'));
    await tick();
    expect(fake.revisited).toEqual(["h1"]);
    expect(q('[data-role="widget-body"]')).not.toBeNull();

    click(q('[data-role="widget-toggle"]')); // collapse: no event
    await tick();
    expect(fake.revisited).toEqual(["h1"]);

    click(q('[data-role="widget-toggle"]')); // expand again: second event
    await tick();
    expect(fake.revisited).toEqual(["h1", "h1"]);
  });

  it("sends thumb ratings, last click winning in the UI", async () => {
    const fake = new FakeApi(session({ hints: [storedHint("h1")] }));
    await mount(fake);
    click(q('[data-role="widget-toggle"]'));
    await tick();
    click(q('[data-role="rate-up"]'));
    await tick();
    click(q('[data-role="rate-down"]'));
    await tick();
    expect(fake.rated).toEqual([
      ["h1", "up"],
      ["h1", "down"],
    ]);
    expect(q('[data-role="rate-down"]')?.classList.contains("active")).toBe(true);
  });
});

describe("quota meter", () => {
  async function requestOnce(): Promise<void> {
    click(q('[data-role="hint-button"][data-hint-type="debugging"]'));
    await tick();
    click(q('[data-role="reflection-submit"]'));
    await tick();
    await tick();
  }

  it("reaches zero after five deliveries and disables all hint buttons", async () => {
    const fake = new FakeApi(session({ consent_given: true }));
    await mount(fake);
    for (let i = 0; i < 5; i += 1) {
      await requestOnce();
    }
    expect(fake.hintBodies).toHaveLength(5);
    expect(q('[data-role="quota-meter"]')?.textContent).toBe("Hints left: 0");
    const buttons = qa('[data-role="hint-button"]') as HTMLButtonElement[];
    expect(buttons).toHaveLength(3);
    expect(buttons.every((b) => b.disabled)).toBe(true);

    // A sixth click is a no-op: no modal, no request.
    click(q('[data-role="hint-button"][data-hint-type="planning"]'));
    await tick();
    expect(q('[data-role="reflection-modal"]')).toBeNull();
    expect(fake.hintBodies).toHaveLength(5);
  });

  it("shows a quota toast when the service says exhausted", async () => {
    const fake = new FakeApi(session({ consent_given: true, remaining_quota: 1 }));
    fake.hintFailure = 409;
    await mount(fake);
    await requestOnce();
    expect(q('[data-role="toast"]')?.textContent).toContain("No hints left");
  });

  it("offers a retry toast on generation failure without losing quota", async () => {
    const fake = new FakeApi(session({ consent_given: true }));
    fake.hintFailure = 502;
    await mount(fake);
    await requestOnce();
    expect(q('[data-role="toast"]')?.textContent).toContain("Try again");
    expect(q('[data-role="quota-meter"]')?.textContent).toBe("Hints left: 5");
  });
});

describe("submission flow", () => {
  it("shows the score banner and solved badge", async () => {
    const fake = new FakeApi(session({ consent_given: true }));
    await mount(fake);
    click(q('[data-role="submit-button"]'));
    await tick();
    await tick();
    expect(fake.submitted).toHaveLength(1);
    expect(q('[data-role="solved-badge"]')).not.toBeNull();
    expect(q('[data-role="toast"][data-kind="banner"]')?.textContent).toContain("100%");
  });

  it("preserves the buffer and warns when the network is down", async () => {
    const fake = new FakeApi(session({ consent_given: true }));
    fake.submitFailure = true;
    const { panel } = await mount(fake);
    const editor = q('[data-role="editor"]') as HTMLTextAreaElement;
    editor.value = "def add(a, b): return a + b";
    editor.dispatchEvent(new Event("input"));
    click(q('[data-role="submit-button"]'));
    await tick();
    await tick();
    expect(q('[data-role="toast"][data-kind="warning"]')).not.toBeNull();
    expect(panel.state.code).toBe("def add(a, b): return a + b");
  });
});

describe("hint type descriptions dialog", () => {
  it("lists all three descriptions behind the ? button", async () => {
    const fake = new FakeApi(session());
    await mount(fake);
    click(q('[data-role="help-button"]'));
    await tick();
    const modal = q('[data-role="descriptions-modal"]');
    expect(modal).not.toBeNull();
    expect(modal?.textContent).toContain("steps");
    expect(modal?.textContent).toContain("find and fix a bug");
    expect(modal?.textContent).toContain("improve performance");
  });
});
