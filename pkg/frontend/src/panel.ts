// Question panel: prompt, code editor, the three hint buttons with a quota
// meter, consent modal, collapsible hint widgets with thumb ratings, and the
// submission flow. All rendering derives from PanelState; server calls go
// through the injected ApiClient.

import { ApiClient, ApiError } from "./api.js";
import {
  PanelState,
  beginRequest,
  deliverHint,
  failRequest,
  hintButtonsEnabled,
  recordSubmission,
  setRating,
  stateFromSession,
  toggleWidget,
} from "./state.js";
import type { HintType, RatingValue } from "./types.js";

const HINT_BUTTON_LABELS: Record<HintType, string> = {
  planning: "Planning hint",
  debugging: "Debugging hint",
  optimization: "Optimization hint",
};

const CONSENT_TEXT =
  "This hint system is part of a research initiative. Your interactions " +
  "are recorded anonymously, and hints are AI-generated and may not always " +
  "be correct. You can only request hints after agreeing.";

export interface PanelOptions {
  studentId: string;
  questionId: string;
  promptText: string;
  starterCode: string;
}

export class QuestionPanel {
  state: PanelState;

  constructor(
    private readonly root: HTMLElement,
    private readonly api: ApiClient,
    private readonly options: PanelOptions,
  ) {
    this.state = {
      questionId: options.questionId,
      code: options.starterCode,
      remainingQuota: 0,
      consented: false,
      pending: false,
      widgets: [],
      solved: false,
      bestScore: 0,
    };
  }

  /** Load the stored session and render; widgets restore collapsed. */
  async init(): Promise<void> {
    const session = await this.api.session(this.options.studentId, this.options.questionId);
    this.state = stateFromSession(session, this.state.code || this.options.starterCode);
    this.render();
  }

  // --- rendering --------------------------------------------------------------

  render(): void {
    const { root } = this;
    root.textContent = "";
    root.classList.add("question-panel");

    const header = document.createElement("header");
    const title = document.createElement("h2");
    title.textContent = this.options.questionId;
    header.appendChild(title);

    const meter = document.createElement("span");
    meter.dataset.role = "quota-meter";
    meter.textContent = `Hints left: ${this.state.remainingQuota}`;
    header.appendChild(meter);

    if (this.state.solved) {
      const badge = document.createElement("span");
      badge.dataset.role = "solved-badge";
      badge.textContent = "Solved";
      header.appendChild(badge);
    }
    root.appendChild(header);

    const prompt = document.createElement("p");
    prompt.className = "prompt";
    prompt.textContent = this.options.promptText;
    root.appendChild(prompt);

    const editor = document.createElement("textarea");
    editor.dataset.role = "editor";
    editor.value = this.state.code;
    editor.addEventListener("input", () => {
      this.state = { ...this.state, code: editor.value };
    });
    root.appendChild(editor);

    root.appendChild(this.renderHintButtons());
    root.appendChild(this.renderWidgets());
    root.appendChild(this.renderSubmitRow());
  }

  private renderHintButtons(): HTMLElement {
    const row = document.createElement("div");
    row.className = "hint-buttons";
    const enabled = hintButtonsEnabled(this.state);
    for (const hintType of Object.keys(HINT_BUTTON_LABELS) as HintType[]) {
      const button = document.createElement("button");
      button.dataset.role = "hint-button";
      button.dataset.hintType = hintType;
      button.textContent = HINT_BUTTON_LABELS[hintType];
      button.disabled = !enabled;
      button.addEventListener("click", () => {
        void this.requestHintFlow(hintType);
      });
      row.appendChild(button);
    }

    const help = document.createElement("button");
    help.dataset.role = "help-button";
    help.textContent = "?";
    help.title = "What do the hint types mean?";
    help.addEventListener("click", () => {
      void this.showDescriptions();
    });
    row.appendChild(help);

    if (this.state.pending) {
      const pending = document.createElement("span");
      pending.dataset.role = "pending";
      pending.textContent = "Generating hint...";
      row.appendChild(pending);
    }
    return row;
  }

  private renderWidgets(): HTMLElement {
    const list = document.createElement("div");
    list.dataset.role = "widgets";
    for (const widget of this.state.widgets) {
      const card = document.createElement("section");
      card.dataset.role = "hint-widget";
      card.dataset.hintId = widget.hintId;
      card.dataset.collapsed = String(widget.collapsed);

      const head = document.createElement("button");
      head.dataset.role = "widget-toggle";
      head.textContent = `${HINT_BUTTON_LABELS[widget.hintType]} ${widget.collapsed ? "▸" : "▾"}`;
      head.addEventListener("click", () => {
        this.onToggleWidget(widget.hintId);
      });
      card.appendChild(head);

      if (!widget.collapsed) {
        const body = document.createElement("div");
        body.dataset.role = "widget-body";
        const text = document.createElement("p");
        text.textContent = widget.hintText;
        body.appendChild(text);
        if (widget.reflection) {
          const reflection = document.createElement("p");
          reflection.className = "reflection";
          reflection.textContent = `Your reflection: ${widget.reflection}`;
          body.appendChild(reflection);
        }
        body.appendChild(this.renderRating(widget.hintId, widget.rating));
        card.appendChild(body);
      }
      list.appendChild(card);
    }
    return list;
  }

  private renderRating(hintId: string, current: RatingValue): HTMLElement {
    const row = document.createElement("div");
    row.className = "rating";
    for (const rating of ["up", "down"] as const) {
      const button = document.createElement("button");
      button.dataset.role = `rate-${rating}`;
      button.textContent = rating === "up" ? "👍" : "👎";
      if (current === rating) button.classList.add("active");
      button.addEventListener("click", () => {
        this.onRate(hintId, rating);
      });
      row.appendChild(button);
    }
    return row;
  }

  private renderSubmitRow(): HTMLElement {
    const row = document.createElement("div");
    row.className = "submit-row";
    const submit = document.createElement("button");
    submit.dataset.role = "submit-button";
    submit.textContent = "Submit solution";
    submit.addEventListener("click", () => {
      void this.submitSolution();
    });
    row.appendChild(submit);
    return row;
  }

  // --- flows ------------------------------------------------------------------

  async requestHintFlow(hintType: HintType): Promise<void> {
    if (!hintButtonsEnabled(this.state)) return;

    if (!this.state.consented) {
      const agreed = await this.showConsentModal();
      if (!agreed) return; // declined: nothing is sent
      await this.api.consent(this.options.studentId);
      this.state = { ...this.state, consented: true };
    }

    const reflection = await this.showReflectionDialog(hintType);
    if (reflection === null) return; // cancelled

    this.state = beginRequest(this.state);
    this.render();
    try {
      const response = await this.api.requestHint({
        student_id: this.options.studentId,
        question_id: this.options.questionId,
        hint_type: hintType,
        reflection,
        code: this.state.code,
      });
      this.state = deliverHint(this.state, response.hint, response.remaining_quota);
    } catch (error) {
      this.state = failRequest(this.state);
      if (error instanceof ApiError && error.status === 409) {
        this.toast("No hints left for this question.");
      } else if (error instanceof ApiError && error.status === 502) {
        this.toast("Hint generation failed; your quota is untouched. Try again.");
      } else {
        this.toast("Could not reach the hint service.");
      }
    }
    this.render();
  }

  private onToggleWidget(hintId: string): void {
    const { state, expanded } = toggleWidget(this.state, hintId);
    this.state = state;
    this.render();
    if (expanded) {
      // Optimistic: exactly one revisit event per expansion.
      void this.api.revisit(hintId).catch(() => undefined);
    }
  }

  private onRate(hintId: string, rating: "up" | "down"): void {
    this.state = setRating(this.state, hintId, rating);
    this.render();
    void this.api.rate(hintId, rating).catch(() => undefined);
  }

  async submitSolution(): Promise<void> {
    if (!this.state.code.trim()) {
      this.toast("Write some code before submitting.");
      return;
    }
    try {
      const result = await this.api.submit({
        student_id: this.options.studentId,
        question_id: this.options.questionId,
        code: this.state.code,
      });
      this.state = recordSubmission(this.state, result.score, result.solved);
      this.render();
      const percent = Math.round(result.score * 100);
      this.toast(result.solved ? `Score ${percent}% — solved!` : `Score ${percent}%`, "banner");
    } catch {
      // Network problem: keep the buffer, surface a warning.
      this.toast("Submission not sent; your code is preserved.", "warning");
    }
  }

  async showDescriptions(): Promise<void> {
    const descriptions = await this.api.hintTypeDescriptions();
    const modal = this.modalShell("descriptions-modal");
    for (const hintType of Object.keys(HINT_BUTTON_LABELS) as HintType[]) {
      const item = document.createElement("p");
      item.textContent = `${HINT_BUTTON_LABELS[hintType]}: ${descriptions[hintType]}`;
      modal.appendChild(item);
    }
    const close = document.createElement("button");
    close.dataset.role = "descriptions-close";
    close.textContent = "Close";
    close.addEventListener("click", () => modal.remove());
    modal.appendChild(close);
  }

  // --- modals and toasts --------------------------------------------------------

  private modalShell(role: string): HTMLElement {
    const modal = document.createElement("div");
    modal.dataset.role = role;
    modal.className = "modal";
    document.body.appendChild(modal);
    return modal;
  }

  private showConsentModal(): Promise<boolean> {
    return new Promise((resolve) => {
      const modal = this.modalShell("consent-modal");
      const text = document.createElement("p");
      text.textContent = CONSENT_TEXT;
      modal.appendChild(text);

      const accept = document.createElement("button");
      accept.dataset.role = "consent-accept";
      accept.textContent = "I agree";
      accept.addEventListener("click", () => {
        modal.remove();
        resolve(true);
      });
      const decline = document.createElement("button");
      decline.dataset.role = "consent-decline";
      decline.textContent = "Not now";
      decline.addEventListener("click", () => {
        modal.remove();
        resolve(false);
      });
      modal.appendChild(accept);
      modal.appendChild(decline);
    });
  }

  private showReflectionDialog(hintType: HintType): Promise<string | null> {
    return new Promise((resolve) => {
      const modal = this.modalShell("reflection-modal");
      const label = document.createElement("p");
      label.textContent =
        `Before your ${HINT_BUTTON_LABELS[hintType].toLowerCase()}: where are you ` +
        "stuck, or what have you tried? (optional)";
      modal.appendChild(label);

      const input = document.createElement("textarea");
      input.dataset.role = "reflection-input";
      modal.appendChild(input);

      const send = document.createElement("button");
      send.dataset.role = "reflection-submit";
      send.textContent = "Request hint";
      send.addEventListener("click", () => {
        modal.remove();
        resolve(input.value);
      });
      const cancel = document.createElement("button");
      cancel.dataset.role = "reflection-cancel";
      cancel.textContent = "Cancel";
      cancel.addEventListener("click", () => {
        modal.remove();
        resolve(null);
      });
      modal.appendChild(send);
      modal.appendChild(cancel);
    });
  }

  private toast(message: string, kind: string = "info"): void {
    const toast = document.createElement("div");
    toast.dataset.role = "toast";
    toast.dataset.kind = kind;
    toast.textContent = message;
    document.body.appendChild(toast);
    setTimeout(() => toast.remove(), 4000);
  }
}
