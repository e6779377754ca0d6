// Panel state and its pure transitions. The DOM layer renders from this
// state only, which keeps the gating rules (quota, pending request,
// collapsed-by-default) testable without a browser.

import type { HintPayload, HintType, RatingValue, SessionPayload } from "./types.js";

export interface HintWidget {
  hintId: string;
  hintType: HintType;
  hintText: string;
  reflection: string;
  rating: RatingValue;
  revisitCount: number;
  collapsed: boolean;
}

export interface PanelState {
  questionId: string;
  code: string;
  remainingQuota: number;
  consented: boolean;
  pending: boolean;
  widgets: HintWidget[];
  solved: boolean;
  bestScore: number;
}

function widgetFromPayload(payload: HintPayload, collapsed: boolean): HintWidget {
  return {
    hintId: payload.hint_id,
    hintType: payload.hint_type,
    hintText: payload.hint_text,
    reflection: payload.reflection,
    rating: payload.rating ?? "unrated",
    revisitCount: payload.revisit_count ?? 0,
    collapsed,
  };
}

export function stateFromSession(session: SessionPayload, code: string): PanelState {
  return {
    questionId: session.question_id,
    code,
    remainingQuota: session.remaining_quota,
    consented: session.consent_given,
    pending: false,
    // Restored widgets are always collapsed on load, whatever happened before.
    widgets: session.hints.map((h) => widgetFromPayload(h, true)),
    solved: session.solved,
    bestScore: session.best_score,
  };
}

// Hint buttons stay usable before consent (the first click opens the consent
// modal); they lock while a request is in flight or once the quota is gone.
export function hintButtonsEnabled(state: PanelState): boolean {
  return !state.pending && state.remainingQuota > 0;
}

export function beginRequest(state: PanelState): PanelState {
  return { ...state, pending: true };
}

export function failRequest(state: PanelState): PanelState {
  return { ...state, pending: false };
}

export function deliverHint(
  state: PanelState,
  hint: HintPayload,
  remainingQuota: number,
): PanelState {
  return {
    ...state,
    pending: false,
    remainingQuota,
    // A hint that just arrived is shown expanded; reloads re-collapse it.
    widgets: [...state.widgets, widgetFromPayload(hint, hint.collapsed)],
  };
}

export interface ToggleResult {
  state: PanelState;
  expanded: boolean; // true when this toggle revealed the hint (one revisit)
}

export function toggleWidget(state: PanelState, hintId: string): ToggleResult {
  let expanded = false;
  const widgets = state.widgets.map((w) => {
    if (w.hintId !== hintId) return w;
    expanded = w.collapsed;
    return {
      ...w,
      collapsed: !w.collapsed,
      revisitCount: w.collapsed ? w.revisitCount + 1 : w.revisitCount,
    };
  });
  return { state: { ...state, widgets }, expanded };
}

export function setRating(state: PanelState, hintId: string, rating: RatingValue): PanelState {
  return {
    ...state,
    widgets: state.widgets.map((w) => (w.hintId === hintId ? { ...w, rating } : w)),
  };
}

export function recordSubmission(state: PanelState, score: number, solved: boolean): PanelState {
  return {
    ...state,
    solved: state.solved || solved,
    bestScore: Math.max(state.bestScore, score),
  };
}
