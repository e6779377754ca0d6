// Bootstrap: fetch the question list, offer a selector, mount one panel per
// selected question. The student id comes from ?student= or localStorage.

import { ApiClient } from "./api.js";
import { QuestionPanel } from "./panel.js";

function studentId(): string {
  const fromQuery = new URLSearchParams(window.location.search).get("student");
  if (fromQuery) {
    localStorage.setItem("hintkit-student", fromQuery);
    return fromQuery;
  }
  return localStorage.getItem("hintkit-student") ?? "demo-student";
}

async function boot(): Promise<void> {
  const api = new ApiClient("");
  const app = document.getElementById("app");
  if (!app) throw new Error("missing #app mount point");

  const questions = await api.questions();
  const selector = document.createElement("select");
  selector.dataset.role = "question-selector";
  for (const question of questions) {
    const option = document.createElement("option");
    option.value = question.question_id;
    option.textContent = `${question.assignment_id} / ${question.question_id}`;
    selector.appendChild(option);
  }
  app.appendChild(selector);

  const mount = document.createElement("div");
  app.appendChild(mount);

  const open = async (questionId: string) => {
    const question = questions.find((q) => q.question_id === questionId);
    if (!question) return;
    const panel = new QuestionPanel(mount, api, {
      studentId: studentId(),
      questionId: question.question_id,
      promptText: question.prompt_text,
      starterCode: question.starter_code,
    });
    await panel.init();
  };

  selector.addEventListener("change", () => {
    void open(selector.value);
  });
  if (questions.length) {
    await open(questions[0].question_id);
  }
}

document.addEventListener("DOMContentLoaded", () => {
  void boot();
});
