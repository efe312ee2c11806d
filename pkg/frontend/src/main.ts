// Browser entry point: wires the three views (storyline, fact form, story
// visualization) to the editor state over the service API.

import { StoryApi } from "./api.js";
import { EditorState } from "./editor.js";
import { createRewardWidget } from "./rewardWidget.js";
import type { FactRecord, RenderMode, StoryDocument } from "./types.js";

const api = new StoryApi("");
const editor = new EditorState(api);

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing #${id}`);
  return node as T;
}

function factLabel(fact: FactRecord): string {
  const measure = fact.measure[0]?.field ?? "";
  return `${fact.type}${measure ? ` · ${measure}` : ""}`;
}

function renderStoryline(document_: StoryDocument): void {
  const strip = el<HTMLDivElement>("pieces");
  strip.innerHTML = "";
  document_.story.facts.forEach((fact, index) => {
    const piece = document.createElement("div");
    piece.className = "piece" + (index === editor.selectedFact ? " selected" : "");
    piece.draggable = true;
    piece.dataset.index = String(index);

    const head = document.createElement("div");
    head.className = "piece-head";
    head.textContent = `${index + 1}. ${factLabel(fact)}`;
    piece.appendChild(head);

    const caption = document.createElement("div");
    caption.className = "piece-caption";
    caption.textContent = document_.captions[index];
    piece.appendChild(caption);

    const score = document_.scores[index];
    const badge = document.createElement("div");
    badge.className = "piece-score";
    badge.textContent = `importance ${score.importance.toFixed(2)} · S ${score.significance.toFixed(2)}`;
    piece.appendChild(badge);

    const remove = document.createElement("button");
    remove.textContent = "remove";
    remove.addEventListener("click", (event) => {
      event.stopPropagation();
      void editor.removeFact(index);
    });
    piece.appendChild(remove);

    piece.addEventListener("click", () => {
      editor.selectedFact = index;
      renderStoryline(document_);
      renderFactForm(document_);
    });
    piece.addEventListener("dragstart", (event) => {
      event.dataTransfer?.setData("text/plain", String(index));
    });
    piece.addEventListener("dragover", (event) => event.preventDefault());
    piece.addEventListener("drop", (event) => {
      event.preventDefault();
      const from = Number(event.dataTransfer?.getData("text/plain"));
      void editor.moveFact(from, index);
    });
    strip.appendChild(piece);
  });

  const criteria = document_.story.criteria;
  el("criteria").textContent =
    `reward ${criteria.reward.toFixed(3)} · D ${criteria.diversity.toFixed(2)}` +
    ` · L ${criteria.logicality.toFixed(2)} · C ${criteria.integrity.toFixed(2)}` +
    ` · H ${criteria.entropy.toFixed(2)}`;
}

function renderFactForm(document_: StoryDocument): void {
  const summary = editor.factSummary(editor.selectedFact);
  if (!summary) return;
  el<HTMLTextAreaElement>("fact-json").value = JSON.stringify(summary.fact, null, 2);
  el("fact-caption").textContent = summary.caption;
  el("fact-score").textContent =
    `P=${summary.score.probability.toExponential(2)}, ` +
    `bits=${summary.score.self_information_bits.toFixed(2)}, ` +
    `S=${summary.score.significance.toFixed(3)}, ` +
    `importance=${summary.score.importance.toFixed(3)}`;
  el("fact-chart").textContent = `${summary.chart.chart} chart`;
}

function main(): void {
  const widget = createRewardWidget({ size: 170 });
  el("reward-widget").appendChild(widget.element);

  editor.subscribe((event) => {
    const status = el("status");
    if (event.kind === "dataset") {
      status.textContent = `dataset ${event.dataset.id}: ${event.dataset.row_count} rows`;
    } else if (event.kind === "story") {
      status.textContent = `story ${event.document.id} rev ${event.document.revision}`;
      renderStoryline(event.document);
      renderFactForm(event.document);
      void editor.switchMode(editor.mode);
    } else if (event.kind === "mode") {
      el<HTMLIFrameElement>("preview").srcdoc = event.body;
    } else if (event.kind === "share") {
      status.textContent = `shared at ${event.share.url}`;
      el<HTMLTextAreaElement>("embed").value = event.share.embed;
    } else if (event.kind === "conflict") {
      status.textContent = `conflict: ${event.message} (reloaded)`;
    } else if (event.kind === "violations") {
      status.textContent = `invalid fact: ${event.problems.join("; ")}`;
    } else {
      status.textContent = event.message;
    }
  });

  el<HTMLInputElement>("csv-file").addEventListener("change", async (event) => {
    const file = (event.target as HTMLInputElement).files?.[0];
    if (file) await editor.uploadCsv(file);
  });

  el<HTMLButtonElement>("generate").addEventListener("click", () => {
    const [diversity, logicality, integrity] = widget.getWeights();
    void editor.generate({
      goal: {
        max_length: Number(el<HTMLInputElement>("length").value),
        time_budget: Number(el<HTMLInputElement>("time-limit").value),
      },
      weights: { diversity, logicality, integrity },
      chart_diversity: Number(el<HTMLInputElement>("chart-diversity").value),
      seed: Math.floor(Math.random() * 1e6),
    });
  });

  el<HTMLButtonElement>("apply-fact").addEventListener("click", () => {
    const fact = JSON.parse(el<HTMLTextAreaElement>("fact-json").value) as FactRecord;
    void editor.editFact(editor.selectedFact, fact);
  });

  el<HTMLButtonElement>("add-fact").addEventListener("click", () => {
    const fact = JSON.parse(el<HTMLTextAreaElement>("fact-json").value) as FactRecord;
    void editor.addFact(fact);
  });

  el<HTMLSelectElement>("mode").addEventListener("change", (event) => {
    void editor.switchMode((event.target as HTMLSelectElement).value as RenderMode);
  });

  el<HTMLButtonElement>("share").addEventListener("click", () => {
    void editor.share();
  });
}

main();
