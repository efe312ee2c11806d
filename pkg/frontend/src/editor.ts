// Editor state machine: mirrors the server's StoryDocument, allows one
// in-flight mutation at a time, and always replaces local state with the
// server's echo (the service is the single source of truth for every score,
// caption and chart).

import { ServiceError, StoryApi } from "./api.js";
import type {
  DatasetHandle,
  FactRecord,
  GenerateParams,
  RenderMode,
  ShareResponse,
  StoryDocument,
} from "./types.js";

export type EditorEvent =
  | { kind: "dataset"; dataset: DatasetHandle }
  | { kind: "story"; document: StoryDocument }
  | { kind: "mode"; mode: RenderMode; body: string }
  | { kind: "share"; share: ShareResponse }
  | { kind: "conflict"; message: string }
  | { kind: "violations"; problems: string[] }
  | { kind: "error"; message: string };

export type Listener = (event: EditorEvent) => void;

export class EditorState {
  dataset: DatasetHandle | null = null;
  document: StoryDocument | null = null;
  selectedFact = 0;
  mode: RenderMode = "storyline";
  private busy = false;
  private listeners: Listener[] = [];

  constructor(private readonly api: StoryApi) {}

  subscribe(listener: Listener): void {
    this.listeners.push(listener);
  }

  private emit(event: EditorEvent): void {
    for (const listener of this.listeners) listener(event);
  }

  private accept(document: StoryDocument): StoryDocument {
    this.document = document;
    if (this.selectedFact >= document.story.facts.length) {
      this.selectedFact = Math.max(0, document.story.facts.length - 1);
    }
    this.emit({ kind: "story", document });
    return document;
  }

  /** Wrap a mutation: one in flight at a time, server echo authoritative. */
  private async mutate(
    action: () => Promise<StoryDocument>,
  ): Promise<StoryDocument | null> {
    if (this.busy) {
      this.emit({ kind: "error", message: "another change is still in flight" });
      return null;
    }
    this.busy = true;
    try {
      return this.accept(await action());
    } catch (error) {
      if (error instanceof ServiceError && error.status === 409) {
        this.emit({ kind: "conflict", message: error.body.message });
        // conflict recovery: reload the authoritative document
        if (this.document) {
          this.accept(await this.api.getStory(this.document.id));
        }
      } else if (error instanceof ServiceError && error.status === 422) {
        this.emit({
          kind: "violations",
          problems: (error.body.details as string[]) ?? [error.body.message],
        });
      } else {
        this.emit({ kind: "error", message: String(error) });
      }
      return null;
    } finally {
      this.busy = false;
    }
  }

  // --- gestures (each maps to exactly one API call) ------------------------

  async uploadCsv(csv: Blob | string): Promise<DatasetHandle | null> {
    try {
      this.dataset = await this.api.uploadDataset(csv);
      this.emit({ kind: "dataset", dataset: this.dataset });
      return this.dataset;
    } catch (error) {
      this.emit({ kind: "error", message: String(error) });
      return null;
    }
  }

  async generate(params: GenerateParams): Promise<StoryDocument | null> {
    if (!this.dataset) {
      this.emit({ kind: "error", message: "upload a dataset first" });
      return null;
    }
    const datasetId = this.dataset.id;
    return this.mutate(() => this.api.generateStory(datasetId, params));
  }

  async editFact(index: number, fact: FactRecord, chart?: string) {
    const document = this.document;
    if (!document) return null;
    return this.mutate(() =>
      this.api.editFact(document.id, document.revision, index, fact, chart),
    );
  }

  async addFact(fact: FactRecord, index?: number) {
    const document = this.document;
    if (!document) return null;
    return this.mutate(() =>
      this.api.addFact(document.id, document.revision, fact, index),
    );
  }

  async removeFact(index: number) {
    const document = this.document;
    if (!document) return null;
    return this.mutate(() =>
      this.api.removeFact(document.id, document.revision, index),
    );
  }

  /** Drag-and-drop reorder: move the fact at `from` in front of `to`. */
  async moveFact(from: number, to: number) {
    const document = this.document;
    if (!document) return null;
    const n = document.story.facts.length;
    const order = [...Array(n).keys()];
    const [lifted] = order.splice(from, 1);
    order.splice(to, 0, lifted);
    return this.mutate(() =>
      this.api.reorderFacts(document.id, document.revision, order),
    );
  }

  async switchMode(mode: RenderMode): Promise<string | null> {
    const document = this.document;
    if (!document) return null;
    try {
      const body = await this.api.renderStory(document.id, mode);
      this.mode = mode;
      this.emit({ kind: "mode", mode, body });
      return body;
    } catch (error) {
      this.emit({ kind: "error", message: String(error) });
      return null;
    }
  }

  async share(): Promise<ShareResponse | null> {
    const document = this.document;
    if (!document) return null;
    try {
      const share = await this.api.shareStory(document.id, this.mode);
      this.emit({ kind: "share", share });
      return share;
    } catch (error) {
      this.emit({ kind: "error", message: String(error) });
      return null;
    }
  }

  // --- selectors for the views (all values come from the server document) --

  factSummary(index: number) {
    const document = this.document;
    if (!document) return null;
    return {
      fact: document.story.facts[index],
      caption: document.captions[index],
      chart: document.charts[index],
      score: document.scores[index],
      relationBefore: index > 0 ? document.story.relations[index - 1] : null,
    };
  }
}
