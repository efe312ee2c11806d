// One function per service endpoint; every editor gesture funnels through
// exactly one of these calls.

import type {
  ApiError,
  DatasetHandle,
  FactRecord,
  GenerateParams,
  RenderMode,
  ShareResponse,
  StoryDocument,
} from "./types.js";

export class ServiceError extends Error {
  constructor(
    public readonly status: number,
    public readonly body: ApiError,
  ) {
    super(body.message);
  }
}

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class StoryApi {
  constructor(
    private readonly baseUrl: string = "",
    private readonly fetchImpl: FetchLike = fetch.bind(globalThis),
  ) {}

  private async request<T>(
    method: string,
    path: string,
    body?: unknown,
    raw?: BodyInit,
  ): Promise<T> {
    const init: RequestInit = { method };
    if (raw !== undefined) {
      init.body = raw;
    } else if (body !== undefined) {
      init.body = JSON.stringify(body);
      init.headers = { "Content-Type": "application/json" };
    }
    const response = await this.fetchImpl(`${this.baseUrl}${path}`, init);
    const text = await response.text();
    if (!response.ok) {
      let parsed: ApiError;
      try {
        parsed = JSON.parse(text) as ApiError;
      } catch {
        parsed = { code: "Unknown", message: text, details: [] };
      }
      throw new ServiceError(response.status, parsed);
    }
    return JSON.parse(text) as T;
  }

  uploadDataset(csv: Blob | string): Promise<DatasetHandle> {
    return this.request<DatasetHandle>("POST", "/datasets", undefined, csv);
  }

  getDataset(datasetId: string): Promise<DatasetHandle> {
    return this.request<DatasetHandle>("GET", `/datasets/${datasetId}`);
  }

  generateStory(datasetId: string, params: GenerateParams): Promise<StoryDocument> {
    return this.request<StoryDocument>(
      "POST",
      `/datasets/${datasetId}/stories`,
      params,
    );
  }

  getStory(storyId: string): Promise<StoryDocument> {
    return this.request<StoryDocument>("GET", `/stories/${storyId}`);
  }

  editFact(
    storyId: string,
    revision: number,
    factIndex: number,
    fact: FactRecord,
    chart?: string,
  ): Promise<StoryDocument> {
    const body: Record<string, unknown> = { revision, fact_index: factIndex, fact };
    if (chart !== undefined) body.chart = chart;
    return this.request<StoryDocument>("PATCH", `/stories/${storyId}`, body);
  }

  addFact(
    storyId: string,
    revision: number,
    fact: FactRecord,
    index?: number,
  ): Promise<StoryDocument> {
    const body: Record<string, unknown> = { revision, fact };
    if (index !== undefined) body.index = index;
    return this.request<StoryDocument>("POST", `/stories/${storyId}/facts`, body);
  }

  removeFact(storyId: string, revision: number, index: number): Promise<StoryDocument> {
    return this.request<StoryDocument>(
      "DELETE",
      `/stories/${storyId}/facts/${index}?revision=${revision}`,
    );
  }

  reorderFacts(storyId: string, revision: number, order: number[]): Promise<StoryDocument> {
    return this.request<StoryDocument>("POST", `/stories/${storyId}/order`, {
      revision,
      order,
    });
  }

  async renderStory(storyId: string, mode: RenderMode): Promise<string> {
    const response = await this.fetchImpl(
      `${this.baseUrl}/stories/${storyId}/render?mode=${mode}`,
      { method: "GET" },
    );
    const text = await response.text();
    if (!response.ok) {
      throw new ServiceError(response.status, {
        code: "RenderFailed",
        message: text,
        details: [],
      });
    }
    return text;
  }

  shareStory(storyId: string, mode: RenderMode): Promise<ShareResponse> {
    return this.request<ShareResponse>("POST", `/stories/${storyId}/share`, { mode });
  }
}
