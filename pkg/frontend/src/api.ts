// Typed client for the read-only service, with a slice cache keyed by
// (step, layout) so layout and color toggles never refetch coordinates, and a
// latest-wins guard so slider drags cannot interleave stale responses.

import type {
  LayoutMode,
  LayoutsResponse,
  SearchResponse,
  SliceResponse,
  StatsResponse,
  TimestepsResponse,
  TxResponse,
} from "./types.js";

export type Fetcher = (url: string) => Promise<unknown>;

async function defaultFetcher(url: string): Promise<unknown> {
  const resp = await fetch(url);
  if (!resp.ok) {
    const body = await resp.text();
    throw new Error(`${resp.status} ${url}: ${body.slice(0, 200)}`);
  }
  return resp.json();
}

export class ApiClient {
  private slices = new Map<string, SliceResponse>();
  private generation = 0;

  constructor(
    private base = "/api",
    private fetcher: Fetcher = defaultFetcher,
  ) {}

  timesteps(): Promise<TimestepsResponse> {
    return this.fetcher(`${this.base}/timesteps`) as Promise<TimestepsResponse>;
  }

  layouts(): Promise<LayoutsResponse> {
    return this.fetcher(`${this.base}/layouts`) as Promise<LayoutsResponse>;
  }

  stats(step: number): Promise<StatsResponse> {
    return this.fetcher(`${this.base}/stats/${step}`) as Promise<StatsResponse>;
  }

  tx(txId: number): Promise<TxResponse> {
    return this.fetcher(`${this.base}/tx/${txId}`) as Promise<TxResponse>;
  }

  search(query: string): Promise<SearchResponse> {
    return this.fetcher(
      `${this.base}/search?q=${encodeURIComponent(query)}`,
    ) as Promise<SearchResponse>;
  }

  hasCachedSlice(step: number, layout: LayoutMode): boolean {
    return this.slices.has(`${step}/${layout}`);
  }

  async slice(step: number, layout: LayoutMode): Promise<SliceResponse> {
    const key = `${step}/${layout}`;
    const cached = this.slices.get(key);
    if (cached) return cached;
    const body = (await this.fetcher(
      `${this.base}/slice/${step}?layout=${layout}`,
    )) as SliceResponse;
    this.slices.set(key, body);
    return body;
  }

  /** Prefetch both layout variants so the layout toggle is instant. */
  async prefetchStep(step: number, layouts: LayoutMode[]): Promise<void> {
    await Promise.all(layouts.map((mode) => this.slice(step, mode).catch(() => undefined)));
  }

  /**
   * Latest-wins slice request: during a slider drag only the most recent
   * step's response is delivered; superseded calls resolve to null.
   */
  async sliceLatest(step: number, layout: LayoutMode): Promise<SliceResponse | null> {
    const ticket = ++this.generation;
    const body = await this.slice(step, layout);
    return ticket === this.generation ? body : null;
  }
}
