import type {
  BackendInfo,
  PolarityName,
  RleMask,
  SaveResponse,
  SegmentResponse,
  SessionCreated,
  SessionSnapshot,
  WireItem,
  WirePoint,
} from './types';

export class ApiError extends Error {
  constructor(
    public status: number,
    public code: string,
    message: string,
  ) {
    super(message);
  }
}

async function unwrap<T>(resp: Response): Promise<T> {
  if (!resp.ok) {
    let code = 'internal';
    let message = resp.statusText;
    try {
      const body = await resp.json();
      code = body.code ?? code;
      message = body.message ?? message;
    } catch {
      // non-JSON error body; keep defaults
    }
    throw new ApiError(resp.status, code, message);
  }
  return resp.json() as Promise<T>;
}

export class ApiClient {
  constructor(private baseUrl: string = '') {}

  async createSession(
    image: File | Blob,
    backend?: string,
    categories?: File | Blob,
  ): Promise<SessionCreated> {
    const form = new FormData();
    form.append('image', image, 'image.png');
    if (backend) form.append('backend', backend);
    if (categories) form.append('categories', categories, 'categories.txt');
    return unwrap(await fetch(`${this.baseUrl}/sessions`, { method: 'POST', body: form }));
  }

  async snapshot(sessionId: string): Promise<SessionSnapshot> {
    return unwrap(await fetch(`${this.baseUrl}/sessions/${sessionId}`));
  }

  async addPoint(
    sessionId: string,
    x: number,
    y: number,
    polarity: PolarityName,
  ): Promise<{ points: WirePoint[] }> {
    return unwrap(
      await fetch(`${this.baseUrl}/sessions/${sessionId}/points`, {
        method: 'POST',
        headers: { 'Content-Type': 'application/json' },
        body: JSON.stringify({ x, y, polarity }),
      }),
    );
  }

  async undo(sessionId: string): Promise<{ points: WirePoint[]; pending_mask: RleMask | null }> {
    return unwrap(
      await fetch(`${this.baseUrl}/sessions/${sessionId}/undo`, { method: 'POST' }),
    );
  }

  async clear(sessionId: string): Promise<{ points: WirePoint[] }> {
    return unwrap(
      await fetch(`${this.baseUrl}/sessions/${sessionId}/clear`, { method: 'POST' }),
    );
  }

  async segment(sessionId: string): Promise<SegmentResponse> {
    return unwrap(
      await fetch(`${this.baseUrl}/sessions/${sessionId}/segment`, { method: 'POST' }),
    );
  }

  async brush(
    sessionId: string,
    path: [number, number][],
    radius: number,
    mode: 'add' | 'erase',
  ): Promise<{ mask: RleMask }> {
    return unwrap(
      await fetch(`${this.baseUrl}/sessions/${sessionId}/brush`, {
        method: 'POST',
        headers: { 'Content-Type': 'application/json' },
        body: JSON.stringify({ path, radius, mode }),
      }),
    );
  }

  async commitItem(
    sessionId: string,
    body: {
      category_id?: number;
      new_category_name?: string;
      quantity?: { value: number; unit: string };
    },
  ): Promise<WireItem> {
    return unwrap(
      await fetch(`${this.baseUrl}/sessions/${sessionId}/items`, {
        method: 'POST',
        headers: { 'Content-Type': 'application/json' },
        body: JSON.stringify(body),
      }),
    );
  }

  async deleteItem(sessionId: string, itemId: number): Promise<{ items: WireItem[] }> {
    return unwrap(
      await fetch(`${this.baseUrl}/sessions/${sessionId}/items/${itemId}`, {
        method: 'DELETE',
      }),
    );
  }

  async save(sessionId: string, outputDir: string): Promise<SaveResponse> {
    return unwrap(
      await fetch(`${this.baseUrl}/sessions/${sessionId}/save`, {
        method: 'POST',
        headers: { 'Content-Type': 'application/json' },
        body: JSON.stringify({ output_dir: outputDir }),
      }),
    );
  }

  async backends(): Promise<{ backends: BackendInfo[] }> {
    return unwrap(await fetch(`${this.baseUrl}/backends`));
  }

  overlayUrl(sessionId: string, pending: boolean): string {
    // cache-busted: the overlay changes whenever session state does
    return `${this.baseUrl}/sessions/${sessionId}/overlay?pending=${pending}&t=${Date.now()}`;
  }
}

// The server serializes requests per session; mirror that client-side so
// at most one mutation is in flight and replies apply in order.
export class RequestQueue {
  private chain: Promise<unknown> = Promise.resolve();

  enqueue<T>(task: () => Promise<T>): Promise<T> {
    const next = this.chain.then(task, task);
    this.chain = next.catch(() => undefined);
    return next;
  }
}
