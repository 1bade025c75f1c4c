import { afterEach, describe, expect, it, vi } from 'vitest';
import { ApiClient, ApiError, RequestQueue } from '../src/api';

function jsonResponse(body: unknown, status = 200): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { 'Content-Type': 'application/json' },
  });
}

afterEach(() => {
  vi.restoreAllMocks();
});

describe('ApiClient', () => {
  it('posts a point and returns the parsed body', async () => {
    const fetchMock = vi
      .spyOn(globalThis, 'fetch')
      .mockResolvedValue(jsonResponse({ points: [[3, 4, 'include']] }));
    const client = new ApiClient('http://api');
    const resp = await client.addPoint('s1', 3, 4, 'include');
    expect(resp.points).toEqual([[3, 4, 'include']]);
    const [url, init] = fetchMock.mock.calls[0];
    expect(url).toBe('http://api/sessions/s1/points');
    expect(init?.method).toBe('POST');
    expect(JSON.parse(init?.body as string)).toEqual({ x: 3, y: 4, polarity: 'include' });
  });

  it('sends session creation as multipart form data', async () => {
    const fetchMock = vi.spyOn(globalThis, 'fetch').mockResolvedValue(
      jsonResponse({
        session_id: 's1',
        width: 4,
        height: 4,
        backend: 'regiongrow',
        fallback_backend: true,
        categories: [],
      }),
    );
    const client = new ApiClient('');
    const created = await client.createSession(new Blob(['x']), 'regiongrow');
    expect(created.fallback_backend).toBe(true);
    const [, init] = fetchMock.mock.calls[0];
    const form = init?.body as FormData;
    expect(form).toBeInstanceOf(FormData);
    expect(form.get('backend')).toBe('regiongrow');
    expect(form.get('image')).toBeInstanceOf(Blob);
    expect(form.get('categories')).toBeNull();
  });

  it('raises ApiError carrying the server error code', async () => {
    vi.spyOn(globalThis, 'fetch').mockResolvedValue(
      jsonResponse({ code: 'empty_prompt', message: 'no points' }, 409),
    );
    const client = new ApiClient('');
    const err = await client.segment('s1').catch((e) => e);
    expect(err).toBeInstanceOf(ApiError);
    expect(err.status).toBe(409);
    expect(err.code).toBe('empty_prompt');
    expect(err.message).toBe('no points');
  });

  it('falls back to the HTTP status text for non-JSON error bodies', async () => {
    vi.spyOn(globalThis, 'fetch').mockResolvedValue(
      new Response('boom', { status: 500, statusText: 'Internal Server Error' }),
    );
    const err = await new ApiClient('').undo('s1').catch((e) => e);
    expect(err).toBeInstanceOf(ApiError);
    expect(err.code).toBe('internal');
    expect(err.message).toBe('Internal Server Error');
  });

  it('uses DELETE for item removal', async () => {
    const fetchMock = vi
      .spyOn(globalThis, 'fetch')
      .mockResolvedValue(jsonResponse({ items: [] }));
    await new ApiClient('').deleteItem('s1', 3);
    const [url, init] = fetchMock.mock.calls[0];
    expect(url).toBe('/sessions/s1/items/3');
    expect(init?.method).toBe('DELETE');
  });

  it('cache-busts overlay URLs', () => {
    const client = new ApiClient('');
    const a = client.overlayUrl('s1', true);
    expect(a).toMatch(/^\/sessions\/s1\/overlay\?pending=true&t=\d+$/);
  });
});

describe('RequestQueue', () => {
  it('runs tasks strictly one at a time, in order', async () => {
    const queue = new RequestQueue();
    const events: string[] = [];
    let release!: () => void;
    const gate = new Promise<void>((resolve) => (release = resolve));

    const first = queue.enqueue(async () => {
      events.push('first:start');
      await gate;
      events.push('first:end');
      return 1;
    });
    const second = queue.enqueue(async () => {
      events.push('second:start');
      return 2;
    });

    await Promise.resolve();
    expect(events).toEqual(['first:start']);
    release();
    expect(await first).toBe(1);
    expect(await second).toBe(2);
    expect(events).toEqual(['first:start', 'first:end', 'second:start']);
  });

  it('keeps serving tasks after one rejects', async () => {
    const queue = new RequestQueue();
    const failed = queue.enqueue(async () => {
      throw new Error('nope');
    });
    await expect(failed).rejects.toThrow('nope');
    await expect(queue.enqueue(async () => 'ok')).resolves.toBe('ok');
  });
});
