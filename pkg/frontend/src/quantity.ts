import type { WireQuantity } from './types';

export interface QuantityParse {
  ok: boolean;
  quantity?: WireQuantity;
  error?: string;
}

// Client-side validation so bad quantities never reach the server.
export function parseQuantity(text: string, unit: 'g' | 'ml'): QuantityParse {
  const trimmed = text.trim();
  if (trimmed === '') {
    return { ok: true }; // quantity is optional
  }
  const value = Number(trimmed);
  if (!Number.isFinite(value)) {
    return { ok: false, error: 'quantity must be a number' };
  }
  if (value < 0) {
    return { ok: false, error: 'quantity must not be negative' };
  }
  return { ok: true, quantity: { value, unit } };
}

export function formatQuantity(q: WireQuantity | null): string {
  return q === null ? '' : `${q.value} ${q.unit}`;
}
