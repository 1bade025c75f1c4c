import { describe, expect, it } from 'vitest';
import { formatQuantity, parseQuantity } from '../src/quantity';

describe('parseQuantity', () => {
  it('treats an empty string as a valid omitted quantity', () => {
    expect(parseQuantity('', 'g')).toEqual({ ok: true });
    expect(parseQuantity('   ', 'ml')).toEqual({ ok: true });
  });

  it('parses a plain decimal with the chosen unit', () => {
    expect(parseQuantity('150', 'g')).toEqual({ ok: true, quantity: { value: 150, unit: 'g' } });
    expect(parseQuantity(' 2.5 ', 'ml')).toEqual({
      ok: true,
      quantity: { value: 2.5, unit: 'ml' },
    });
  });

  it('accepts zero', () => {
    expect(parseQuantity('0', 'g').ok).toBe(true);
  });

  it('rejects non-numeric input', () => {
    const result = parseQuantity('a lot', 'g');
    expect(result.ok).toBe(false);
    expect(result.error).toMatch(/number/);
  });

  it('rejects negative values and non-finite values', () => {
    expect(parseQuantity('-3', 'g').ok).toBe(false);
    expect(parseQuantity('Infinity', 'g').ok).toBe(false);
    expect(parseQuantity('NaN', 'g').ok).toBe(false);
  });
});

describe('formatQuantity', () => {
  it('renders value and unit, and empty for null', () => {
    expect(formatQuantity({ value: 150, unit: 'g' })).toBe('150 g');
    expect(formatQuantity(null)).toBe('');
  });
});
