import type {
  RleMask,
  SessionCreated,
  SessionSnapshot,
  WireCategory,
  WireItem,
  WirePoint,
} from './types';

export type Tool = 'click' | 'brush';

// The server is the single source of truth: every field here is either a
// verbatim copy of an acknowledged response or pure UI chrome (tool,
// radius). Nothing is rendered that the server has not returned.
export interface UiSessionState {
  sessionId: string;
  width: number;
  height: number;
  backend: string;
  supportsExclude: boolean;
  points: WirePoint[];
  pendingMask: RleMask | null;
  items: WireItem[];
  categories: WireCategory[];
  tool: Tool;
  brushRadius: number;
  brushMode: 'add' | 'erase';
  lastLatencyMs: number | null;
  lastScore: number | null;
}

export function initialState(created: SessionCreated): UiSessionState {
  return {
    sessionId: created.session_id,
    width: created.width,
    height: created.height,
    backend: created.backend,
    supportsExclude: created.backend !== 'mealsam',
    points: [],
    pendingMask: null,
    items: [],
    categories: created.categories,
    tool: 'click',
    brushRadius: 8,
    brushMode: 'erase',
    lastLatencyMs: null,
    lastScore: null,
  };
}

export function applyPoints(state: UiSessionState, points: WirePoint[]): UiSessionState {
  // adding a point invalidates any previously predicted mask server-side
  return { ...state, points, pendingMask: null };
}

export function applySegment(
  state: UiSessionState,
  mask: RleMask,
  score: number,
  latencyMs: number,
): UiSessionState {
  return { ...state, pendingMask: mask, lastScore: score, lastLatencyMs: latencyMs };
}

export function applyBrush(state: UiSessionState, mask: RleMask): UiSessionState {
  return { ...state, pendingMask: mask };
}

export function applyUndo(
  state: UiSessionState,
  points: WirePoint[],
  pendingMask: RleMask | null,
): UiSessionState {
  return { ...state, points, pendingMask };
}

export function applyClear(state: UiSessionState): UiSessionState {
  return { ...state, points: [], pendingMask: null };
}

export function applyCommittedItem(state: UiSessionState, item: WireItem): UiSessionState {
  const categories = state.categories.some((c) => c.id === item.category_id)
    ? state.categories
    : [
        ...state.categories,
        {
          id: item.category_id,
          name: item.category_name,
          color: item.color,
          source: 'user' as const,
        },
      ];
  return {
    ...state,
    items: [...state.items, item],
    categories,
    points: [],
    pendingMask: null,
    lastScore: null,
    lastLatencyMs: null,
  };
}

export function applyItems(state: UiSessionState, items: WireItem[]): UiSessionState {
  return { ...state, items };
}

export function applySnapshot(state: UiSessionState, snap: SessionSnapshot): UiSessionState {
  return {
    ...state,
    sessionId: snap.session_id,
    width: snap.width,
    height: snap.height,
    backend: snap.backend,
    supportsExclude: snap.backend !== 'mealsam',
    points: snap.points,
    pendingMask: snap.pending_mask,
    items: snap.items,
    categories: snap.categories,
  };
}

export function canSegment(state: UiSessionState): boolean {
  return state.points.some(([, , polarity]) => polarity === 'include');
}

export function canBrush(state: UiSessionState): boolean {
  return state.pendingMask !== null;
}

export function formatCoordinates(points: WirePoint[]): string[] {
  return points.map(([x, y, polarity]) =>
    polarity === 'include' ? `(${x}, ${y})` : `(${x}, ${y}) excluded`,
  );
}
