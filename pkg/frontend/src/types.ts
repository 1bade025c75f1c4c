// Wire types mirroring the annotation server's JSON responses.

export type PolarityName = 'include' | 'exclude';

export type WirePoint = [number, number, PolarityName];

export interface RleMask {
  width: number;
  height: number;
  runs: number[];
}

export interface WireCategory {
  id: number;
  name: string;
  color: [number, number, number];
  source: 'file' | 'user';
}

export interface WireQuantity {
  value: number;
  unit: 'g' | 'ml';
}

export interface WireItem {
  item_id: number;
  category_id: number;
  category_name: string;
  color: [number, number, number];
  quantity: WireQuantity | null;
  mask: RleMask;
}

export interface SessionCreated {
  session_id: string;
  width: number;
  height: number;
  backend: string;
  fallback_backend: boolean;
  categories: WireCategory[];
}

export interface SessionSnapshot {
  session_id: string;
  width: number;
  height: number;
  backend: string;
  points: WirePoint[];
  pending_mask: RleMask | null;
  items: WireItem[];
  categories: WireCategory[];
}

export interface SegmentResponse {
  mask: RleMask;
  score: number;
  latency_ms: number;
}

export interface SaveResponse {
  paths: Record<string, string>;
  total_annotation_seconds: number;
}

export interface BackendInfo {
  kind: string;
  loadable: boolean;
  supports_background_points: boolean;
}
