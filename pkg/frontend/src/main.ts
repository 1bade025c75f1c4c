import { ApiClient, ApiError, RequestQueue } from './api';
import { decodeRle, foregroundCount, maskToRgba } from './rle';
import { parseQuantity, formatQuantity } from './quantity';
import {
  applyBrush,
  applyClear,
  applyCommittedItem,
  applyItems,
  applyPoints,
  applySegment,
  applyUndo,
  canBrush,
  canSegment,
  formatCoordinates,
  initialState,
  UiSessionState,
} from './state';
import {
  fitToViewport,
  imageToScreen,
  pan,
  screenToPixel,
  ViewTransform,
  zoomAt,
} from './transform';

const api = new ApiClient('');
const queue = new RequestQueue();

let state: UiSessionState | null = null;
let view: ViewTransform = { scale: 1, offsetX: 0, offsetY: 0 };
let imageBitmap: ImageBitmap | null = null;
let brushPath: [number, number][] = [];
let brushing = false;

const $ = <T extends HTMLElement>(id: string): T => {
  const el = document.getElementById(id);
  if (!el) throw new Error(`missing element #${id}`);
  return el as T;
};

const mainCanvas = $('main-canvas') as unknown as HTMLCanvasElement;
const maskCanvas = $('mask-canvas') as unknown as HTMLCanvasElement;
const overlayCanvas = $('overlay-canvas') as unknown as HTMLCanvasElement;
const statusEl = $('status');
const coordsEl = $('coords');
const itemsEl = $('items');
const latencyEl = $('latency');

function setStatus(text: string, isError = false) {
  statusEl.textContent = text;
  statusEl.className = isError ? 'status error' : 'status';
}

function surface(err: unknown) {
  if (err instanceof ApiError) {
    setStatus(`${err.code}: ${err.message}`, true);
  } else {
    setStatus(String(err), true);
  }
}

// ---------------------------------------------------------------------------
// rendering
// ---------------------------------------------------------------------------

function drawMarkers(ctx: CanvasRenderingContext2D) {
  if (!state) return;
  for (const [x, y, polarity] of state.points) {
    const [sx, sy] = imageToScreen(view, x + 0.5, y + 0.5);
    ctx.beginPath();
    if (polarity === 'include') {
      // include clicks are blue dots
      ctx.fillStyle = '#1e62ff';
      ctx.arc(sx, sy, 4, 0, Math.PI * 2);
      ctx.fill();
    } else {
      // exclude clicks are red crosses
      ctx.strokeStyle = '#e02020';
      ctx.lineWidth = 2;
      ctx.moveTo(sx - 4, sy - 4);
      ctx.lineTo(sx + 4, sy + 4);
      ctx.moveTo(sx + 4, sy - 4);
      ctx.lineTo(sx - 4, sy + 4);
      ctx.stroke();
    }
  }
}

function renderMain() {
  const ctx = mainCanvas.getContext('2d')!;
  ctx.clearRect(0, 0, mainCanvas.width, mainCanvas.height);
  if (!imageBitmap || !state) return;
  ctx.imageSmoothingEnabled = view.scale < 1;
  ctx.drawImage(
    imageBitmap,
    view.offsetX,
    view.offsetY,
    state.width * view.scale,
    state.height * view.scale,
  );
  if (state.pendingMask) {
    const bits = decodeRle(state.pendingMask);
    const rgba = maskToRgba(bits, [255, 255, 255], 0.5);
    const tile = new OffscreenCanvas(state.width, state.height);
    tile.getContext('2d')!.putImageData(new ImageData(rgba, state.width, state.height), 0, 0);
    ctx.drawImage(
      tile,
      view.offsetX,
      view.offsetY,
      state.width * view.scale,
      state.height * view.scale,
    );
  }
  drawMarkers(ctx);
}

function renderPanels() {
  if (!state || !imageBitmap) return;
  const { width, height } = state;
  maskCanvas.width = overlayCanvas.width = width;
  maskCanvas.height = overlayCanvas.height = height;

  const maskCtx = maskCanvas.getContext('2d')!;
  maskCtx.fillStyle = '#000';
  maskCtx.fillRect(0, 0, width, height);

  const overlayCtx = overlayCanvas.getContext('2d')!;
  overlayCtx.drawImage(imageBitmap, 0, 0);

  for (const item of state.items) {
    const rgba = maskToRgba(decodeRle(item.mask), item.color, 0.5);
    const tile = new OffscreenCanvas(width, height);
    tile.getContext('2d')!.putImageData(new ImageData(rgba, width, height), 0, 0);
    overlayCtx.drawImage(tile, 0, 0);
  }
  if (state.pendingMask) {
    const bits = decodeRle(state.pendingMask);
    maskCtx.putImageData(new ImageData(maskToRgba(bits, [255, 255, 255], 1), width, height), 0, 0);
    const tile = new OffscreenCanvas(width, height);
    tile
      .getContext('2d')!
      .putImageData(new ImageData(maskToRgba(bits, [255, 255, 255], 0.5), width, height), 0, 0);
    overlayCtx.drawImage(tile, 0, 0);
  }
}

function renderSidebar() {
  if (!state) return;
  coordsEl.innerHTML = '';
  for (const line of formatCoordinates(state.points)) {
    const li = document.createElement('li');
    li.textContent = line;
    coordsEl.appendChild(li);
  }
  itemsEl.innerHTML = '';
  for (const item of state.items) {
    const li = document.createElement('li');
    const swatch = document.createElement('span');
    swatch.className = 'swatch';
    swatch.style.backgroundColor = `rgb(${item.color.join(',')})`;
    li.appendChild(swatch);
    const quantity = formatQuantity(item.quantity);
    li.appendChild(
      document.createTextNode(
        quantity ? `${item.category_name} — ${quantity}` : item.category_name,
      ),
    );
    const del = document.createElement('button');
    del.textContent = 'delete';
    del.onclick = () => {
      if (!confirm(`Delete item "${item.category_name}"?`)) return;
      mutate(async () => {
        const resp = await api.deleteItem(state!.sessionId, item.item_id);
        state = applyItems(state!, resp.items);
      });
    };
    li.appendChild(del);
    itemsEl.appendChild(li);
  }
  latencyEl.textContent =
    state.lastLatencyMs === null ? '' : `mask in ${state.lastLatencyMs.toFixed(1)} ms`;

  ($('segment-btn') as HTMLButtonElement).disabled = !canSegment(state);
  ($('brush-toggle') as HTMLButtonElement).disabled = !canBrush(state);
  ($('validate-btn') as HTMLButtonElement).disabled =
    !state.pendingMask || foregroundCount(state.pendingMask) === 0;
  renderCategoryPicker();
}

function renderCategoryPicker() {
  if (!state) return;
  const select = $('category-select') as unknown as HTMLSelectElement;
  const filter = ($('category-search') as HTMLInputElement).value.trim().toLowerCase();
  const selected = select.value;
  select.innerHTML = '';
  for (const category of state.categories) {
    if (filter && !category.name.toLowerCase().includes(filter)) continue;
    const option = document.createElement('option');
    option.value = String(category.id);
    option.textContent = category.name;
    option.style.backgroundColor = `rgb(${category.color.join(',')})`;
    select.appendChild(option);
  }
  if (selected) select.value = selected;
}

function renderAll() {
  renderMain();
  renderPanels();
  renderSidebar();
}

// queue a server mutation; re-render after it is acknowledged
function mutate(task: () => Promise<void>) {
  queue
    .enqueue(async () => {
      await task();
      renderAll();
    })
    .catch(surface);
}

// ---------------------------------------------------------------------------
// canvas interaction
// ---------------------------------------------------------------------------

mainCanvas.addEventListener('contextmenu', (e) => e.preventDefault());

mainCanvas.addEventListener('pointerdown', (e) => {
  if (!state) return;
  const rect = mainCanvas.getBoundingClientRect();
  const sx = e.clientX - rect.left;
  const sy = e.clientY - rect.top;
  const pixel = screenToPixel(view, sx, sy, state.width, state.height);
  if (!pixel) return;

  if (state.tool === 'brush' && canBrush(state)) {
    brushing = true;
    brushPath = [pixel];
    mainCanvas.setPointerCapture(e.pointerId);
    return;
  }

  const polarity = e.button === 2 ? 'exclude' : 'include';
  if (polarity === 'exclude' && !state.supportsExclude) {
    setStatus('this backend does not accept exclusion clicks', true);
    return;
  }
  mutate(async () => {
    const resp = await api.addPoint(state!.sessionId, pixel[0], pixel[1], polarity);
    state = applyPoints(state!, resp.points);
    setStatus(`added ${polarity} point at (${pixel[0]}, ${pixel[1]})`);
  });
});

mainCanvas.addEventListener('pointermove', (e) => {
  if (!brushing || !state) return;
  const rect = mainCanvas.getBoundingClientRect();
  const pixel = screenToPixel(
    view,
    e.clientX - rect.left,
    e.clientY - rect.top,
    state.width,
    state.height,
  );
  if (pixel) brushPath.push(pixel);
});

mainCanvas.addEventListener('pointerup', () => {
  if (!brushing || !state) return;
  brushing = false;
  const path = brushPath;
  brushPath = [];
  if (path.length === 0) return;
  mutate(async () => {
    const resp = await api.brush(state!.sessionId, path, state!.brushRadius, state!.brushMode);
    state = applyBrush(state!, resp.mask);
  });
});

mainCanvas.addEventListener('wheel', (e) => {
  if (!state) return;
  e.preventDefault();
  const rect = mainCanvas.getBoundingClientRect();
  const factor = e.deltaY < 0 ? 1.15 : 1 / 1.15;
  view = zoomAt(view, factor, e.clientX - rect.left, e.clientY - rect.top);
  renderMain();
});

mainCanvas.addEventListener('pointermove', (e) => {
  // middle-drag pans
  if (e.buttons === 4) {
    view = pan(view, e.movementX, e.movementY);
    renderMain();
  }
});

// ---------------------------------------------------------------------------
// controls
// ---------------------------------------------------------------------------

$('upload-form').addEventListener('submit', (e) => {
  e.preventDefault();
  const imageInput = $('image-input') as HTMLInputElement;
  const categoryInput = $('category-input') as HTMLInputElement;
  const backendSelect = $('backend-select') as unknown as HTMLSelectElement;
  const file = imageInput.files?.[0];
  if (!file) {
    setStatus('choose an image first', true);
    return;
  }
  queue
    .enqueue(async () => {
      const created = await api.createSession(
        file,
        backendSelect.value || undefined,
        categoryInput.files?.[0],
      );
      state = initialState(created);
      imageBitmap = await createImageBitmap(file);
      view = fitToViewport(created.width, created.height, mainCanvas.width, mainCanvas.height);
      setStatus(
        created.fallback_backend
          ? `session ready (fell back to ${created.backend})`
          : `session ready (${created.backend})`,
      );
      renderAll();
    })
    .catch(surface);
});

$('segment-btn').addEventListener('click', () => {
  mutate(async () => {
    const resp = await api.segment(state!.sessionId);
    state = applySegment(state!, resp.mask, resp.score, resp.latency_ms);
    setStatus(`mask predicted (score ${resp.score.toFixed(2)})`);
  });
});

$('undo-btn').addEventListener('click', () => {
  mutate(async () => {
    const resp = await api.undo(state!.sessionId);
    state = applyUndo(state!, resp.points, resp.pending_mask);
  });
});

$('clear-btn').addEventListener('click', () => {
  if (!state) return;
  if (!confirm('Clear all pending points and the current mask?')) return;
  mutate(async () => {
    await api.clear(state!.sessionId);
    state = applyClear(state!);
  });
});

$('brush-toggle').addEventListener('click', () => {
  if (!state) return;
  state = { ...state, tool: state.tool === 'brush' ? 'click' : 'brush' };
  $('brush-toggle').textContent = state.tool === 'brush' ? 'Deactivate Brush' : 'Activate Brush';
  renderSidebar();
});

($('brush-radius') as HTMLInputElement).addEventListener('input', (e) => {
  if (!state) return;
  state = { ...state, brushRadius: Number((e.target as HTMLInputElement).value) };
  $('brush-radius-label').textContent = String(state.brushRadius);
});

($('brush-mode') as unknown as HTMLSelectElement).addEventListener('change', (e) => {
  if (!state) return;
  state = { ...state, brushMode: (e.target as HTMLSelectElement).value as 'add' | 'erase' };
});

$('category-search').addEventListener('input', () => renderCategoryPicker());

$('validate-btn').addEventListener('click', () => {
  if (!state) return;
  const select = $('category-select') as unknown as HTMLSelectElement;
  const newName = ($('new-category') as HTMLInputElement).value.trim();
  const quantityText = ($('quantity-input') as HTMLInputElement).value;
  const unit = ($('unit-toggle') as unknown as HTMLSelectElement).value as 'g' | 'ml';
  const parsed = parseQuantity(quantityText, unit);
  if (!parsed.ok) {
    setStatus(parsed.error!, true);
    return;
  }
  const body: Parameters<ApiClient['commitItem']>[1] = {};
  if (newName) {
    body.new_category_name = newName;
  } else if (select.value) {
    body.category_id = Number(select.value);
  } else {
    setStatus('pick a category or add a new one', true);
    return;
  }
  if (parsed.quantity) body.quantity = parsed.quantity;
  mutate(async () => {
    const item = await api.commitItem(state!.sessionId, body);
    state = applyCommittedItem(state!, item);
    ($('new-category') as HTMLInputElement).value = '';
    ($('quantity-input') as HTMLInputElement).value = '';
    setStatus(`item "${item.category_name}" committed`);
  });
});

$('save-btn').addEventListener('click', () => {
  if (!state) return;
  const outputDir = ($('output-dir') as HTMLInputElement).value.trim() || state.sessionId;
  mutate(async () => {
    const resp = await api.save(state!.sessionId, outputDir);
    setStatus(
      `saved in ${resp.total_annotation_seconds.toFixed(2)} s: ` +
        Object.values(resp.paths).join(', '),
    );
  });
});

// restore a session from the URL (?session=...) after refresh
const params = new URLSearchParams(window.location.search);
const restoreId = params.get('session');
if (restoreId) {
  queue
    .enqueue(async () => {
      const snap = await api.snapshot(restoreId);
      state = {
        ...initialState({
          session_id: snap.session_id,
          width: snap.width,
          height: snap.height,
          backend: snap.backend,
          fallback_backend: false,
          categories: snap.categories,
        }),
        points: snap.points,
        pendingMask: snap.pending_mask,
        items: snap.items,
      };
      setStatus('session restored; re-upload the image to see pixels');
      renderAll();
    })
    .catch(surface);
}

api
  .backends()
  .then(({ backends }) => {
    const select = $('backend-select') as unknown as HTMLSelectElement;
    select.innerHTML = '<option value="">server default</option>';
    for (const backend of backends) {
      if (!backend.loadable) continue;
      const option = document.createElement('option');
      option.value = backend.kind;
      option.textContent = backend.kind;
      select.appendChild(option);
    }
  })
  .catch(surface);
