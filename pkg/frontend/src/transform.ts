// Zoom/pan mapping between screen (canvas) and image pixel coordinates.
// Image pixel (x, y) maps to screen (x * scale + offsetX, y * scale + offsetY).

export interface ViewTransform {
  scale: number;
  offsetX: number;
  offsetY: number;
}

export const IDENTITY: ViewTransform = { scale: 1, offsetX: 0, offsetY: 0 };

export function imageToScreen(t: ViewTransform, x: number, y: number): [number, number] {
  return [x * t.scale + t.offsetX, y * t.scale + t.offsetY];
}

export function screenToImage(t: ViewTransform, sx: number, sy: number): [number, number] {
  return [(sx - t.offsetX) / t.scale, (sy - t.offsetY) / t.scale];
}

// Integer pixel under a screen position, or null when outside the image.
export function screenToPixel(
  t: ViewTransform,
  sx: number,
  sy: number,
  width: number,
  height: number,
): [number, number] | null {
  const [ix, iy] = screenToImage(t, sx, sy);
  const px = Math.floor(ix);
  const py = Math.floor(iy);
  if (px < 0 || px >= width || py < 0 || py >= height) {
    return null;
  }
  return [px, py];
}

// Zoom by a factor keeping the given screen point fixed.
export function zoomAt(
  t: ViewTransform,
  factor: number,
  sx: number,
  sy: number,
  minScale = 0.25,
  maxScale = 32,
): ViewTransform {
  const scale = Math.min(maxScale, Math.max(minScale, t.scale * factor));
  const ratio = scale / t.scale;
  return {
    scale,
    offsetX: sx - (sx - t.offsetX) * ratio,
    offsetY: sy - (sy - t.offsetY) * ratio,
  };
}

export function pan(t: ViewTransform, dx: number, dy: number): ViewTransform {
  return { scale: t.scale, offsetX: t.offsetX + dx, offsetY: t.offsetY + dy };
}

// Initial fit: image scaled to fill the viewport and centered.
export function fitToViewport(
  imageWidth: number,
  imageHeight: number,
  viewWidth: number,
  viewHeight: number,
): ViewTransform {
  const scale = Math.min(viewWidth / imageWidth, viewHeight / imageHeight);
  return {
    scale,
    offsetX: (viewWidth - imageWidth * scale) / 2,
    offsetY: (viewHeight - imageHeight * scale) / 2,
  };
}
