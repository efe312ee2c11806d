// Reward-weight widget geometry: three fixed parameter circles on an
// equilateral triangle and one draggable story circle; the story's position
// turns into the (diversity, logicality, integrity) weight triple.

export interface Point {
  x: number;
  y: number;
}

export type Weights = [number, number, number];

export class ConfigError extends Error {}

function sub(a: Point, b: Point): Point {
  return { x: a.x - b.x, y: a.y - b.y };
}

function dot(a: Point, b: Point): number {
  return a.x * b.x + a.y * b.y;
}

function cross(a: Point, b: Point): number {
  return a.x * b.y - a.y * b.x;
}

/** Closest point to p inside the triangle (a, b, c). */
export function clampToTriangle(p: Point, a: Point, b: Point, c: Point): Point {
  const ab = sub(b, a);
  const ac = sub(c, a);
  const ap = sub(p, a);

  const d1 = dot(ab, ap);
  const d2 = dot(ac, ap);
  if (d1 <= 0 && d2 <= 0) return a;

  const bp = sub(p, b);
  const d3 = dot(ab, bp);
  const d4 = dot(ac, bp);
  if (d3 >= 0 && d4 <= d3) return b;

  const vc = d1 * d4 - d3 * d2;
  if (vc <= 0 && d1 >= 0 && d3 <= 0) {
    const v = d1 / (d1 - d3);
    return { x: a.x + ab.x * v, y: a.y + ab.y * v };
  }

  const cp = sub(p, c);
  const d5 = dot(ab, cp);
  const d6 = dot(ac, cp);
  if (d6 >= 0 && d5 <= d6) return c;

  const vb = d5 * d2 - d1 * d6;
  if (vb <= 0 && d2 >= 0 && d6 <= 0) {
    const w = d2 / (d2 - d6);
    return { x: a.x + ac.x * w, y: a.y + ac.y * w };
  }

  const va = d3 * d6 - d5 * d4;
  if (va <= 0 && d4 - d3 >= 0 && d5 - d6 >= 0) {
    const w = (d4 - d3) / (d4 - d3 + (d5 - d6));
    return { x: b.x + (c.x - b.x) * w, y: b.y + (c.y - b.y) * w };
  }

  // interior
  return p;
}

/**
 * Barycentric weights of the story circle with respect to the three anchor
 * circles. Positions outside the triangle are first clamped to it, so the
 * result always lies on the unit simplex; with equilateral anchors the
 * anchor closest to the story circle carries the largest weight.
 */
export function weightsFromPosition(
  position: Point,
  anchors: [Point, Point, Point],
): Weights {
  const [a, b, c] = anchors;
  const denominator = cross(sub(b, a), sub(c, a));
  if (Math.abs(denominator) < 1e-12) {
    throw new ConfigError("anchors must not be collinear");
  }
  const p = clampToTriangle(position, a, b, c);
  const wa = cross(sub(b, p), sub(c, p)) / denominator;
  const wb = cross(sub(c, p), sub(a, p)) / denominator;
  let weights: Weights = [wa, wb, 1 - wa - wb];
  // numeric cleanup: clip float fuzz and renormalize exactly
  weights = weights.map((w) => Math.min(1, Math.max(0, w))) as Weights;
  const total = weights[0] + weights[1] + weights[2];
  return [weights[0] / total, weights[1] / total, weights[2] / total];
}

/** Default anchor layout: equilateral triangle inscribed in the widget box. */
export function equilateralAnchors(size: number): [Point, Point, Point] {
  const r = size * 0.42;
  const cx = size / 2;
  const cy = size / 2;
  const at = (angle: number): Point => ({
    x: cx + r * Math.cos(angle),
    y: cy + r * Math.sin(angle),
  });
  return [at(-Math.PI / 2), at(Math.PI / 6), at((5 * Math.PI) / 6)];
}

export interface RewardWidgetOptions {
  size?: number;
  labels?: [string, string, string];
  onChange?: (weights: Weights) => void;
}

/** Minimal SVG drag widget. Returns the element plus a weights getter. */
export function createRewardWidget(options: RewardWidgetOptions = {}) {
  const size = options.size ?? 180;
  const labels = options.labels ?? ["diversity", "logicality", "integrity"];
  const anchors = equilateralAnchors(size);
  const svgNs = "http://www.w3.org/2000/svg";
  const svg = document.createElementNS(svgNs, "svg");
  svg.setAttribute("width", String(size));
  svg.setAttribute("height", String(size));
  svg.setAttribute("class", "reward-widget");

  const triangle = document.createElementNS(svgNs, "polygon");
  triangle.setAttribute(
    "points",
    anchors.map((p) => `${p.x},${p.y}`).join(" "),
  );
  triangle.setAttribute("fill", "#eef3fa");
  triangle.setAttribute("stroke", "#9ab");
  svg.appendChild(triangle);

  anchors.forEach((p, i) => {
    const circle = document.createElementNS(svgNs, "circle");
    circle.setAttribute("cx", String(p.x));
    circle.setAttribute("cy", String(p.y));
    circle.setAttribute("r", "9");
    circle.setAttribute("fill", "#4e79a7");
    svg.appendChild(circle);
    const text = document.createElementNS(svgNs, "text");
    text.setAttribute("x", String(p.x));
    text.setAttribute("y", String(p.y - 12));
    text.setAttribute("text-anchor", "middle");
    text.setAttribute("font-size", "10");
    text.textContent = labels[i];
    svg.appendChild(text);
  });

  let position: Point = { x: size / 2, y: size / 2 };
  const story = document.createElementNS(svgNs, "circle");
  story.setAttribute("r", "7");
  story.setAttribute("fill", "#e4572e");
  story.setAttribute("class", "story-circle");
  svg.appendChild(story);

  let weights = weightsFromPosition(position, anchors);

  const redraw = () => {
    const clamped = clampToTriangle(position, anchors[0], anchors[1], anchors[2]);
    story.setAttribute("cx", String(clamped.x));
    story.setAttribute("cy", String(clamped.y));
  };

  const update = (point: Point) => {
    position = point;
    weights = weightsFromPosition(position, anchors);
    redraw();
    options.onChange?.(weights);
  };

  let dragging = false;
  svg.addEventListener("pointerdown", (event) => {
    dragging = true;
    svg.setPointerCapture(event.pointerId);
  });
  svg.addEventListener("pointermove", (event) => {
    if (!dragging) return;
    const rect = svg.getBoundingClientRect();
    update({ x: event.clientX - rect.left, y: event.clientY - rect.top });
  });
  svg.addEventListener("pointerup", () => {
    dragging = false;
  });
  redraw();

  return {
    element: svg,
    getWeights: () => weights,
    setPosition: update,
    anchors,
  };
}
