/** Minimal deterministic SVG assembly: scales, axes, paths, legends. */

export const WIDTH = 720;
export const HEIGHT = 480;
export const MARGIN = { top: 40, right: 30, bottom: 50, left: 70 };

export const PALETTE = [
  "#1f77b4",
  "#d62728",
  "#2ca02c",
  "#9467bd",
  "#ff7f0e",
  "#8c564b",
];

export interface Scale {
  (v: number): number;
  ticks(): number[];
}

function niceTicks(lo: number, hi: number, n = 5): number[] {
  if (!(hi > lo)) return [lo];
  const span = hi - lo;
  const step = Math.pow(10, Math.floor(Math.log10(span / n)));
  const err = span / n / step;
  const mult = err >= 7.5 ? 10 : err >= 3.5 ? 5 : err >= 1.5 ? 2 : 1;
  const s = step * mult;
  const ticks: number[] = [];
  for (let v = Math.ceil(lo / s) * s; v <= hi + 1e-12 * span; v += s) {
    ticks.push(v);
  }
  return ticks;
}

export function linearScale(lo: number, hi: number, outLo: number, outHi: number): Scale {
  const span = hi > lo ? hi - lo : 1;
  const fn = ((v: number) => outLo + ((v - lo) / span) * (outHi - outLo)) as Scale;
  fn.ticks = () => niceTicks(lo, hi);
  return fn;
}

export function logScale(lo: number, hi: number, outLo: number, outHi: number): Scale {
  const safeLo = Math.max(lo, 1e-300);
  const safeHi = Math.max(hi, safeLo * 10);
  const llo = Math.log10(safeLo);
  const lhi = Math.log10(safeHi);
  const span = lhi > llo ? lhi - llo : 1;
  const fn = ((v: number) =>
    outLo + ((Math.log10(Math.max(v, 1e-300)) - llo) / span) * (outHi - outLo)) as Scale;
  fn.ticks = () => {
    const ticks: number[] = [];
    const step = Math.max(1, Math.round(span / 6));
    for (let e = Math.ceil(llo); e <= Math.floor(lhi); e += step) {
      ticks.push(Math.pow(10, e));
    }
    return ticks.length > 0 ? ticks : [safeLo];
  };
  return fn;
}

export function fmtTick(v: number): string {
  if (v === 0) return "0";
  const a = Math.abs(v);
  if (a >= 1e4 || a < 1e-3) return v.toExponential(0).replace("+", "");
  return String(Math.round(v * 1e6) / 1e6);
}

const ESCAPES: Record<string, string> = {
  "&": "&amp;",
  "<": "&lt;",
  ">": "&gt;",
  '"': "&quot;",
};

export function esc(s: string): string {
  return s.replace(/[&<>"]/g, (c) => ESCAPES[c]);
}

export class SvgDoc {
  private parts: string[] = [];

  add(fragment: string): void {
    this.parts.push(fragment);
  }

  path(d: string, stroke: string, width = 1.5, cls = "", fill = "none"): void {
    const klass = cls ? ` class="${cls}"` : "";
    this.add(`<path${klass} d="${d}" fill="${fill}" stroke="${stroke}" stroke-width="${width}"/>`);
  }

  circle(cx: number, cy: number, r: number, fill: string, cls = ""): void {
    const klass = cls ? ` class="${cls}"` : "";
    this.add(`<circle${klass} cx="${cx.toFixed(2)}" cy="${cy.toFixed(2)}" r="${r}" fill="${fill}"/>`);
  }

  rect(x: number, y: number, w: number, h: number, fill: string, cls = ""): void {
    const klass = cls ? ` class="${cls}"` : "";
    this.add(
      `<rect${klass} x="${x.toFixed(2)}" y="${y.toFixed(2)}" width="${w.toFixed(2)}" height="${h.toFixed(2)}" fill="${fill}"/>`,
    );
  }

  text(x: number, y: number, s: string, opts: { size?: number; anchor?: string; fill?: string } = {}): void {
    const size = opts.size ?? 12;
    const anchor = opts.anchor ?? "start";
    const fill = opts.fill ?? "#333";
    this.add(
      `<text x="${x.toFixed(2)}" y="${y.toFixed(2)}" font-size="${size}" text-anchor="${anchor}" fill="${fill}" font-family="sans-serif">${esc(s)}</text>`,
    );
  }

  axes(xs: Scale, ys: Scale, xLabel: string, yLabel: string, title: string): void {
    const x0 = MARGIN.left;
    const x1 = WIDTH - MARGIN.right;
    const y0 = HEIGHT - MARGIN.bottom;
    const y1 = MARGIN.top;
    this.path(`M${x0} ${y0} L${x1} ${y0}`, "#333", 1);
    this.path(`M${x0} ${y0} L${x0} ${y1}`, "#333", 1);
    for (const t of xs.ticks()) {
      const px = xs(t);
      this.path(`M${px.toFixed(2)} ${y0} L${px.toFixed(2)} ${y0 + 5}`, "#333", 1);
      this.text(px, y0 + 18, fmtTick(t), { anchor: "middle", size: 11 });
    }
    for (const t of ys.ticks()) {
      const py = ys(t);
      this.path(`M${x0 - 5} ${py.toFixed(2)} L${x0} ${py.toFixed(2)}`, "#333", 1);
      this.text(x0 - 8, py + 4, fmtTick(t), { anchor: "end", size: 11 });
    }
    this.text((x0 + x1) / 2, HEIGHT - 12, xLabel, { anchor: "middle" });
    this.add(
      `<text x="18" y="${(y0 + y1) / 2}" font-size="12" text-anchor="middle" fill="#333" font-family="sans-serif" transform="rotate(-90 18 ${(y0 + y1) / 2})">${esc(yLabel)}</text>`,
    );
    this.text(WIDTH / 2, 22, title, { anchor: "middle", size: 15 });
  }

  legend(labels: string[], colors: string[]): void {
    const x = WIDTH - MARGIN.right - 200;
    let y = MARGIN.top + 8;
    for (let i = 0; i < labels.length; i++) {
      this.path(`M${x} ${y - 4} L${x + 24} ${y - 4}`, colors[i], 2.5);
      this.text(x + 30, y, labels[i], { size: 11 });
      y += 16;
    }
  }

  render(): string {
    return [
      `<svg xmlns="http://www.w3.org/2000/svg" width="${WIDTH}" height="${HEIGHT}" viewBox="0 0 ${WIDTH} ${HEIGHT}">`,
      `<rect x="0" y="0" width="${WIDTH}" height="${HEIGHT}" fill="white"/>`,
      ...this.parts,
      "</svg>",
    ].join("\n");
  }
}

export function polylinePath(points: [number, number][]): string {
  return points
    .map(([x, y], i) => `${i === 0 ? "M" : "L"}${x.toFixed(2)} ${y.toFixed(2)}`)
    .join(" ");
}
