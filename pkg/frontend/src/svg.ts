// Hand-rolled SVG line charts: deterministic output, no rendering deps.

export interface Series {
  label: string;
  x: number[];
  y: number[];
  color: string;
}

export interface PanelOptions {
  title: string;
  xLabel: string;
  yLabel: string;
  logY?: boolean;
  width?: number;
  height?: number;
}

const MARGIN = { top: 28, right: 16, bottom: 40, left: 64 };

function extent(values: number[]): [number, number] {
  let lo = Infinity;
  let hi = -Infinity;
  for (const v of values) {
    if (Number.isFinite(v)) {
      lo = Math.min(lo, v);
      hi = Math.max(hi, v);
    }
  }
  if (!Number.isFinite(lo)) return [0, 1];
  if (lo === hi) return [lo - 1, hi + 1];
  return [lo, hi];
}

function ticks(lo: number, hi: number, n = 5): number[] {
  const span = hi - lo;
  const step = Math.pow(10, Math.floor(Math.log10(span / n)));
  const err = span / n / step;
  const mult = err >= 7.5 ? 10 : err >= 3.5 ? 5 : err >= 1.5 ? 2 : 1;
  const s = mult * step;
  const out: number[] = [];
  for (let v = Math.ceil(lo / s) * s; v <= hi + 1e-12 * span; v += s) out.push(v);
  return out;
}

function fmt(v: number): string {
  if (v === 0) return "0";
  const a = Math.abs(v);
  if (a >= 1e4 || a < 1e-3) return v.toExponential(1);
  return String(Math.round(v * 1e6) / 1e6);
}

export function renderPanel(series: Series[], opts: PanelOptions): string {
  const width = opts.width ?? 720;
  const height = opts.height ?? 300;
  const iw = width - MARGIN.left - MARGIN.right;
  const ih = height - MARGIN.top - MARGIN.bottom;

  const tx = (v: number) => v;
  const ty = (v: number) => (opts.logY ? Math.log10(Math.max(v, 1e-300)) : v);

  const allX = series.flatMap((s) => s.x.map(tx));
  const allY = series.flatMap((s) => s.y.map(ty).filter(Number.isFinite));
  const [x0, x1] = extent(allX);
  const [y0, y1] = extent(allY);
  const px = (v: number) => MARGIN.left + ((tx(v) - x0) / (x1 - x0)) * iw;
  const py = (v: number) => MARGIN.top + ih - ((ty(v) - y0) / (y1 - y0)) * ih;

  const parts: string[] = [];
  parts.push(
    `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${height}" ` +
      `viewBox="0 0 ${width} ${height}" font-family="sans-serif" font-size="11">`,
  );
  parts.push(`<rect width="${width}" height="${height}" fill="white"/>`);
  parts.push(
    `<text x="${MARGIN.left}" y="16" font-size="13" font-weight="bold">${opts.title}</text>`,
  );

  // frame and ticks
  parts.push(
    `<rect x="${MARGIN.left}" y="${MARGIN.top}" width="${iw}" height="${ih}" ` +
      `fill="none" stroke="#333"/>`,
  );
  for (const t of ticks(x0, x1)) {
    const x = MARGIN.left + ((t - x0) / (x1 - x0)) * iw;
    parts.push(`<line x1="${x}" y1="${MARGIN.top + ih}" x2="${x}" y2="${MARGIN.top + ih + 4}" stroke="#333"/>`);
    parts.push(`<text x="${x}" y="${MARGIN.top + ih + 16}" text-anchor="middle">${fmt(t)}</text>`);
  }
  for (const t of ticks(y0, y1)) {
    const y = MARGIN.top + ih - ((t - y0) / (y1 - y0)) * ih;
    const label = opts.logY ? `1e${fmt(t)}` : fmt(t);
    parts.push(`<line x1="${MARGIN.left - 4}" y1="${y}" x2="${MARGIN.left}" y2="${y}" stroke="#333"/>`);
    parts.push(`<text x="${MARGIN.left - 8}" y="${y + 3}" text-anchor="end">${label}</text>`);
  }
  parts.push(
    `<text x="${MARGIN.left + iw / 2}" y="${height - 8}" text-anchor="middle">${opts.xLabel}</text>`,
  );
  parts.push(
    `<text x="14" y="${MARGIN.top + ih / 2}" text-anchor="middle" ` +
      `transform="rotate(-90 14 ${MARGIN.top + ih / 2})">${opts.yLabel}</text>`,
  );

  // data series
  series.forEach((s, i) => {
    const pts = s.x
      .map((xv, j) => [xv, s.y[j]] as const)
      .filter(([, yv]) => Number.isFinite(ty(yv)))
      .map(([xv, yv]) => `${px(xv).toFixed(2)},${py(yv).toFixed(2)}`)
      .join(" ");
    if (pts.length > 0) {
      parts.push(`<polyline points="${pts}" fill="none" stroke="${s.color}" stroke-width="1.5"/>`);
    }
    const lx = MARGIN.left + iw - 120;
    const lyy = MARGIN.top + 14 + i * 14;
    parts.push(`<line x1="${lx}" y1="${lyy - 4}" x2="${lx + 18}" y2="${lyy - 4}" stroke="${s.color}" stroke-width="2"/>`);
    parts.push(`<text x="${lx + 24}" y="${lyy}">${s.label}</text>`);
  });

  parts.push("</svg>");
  return parts.join("\n") + "\n";
}

export function stackPanels(panels: string[], width = 720): string {
  // each panel is a full SVG document; embed them vertically in one file
  const heights = panels.map((p) => {
    const m = p.match(/height="(\d+)"/);
    return m ? Number(m[1]) : 300;
  });
  const total = heights.reduce((a, b) => a + b, 0);
  const parts = [
    `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${total}" viewBox="0 0 ${width} ${total}">`,
  ];
  let y = 0;
  panels.forEach((p, i) => {
    const inner = p.replace(/<\?xml[^>]*\?>/, "");
    parts.push(`<g transform="translate(0 ${y})">${inner}</g>`);
    y += heights[i];
  });
  parts.push("</svg>");
  return parts.join("\n") + "\n";
}
