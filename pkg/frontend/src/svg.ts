/**
 * Minimal deterministic SVG plotting: linear/log scales, polylines, ticks,
 * and a fixed panel grid.  No DOM, no randomness; identical inputs yield an
 * identical byte stream.
 */

export interface Series {
    x: number[];
    y: number[];
    color: string;
    label?: string;
    dash?: string;
}

export interface PanelSpec {
    title: string;
    xLabel: string;
    yLabel: string;
    series: Series[];
    xLog?: boolean;
    yLog?: boolean;
    annotations?: string[];
}

const PANEL_W = 320;
const PANEL_H = 240;
const MARGIN = { top: 28, right: 14, bottom: 40, left: 58 };

function fmt(v: number): string {
    if (v === 0) return '0';
    const a = Math.abs(v);
    if (a >= 1e4 || a < 1e-3) return v.toExponential(1).replace('e+', 'e');
    return Number(v.toPrecision(4)).toString();
}

function finiteRange(values: number[], log: boolean): [number, number] {
    let lo = Infinity;
    let hi = -Infinity;
    for (const v of values) {
        if (!Number.isFinite(v)) continue;
        if (log && v <= 0) continue;
        if (v < lo) lo = v;
        if (v > hi) hi = v;
    }
    if (lo === Infinity) {
        return log ? [1e-1, 1e1] : [0, 1];
    }
    if (lo === hi) {
        return log ? [lo / 10, hi * 10] : [lo - 1, hi + 1];
    }
    return [lo, hi];
}

function linTicks(lo: number, hi: number, count: number): number[] {
    const span = hi - lo;
    const rawStep = span / count;
    const mag = Math.pow(10, Math.floor(Math.log10(rawStep)));
    let step = mag;
    for (const m of [1, 2, 5, 10]) {
        if (m * mag >= rawStep) {
            step = m * mag;
            break;
        }
    }
    const first = Math.ceil(lo / step) * step;
    const ticks: number[] = [];
    for (let v = first; v <= hi + step * 1e-9; v += step) {
        ticks.push(Math.abs(v) < step * 1e-9 ? 0 : v);
    }
    return ticks;
}

function logTicks(lo: number, hi: number): number[] {
    const ticks: number[] = [];
    const e0 = Math.ceil(Math.log10(lo) - 1e-9);
    const e1 = Math.floor(Math.log10(hi) + 1e-9);
    const stride = Math.max(1, Math.ceil((e1 - e0) / 6));
    for (let e = e0; e <= e1; e += stride) ticks.push(Math.pow(10, e));
    return ticks.length >= 2 ? ticks : [lo, hi];
}

class Scale {
    constructor(readonly lo: number, readonly hi: number,
                readonly r0: number, readonly r1: number,
                readonly log: boolean) {}

    map(v: number): number {
        const [a, b] = this.log
            ? [Math.log10(this.lo), Math.log10(this.hi)]
            : [this.lo, this.hi];
        const u = this.log ? Math.log10(v) : v;
        return this.r0 + ((u - a) / (b - a)) * (this.r1 - this.r0);
    }

    ticks(): number[] {
        return this.log ? logTicks(this.lo, this.hi) : linTicks(this.lo, this.hi, 5);
    }
}

function esc(s: string): string {
    return s.replace(/&/g, '&amp;').replace(/</g, '&lt;').replace(/>/g, '&gt;');
}

function renderPanel(spec: PanelSpec, ox: number, oy: number): string {
    const x0 = ox + MARGIN.left;
    const x1 = ox + PANEL_W - MARGIN.right;
    const y0 = oy + PANEL_H - MARGIN.bottom;
    const y1 = oy + MARGIN.top;

    const allX: number[] = [];
    const allY: number[] = [];
    for (const s of spec.series) {
        allX.push(...s.x);
        allY.push(...s.y);
    }
    const [xlo, xhi] = finiteRange(allX, !!spec.xLog);
    const [ylo, yhi] = finiteRange(allY, !!spec.yLog);
    const sx = new Scale(xlo, xhi, x0, x1, !!spec.xLog);
    const sy = new Scale(ylo, yhi, y0, y1, !!spec.yLog);

    const parts: string[] = [`<g class="panel">`];
    parts.push(`<rect x="${x0}" y="${y1}" width="${x1 - x0}" height="${y0 - y1}" ` +
               `fill="none" stroke="#999" stroke-width="1"/>`);
    parts.push(`<text x="${(x0 + x1) / 2}" y="${oy + 18}" text-anchor="middle" ` +
               `font-size="13" font-weight="bold">${esc(spec.title)}</text>`);

    for (const tv of sx.ticks()) {
        if (tv < xlo - 1e-12 || tv > xhi + 1e-12) continue;
        const px = sx.map(tv);
        parts.push(`<line x1="${px.toFixed(2)}" y1="${y0}" x2="${px.toFixed(2)}" ` +
                   `y2="${y0 + 4}" stroke="#333"/>`);
        parts.push(`<text x="${px.toFixed(2)}" y="${y0 + 16}" text-anchor="middle" ` +
                   `font-size="10">${fmt(tv)}</text>`);
    }
    for (const tv of sy.ticks()) {
        if (tv < ylo - 1e-12 || tv > yhi * (1 + 1e-12)) continue;
        const py = sy.map(tv);
        parts.push(`<line x1="${x0 - 4}" y1="${py.toFixed(2)}" x2="${x0}" ` +
                   `y2="${py.toFixed(2)}" stroke="#333"/>`);
        parts.push(`<text x="${x0 - 6}" y="${(py + 3).toFixed(2)}" text-anchor="end" ` +
                   `font-size="10">${fmt(tv)}</text>`);
    }
    parts.push(`<text x="${(x0 + x1) / 2}" y="${oy + PANEL_H - 6}" text-anchor="middle" ` +
               `font-size="11">${esc(spec.xLabel)}</text>`);
    parts.push(`<text x="${ox + 14}" y="${(y0 + y1) / 2}" text-anchor="middle" ` +
               `font-size="11" transform="rotate(-90 ${ox + 14} ${(y0 + y1) / 2})">` +
               `${esc(spec.yLabel)}</text>`);

    for (const s of spec.series) {
        const pts: string[] = [];
        let pen = false;
        for (let i = 0; i < s.x.length; i++) {
            const vx = s.x[i];
            const vy = s.y[i];
            const ok = Number.isFinite(vx) && Number.isFinite(vy) &&
                (!spec.xLog || vx > 0) && (!spec.yLog || vy > 0);
            if (!ok) {
                pen = false;
                continue;
            }
            const cmd = pen ? 'L' : 'M';
            pts.push(`${cmd}${sx.map(vx).toFixed(2)},${sy.map(vy).toFixed(2)}`);
            pen = true;
        }
        if (pts.length > 0) {
            const dash = s.dash ? ` stroke-dasharray="${s.dash}"` : '';
            parts.push(`<path d="${pts.join(' ')}" fill="none" stroke="${s.color}" ` +
                       `stroke-width="1.2"${dash}/>`);
        }
    }

    let legendY = y1 + 14;
    for (const s of spec.series) {
        if (!s.label) continue;
        parts.push(`<line x1="${x1 - 86}" y1="${legendY - 4}" x2="${x1 - 66}" ` +
                   `y2="${legendY - 4}" stroke="${s.color}" stroke-width="1.5"` +
                   `${s.dash ? ` stroke-dasharray="${s.dash}"` : ''}/>`);
        parts.push(`<text x="${x1 - 62}" y="${legendY}" font-size="10">` +
                   `${esc(s.label)}</text>`);
        legendY += 14;
    }
    for (const note of spec.annotations ?? []) {
        parts.push(`<text x="${x0 + 8}" y="${legendY}" font-size="11" fill="#b00"` +
                   `>${esc(note)}</text>`);
        legendY += 14;
    }
    parts.push('</g>');
    return parts.join('\n');
}

export function renderGrid(panels: PanelSpec[], cols: number): string {
    const rows = Math.ceil(panels.length / cols);
    const width = cols * PANEL_W;
    const height = rows * PANEL_H;
    const parts = [
        `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${height}" ` +
        `viewBox="0 0 ${width} ${height}" font-family="Helvetica, Arial, sans-serif">`,
        `<rect width="${width}" height="${height}" fill="white"/>`,
    ];
    panels.forEach((p, i) => {
        const ox = (i % cols) * PANEL_W;
        const oy = Math.floor(i / cols) * PANEL_H;
        parts.push(renderPanel(p, ox, oy));
    });
    parts.push('</svg>');
    return parts.join('\n') + '\n';
}
