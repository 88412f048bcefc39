/**
 * Figure layouts over harness CSVs.
 *
 * i1_panels        2x3 grid from two 1-d trajectory CSVs (first the plain
 *                  vanishing-damping run, then the Hessian-damped one):
 *                  x-traces on top, objective traces below; third column
 *                  overlays both.
 * i2_panels        same grid for the 2-d ill-conditioned runs with phase
 *                  curves (x_0, x_1) on top.
 * rate_loglog      objective gap vs t on log-log axes, one curve per
 *                  diagnostics CSV, annotated with the fitted slope.
 * lyapunov_series  W0, Wbeta, and the scaled anchored energy vs t.
 */

import { readDiagnostics, readTrajectory, SchemaError } from './csv';
import { logLogFit, GAP_FLOOR } from './fit';
import { PanelSpec, renderGrid, Series } from './svg';

export const LAYOUTS = ['i1_panels', 'i2_panels', 'rate_loglog', 'lyapunov_series'] as const;
export type LayoutTag = (typeof LAYOUTS)[number];

const COLOR_A = '#1f77b4';
const COLOR_B = '#d62728';
const PALETTE = ['#1f77b4', '#d62728', '#2ca02c', '#9467bd', '#ff7f0e', '#8c564b'];

function pairLabels(): [string, string] {
    return ['viscous only', 'hessian damped'];
}

function i1Panels(paths: string[]): string {
    if (paths.length !== 2) {
        throw new SchemaError('i1_panels needs exactly two trajectory CSVs');
    }
    const [a, b] = paths.map(readTrajectory);
    for (const tr of [a, b]) {
        if (tr.dim !== 1) {
            throw new SchemaError('i1_panels expects 1-d trajectories');
        }
    }
    const [la, lb] = pairLabels();
    const xa: Series = { x: a.t, y: a.xs[0], color: COLOR_A, label: la };
    const xb: Series = { x: b.t, y: b.xs[0], color: COLOR_B, label: lb };
    const pa: Series = { x: a.t, y: a.phi, color: COLOR_A, label: la };
    const pb: Series = { x: b.t, y: b.phi, color: COLOR_B, label: lb };
    const panels: PanelSpec[] = [
        { title: `x(t), ${la}`, xLabel: 't', yLabel: 'x', series: [xa] },
        { title: `x(t), ${lb}`, xLabel: 't', yLabel: 'x', series: [xb] },
        { title: 'x(t), both', xLabel: 't', yLabel: 'x', series: [xa, xb] },
        { title: `objective, ${la}`, xLabel: 't', yLabel: 'phi', series: [pa] },
        { title: `objective, ${lb}`, xLabel: 't', yLabel: 'phi', series: [pb] },
        { title: 'objective, both', xLabel: 't', yLabel: 'phi', series: [pa, pb] },
    ];
    return renderGrid(panels, 3);
}

function i2Panels(paths: string[]): string {
    if (paths.length !== 2) {
        throw new SchemaError('i2_panels needs exactly two trajectory CSVs');
    }
    const [a, b] = paths.map(readTrajectory);
    for (const tr of [a, b]) {
        if (tr.dim !== 2) {
            throw new SchemaError('i2_panels expects 2-d trajectories');
        }
    }
    const [la, lb] = pairLabels();
    const ca: Series = { x: a.xs[0], y: a.xs[1], color: COLOR_A, label: la };
    const cb: Series = { x: b.xs[0], y: b.xs[1], color: COLOR_B, label: lb };
    const pa: Series = { x: a.t, y: a.phi, color: COLOR_A, label: la };
    const pb: Series = { x: b.t, y: b.phi, color: COLOR_B, label: lb };
    const panels: PanelSpec[] = [
        { title: `phase (x0, x1), ${la}`, xLabel: 'x0', yLabel: 'x1', series: [ca] },
        { title: `phase (x0, x1), ${lb}`, xLabel: 'x0', yLabel: 'x1', series: [cb] },
        { title: 'phase, both', xLabel: 'x0', yLabel: 'x1', series: [ca, cb] },
        { title: `objective, ${la}`, xLabel: 't', yLabel: 'phi', series: [pa] },
        { title: `objective, ${lb}`, xLabel: 't', yLabel: 'phi', series: [pb] },
        { title: 'objective, both', xLabel: 't', yLabel: 'phi', series: [pa, pb] },
    ];
    return renderGrid(panels, 3);
}

function gapFromDiagnostics(path: string): { t: number[]; gap: number[] } {
    const d = readDiagnostics(path);
    const t: number[] = [];
    const gap: number[] = [];
    for (let i = 0; i < d.t.length; i++) {
        const g = d.t2gap[i] / (d.t[i] * d.t[i]);
        if (Number.isFinite(g) && g >= GAP_FLOOR) {
            t.push(d.t[i]);
            gap.push(g);
        }
    }
    if (t.length === 0) {
        throw new SchemaError(`${path}: no usable gap samples (t2_gap all below floor)`);
    }
    return { t, gap };
}

function rateLogLog(paths: string[]): string {
    if (paths.length === 0) {
        throw new SchemaError('rate_loglog needs at least one diagnostics CSV');
    }
    const series: Series[] = [];
    const annotations: string[] = [];
    paths.forEach((p, i) => {
        const { t, gap } = gapFromDiagnostics(p);
        const fit = logLogFit(t, gap);
        const color = PALETTE[i % PALETTE.length];
        series.push({ x: t, y: gap, color, label: `run ${i + 1}` });
        annotations.push(`run ${i + 1}: slope ${fit.slope.toFixed(2)}`);
    });
    const panel: PanelSpec = {
        title: 'objective gap vs t (log-log)',
        xLabel: 't', yLabel: 'gap',
        series, xLog: true, yLog: true, annotations,
    };
    return renderGrid([panel], 1);
}

function lyapunovSeries(paths: string[]): string {
    if (paths.length !== 1) {
        throw new SchemaError('lyapunov_series needs exactly one diagnostics CSV');
    }
    const d = readDiagnostics(paths[0]);
    const panels: PanelSpec[] = [
        {
            title: 'energies W', xLabel: 't', yLabel: 'W',
            series: [
                { x: d.t, y: d.W0, color: COLOR_A, label: 'W0' },
                { x: d.t, y: d.Wbeta, color: COLOR_B, label: 'W_beta', dash: '4 3' },
            ],
        },
        {
            title: 'scaled anchored energy', xLabel: 't', yLabel: 'E_scaled',
            series: [{ x: d.t, y: d.Escaled, color: '#2ca02c', label: 'E_scaled' }],
        },
    ];
    return renderGrid(panels, 2);
}

export function renderLayout(layout: string, csvPaths: string[]): string {
    switch (layout) {
        case 'i1_panels':
            return i1Panels(csvPaths);
        case 'i2_panels':
            return i2Panels(csvPaths);
        case 'rate_loglog':
            return rateLogLog(csvPaths);
        case 'lyapunov_series':
            return lyapunovSeries(csvPaths);
        default:
            throw new SchemaError(
                `unknown layout '${layout}'; valid layouts: ${LAYOUTS.join(', ')}`);
    }
}
