/**
 * Strict readers for the harness CSV schemas.
 *
 * trajectory.csv   t,x_0..x_{d-1},v_0..v_{d-1},phi,grad_norm
 * diagnostics.csv  t,W0,Wbeta,E_lambda,E_scaled,t2_gap,t_resid
 * iterates.csv     k,t_k,obj,best,prox_resid_norm
 *
 * Any header deviation is an error naming the missing column.
 */

import * as fs from 'fs';

export class SchemaError extends Error {}

export interface Table {
    header: string[];
    columns: Map<string, number[]>;
    rowCount: number;
}

export function parseCsvText(text: string, path: string): Table {
    const lines = text.split(/\r?\n/).filter((l) => l.length > 0);
    if (lines.length === 0) {
        throw new SchemaError(`${path}: empty CSV (no header row)`);
    }
    const header = lines[0].split(',');
    const cols: number[][] = header.map(() => []);
    for (let i = 1; i < lines.length; i++) {
        const cells = lines[i].split(',');
        if (cells.length !== header.length) {
            throw new SchemaError(
                `${path}: row ${i} has ${cells.length} cells, expected ${header.length}`);
        }
        for (let j = 0; j < cells.length; j++) {
            cols[j].push(Number(cells[j]));
        }
    }
    const columns = new Map<string, number[]>();
    header.forEach((name, j) => columns.set(name, cols[j]));
    return { header, columns, rowCount: lines.length - 1 };
}

export function readTable(path: string): Table {
    return parseCsvText(fs.readFileSync(path, 'utf8'), path);
}

function requireColumns(t: Table, names: string[], path: string): void {
    for (const name of names) {
        if (!t.columns.has(name)) {
            throw new SchemaError(`${path}: missing column '${name}'`);
        }
    }
}

export interface TrajectoryData {
    t: number[];
    xs: number[][]; // one array per coordinate
    phi: number[];
    gradNorm: number[];
    dim: number;
}

export function readTrajectory(path: string): TrajectoryData {
    const t = readTable(path);
    if (t.header.length < 5 || (t.header.length - 3) % 2 !== 0) {
        throw new SchemaError(`${path}: missing column 'x_0' (not a trajectory CSV)`);
    }
    const dim = (t.header.length - 3) / 2;
    const names = ['t'];
    for (let i = 0; i < dim; i++) names.push(`x_${i}`);
    for (let i = 0; i < dim; i++) names.push(`v_${i}`);
    names.push('phi', 'grad_norm');
    for (let j = 0; j < names.length; j++) {
        if (t.header[j] !== names[j]) {
            throw new SchemaError(`${path}: missing column '${names[j]}'`);
        }
    }
    const xs: number[][] = [];
    for (let i = 0; i < dim; i++) xs.push(t.columns.get(`x_${i}`)!);
    return {
        t: t.columns.get('t')!,
        xs,
        phi: t.columns.get('phi')!,
        gradNorm: t.columns.get('grad_norm')!,
        dim,
    };
}

export const DIAGNOSTICS_COLUMNS =
    ['t', 'W0', 'Wbeta', 'E_lambda', 'E_scaled', 't2_gap', 't_resid'];

export interface DiagnosticsData {
    t: number[];
    W0: number[];
    Wbeta: number[];
    Elambda: number[];
    Escaled: number[];
    t2gap: number[];
    tresid: number[];
}

export function readDiagnostics(path: string): DiagnosticsData {
    const t = readTable(path);
    requireColumns(t, DIAGNOSTICS_COLUMNS, path);
    for (let j = 0; j < DIAGNOSTICS_COLUMNS.length; j++) {
        if (t.header[j] !== DIAGNOSTICS_COLUMNS[j]) {
            throw new SchemaError(`${path}: missing column '${DIAGNOSTICS_COLUMNS[j]}'`);
        }
    }
    return {
        t: t.columns.get('t')!,
        W0: t.columns.get('W0')!,
        Wbeta: t.columns.get('Wbeta')!,
        Elambda: t.columns.get('E_lambda')!,
        Escaled: t.columns.get('E_scaled')!,
        t2gap: t.columns.get('t2_gap')!,
        tresid: t.columns.get('t_resid')!,
    };
}
