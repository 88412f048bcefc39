#!/usr/bin/env node
/**
 * render --layout <tag> --csv <paths...> --out <file>
 *
 * Renders harness CSVs into a multi-panel SVG figure.  Exit code 0 on
 * success, 1 with a message on stderr otherwise.
 */

import * as fs from 'fs';
import * as path from 'path';

import { LAYOUTS, renderLayout } from './layouts';

export interface RenderArgs {
    layout: string;
    csv: string[];
    out: string;
}

export function parseArgs(argv: string[]): RenderArgs {
    const args = argv[0] === 'render' ? argv.slice(1) : argv.slice();
    let layout = '';
    const csv: string[] = [];
    let out = '';
    for (let i = 0; i < args.length; i++) {
        const a = args[i];
        if (a === '--layout') {
            layout = args[++i] ?? '';
        } else if (a === '--csv') {
            while (i + 1 < args.length && !args[i + 1].startsWith('--')) {
                csv.push(args[++i]);
            }
        } else if (a === '--out') {
            out = args[++i] ?? '';
        } else {
            throw new Error(`unknown argument '${a}'`);
        }
    }
    if (!layout) throw new Error(`--layout is required (one of ${LAYOUTS.join(', ')})`);
    if (csv.length === 0) throw new Error('--csv needs at least one path');
    if (!out) throw new Error('--out is required');
    return { layout, csv, out };
}

export function run(argv: string[]): number {
    let parsed: RenderArgs;
    try {
        parsed = parseArgs(argv);
    } catch (e) {
        process.stderr.write(`error[args] ${(e as Error).message}\n`);
        return 1;
    }
    try {
        const svg = renderLayout(parsed.layout, parsed.csv);
        fs.mkdirSync(path.dirname(path.resolve(parsed.out)), { recursive: true });
        fs.writeFileSync(parsed.out, svg);
        process.stdout.write(`${parsed.out}\n`);
        return 0;
    } catch (e) {
        process.stderr.write(`error[render] ${(e as Error).message}\n`);
        return 1;
    }
}

if (require.main === module) {
    process.exit(run(process.argv.slice(2)));
}
