/** Least-squares log-log rate fit, mirroring the harness convention:
 *  samples with gap below the 1e-14 floor are excluded. */

export const GAP_FLOOR = 1e-14;

export interface RateFit {
    slope: number;
    r2: number;
    nUsed: number;
}

export function logLogFit(t: number[], gap: number[]): RateFit {
    const u: number[] = [];
    const y: number[] = [];
    for (let i = 0; i < t.length; i++) {
        if (Number.isFinite(gap[i]) && gap[i] >= GAP_FLOOR && t[i] > 0) {
            u.push(Math.log(t[i]));
            y.push(Math.log(gap[i]));
        }
    }
    const n = u.length;
    if (n < 2) {
        throw new Error(`too few usable samples for a rate fit: ${n}`);
    }
    const um = u.reduce((a, b) => a + b, 0) / n;
    const ym = y.reduce((a, b) => a + b, 0) / n;
    let suu = 0;
    let suy = 0;
    let syy = 0;
    for (let i = 0; i < n; i++) {
        const du = u[i] - um;
        const dy = y[i] - ym;
        suu += du * du;
        suy += du * dy;
        syy += dy * dy;
    }
    const slope = suy / suu;
    let ssr = 0;
    for (let i = 0; i < n; i++) {
        const r = y[i] - ym - slope * (u[i] - um);
        ssr += r * r;
    }
    const r2 = syy === 0 ? 1 : 1 - ssr / syy;
    return { slope, r2, nUsed: n };
}
