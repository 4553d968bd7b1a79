/* tslint:disable */
/* eslint-disable */

/**
 * Solves one branch point at amplitude `r` with `n_max` refinement stages.
 *
 * Returns JSON with the frequency, residual, excision flag and the quadratic
 * prediction from the physical curvature.
 */
export function branch_point(omega: number, r: number, n_max: number): string;

/**
 * Rows `[ω, Ω₂ printed, Ω₂ physical]`, flattened, for `points` values of `ω`
 * evenly spaced in `[omega_min, omega_max]`.
 */
export function curvature_curves(omega_min: number, omega_max: number, points: number): Float64Array;

/**
 * Integrates `filaments` vortices over one period.
 *
 * With `r > 0` and two filaments the start is the standing wave of amplitude
 * `r`; otherwise it is the rotating regular polygon. The result is a flat
 * array: `[count, profile_samples, frames, period,` then per frame
 * `t, (x, y)` at `s = 0` for each filament and `(x, y)` at each profile sample
 * for each filament`]`.
 */
export function simulate(filaments: number, r: number, modes: number, steps: number, frames: number): Float64Array;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly branch_point: (a: number, b: number, c: number) => [number, number, number, number];
    readonly curvature_curves: (a: number, b: number, c: number) => [number, number, number, number];
    readonly simulate: (a: number, b: number, c: number, d: number, e: number) => [number, number, number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __externref_table_dealloc: (a: number) => void;
    readonly __wbindgen_free: (a: number, b: number, c: number) => void;
    readonly __wbindgen_start: () => void;
}

export type SyncInitInput = BufferSource | WebAssembly.Module;

/**
 * Instantiates the given `module`, which can either be bytes or
 * a precompiled `WebAssembly.Module`.
 *
 * @param {{ module: SyncInitInput }} module - Passing `SyncInitInput` directly is deprecated.
 *
 * @returns {InitOutput}
 */
export function initSync(module: { module: SyncInitInput } | SyncInitInput): InitOutput;

/**
 * If `module_or_path` is {RequestInfo} or {URL}, makes a request and
 * for everything else, calls `WebAssembly.instantiate` directly.
 *
 * @param {{ module_or_path: InitInput | Promise<InitInput> }} module_or_path - Passing `InitInput` directly is deprecated.
 *
 * @returns {Promise<InitOutput>}
 */
export default function __wbg_init (module_or_path?: { module_or_path: InitInput | Promise<InitInput> } | InitInput | Promise<InitInput>): Promise<InitOutput>;
