/* tslint:disable */
/* eslint-disable */

/**
 * Outcome of the K search on the mapping torus with monodromy potential `c·y`.
 */
export class KResult {
    private constructor();
    free(): void;
    [Symbol.dispose](): void;
    readonly argmin: Float64Array;
    readonly k: number;
    readonly min_density: number;
    readonly trial_k: Float64Array;
    readonly trial_ok: Uint8Array;
}

/**
 * Cutoff values at `samples` evenly spaced points of `[-ε, ε]`.
 */
export function cutoff_curve(epsilon: number, delta: number, two_sided: boolean, samples: number): Float64Array;

export function mapping_torus_k(c: number, grid: number): KResult;

/**
 * Images under the 3-dimensional gluing map of points `(z, r)` given as a
 * flat list of pairs, at angle 0 and fiber point (0, 0). Points outside
 * the annulus map to NaN.
 */
export function upsilon_image(epsilon: number, zr: Float64Array): Float64Array;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_kresult_free: (a: number, b: number) => void;
    readonly cutoff_curve: (a: number, b: number, c: number, d: number) => [number, number, number, number];
    readonly kresult_argmin: (a: number) => [number, number];
    readonly kresult_k: (a: number) => number;
    readonly kresult_min_density: (a: number) => number;
    readonly kresult_trial_k: (a: number) => [number, number];
    readonly kresult_trial_ok: (a: number) => [number, number];
    readonly mapping_torus_k: (a: number, b: number) => [number, number, number];
    readonly upsilon_image: (a: number, b: number, c: number) => [number, number, number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __externref_table_dealloc: (a: number) => void;
    readonly __wbindgen_free: (a: number, b: number, c: number) => void;
    readonly __wbindgen_malloc: (a: number, b: number) => number;
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
