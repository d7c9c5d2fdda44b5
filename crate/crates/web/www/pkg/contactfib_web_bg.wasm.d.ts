/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const __wbg_kresult_free: (a: number, b: number) => void;
export const cutoff_curve: (a: number, b: number, c: number, d: number) => [number, number, number, number];
export const kresult_argmin: (a: number) => [number, number];
export const kresult_k: (a: number) => number;
export const kresult_min_density: (a: number) => number;
export const kresult_trial_k: (a: number) => [number, number];
export const kresult_trial_ok: (a: number) => [number, number];
export const mapping_torus_k: (a: number, b: number) => [number, number, number];
export const upsilon_image: (a: number, b: number, c: number) => [number, number, number, number];
export const __wbindgen_externrefs: WebAssembly.Table;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __wbindgen_malloc: (a: number, b: number) => number;
export const __wbindgen_start: () => void;
