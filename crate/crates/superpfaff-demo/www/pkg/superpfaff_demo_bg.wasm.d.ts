/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const boundary_curve: (a: number, b: number) => [number, number];
export const sl2_point: (a: number, b: number, c: number) => [number, number];
export const sl2_strata_grid: (a: number, b: number, c: number) => [number, number];
export const spo22_eval: (a: number, b: number, c: number, d: number) => [number, number];
export const __wbindgen_externrefs: WebAssembly.Table;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __wbindgen_start: () => void;
