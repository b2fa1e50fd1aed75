/* tslint:disable */
/* eslint-disable */

/**
 * Boundary probe at the Cartan element `[[0, −c], [c, 0]]` (`steps = 0` for the default ε ladder).
 */
export function boundary_curve(c: number, steps: number): string;

/**
 * Spf on sl(2) at `[[a, b], [c, −a]]`: value, stratum and the discriminant `a² + bc`.
 */
export function sl2_point(a: number, b: number, c: number): string;

/**
 * A `size × size` grid of strata over `b, c ∈ [−r, r]` at fixed `a`, row-major with `c` outer.
 * Cells hold `p − q` of the even signature, or `null` on the boundary.
 */
export function sl2_strata_grid(a: number, r: number, size: number): string;

/**
 * Spf at an spo(2|2) point next to the closed two-by-two formula, as Grassmann expansions.
 */
export function spo22_eval(a: number, b: number, c: number, d: number): string;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly boundary_curve: (a: number, b: number) => [number, number];
    readonly sl2_point: (a: number, b: number, c: number) => [number, number];
    readonly sl2_strata_grid: (a: number, b: number, c: number) => [number, number];
    readonly spo22_eval: (a: number, b: number, c: number, d: number) => [number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
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
