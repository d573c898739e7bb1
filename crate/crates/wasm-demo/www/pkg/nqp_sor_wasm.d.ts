/* tslint:disable */
/* eslint-disable */

/**
 * Decrement histories of one generated problem under three solvers.
 */
export class Curves {
    free(): void;
    [Symbol.dispose](): void;
    fixed(): Float64Array;
    freezeOmegas(): Float64Array;
    freeze(): Float64Array;
    /**
     * NaN until the freezing solver fixes omega.
     */
    frozenOmega(): number;
    constructor(n: number, log_kappa: number, seed: bigint, omega: number, max_iter: number);
    wolfeOmegas(): Float64Array;
    wolfe(): Float64Array;
}

/**
 * A synthetic image, its blurred and noisy copy, and the latest restoration.
 */
export class Deblur {
    free(): void;
    [Symbol.dispose](): void;
    degraded(): Float64Array;
    /**
     * Relative error against the truth, starting with the degraded image.
     */
    errors(): Float64Array;
    constructor(size: number, blur_sigma: number, noise: number, seed: bigint);
    restore(iters: number, mode: number, omega: number): void;
    restored(): Float64Array;
    size(): number;
    truth(): Float64Array;
}

export function cyclePaths(omega: number, steps: number): Float64Array;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_curves_free: (a: number, b: number) => void;
    readonly __wbg_deblur_free: (a: number, b: number) => void;
    readonly curves_fixed: (a: number) => [number, number];
    readonly curves_freeze: (a: number) => [number, number];
    readonly curves_freezeOmegas: (a: number) => [number, number];
    readonly curves_frozenOmega: (a: number) => number;
    readonly curves_new: (a: number, b: number, c: bigint, d: number, e: number) => [number, number, number];
    readonly curves_wolfe: (a: number) => [number, number];
    readonly curves_wolfeOmegas: (a: number) => [number, number];
    readonly cyclePaths: (a: number, b: number) => [number, number, number, number];
    readonly deblur_degraded: (a: number) => [number, number];
    readonly deblur_errors: (a: number) => [number, number];
    readonly deblur_new: (a: number, b: number, c: number, d: bigint) => [number, number, number];
    readonly deblur_restore: (a: number, b: number, c: number, d: number) => [number, number];
    readonly deblur_restored: (a: number) => [number, number];
    readonly deblur_size: (a: number) => number;
    readonly deblur_truth: (a: number) => [number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __wbindgen_free: (a: number, b: number, c: number) => void;
    readonly __externref_table_dealloc: (a: number) => void;
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
