/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const __wbg_curves_free: (a: number, b: number) => void;
export const __wbg_deblur_free: (a: number, b: number) => void;
export const curves_fixed: (a: number) => [number, number];
export const curves_freeze: (a: number) => [number, number];
export const curves_freezeOmegas: (a: number) => [number, number];
export const curves_frozenOmega: (a: number) => number;
export const curves_new: (a: number, b: number, c: bigint, d: number, e: number) => [number, number, number];
export const curves_wolfe: (a: number) => [number, number];
export const curves_wolfeOmegas: (a: number) => [number, number];
export const cyclePaths: (a: number, b: number) => [number, number, number, number];
export const deblur_degraded: (a: number) => [number, number];
export const deblur_errors: (a: number) => [number, number];
export const deblur_new: (a: number, b: number, c: number, d: bigint) => [number, number, number];
export const deblur_restore: (a: number, b: number, c: number, d: number) => [number, number];
export const deblur_restored: (a: number) => [number, number];
export const deblur_size: (a: number) => number;
export const deblur_truth: (a: number) => [number, number];
export const __wbindgen_externrefs: WebAssembly.Table;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_start: () => void;
