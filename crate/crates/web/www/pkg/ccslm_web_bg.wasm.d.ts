/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const __wbg_explorer_free: (a: number, b: number) => void;
export const explorer_coherence: (a: number, b: number) => [number, number, number, number];
export const explorer_cursor: (a: number) => number;
export const explorer_graph: (a: number) => [number, number];
export const explorer_new: (a: number, b: number) => [number, number, number];
export const explorer_step: (a: number, b: number) => [number, number, number, number];
export const explorer_transitions: (a: number) => [number, number, number, number];
export const explorer_undo: (a: number) => number;
export const __wbindgen_externrefs: WebAssembly.Table;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __wbindgen_malloc: (a: number, b: number) => number;
export const __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
export const __wbindgen_start: () => void;
