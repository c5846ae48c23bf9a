/* tslint:disable */
/* eslint-disable */

export class Explorer {
    free(): void;
    [Symbol.dispose](): void;
    coherence(bound: number): string;
    cursor(): number;
    /**
     * The part of the state space visited so far, plus the trail.
     */
    graph(): string;
    /**
     * Parses and checks `source`. Errors are JSON with a `diagnostics` list.
     */
    constructor(source: string);
    /**
     * Fires transition `index` of the cursor; returns `{newState, stateTerm}`.
     */
    step(index: number): string;
    /**
     * Outgoing transitions of the cursor state.
     */
    transitions(): string;
    /**
     * Returns the new cursor, or `undefined` at the start.
     */
    undo(): number | undefined;
}

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_explorer_free: (a: number, b: number) => void;
    readonly explorer_coherence: (a: number, b: number) => [number, number, number, number];
    readonly explorer_cursor: (a: number) => number;
    readonly explorer_graph: (a: number) => [number, number];
    readonly explorer_new: (a: number, b: number) => [number, number, number];
    readonly explorer_step: (a: number, b: number) => [number, number, number, number];
    readonly explorer_transitions: (a: number) => [number, number, number, number];
    readonly explorer_undo: (a: number) => number;
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __externref_table_dealloc: (a: number) => void;
    readonly __wbindgen_free: (a: number, b: number, c: number) => void;
    readonly __wbindgen_malloc: (a: number, b: number) => number;
    readonly __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
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
