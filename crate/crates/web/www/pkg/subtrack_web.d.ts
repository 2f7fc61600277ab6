/* tslint:disable */
/* eslint-disable */

export class Explorer {
    free(): void;
    [Symbol.dispose](): void;
    /**
     * Left button rotates, right chases the dimensions under the drag,
     * middle changes depth emphasis.
     */
    drag(button: string, fx: number, fy: number, tx: number, ty: number, is_final: boolean): string;
    frame(): string;
    /**
     * Handles one protocol request; returns the output lines (progress
     * events, then the reply) joined by newlines.
     */
    handle(line: string): string;
    list_views(): string;
    /**
     * Loads a built-in fixture: "tube_stick" or "three_clusters".
     */
    constructor(fixture: string, seed: number);
    optimize(metric: string, scope: string): string;
    /**
     * Builds a path through every saved view, in order of saving.
     */
    path_all(): string;
    path_t(t: number): string;
    save_view(): string;
}

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_explorer_free: (a: number, b: number) => void;
    readonly explorer_drag: (a: number, b: number, c: number, d: number, e: number, f: number, g: number, h: number) => [number, number, number, number];
    readonly explorer_frame: (a: number) => [number, number, number, number];
    readonly explorer_handle: (a: number, b: number, c: number) => [number, number];
    readonly explorer_list_views: (a: number) => [number, number, number, number];
    readonly explorer_new: (a: number, b: number, c: number) => [number, number, number];
    readonly explorer_optimize: (a: number, b: number, c: number, d: number, e: number) => [number, number, number, number];
    readonly explorer_path_all: (a: number) => [number, number, number, number];
    readonly explorer_path_t: (a: number, b: number) => [number, number, number, number];
    readonly explorer_save_view: (a: number) => [number, number, number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __wbindgen_malloc: (a: number, b: number) => number;
    readonly __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
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
