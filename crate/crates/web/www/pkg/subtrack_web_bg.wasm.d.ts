/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const __wbg_explorer_free: (a: number, b: number) => void;
export const explorer_drag: (a: number, b: number, c: number, d: number, e: number, f: number, g: number, h: number) => [number, number, number, number];
export const explorer_frame: (a: number) => [number, number, number, number];
export const explorer_handle: (a: number, b: number, c: number) => [number, number];
export const explorer_list_views: (a: number) => [number, number, number, number];
export const explorer_new: (a: number, b: number, c: number) => [number, number, number];
export const explorer_optimize: (a: number, b: number, c: number, d: number, e: number) => [number, number, number, number];
export const explorer_path_all: (a: number) => [number, number, number, number];
export const explorer_path_t: (a: number, b: number) => [number, number, number, number];
export const explorer_save_view: (a: number) => [number, number, number, number];
export const __wbindgen_externrefs: WebAssembly.Table;
export const __wbindgen_malloc: (a: number, b: number) => number;
export const __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __wbindgen_start: () => void;
