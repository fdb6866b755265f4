/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const __wbg_simulationresult_free: (a: number, b: number) => void;
export const example_config: () => [number, number];
export const gainReport: (a: number, b: number) => [number, number, number, number];
export const relaxationFigure: (a: number, b: number, c: number) => [number, number, number, number];
export const runScenario: (a: number, b: number, c: number) => [number, number, number];
export const simulationresult_activation_times: (a: number) => [number, number];
export const simulationresult_diverged: (a: number) => number;
export const simulationresult_fault_rmse: (a: number) => number;
export const simulationresult_figure_count: (a: number) => number;
export const simulationresult_figure_name: (a: number, b: number) => [number, number];
export const simulationresult_figure_svg: (a: number, b: number) => [number, number];
export const simulationresult_summary: (a: number) => [number, number];
export const __wbindgen_externrefs: WebAssembly.Table;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __wbindgen_malloc: (a: number, b: number) => number;
export const __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_start: () => void;
