/* tslint:disable */
/* eslint-disable */

export class SimulationResult {
    private constructor();
    free(): void;
    [Symbol.dispose](): void;
    /**
     * First time each activation flag is set; NaN if never.
     */
    activation_times(): Float64Array;
    diverged(): boolean;
    /**
     * Tail RMSE of the fault estimate over the final half.
     */
    fault_rmse(): number;
    figure_count(): number;
    figure_name(index: number): string;
    figure_svg(index: number): string;
    summary(): string;
}

/**
 * The built-in example as editable config text.
 */
export function example_config(): string;

export function gainReport(text: string): string;

export function relaxationFigure(alpha: number, step: number, horizon: number): string;

export function runScenario(text: string, horizon: number): SimulationResult;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_simulationresult_free: (a: number, b: number) => void;
    readonly example_config: () => [number, number];
    readonly gainReport: (a: number, b: number) => [number, number, number, number];
    readonly relaxationFigure: (a: number, b: number, c: number) => [number, number, number, number];
    readonly runScenario: (a: number, b: number, c: number) => [number, number, number];
    readonly simulationresult_activation_times: (a: number) => [number, number];
    readonly simulationresult_diverged: (a: number) => number;
    readonly simulationresult_fault_rmse: (a: number) => number;
    readonly simulationresult_figure_count: (a: number) => number;
    readonly simulationresult_figure_name: (a: number, b: number) => [number, number];
    readonly simulationresult_figure_svg: (a: number, b: number) => [number, number];
    readonly simulationresult_summary: (a: number) => [number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __wbindgen_free: (a: number, b: number, c: number) => void;
    readonly __wbindgen_malloc: (a: number, b: number) => number;
    readonly __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
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
