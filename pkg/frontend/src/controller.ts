/**
 * Explorer orchestration, free of DOM concerns.
 *
 * The controller owns the ViewState, talks to the analysis service,
 * and pushes rendered artifacts to an ExplorerView.  On fetch failure
 * the last good chart stays up behind an error banner; on a staleness
 * conflict the affected views are refetched automatically and the user
 * is prompted to retry the action.
 */

import { ApiError, ClusterRef, ExplorerApi, PeakEntry, SpectrumPoint } from "./api.js";
import { RenderedChart, brushToYearRange, renderSpectrogram } from "./chart.js";
import { TableRow, buildYearTable } from "./table.js";
import {
  ViewState,
  clampRange,
  initialViewState,
  toggleClusterSelection,
  withVisibleRange,
} from "./state.js";

export interface ExplorerView {
  chartUpdated(chart: RenderedChart): void;
  tableUpdated(rows: TableRow[], rpy: number): void;
  errorShown(message: string | null): void;
  stateUpdated(state: ViewState): void;
}

export class ExplorerController {
  state: ViewState = initialViewState();
  lastChart: RenderedChart | null = null;
  minDeviation = 1;

  private peaks: PeakEntry[] = [];
  private currentReferences: ClusterRef[] = [];
  private lastPoints: SpectrumPoint[] = [];

  constructor(
    private readonly api: ExplorerApi,
    private readonly view: ExplorerView,
  ) {}

  private publishState(): void {
    this.view.stateUpdated(this.state);
  }

  private failure(error: unknown): void {
    const message = error instanceof Error ? error.message : String(error);
    this.view.errorShown(message);
  }

  async load(): Promise<void> {
    try {
      const session = await this.api.getSession();
      const spectrum = await this.api.getSpectrum();
      this.peaks = (await this.api.getPeaks(this.minDeviation)).peaks;
      this.state = {
        ...this.state,
        corpusRange: spectrum.year_range,
        visibleRange: spectrum.year_range,
        markerClusterIds: session.markers.cluster_ids,
        coModeEnabled: session.markers.cluster_ids.length > 0,
        counter: spectrum.counter,
      };
      this.drawChart(spectrum.points);
      this.view.errorShown(null);
      this.publishState();
    } catch (error) {
      this.failure(error);
    }
  }

  private drawChart(points: SpectrumPoint[]): void {
    this.lastPoints = points;
    const chart = renderSpectrogram(points, this.state, this.peaks);
    this.lastChart = chart;
    this.view.chartUpdated(chart);
  }

  /** Refetch the spectrum for the visible range; keep the last chart on failure. */
  async refreshSpectrum(): Promise<void> {
    try {
      const range = this.state.visibleRange ?? undefined;
      const spectrum = await this.api.getSpectrum(range ?? undefined);
      this.peaks = (await this.api.getPeaks(this.minDeviation)).peaks;
      this.state = { ...this.state, counter: spectrum.counter };
      this.drawChart(spectrum.points);
      this.view.errorShown(null);
      this.publishState();
    } catch (error) {
      this.failure(error);
    }
  }

  async setVisibleRange(requested: [number, number]): Promise<void> {
    this.state = withVisibleRange(this.state, requested);
    this.publishState();
    await this.refreshSpectrum();
  }

  /** Brush selection in chart pixels; resolves to whole years and refetches. */
  async brush(pixelStart: number, pixelEnd: number): Promise<void> {
    if (!this.lastChart) return;
    const range = brushToYearRange(this.lastChart, pixelStart, pixelEnd);
    await this.setVisibleRange(clampRange(range, this.state.corpusRange));
  }

  async inspectYear(rpy: number): Promise<void> {
    try {
      const response = await this.api.getYearReferences(rpy);
      this.currentReferences = response.references;
      this.state = { ...this.state, selectedYear: rpy, counter: response.counter };
      this.publishTable();
      this.view.errorShown(null);
      this.publishState();
    } catch (error) {
      this.failure(error);
    }
  }

  private publishTable(): void {
    if (this.state.selectedYear === null) return;
    const rows = buildYearTable(
      this.currentReferences,
      this.state.selectedClusterIds,
      this.state.markerClusterIds,
    );
    this.view.tableUpdated(rows, this.state.selectedYear);
  }

  toggleRowSelection(clusterId: string): void {
    this.state = toggleClusterSelection(this.state, clusterId);
    this.publishTable();
    this.publishState();
  }

  setSmoothingWindow(window: number): void {
    this.state = {
      ...this.state,
      display: { ...this.state.display, smoothingWindow: Math.max(0, window) },
    };
    // display-only: redraw from the data already fetched, no new request
    if (this.lastChart) {
      this.drawChart(this.lastPoints);
    }
    this.publishState();
  }

  async setMinDeviation(value: number): Promise<void> {
    this.minDeviation = Math.max(0, value);
    await this.refreshSpectrum();
  }

  private async handleConflict(error: ApiError): Promise<void> {
    await this.refreshSpectrum();
    if (this.state.selectedYear !== null) {
      await this.inspectYear(this.state.selectedYear);
    }
    this.view.errorShown(`${error.body.message} - refreshed, please retry`);
  }

  private async mutate<T extends { counter: number }>(
    action: () => Promise<T>,
  ): Promise<T | null> {
    try {
      const result = await action();
      this.state = { ...this.state, counter: result.counter };
      return result;
    } catch (error) {
      if (error instanceof ApiError && error.isConflict) {
        await this.handleConflict(error);
      } else {
        this.failure(error);
      }
      return null;
    }
  }

  private async refreshAfterMutation(): Promise<void> {
    await this.refreshSpectrum();
    if (this.state.selectedYear !== null) {
      await this.inspectYear(this.state.selectedYear);
    }
  }

  async mergeSelected(): Promise<string | null> {
    const ids = this.state.selectedClusterIds;
    if (ids.length < 2) {
      this.view.errorShown("select at least two clusters to merge");
      return null;
    }
    const result = await this.mutate(() => this.api.mergeClusters(ids, this.state.counter));
    if (!result) return null;
    this.state = { ...this.state, selectedClusterIds: [result.cluster_id] };
    await this.refreshAfterMutation();
    return result.cluster_id;
  }

  async splitCluster(clusterId: string, partition: string[][]): Promise<string[] | null> {
    const result = await this.mutate(() =>
      this.api.splitCluster(clusterId, partition, this.state.counter),
    );
    if (!result) return null;
    this.state = { ...this.state, selectedClusterIds: [] };
    await this.refreshAfterMutation();
    return result.cluster_ids;
  }

  async correctYear(clusterId: string, rpy: number): Promise<boolean> {
    const result = await this.mutate(() =>
      this.api.correctYear(clusterId, rpy, this.state.counter),
    );
    if (!result) return false;
    await this.refreshAfterMutation();
    return true;
  }

  /** Remember marker clusters locally; the reduction happens on enableCoMode. */
  setMarkerSelection(clusterIds: string[]): void {
    this.state = { ...this.state, markerClusterIds: clusterIds };
    this.publishTable();
    this.publishState();
  }

  async enableCoMode(mode: "or" | "and" = "or"): Promise<boolean> {
    if (this.state.markerClusterIds.length === 0) {
      this.view.errorShown("set a marker reference first");
      return false;
    }
    const result = await this.mutate(() =>
      this.api.setMarkers(this.state.markerClusterIds, mode, this.state.counter),
    );
    if (!result) return false;
    this.state = { ...this.state, coModeEnabled: true };
    await this.refreshAfterMutation();
    return true;
  }

  async disableCoMode(): Promise<void> {
    try {
      const result = await this.api.clearMarkers();
      this.state = {
        ...this.state,
        coModeEnabled: false,
        markerClusterIds: [],
        counter: result.counter,
      };
      await this.refreshAfterMutation();
    } catch (error) {
      this.failure(error);
    }
  }

  async saveSession(path?: string): Promise<string | null> {
    try {
      const result = await this.api.saveSession(path);
      return result.path;
    } catch (error) {
      this.failure(error);
      return null;
    }
  }
}
