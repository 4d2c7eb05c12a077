/**
 * Browser bootstrap: binds the controller to the document.
 *
 * Everything interesting happens in controller/chart/table, which are
 * DOM-free; this file only translates DOM events into controller calls
 * and controller callbacks into innerHTML updates.
 */

import { HttpExplorerApi } from "./api.js";
import { RenderedChart } from "./chart.js";
import { ExplorerController, ExplorerView } from "./controller.js";
import { TableRow, renderYearTable } from "./table.js";
import { ViewState } from "./state.js";

function element<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

class DomView implements ExplorerView {
  private chartHost = element<HTMLDivElement>("chart");
  private tableHost = element<HTMLDivElement>("inspector");
  private banner = element<HTMLDivElement>("error-banner");
  private status = element<HTMLDivElement>("status");

  constructor(private readonly controllerRef: () => ExplorerController) {}

  chartUpdated(chart: RenderedChart): void {
    this.chartHost.innerHTML = chart.svg;
    this.bindBrush(chart);
  }

  tableUpdated(rows: TableRow[], rpy: number): void {
    this.tableHost.innerHTML = renderYearTable(rows, rpy);
    this.bindTableActions();
  }

  errorShown(message: string | null): void {
    this.banner.textContent = message ?? "";
    this.banner.style.display = message ? "block" : "none";
  }

  stateUpdated(state: ViewState): void {
    const range = state.visibleRange ? `${state.visibleRange[0]}-${state.visibleRange[1]}` : "-";
    const co = state.coModeEnabled ? ` | co-citation mode: ${state.markerClusterIds.length} marker(s)` : "";
    const smoothing = state.display.smoothingWindow > 1
      ? ` | display smoothing: ${state.display.smoothingWindow}y (curves only)`
      : "";
    this.status.textContent = `years ${range}${co}${smoothing}`;
  }

  private bindBrush(chart: RenderedChart): void {
    const svg = this.chartHost.querySelector("svg");
    if (!svg) return;
    let start: number | null = null;
    svg.addEventListener("mousedown", (event) => {
      start = (event as MouseEvent).offsetX;
    });
    svg.addEventListener("mouseup", (event) => {
      if (start === null) return;
      const end = (event as MouseEvent).offsetX;
      if (Math.abs(end - start) > 4) {
        void this.controllerRef().brush(start, end);
      }
      start = null;
    });
    svg.addEventListener("dblclick", () => {
      const controller = this.controllerRef();
      const corpus = controller.state.corpusRange;
      if (corpus) void controller.setVisibleRange(corpus);
    });
  }

  private bindTableActions(): void {
    const controller = this.controllerRef();
    this.tableHost.querySelectorAll("tr[data-cluster-id]").forEach((row) => {
      const clusterId = (row as HTMLTableRowElement).dataset.clusterId!;
      row.querySelector('input[data-action="select"]')?.addEventListener("change", () => {
        controller.toggleRowSelection(clusterId);
      });
      row.querySelector('button[data-action="merge-selected"]')?.addEventListener("click", () => {
        void controller.mergeSelected();
      });
      row.querySelector('button[data-action="split"]')?.addEventListener("click", () => {
        const partition = window.prompt(
          'partition as JSON, e.g. [["variant a"],["variant b"]]',
        );
        if (partition) void controller.splitCluster(clusterId, JSON.parse(partition));
      });
      row.querySelector('button[data-action="correct-year"]')?.addEventListener("click", () => {
        const year = window.prompt("corrected reference publication year");
        if (year) void controller.correctYear(clusterId, Number(year));
      });
      row.querySelector('button[data-action="set-marker"]')?.addEventListener("click", () => {
        controller.setMarkerSelection([clusterId]);
      });
    });
  }
}

export function startExplorer(baseUrl: string): ExplorerController {
  const api = new HttpExplorerApi(baseUrl);
  let controller: ExplorerController;
  const view = new DomView(() => controller);
  controller = new ExplorerController(api, view);

  element<HTMLButtonElement>("co-toggle").addEventListener("click", () => {
    if (controller.state.coModeEnabled) void controller.disableCoMode();
    else void controller.enableCoMode();
  });
  element<HTMLInputElement>("smoothing").addEventListener("change", (event) => {
    controller.setSmoothingWindow(Number((event.target as HTMLInputElement).value));
  });
  element<HTMLInputElement>("min-deviation").addEventListener("change", (event) => {
    void controller.setMinDeviation(Number((event.target as HTMLInputElement).value));
  });
  element<HTMLInputElement>("year-input").addEventListener("change", (event) => {
    void controller.inspectYear(Number((event.target as HTMLInputElement).value));
  });
  element<HTMLButtonElement>("save-session").addEventListener("click", () => {
    void controller.saveSession();
  });

  void controller.load();
  return controller;
}

declare global {
  interface Window {
    startExplorer: typeof startExplorer;
  }
}

if (typeof window !== "undefined") {
  window.startExplorer = startExplorer;
}
