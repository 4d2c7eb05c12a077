/**
 * Year inspector: the per-year reference table with its row actions.
 *
 * Every numeric cell is the API payload value converted with String();
 * the client performs no arithmetic on NCR or deviation values.
 */

import { ClusterRef } from "./api.js";

export interface TableRow {
  clusterId: string;
  cells: { rpy: string; ncr: string; author: string; source: string; variants: string };
  variantList: string[];
  selected: boolean;
  isMarker: boolean;
}

export function buildYearTable(
  references: ClusterRef[],
  selectedClusterIds: string[],
  markerClusterIds: string[],
): TableRow[] {
  return references.map((ref) => ({
    clusterId: ref.cluster_id,
    cells: {
      rpy: ref.rpy === null ? "" : String(ref.rpy),
      ncr: String(ref.ncr),
      author: ref.author,
      source: ref.source ?? "",
      variants: String(ref.n_variants),
    },
    variantList: ref.variants.slice(),
    selected: selectedClusterIds.includes(ref.cluster_id),
    isMarker: markerClusterIds.includes(ref.cluster_id),
  }));
}

function escapeHtml(text: string): string {
  return text
    .replaceAll("&", "&amp;")
    .replaceAll("<", "&lt;")
    .replaceAll(">", "&gt;")
    .replaceAll('"', "&quot;");
}

export function renderYearTable(rows: TableRow[], rpy: number): string {
  const header =
    "<tr><th></th><th>RPY</th><th>NCR</th><th>Author</th><th>Source</th><th>Variants</th>" +
    "<th>Actions</th></tr>";
  const body = rows
    .map((row) => {
      const marker = row.isMarker ? " data-marker=\"true\"" : "";
      const checked = row.selected ? " checked" : "";
      return (
        `<tr data-cluster-id="${row.clusterId}"${marker}>` +
        `<td><input type="checkbox" data-action="select"${checked}></td>` +
        `<td data-cell="rpy">${row.cells.rpy}</td>` +
        `<td data-cell="ncr">${row.cells.ncr}</td>` +
        `<td data-cell="author">${escapeHtml(row.cells.author)}</td>` +
        `<td data-cell="source">${escapeHtml(row.cells.source)}</td>` +
        `<td data-cell="variants">${row.cells.variants}</td>` +
        `<td>` +
        `<button data-action="merge-selected">merge selected</button>` +
        `<button data-action="split">split</button>` +
        `<button data-action="correct-year">correct year</button>` +
        `<button data-action="set-marker">set as marker</button>` +
        `</td></tr>`
      );
    })
    .join("");
  return `<table data-role="year-inspector" data-rpy="${rpy}">${header}${body}</table>`;
}
