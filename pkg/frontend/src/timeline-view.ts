// SVG rendering for the competition timeline. Marker x follows event time,
// marker y follows log10(penalty); lower penalty is better and sits lower
// on the page. Markers with no penalty (resets) sit on the baseline.

import type { Timeline } from "./timeline.js";

function esc(text: unknown): string {
  return String(text)
    .replaceAll("&", "&amp;")
    .replaceAll("<", "&lt;")
    .replaceAll(">", "&gt;")
    .replaceAll('"', "&quot;");
}

export const TIMELINE_SIZE = { width: 640, height: 240, pad: 28 };

export function renderTimelineInto(svg: SVGSVGElement, timeline: Timeline): void {
  const { width, height, pad } = TIMELINE_SIZE;
  const innerW = width - 2 * pad;
  const innerH = height - 2 * pad;
  const yPix = (fraction: number) => pad + (1 - fraction) * innerH;

  const ticks = timeline.axis.ticks
    .map((tick) => {
      const y = yPix(tick.y);
      return `
        <line x1="${pad}" y1="${y}" x2="${width - pad}" y2="${y}" class="grid"></line>
        <text x="4" y="${y + 4}" class="tick">${tick.value}</text>`;
    })
    .join("");
  const markers = timeline.markers
    .map((marker) => {
      const x = pad + marker.x * innerW;
      const y = marker.y === null ? height - pad : yPix(marker.y);
      return `
        <g class="marker" data-label="${esc(marker.label)}" data-at="${esc(marker.at)}">
          <circle cx="${x}" cy="${y}" r="5"></circle>
          <text x="${x}" y="${y - 9}" text-anchor="middle">${esc(marker.label)}</text>
        </g>`;
    })
    .join("");
  svg.innerHTML = `
    <line x1="${pad}" y1="${pad}" x2="${pad}" y2="${height - pad}" class="axis"></line>
    <line x1="${pad}" y1="${height - pad}" x2="${width - pad}" y2="${height - pad}" class="axis"></line>
    ${ticks}${markers}`;
  svg.setAttribute("data-scale", "log");
  svg.setAttribute("data-decades", String(timeline.axis.decades));
}
