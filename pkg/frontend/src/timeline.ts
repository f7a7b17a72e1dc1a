/** Timeline lane layout: one lane per temporal object, computed purely from
 * the service's timeline payload. Events become point markers at their
 * origin ticks; intervals become spans, with open occurrences extended to
 * the current tick and flagged for the open-end glyph; anomalies attach as
 * badges on their object's lane at their tick. */
import type { TimelinePayload } from "./api.js";

export interface Marker {
  tick: number;
}

export interface Span {
  start: number;
  end: number; // provisional end = current tick while still open
  open: boolean;
}

export interface Badge {
  tick: number;
  kind: string;
}

export interface Lane {
  name: string;
  kind: "event" | "interval";
  markers: Marker[];
  spans: Span[];
  badges: Badge[];
}

export interface TimelineLayout {
  lanes: Lane[];
  /** inclusive axis extent [0, horizon] */
  horizon: number;
}

export function layoutTimeline(payload: TimelinePayload, currentTick: number): TimelineLayout {
  const lanes: Lane[] = [];
  for (const [name, obj] of Object.entries(payload.objects)) {
    const lane: Lane = { name, kind: obj.kind, markers: [], spans: [], badges: [] };
    for (const [start, end] of obj.occurrences) {
      if (obj.kind === "event") {
        lane.markers.push({ tick: start });
      } else if (end === null) {
        lane.spans.push({ start, end: Math.max(currentTick, start), open: true });
      } else {
        lane.spans.push({ start, end, open: false });
      }
    }
    lanes.push(lane);
  }
  const byName = new Map(lanes.map((lane) => [lane.name, lane]));
  for (const [tick, obj, kind] of payload.anomalies) {
    const lane = byName.get(obj);
    if (lane) {
      lane.badges.push({ tick, kind });
    }
  }
  let horizon = currentTick;
  for (const lane of lanes) {
    for (const marker of lane.markers) horizon = Math.max(horizon, marker.tick);
    for (const span of lane.spans) horizon = Math.max(horizon, span.end);
    for (const badge of lane.badges) horizon = Math.max(horizon, badge.tick);
  }
  return { lanes, horizon: Math.max(horizon, 0) };
}
