import type { ClipPayload, FramePayload } from "./types.js";

// The camera follows the agent: the world window is fixed in meters
// relative to the agent's longitudinal position.
const VIEW_BEHIND_M = 45;
const VIEW_AHEAD_M = 75;
const CAR_LENGTH_M = 5;

export interface SceneRect {
  id: string;
  kind: "agent" | "npc";
  x: number;
  y: number;
  w: number;
  h: number;
}

export interface Scene {
  laneLines: number[]; // y of each lane separator, includes road edges
  rects: SceneRect[];
  badges: string[]; // the frame's letter, as shown in the overlay
  action: string;
}

export function frameScene(
  frame: FramePayload,
  lanes: number,
  width: number,
  height: number,
): Scene {
  const windowM = VIEW_BEHIND_M + VIEW_AHEAD_M;
  const pxPerM = width / windowM;
  const laneH = height / lanes;
  const originX = frame.agent.x - VIEW_BEHIND_M;

  const place = (lane: number, x: number, kind: "agent" | "npc", id: string): SceneRect => ({
    id,
    kind,
    x: (x - originX - CAR_LENGTH_M / 2) * pxPerM,
    y: (lane - 1) * laneH + laneH * 0.25,
    w: CAR_LENGTH_M * pxPerM,
    h: laneH * 0.5,
  });

  const rects = [place(frame.agent.lane, frame.agent.x, "agent", frame.agent.id)];
  for (const npc of frame.npcs) {
    const rect = place(npc.lane, npc.x, "npc", npc.id);
    if (rect.x + rect.w >= 0 && rect.x <= width) {
      rects.push(rect);
    }
  }
  return {
    laneLines: Array.from({ length: lanes + 1 }, (_, i) => i * laneH),
    rects,
    badges: [...frame.letter],
    action: frame.action,
  };
}

// Subset of CanvasRenderingContext2D the renderer needs; tests use a
// recording stub.
export interface DrawContext {
  fillStyle: string | CanvasGradient | CanvasPattern;
  strokeStyle: string | CanvasGradient | CanvasPattern;
  setLineDash(segments: number[]): void;
  fillRect(x: number, y: number, w: number, h: number): void;
  beginPath(): void;
  moveTo(x: number, y: number): void;
  lineTo(x: number, y: number): void;
  stroke(): void;
}

export function drawScene(
  ctx: DrawContext,
  scene: Scene,
  width: number,
  height: number,
): void {
  ctx.fillStyle = "#3a3f47";
  ctx.fillRect(0, 0, width, height);
  ctx.strokeStyle = "#9aa3ad";
  for (const y of scene.laneLines) {
    const isEdge = y === scene.laneLines[0] || y === scene.laneLines[scene.laneLines.length - 1];
    ctx.setLineDash(isEdge ? [] : [8, 10]);
    ctx.beginPath();
    ctx.moveTo(0, y);
    ctx.lineTo(width, y);
    ctx.stroke();
  }
  ctx.setLineDash([]);
  for (const rect of scene.rects) {
    ctx.fillStyle = rect.kind === "agent" ? "#2fbf71" : "#4a90d9";
    ctx.fillRect(rect.x, rect.y, rect.w, rect.h);
  }
}

// Playback over a clip's frames.  The cursor is clamped to the clip, so
// scrubbing or stepping can never index outside it.
export class ClipPlayer {
  cursor = 0;
  playing = false;
  speed = 1; // frames per second multiplier over the base rate
  readonly baseFps = 5;
  private accumulated = 0;

  constructor(readonly clip: ClipPayload) {}

  get frame(): FramePayload {
    const frame = this.clip.frames[this.cursor];
    if (frame === undefined) {
      throw new Error(`cursor ${this.cursor} outside clip`);
    }
    return frame;
  }

  get length(): number {
    return this.clip.frames.length;
  }

  seek(index: number): void {
    this.cursor = Math.min(Math.max(0, Math.floor(index)), this.length - 1);
  }

  play(): void {
    if (this.cursor === this.length - 1) {
      this.cursor = 0; // replay from the top
    }
    this.playing = true;
  }

  pause(): void {
    this.playing = false;
  }

  // Advance playback by dt seconds; returns true when the frame changed.
  tick(dt: number): boolean {
    if (!this.playing) {
      return false;
    }
    this.accumulated += dt * this.baseFps * this.speed;
    if (this.accumulated < 1) {
      return false;
    }
    const steps = Math.floor(this.accumulated);
    this.accumulated -= steps;
    const next = Math.min(this.cursor + steps, this.length - 1);
    const changed = next !== this.cursor;
    this.cursor = next;
    if (this.cursor === this.length - 1) {
      this.playing = false;
    }
    return changed;
  }
}
