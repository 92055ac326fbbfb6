// Pure fold of session records into what the page renders. No optimistic
// state: every badge and counter here came out of the log.

import { classifyAir, EventCode, Rec, REPS_PER_LEVEL, WARNING_NAMES } from "./types.js";

export interface SeriesPoint {
  t: number;
  v: number;
}

export interface WarningEntry {
  t_ms: number;
  code: number;
  label: string;
}

const SERIES_WINDOW_MS = 5 * 60 * 1000;

export class LiveViewModel {
  spo2: SeriesPoint[] = [];
  rr: SeriesPoint[] = [];
  hr: SeriesPoint[] = [];
  phase = "idle";
  level: number | null = null;
  repTarget: number | null = null;
  repsInSet = 0;
  totalReps = 0;
  currentSet = 0;
  plannedSets: number | null = null;
  airBand: string | null = null;
  warnings: WarningEntry[] = [];
  lastTms = 0;
  recordCount = 0;

  reset(): void {
    this.spo2 = [];
    this.rr = [];
    this.hr = [];
    this.phase = "idle";
    this.level = null;
    this.repTarget = null;
    this.repsInSet = 0;
    this.totalReps = 0;
    this.currentSet = 0;
    this.airBand = null;
    this.warnings = [];
    this.lastTms = 0;
    this.recordCount = 0;
  }

  apply(rec: Rec): void {
    this.recordCount += 1;
    this.lastTms = Math.max(this.lastTms, rec.t_ms);
    switch (rec.kind) {
      case "metric":
        this.applyMetric(rec);
        break;
      case "rep": {
        const shown = typeof rec.payload.arg === "number" ? rec.payload.arg : this.repsInSet + 1;
        // never show more than the set's target
        this.repsInSet = this.repTarget === null ? shown : Math.min(shown, this.repTarget);
        this.totalReps += 1;
        break;
      }
      case "event":
        this.applyEvent(rec);
        break;
      case "raw":
        if (rec.payload.msg_type === 3) {
          this.airBand = classifyAir(rec.payload.pm25, rec.payload.pm10);
        }
        break;
      default:
        break; // gaps and unknown kinds carry no view state
    }
  }

  private applyMetric(rec: Rec): void {
    const push = (series: SeriesPoint[], value: unknown) => {
      if (typeof value !== "number") return;
      series.push({ t: rec.t_ms, v: value });
      const cutoff = rec.t_ms - SERIES_WINDOW_MS;
      while (series.length && series[0].t < cutoff) series.shift();
    };
    push(this.spo2, rec.payload.spo2);
    push(this.rr, rec.payload.rr);
    push(this.hr, rec.payload.hr);
    if (typeof rec.payload.rep_count === "number") {
      this.totalReps = Math.max(this.totalReps, rec.payload.rep_count);
    }
  }

  private applyEvent(rec: Rec): void {
    const code = rec.payload.code as number;
    const arg = (rec.payload.arg ?? 0) as number;
    switch (code) {
      case EventCode.SessionStart:
        if (this.phase === "idle") this.phase = "starting";
        break;
      case EventCode.SetStart:
        this.phase = "active set";
        this.currentSet = arg;
        this.repsInSet = 0;
        break;
      case EventCode.SetEnd:
        break;
      case EventCode.RestStart:
        this.phase = "rest";
        break;
      case EventCode.Warning:
        this.warnings.push({ t_ms: rec.t_ms, code: arg, label: WARNING_NAMES[arg] ?? `warning ${arg}` });
        break;
      case EventCode.Paused:
        this.phase = "paused";
        break;
      case EventCode.Resumed:
        this.phase = "active set";
        break;
      case EventCode.Aborted:
        this.phase = "aborted";
        break;
      case EventCode.Completed:
        this.phase = "completed";
        break;
      case EventCode.IntensityChanged:
        this.level = arg;
        this.repTarget = REPS_PER_LEVEL[arg] ?? null;
        if (this.repTarget !== null && this.repsInSet > this.repTarget) {
          this.repsInSet = this.repTarget;
        }
        break;
      default:
        break;
    }
  }

  get isTerminal(): boolean {
    return this.phase === "aborted" || this.phase === "completed";
  }
}
