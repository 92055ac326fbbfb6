// Shapes and code tables mirroring the host's wire/event contract.

export interface Rec {
  t_ms: number;
  recv_seq: number | null;
  kind: "event" | "metric" | "rep" | "raw" | "gap" | string;
  payload: Record<string, any>;
}

export enum EventCode {
  SessionStart = 0,
  SetStart = 1,
  Rep = 2,
  SetEnd = 3,
  RestStart = 4,
  Warning = 5,
  Paused = 6,
  Resumed = 7,
  Aborted = 8,
  Completed = 9,
  IntensityChanged = 10,
}

export const WARNING_NAMES: Record<number, string> = {
  0: "air poor",
  1: "air moderate",
  2: "desaturation",
  3: "breathing rate high",
  4: "sensor quality",
};

// level -> repetitions per set
export const REPS_PER_LEVEL: Record<number, number> = { 1: 8, 2: 10, 3: 10, 4: 12, 5: 15 };

export type AirBand = "good" | "moderate" | "poor";

export function classifyAir(pm25: number, pm10: number): AirBand {
  if (pm25 <= 15.0 && pm10 <= 45.0) return "good";
  if (pm25 <= 35.0 && pm10 <= 100.0) return "moderate";
  return "poor";
}

export interface SessionInfo {
  id: string;
  created_at: string;
  status: string;
  device_label: string;
  regimen: { sets: number; rest_s: number; start_level: number; max_level: number };
}
