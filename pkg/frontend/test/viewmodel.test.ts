import { describe, expect, it } from "vitest";

import { Rec } from "../src/types.js";
import { LiveViewModel } from "../src/viewmodel.js";

const event = (t_ms: number, code: number, arg = 0, seq = 0): Rec => ({
  t_ms,
  recv_seq: seq,
  kind: "event",
  payload: { code, arg, name: "" },
});

const metric = (t_ms: number, payload: Record<string, number>): Rec => ({
  t_ms,
  recv_seq: 0,
  kind: "metric",
  payload,
});

const rep = (t_ms: number, arg: number): Rec => ({
  t_ms,
  recv_seq: 0,
  kind: "rep",
  payload: { arg },
});

function startedVm(level = 2): LiveViewModel {
  const vm = new LiveViewModel();
  vm.apply(event(0, 0)); // session start
  vm.apply(event(0, 10, level)); // intensity changed
  vm.apply(event(0, 1, 1)); // set start
  return vm;
}

describe("LiveViewModel", () => {
  it("tracks phase through a whole session", () => {
    const vm = startedVm();
    expect(vm.phase).toBe("active set");
    vm.apply(event(5000, 3, 1)); // set end
    vm.apply(event(5000, 4, 1)); // rest
    expect(vm.phase).toBe("rest");
    vm.apply(event(9000, 1, 2));
    expect(vm.currentSet).toBe(2);
    vm.apply(event(12000, 9)); // completed
    expect(vm.phase).toBe("completed");
    expect(vm.isTerminal).toBe(true);
  });

  it("folds metric records into rolling series", () => {
    const vm = startedVm();
    vm.apply(metric(1000, { spo2: 97.0, hr: 72.0 }));
    vm.apply(metric(2000, { spo2: 96.5, rr: 15.0 }));
    expect(vm.spo2.map((p) => p.v)).toEqual([97.0, 96.5]);
    expect(vm.rr).toHaveLength(1);
    expect(vm.hr).toHaveLength(1);
  });

  it("prunes series beyond the five-minute window", () => {
    const vm = startedVm();
    vm.apply(metric(1000, { spo2: 95 }));
    vm.apply(metric(301500, { spo2: 96 }));
    expect(vm.spo2.map((p) => p.v)).toEqual([96]);
  });

  it("never shows more reps than the set target", () => {
    const vm = startedVm(2); // level 2 -> 10 reps per set
    for (let i = 1; i <= 13; i++) vm.apply(rep(1000 * i, i));
    expect(vm.repsInSet).toBe(10);
    expect(vm.repTarget).toBe(10);
    expect(vm.totalReps).toBe(13); // the raw count is still tracked
  });

  it("resets per-set count at the next set start", () => {
    const vm = startedVm();
    vm.apply(rep(1000, 1));
    vm.apply(event(2000, 3, 1));
    vm.apply(event(2000, 4, 1));
    vm.apply(event(5000, 1, 2));
    expect(vm.repsInSet).toBe(0);
    expect(vm.currentSet).toBe(2);
  });

  it("collects warnings with labels", () => {
    const vm = startedVm();
    vm.apply(event(3000, 5, 2)); // desaturation warning
    vm.apply(event(4000, 5, 0)); // air poor
    expect(vm.warnings.map((w) => w.label)).toEqual(["desaturation", "air poor"]);
  });

  it("derives the air band from raw air records", () => {
    const vm = new LiveViewModel();
    vm.apply({ t_ms: 0, recv_seq: 0, kind: "raw", payload: { msg_type: 3, pm25: 10, pm10: 20 } });
    expect(vm.airBand).toBe("good");
    vm.apply({ t_ms: 1, recv_seq: 1, kind: "raw", payload: { msg_type: 3, pm25: 50, pm10: 20 } });
    expect(vm.airBand).toBe("poor");
  });

  it("updates the level badge only from logged intensity events", () => {
    const vm = startedVm(2);
    expect(vm.level).toBe(2);
    // no optimistic change: only an IntensityChanged event moves the badge
    vm.apply(event(6000, 10, 4));
    expect(vm.level).toBe(4);
    expect(vm.repTarget).toBe(12);
  });

  it("pause and resume flip the phase badge", () => {
    const vm = startedVm();
    vm.apply(event(2000, 6, 0));
    expect(vm.phase).toBe("paused");
    vm.apply(event(3000, 7, 0));
    expect(vm.phase).toBe("active set");
  });

  it("reset clears everything", () => {
    const vm = startedVm();
    vm.apply(metric(1000, { spo2: 95 }));
    vm.apply(rep(1500, 1));
    vm.reset();
    expect(vm.spo2).toHaveLength(0);
    expect(vm.totalReps).toBe(0);
    expect(vm.phase).toBe("idle");
    expect(vm.level).toBeNull();
  });

  it("ignores gap records", () => {
    const vm = startedVm();
    const before = { ...vm };
    vm.apply({ t_ms: 1000, recv_seq: 9, kind: "gap", payload: { missing: 3 } });
    expect(vm.phase).toBe(before.phase);
    expect(vm.totalReps).toBe(before.totalReps);
  });
});
