import { describe, expect, it } from "vitest";
import { buildOption, curveCount } from "../src/chart.js";
import { parseCsv } from "../src/csv.js";

const SWEEP = `n_s,state,detector,method,snr_exact,snr_asymptotic
1e-04,coherent,onoff,cc,5.8e-16,5.8e-16
1e-04,tmsv,onoff,cc,9.6e-15,9.6e-15
1e-04,cct,onoff,cc,5.8e-16,5.8e-16
1e-02,coherent,onoff,cc,5.8e-12,5.8e-12
1e-02,tmsv,onoff,cc,9.8e-13,9.8e-13
1e-02,cct,onoff,cc,5.8e-12,5.8e-12
`;

const RATIO = `n_s,pair,ratio
1e-04,tmsv/coherent,16.6
1e-02,tmsv/coherent,0.17
1e-04,coherent/cct,1.0006
1e-02,coherent/cct,1.0006
`;

describe("buildOption", () => {
  it("makes one curve per state with log axes", () => {
    const option = buildOption(
      { kind: "snr", title: "t", logX: true, logY: true, out: "x.svg" },
      parseCsv(SWEEP),
    );
    expect(curveCount(option)).toBe(3);
    expect((option.xAxis as { type: string }).type).toBe("log");
    expect((option.yAxis as { type: string }).type).toBe("log");
  });

  it("adds the unit guide line on ratio panels", () => {
    const option = buildOption(
      { kind: "ratio", title: "t", logX: true, logY: false, out: "x.svg" },
      parseCsv(RATIO),
    );
    expect(curveCount(option)).toBe(2 + 1); // two pairs + guide
    expect((option.yAxis as { type: string }).type).toBe("value");
    const names = (option.series as Array<{ name: string }>).map((s) => s.name);
    expect(names).toContain("unity");
  });

  it("fails on a column mismatch", () => {
    expect(() =>
      buildOption(
        { kind: "ratio", title: "t", logX: true, logY: false, out: "x.svg" },
        parseCsv(SWEEP),
      ),
    ).toThrow(/missing column 'pair'/);
  });
});
