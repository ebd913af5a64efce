import { describe, expect, it } from "vitest";
import { columnIndex, parseCsv, seriesByKey } from "../src/csv.js";

const SAMPLE = `# qillum sweep
# kappa=0.01
# nb=600.0
n_s,state,detector,method,snr_exact,snr_asymptotic
1.0e-04,coherent,onoff,cc,5.8e-16,5.8e-16
1.0e-04,tmsv,onoff,cc,9.6e-15,9.6e-15
1.0e-02,tmsv,onoff,cc,9.8e-13,9.8e-13
1.0e-02,coherent,onoff,cc,5.8e-12,5.8e-12
`;

describe("parseCsv", () => {
  it("separates header comments, columns and rows", () => {
    const table = parseCsv(SAMPLE);
    expect(table.params.kappa).toBe("0.01");
    expect(table.params.nb).toBe("600.0");
    expect(table.columns).toContain("snr_exact");
    expect(table.rows).toHaveLength(4);
  });

  it("rejects empty input", () => {
    expect(() => parseCsv("")).toThrow(/column header/);
    expect(() => parseCsv("# only=comments\n")).toThrow(/column header/);
    expect(() => parseCsv("n_s,state\n")).toThrow(/data rows/);
  });

  it("reports missing columns by name", () => {
    const table = parseCsv(SAMPLE);
    expect(() => columnIndex(table, "ratio")).toThrow(/missing column 'ratio'/);
  });
});

describe("seriesByKey", () => {
  it("groups by curve identity and sorts by x", () => {
    const table = parseCsv(SAMPLE);
    const grouped = seriesByKey(table, "state", "n_s", "snr_exact");
    expect([...grouped.keys()].sort()).toEqual(["coherent", "tmsv"]);
    const coh = grouped.get("coherent")!;
    expect(coh).toHaveLength(2);
    // sorted by x even though the rows were interleaved
    expect(coh[0][0]).toBeLessThan(coh[1][0]);
  });
});
