import { describe, expect, it } from "vitest";

import { clampLength, mmToCmLabel } from "../src/format.js";

describe("mmToCmLabel", () => {
  it("converts the canonical extents", () => {
    expect(mmToCmLabel(600)).toBe("60.0 cm");
    expect(mmToCmLabel(400)).toBe("40.0 cm");
  });

  it("keeps one decimal of the measured value", () => {
    expect(mmToCmLabel(600.36)).toBe("60.0 cm");
    expect(mmToCmLabel(123.4)).toBe("12.3 cm");
  });
});

describe("clampLength", () => {
  it("caps the slider at the measured maximum", () => {
    expect(clampLength(700, 600)).toBe(600);
    expect(clampLength(250, 600)).toBe(250);
  });

  it("floors nonsense at 1 mm", () => {
    expect(clampLength(NaN, 600)).toBe(1);
    expect(clampLength(-5, 600)).toBe(1);
  });
});
