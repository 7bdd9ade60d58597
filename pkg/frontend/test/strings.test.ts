import { describe, expect, it } from "vitest";

import { STRING_KEYS, incompleteStrings, t } from "../src/strings.js";

describe("string table", () => {
  it("has every key in both languages", () => {
    expect(incompleteStrings()).toEqual([]);
  });

  it("uses the requested suggestions notice text", () => {
    expect(t("suggestionsNotice", "en")).toBe("Here are more questions you might ask");
  });

  it("differs between languages for every key", () => {
    for (const key of STRING_KEYS) {
      expect(t(key, "en")).not.toBe("");
      expect(t(key, "zh")).not.toBe("");
    }
  });
});
