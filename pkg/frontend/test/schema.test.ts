import { describe, expect, it } from "vitest";

import { parseControlAction, ProtocolError, validateTranscript } from "../src/types";

describe("transcript schema (mirrors the server's rules)", () => {
  it("accepts a full valid body", () => {
    const body = { text: "olá ponto", final: true, confidence: 0.92, client_time: 1000 };
    expect(validateTranscript(body)).toEqual(body);
  });

  it("defaults client_time to zero", () => {
    expect(validateTranscript({ text: "x", final: false, confidence: 0 }).client_time).toBe(0);
  });

  it.each([
    [{ final: true, confidence: 0.5 }],
    [{ text: "", final: true, confidence: 0.5 }],
    [{ text: "x", confidence: 0.5 }],
    [{ text: "x", final: "yes", confidence: 0.5 }],
    [{ text: "x", final: true }],
    [{ text: "x", final: true, confidence: 1.2 }],
    [{ text: "x", final: true, confidence: 0.5, client_time: -1 }],
    [{ text: "x", final: true, confidence: 0.5, client_time: 1.5 }],
    [["not", "an", "object"]],
    [null],
  ])("rejects %j", (body) => {
    expect(() => validateTranscript(body)).toThrow(ProtocolError);
  });
});

describe("control action parsing", () => {
  it("parses the three bare actions", () => {
    expect(parseControlAction({ seq: 0, action: "none" })).toEqual({ seq: 0, action: "none" });
    expect(parseControlAction({ seq: 1, action: "start" })).toEqual({ seq: 1, action: "start" });
    expect(parseControlAction({ seq: 2, action: "stop" })).toEqual({ seq: 2, action: "stop" });
  });

  it("requires lang for set-language", () => {
    expect(parseControlAction({ seq: 3, action: "set-language", lang: "en-US" })).toEqual({
      seq: 3,
      action: "set-language",
      lang: "en-US",
    });
    expect(() => parseControlAction({ seq: 3, action: "set-language" })).toThrow(ProtocolError);
  });

  it.each([
    [{ seq: -1, action: "start" }],
    [{ seq: 1.5, action: "start" }],
    [{ seq: 1, action: "reboot" }],
    ["start"],
    [null],
  ])("rejects %j", (raw) => {
    expect(() => parseControlAction(raw)).toThrow(ProtocolError);
  });
});
