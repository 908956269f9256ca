/**
 * The speech client: recognition lifecycle plus the 1 Hz control loop.
 *
 * The recognition engine is injected behind a small interface so tests
 * run against a scripted fake; the browser adapter over the Web Speech
 * API lives in browser.ts.  Platform engines halt recognition after a
 * few silent seconds, so while `recognizing` is set every engine `end`
 * triggers an immediate restart — effective uptime is continuous
 * modulo restart gaps.
 */

import { ControlAction, parseControlAction, validateTranscript } from "./types";

export const POLL_INTERVAL_MS = 1000;

export interface RecognitionEngine {
  start(): void;
  stop(): void;
  setLanguage(lang: string): void;
  onResult(cb: (text: string, isFinal: boolean, confidence: number) => void): void;
  onEnd(cb: () => void): void;
  onPermissionDenied(cb: () => void): void;
}

export interface Transport {
  getJson(path: string): Promise<unknown>;
  postJson(path: string, body: unknown): Promise<void>;
}

export interface ClientState {
  recognizing: boolean;
  lang: string;
  lastSeq: number;
  restartCount: number;
  lastInterim: string | null;
  lastFinal: string | null;
  permissionDenied: boolean;
}

export class SpeechClient {
  readonly state: ClientState;
  private readonly engine: RecognitionEngine;
  private readonly transport: Transport;
  private readonly now: () => number;

  constructor(
    engine: RecognitionEngine,
    transport: Transport,
    lang: string,
    now: () => number = () => Date.now(),
  ) {
    this.engine = engine;
    this.transport = transport;
    this.now = now;
    this.state = {
      recognizing: false,
      lang,
      lastSeq: 0,
      restartCount: 0,
      lastInterim: null,
      lastFinal: null,
      permissionDenied: false,
    };
    engine.setLanguage(lang);
    engine.onResult((text, isFinal, confidence) => this.handleResult(text, isFinal, confidence));
    engine.onEnd(() => this.handleEnd());
    engine.onPermissionDenied(() => {
      this.state.permissionDenied = true;
      this.state.recognizing = false;
    });
  }

  start(): void {
    if (this.state.recognizing || this.state.permissionDenied) {
      return;
    }
    this.state.recognizing = true;
    this.engine.start();
  }

  stop(): void {
    this.state.recognizing = false;
    this.engine.stop();
  }

  private handleEnd(): void {
    if (this.state.recognizing) {
      this.state.restartCount += 1;
      this.engine.start();
    }
  }

  private handleResult(text: string, isFinal: boolean, confidence: number): void {
    if (isFinal) {
      this.state.lastFinal = text;
    } else {
      this.state.lastInterim = text;
    }
    if (text.length === 0) {
      return;
    }
    const body = validateTranscript({
      text,
      final: isFinal,
      confidence: Math.max(0, Math.min(1, confidence)),
      client_time: this.now(),
    });
    void this.transport.postJson("/transcript", body).catch(() => {
      // transcript lost; nothing to roll back
    });
  }

  /**
   * Apply one control action.  Deduplicated by seq: re-deliveries and
   * stale actions are ignored, so at-least-once delivery from the
   * server becomes exactly-once application here.
   */
  applyAction(action: ControlAction): boolean {
    if (action.action === "none" || action.seq <= this.state.lastSeq) {
      return false;
    }
    this.state.lastSeq = action.seq;
    if (action.action === "start") {
      this.start();
    } else if (action.action === "stop") {
      this.stop();
    } else if (action.action === "set-language" && action.lang !== undefined) {
      this.state.lang = action.lang;
      this.engine.setLanguage(action.lang);
    }
    return true;
  }

  /** One control poll; network or protocol failures leave state unchanged. */
  async pollOnce(): Promise<void> {
    let action: ControlAction;
    try {
      const raw = await this.transport.getJson(`/control?last=${this.state.lastSeq}`);
      action = parseControlAction(raw);
    } catch {
      return; // retry on the next tick
    }
    this.applyAction(action);
  }
}
