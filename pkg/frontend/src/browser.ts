/**
 * Browser bootstrap: real Web Speech API engine, fetch transport, and
 * one 1-second timer driving both the control poll and the dashboard
 * refresh (two fetches, one timer).  Everything testable lives in
 * client.ts / dashboard.ts; this file is thin glue.
 */

import { POLL_INTERVAL_MS, RecognitionEngine, SpeechClient, Transport } from "./client";
import { renderDashboard } from "./dashboard";
import { StateSnapshot } from "./types";

// Minimal surface of the (prefixed) Web Speech API.
interface SpeechRecognitionLike {
  lang: string;
  continuous: boolean;
  interimResults: boolean;
  onresult: ((event: any) => void) | null;
  onend: (() => void) | null;
  onerror: ((event: any) => void) | null;
  start(): void;
  stop(): void;
}

declare global {
  interface Window {
    SpeechRecognition?: new () => SpeechRecognitionLike;
    webkitSpeechRecognition?: new () => SpeechRecognitionLike;
  }
}

class WebSpeechEngine implements RecognitionEngine {
  private recognition: SpeechRecognitionLike | null = null;
  private resultCb: ((text: string, isFinal: boolean, confidence: number) => void) | null = null;
  private endCb: (() => void) | null = null;
  private deniedCb: (() => void) | null = null;
  private lang = "pt-BR";

  private ensure(): SpeechRecognitionLike | null {
    if (this.recognition !== null) {
      return this.recognition;
    }
    const ctor = window.SpeechRecognition ?? window.webkitSpeechRecognition;
    if (ctor === undefined) {
      return null;
    }
    const recognition = new ctor();
    recognition.lang = this.lang;
    recognition.continuous = true;
    recognition.interimResults = true;
    recognition.onresult = (event: any) => {
      for (let i = event.resultIndex; i < event.results.length; i++) {
        const result = event.results[i];
        this.resultCb?.(result[0].transcript, result.isFinal, result[0].confidence ?? 0);
      }
    };
    recognition.onend = () => this.endCb?.();
    recognition.onerror = (event: any) => {
      if (event.error === "not-allowed" || event.error === "service-not-allowed") {
        this.deniedCb?.();
      }
    };
    this.recognition = recognition;
    return recognition;
  }

  start(): void {
    const recognition = this.ensure();
    try {
      recognition?.start();
    } catch {
      // start() throws if already running; the end handler restarts us
    }
  }

  stop(): void {
    this.recognition?.stop();
  }

  setLanguage(lang: string): void {
    this.lang = lang;
    if (this.recognition !== null) {
      this.recognition.lang = lang;
    }
  }

  onResult(cb: (text: string, isFinal: boolean, confidence: number) => void): void {
    this.resultCb = cb;
  }

  onEnd(cb: () => void): void {
    this.endCb = cb;
  }

  onPermissionDenied(cb: () => void): void {
    this.deniedCb = cb;
  }
}

const fetchTransport: Transport = {
  async getJson(path: string): Promise<unknown> {
    const response = await fetch(path);
    if (!response.ok) {
      throw new Error(`GET ${path}: ${response.status}`);
    }
    return response.json();
  },
  async postJson(path: string, body: unknown): Promise<void> {
    await fetch(path, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(body),
    });
  },
};

export function boot(root: Document = document): void {
  const params = new URLSearchParams(root.defaultView?.location.search ?? "");
  const lang = params.get("lang") ?? "pt-BR";
  const autostart = params.get("autostart") === "1" || params.get("autostart") === "true";

  const client = new SpeechClient(new WebSpeechEngine(), fetchTransport, lang);
  const dashboardEl = root.getElementById("dashboard");
  const bannerEl = root.getElementById("banner");

  // Control buttons speak on the operator's behalf: they submit command
  // text through /transcript, and the engine's mode coupling enqueues
  // the start/stop control actions server-side.  No extra endpoints.
  for (const button of Array.from(root.querySelectorAll<HTMLElement>("[data-say]"))) {
    button.addEventListener("click", () => {
      const text = button.getAttribute("data-say");
      if (text !== null && text.length > 0) {
        void fetchTransport.postJson("/transcript", {
          text,
          final: true,
          confidence: 1.0,
          client_time: Date.now(),
        });
      }
    });
  }

  async function refreshDashboard(): Promise<void> {
    if (dashboardEl === null) {
      return;
    }
    let snapshot: StateSnapshot | null;
    try {
      snapshot = (await fetchTransport.getJson("/state")) as StateSnapshot;
    } catch {
      snapshot = null; // stale badge
    }
    dashboardEl.innerHTML = renderDashboard(snapshot);
  }

  root.defaultView?.setInterval(() => {
    void client.pollOnce();
    void refreshDashboard();
    if (bannerEl !== null) {
      bannerEl.hidden = !client.state.permissionDenied;
    }
  }, POLL_INTERVAL_MS);

  if (autostart) {
    client.start();
  }
}

if (typeof document !== "undefined") {
  boot();
}
