/**
 * Operator dashboard rendering: pure snapshot -> HTML string.
 *
 * Read-only by design; the only controls the page offers (start/stop
 * buttons in browser.ts) go through the server's control queue.  The
 * grid preview draws the 25+25 overlay lines with the row/column
 * letters, scaled down from the configured screen size; subcell lines
 * are not drawn, matching the real overlay.
 */

import { StateSnapshot } from "./types";

export const GRID_SIZE = 24;
export const LETTERS = "ABCDEFGHIJKLMNOPQRSTUVWX";

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

function badge(text: string, kind: string): string {
  return `<span class="badge ${kind}">${escapeHtml(text)}</span>`;
}

export function renderStack(snapshot: StateSnapshot): string {
  const rows: string[] = [];
  const frames = [...snapshot.stack.frames].reverse(); // top of stack first
  for (const frame of frames) {
    rows.push(
      `<li class="frame">${escapeHtml(frame.grammar)} ` +
        `<small>(${frame.mode}, t=${frame.activated_at})</small></li>`,
    );
  }
  rows.push(`<li class="frame base">${escapeHtml(snapshot.stack.base)} <small>(base)</small></li>`);
  const app = snapshot.stack.app_grammar;
  const appLine = app === null ? "" : `<p class="app-grammar">app: ${escapeHtml(app)}</p>`;
  return `<ul class="stack">${rows.join("")}</ul>${appLine}`;
}

export function renderCorrection(snapshot: StateSnapshot): string {
  const correction = snapshot.correction;
  if (correction === null) {
    return "";
  }
  const items = correction.tokens
    .map((token) => {
      const selected = token.index === correction.selected ? ' class="selected"' : "";
      return `<li value="${token.index}"${selected}>${escapeHtml(token.text)}</li>`;
    })
    .join("");
  return `<section class="correction"><h2>correction</h2><ol>${items}</ol></section>`;
}

export function gridPreviewSvg(
  screenW: number,
  screenH: number,
  previewWidth = 360,
): string {
  const scale = previewWidth / screenW;
  const previewHeight = Math.round(screenH * scale);
  const parts: string[] = [];
  for (let i = 0; i <= GRID_SIZE; i++) {
    const x = Math.round(Math.floor((i * screenW) / GRID_SIZE) * scale);
    parts.push(`<line x1="${x}" y1="0" x2="${x}" y2="${previewHeight}"/>`);
  }
  for (let i = 0; i <= GRID_SIZE; i++) {
    const y = Math.round(Math.floor((i * screenH) / GRID_SIZE) * scale);
    parts.push(`<line x1="0" y1="${y}" x2="${previewWidth}" y2="${y}"/>`);
  }
  for (let i = 0; i < GRID_SIZE; i++) {
    const cx = Math.round(((i + 0.5) * previewWidth) / GRID_SIZE);
    const cy = Math.round(((i + 0.5) * previewHeight) / GRID_SIZE);
    parts.push(`<text class="col-label" x="${cx}" y="10">${LETTERS[i]}</text>`);
    parts.push(`<text class="row-label" x="4" y="${cy}">${LETTERS[i]}</text>`);
  }
  return (
    `<svg class="grid-preview" viewBox="0 0 ${previewWidth} ${previewHeight}" ` +
    `width="${previewWidth}" height="${previewHeight}">${parts.join("")}</svg>`
  );
}

function renderProtected(snapshot: StateSnapshot): string {
  const until = snapshot.stack.protected_until;
  if (until === null || until <= snapshot.clock) {
    return "";
  }
  return `<p class="protected">protected window: ${until - snapshot.clock} ms left</p>`;
}

/** Render the full dashboard; null means the bridge was unreachable. */
export function renderDashboard(snapshot: StateSnapshot | null): string {
  if (snapshot === null) {
    return `<div class="dashboard">${badge("bridge unreachable", "stale")}` +
      `<p class="idle">no live state</p></div>`;
  }
  const sections: string[] = [];
  sections.push(badge(snapshot.mode, "mode"));
  sections.push(renderProtected(snapshot));
  sections.push(`<section class="grammars"><h2>grammars</h2>${renderStack(snapshot)}</section>`);
  const transcript = snapshot.last_transcript ?? "";
  const interim = snapshot.last_interim;
  sections.push(
    `<section class="transcript"><h2>last transcript</h2>` +
      `<p>${escapeHtml(transcript)}</p>` +
      (interim !== null ? `<p class="interim">${escapeHtml(interim)}</p>` : "") +
      `</section>`,
  );
  if (snapshot.multiplier !== null) {
    sections.push(`<p class="multiplier">multiplier armed: ${snapshot.multiplier}</p>`);
  }
  sections.push(renderCorrection(snapshot));
  if (snapshot.mode === "grid") {
    const [w, h] = snapshot.screen;
    sections.push(
      `<section class="grid"><h2>grid overlay</h2>${gridPreviewSvg(w, h)}</section>`,
    );
  }
  sections.push(
    `<p class="pointer">pointer ${snapshot.pointer[0]},${snapshot.pointer[1]} ` +
      `on ${snapshot.screen[0]}x${snapshot.screen[1]} &middot; ` +
      `lang ${escapeHtml(snapshot.language)} &middot; t=${snapshot.clock}</p>`,
  );
  return `<div class="dashboard">${sections.join("")}</div>`;
}
