// Bed-requirement cards: pure data builders plus a small HTML renderer.
// Values are rendered through formatBeds, which passes integers verbatim.

import { formatBeds, strategyLabel, strategyOrder } from "./format.js";

export interface BedCard {
  strategy: string;
  label: string;
  beds: string;
  delta: string | null;
}

/**
 * One card per strategy; when a baseline is given, the card also carries the
 * signed difference between two API-returned counts (display-level only).
 */
export function bedCards(
  beds: Record<string, number>,
  baseline?: Record<string, number>,
): BedCard[] {
  return strategyOrder(Object.keys(beds)).map((key) => {
    const value = beds[key] as number;
    let delta: string | null = null;
    if (baseline && key in baseline) {
      const diff = value - (baseline[key] as number);
      delta = diff === 0 ? "±0" : diff > 0 ? `+${diff}` : String(diff);
    }
    return { strategy: key, label: strategyLabel(key), beds: formatBeds(value), delta };
  });
}

export function cardsHtml(cards: BedCard[]): string {
  return cards
    .map(
      (card) =>
        `<div class="card" data-strategy="${card.strategy}">` +
        `<div class="card-label">${card.label}</div>` +
        `<div class="card-beds">${card.beds}</div>` +
        (card.delta !== null ? `<div class="card-delta">${card.delta}</div>` : "") +
        `</div>`,
    )
    .join("");
}
