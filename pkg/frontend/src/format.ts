// Display formatting. Bed counts pass through verbatim so what the page
// shows is exactly what the API returned.

const OVERFLOW_KEY = /^b_overflow_g(?<gamma>[0-9.]+)_a(?<alpha>[0-9.]+)$/;

export function formatBeds(value: number): string {
  return String(value);
}

export function formatPct(value: number | null): string {
  return value === null ? "–" : `${value.toFixed(2)}%`;
}

export function formatNumber(value: number, digits = 1): string {
  return value.toFixed(digits);
}

/** Human label for a strategy key, e.g. b_overflow_g1_a0.05 -> "B 5% overflow (γ=1)". */
export function strategyLabel(key: string): string {
  if (key === "b_average") {
    return "B average";
  }
  if (key === "b_max") {
    return "B max";
  }
  const match = OVERFLOW_KEY.exec(key);
  if (match?.groups) {
    const alphaPct = Number(match.groups["alpha"]) * 100;
    return `B ${trimZeros(alphaPct)}% overflow (γ=${match.groups["gamma"]})`;
  }
  if (key.startsWith("b_")) {
    const alphaPct = Number(key.slice(2)) * 100;
    if (Number.isFinite(alphaPct)) {
      return `B ${trimZeros(alphaPct)}% overflow`;
    }
  }
  return key;
}

/** Canonical card order: average, overflow targets by tightening risk, peak. */
export function strategyOrder(keys: string[]): string[] {
  const rank = (key: string): [number, number] => {
    if (key === "b_average") {
      return [0, 0];
    }
    if (key === "b_max") {
      return [2, 0];
    }
    const match = OVERFLOW_KEY.exec(key);
    const alpha = match?.groups ? Number(match.groups["alpha"]) : Number(key.slice(2));
    return [1, Number.isFinite(alpha) ? -alpha : 0];
  };
  return [...keys].sort((a, b) => {
    const [ga, sa] = rank(a);
    const [gb, sb] = rank(b);
    return ga - gb || sa - sb || a.localeCompare(b);
  });
}

function trimZeros(value: number): string {
  return String(Number(value.toFixed(4)));
}
