import type { Verdict } from "./api.js";

/** The only styling logic keyed on model output: verdict -> color. */
export const VERDICT_COLORS: Record<Verdict, string> = {
  benign: "#2e9e4f", // green
  phishing: "#d3322d", // red
  defacement: "#e8842c", // orange
  malware: "#8a3ac9", // purple
};

export function verdictColor(verdict: Verdict): string {
  return VERDICT_COLORS[verdict];
}
