/** Client for the prediction service. The UI never classifies anything
 * itself: every verdict comes out of one POST /predict response. */

export type Verdict = "benign" | "phishing" | "defacement" | "malware";

export interface ScanResult {
  url: string;
  prediction: Verdict;
  confidence: number;
  probabilities: Record<Verdict, number>;
  timestamp: number;
}

export class ServiceError extends Error {}

/** The slice of the fetch contract the client needs; window.fetch satisfies it. */
export interface FetchResponse {
  ok: boolean;
  status: number;
  json(): Promise<any>;
}

export type FetchFn = (input: string, init?: RequestInit) => Promise<FetchResponse>;

const VERDICTS: readonly Verdict[] = ["benign", "phishing", "defacement", "malware"];

function isVerdict(value: unknown): value is Verdict {
  return typeof value === "string" && (VERDICTS as readonly string[]).includes(value);
}

export async function submitScan(
  url: string,
  opts: { baseUrl?: string; fetchFn?: FetchFn } = {},
): Promise<ScanResult> {
  const trimmed = url.trim();
  if (!trimmed) {
    throw new ServiceError("nothing to scan");
  }
  const fetchFn = opts.fetchFn ?? fetch;
  const base = opts.baseUrl ?? "";
  let response: FetchResponse;
  try {
    response = await fetchFn(`${base}/predict`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ url: trimmed }),
    });
  } catch {
    throw new ServiceError("service unavailable");
  }
  if (!response.ok) {
    let detail = `${response.status}`;
    try {
      const doc = await response.json();
      if (doc && typeof doc.error === "string") detail = doc.error;
    } catch {
      /* non-JSON error body; keep the status code */
    }
    throw new ServiceError(detail);
  }
  const doc = await response.json();
  if (!isVerdict(doc.prediction) || typeof doc.confidence !== "number") {
    throw new ServiceError("malformed response from service");
  }
  return {
    url: trimmed,
    prediction: doc.prediction,
    confidence: doc.confidence,
    probabilities: doc.probabilities ?? ({} as Record<Verdict, number>),
    timestamp: Date.now(),
  };
}

/** Confidence as a percentage with one decimal, e.g. "93.4%". */
export function formatConfidence(confidence: number): string {
  return `${(confidence * 100).toFixed(1)}%`;
}
