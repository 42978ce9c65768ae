import { FetchFn, ScanResult, formatConfidence, submitScan } from "./api.js";
import { verdictColor } from "./colors.js";
import { ScanHistory } from "./history.js";
import { typeTitle } from "./typing.js";

export interface AppOptions {
  baseUrl?: string;
  fetchFn?: FetchFn;
  reducedMotion?: boolean;
  title?: string;
}

export interface App {
  input: HTMLInputElement;
  button: HTMLButtonElement;
  banner: HTMLElement;
  card: HTMLElement;
  historyList: HTMLElement;
  history: ScanHistory;
  /** Promise of the most recent submission; null until the first scan. */
  lastSubmission: Promise<void> | null;
  titleDone: Promise<void>;
}

const TITLE = "URL Threat Scanner";

export function initApp(root: HTMLElement, opts: AppOptions = {}): App {
  const doc = root.ownerDocument;
  root.innerHTML = `
    <div class="bg-anim" aria-hidden="true"></div>
    <main class="shell">
      <h1 id="title" class="title"></h1>
      <form id="scan-form" class="scan-form">
        <input id="url-input" type="text" placeholder="Enter a URL to scan"
               autocomplete="off" spellcheck="false">
        <button id="scan-button" type="button" disabled>Scan</button>
      </form>
      <div id="error-banner" class="banner hidden" role="alert"></div>
      <div id="result-card" class="card hidden"></div>
      <section class="history">
        <h2>This session</h2>
        <ul id="history-list"></ul>
      </section>
    </main>`;

  const input = root.querySelector("#url-input") as HTMLInputElement;
  const button = root.querySelector("#scan-button") as HTMLButtonElement;
  const form = root.querySelector("#scan-form") as HTMLFormElement;
  const banner = root.querySelector("#error-banner") as HTMLElement;
  const card = root.querySelector("#result-card") as HTMLElement;
  const historyList = root.querySelector("#history-list") as HTMLElement;
  const history = new ScanHistory();

  const app: App = {
    input,
    button,
    banner,
    card,
    historyList,
    history,
    lastSubmission: null,
    titleDone: typeTitle(
      root.querySelector("#title") as HTMLElement,
      opts.title ?? TITLE,
      { reducedMotion: opts.reducedMotion },
    ),
  };

  let latestId = 0;

  function renderHistory(): void {
    historyList.innerHTML = "";
    for (const entry of history.list()) {
      const li = doc.createElement("li");
      const urlSpan = doc.createElement("span");
      urlSpan.className = "scan-url";
      urlSpan.textContent = entry.url;
      li.appendChild(urlSpan);
      const status = doc.createElement("span");
      if (entry.result) {
        status.className = `badge verdict-${entry.result.prediction}`;
        status.style.backgroundColor = verdictColor(entry.result.prediction);
        status.textContent =
          `${entry.result.prediction} ${formatConfidence(entry.result.confidence)}`;
      } else if (entry.error) {
        status.className = "badge badge-error";
        status.textContent = "error";
      } else {
        status.className = "badge badge-pending";
        status.textContent = "scanning…";
      }
      li.appendChild(status);
      historyList.appendChild(li);
    }
  }

  function renderCard(result: ScanResult): void {
    card.classList.remove("hidden");
    card.innerHTML = "";
    const verdict = doc.createElement("div");
    verdict.className = `verdict verdict-${result.prediction}`;
    verdict.style.color = verdictColor(result.prediction);
    verdict.textContent = result.prediction;
    const confidence = doc.createElement("div");
    confidence.className = "confidence";
    confidence.textContent = `confidence ${formatConfidence(result.confidence)}`;
    const scanned = doc.createElement("div");
    scanned.className = "scanned-url";
    scanned.textContent = result.url;
    card.append(verdict, confidence, scanned);
    for (const [name, p] of Object.entries(result.probabilities)) {
      const row = doc.createElement("div");
      row.className = "prob-row";
      row.textContent = `${name}: ${formatConfidence(p)}`;
      card.appendChild(row);
    }
  }

  function showError(message: string): void {
    banner.textContent = message;
    banner.classList.remove("hidden");
  }

  async function runScan(url: string): Promise<void> {
    const entry = history.begin(url);
    latestId = entry.id;
    banner.classList.add("hidden");
    renderHistory();
    try {
      const result = await submitScan(url, { baseUrl: opts.baseUrl, fetchFn: opts.fetchFn });
      history.resolve(entry.id, result);
      if (entry.id === latestId) {
        renderCard(result);
      }
    } catch (err) {
      const message = err instanceof Error ? err.message : String(err);
      history.fail(entry.id, message);
      if (entry.id === latestId) {
        showError(message);
      }
    }
    renderHistory();
  }

  function submit(): void {
    const url = input.value.trim();
    if (!url) {
      return; // disabled button plus this guard: empty input sends nothing
    }
    app.lastSubmission = runScan(url);
  }

  input.addEventListener("input", () => {
    button.disabled = input.value.trim() === "";
  });
  button.addEventListener("click", submit);
  form.addEventListener("submit", (event) => {
    event.preventDefault(); // never reload the page
    submit();
  });

  return app;
}
