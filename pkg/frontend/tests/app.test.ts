// @vitest-environment happy-dom
import { afterEach, describe, expect, it } from "vitest";
import type { FetchFn } from "../src/api.js";
import { initApp } from "../src/app.js";
import { nodeFetch } from "./node_fetch.js";
import { Stub, startStub } from "./stub_server.js";

let stub: Stub | null = null;

afterEach(async () => {
  if (stub) {
    await stub.close();
    stub = null;
  }
  document.body.innerHTML = "";
});

function mount(opts: { baseUrl?: string; fetchFn?: FetchFn } = {}) {
  const root = document.createElement("div");
  document.body.appendChild(root);
  return initApp(root, { ...opts, fetchFn: opts.fetchFn ?? nodeFetch, reducedMotion: true });
}

function scan(app: ReturnType<typeof mount>, url: string) {
  app.input.value = url;
  app.input.dispatchEvent(new Event("input", { bubbles: true }));
  app.button.click();
  return app.lastSubmission;
}

describe("scan flow", () => {
  it("renders the verdict and confidence without a page reload", async () => {
    stub = await startStub({ prediction: "phishing", confidence: 0.934 });
    const app = mount({ baseUrl: stub.baseUrl });
    const before = window.location.href;
    await scan(app, "http://paypal-login.bad.example");
    expect(window.location.href).toBe(before);
    expect(app.card.classList.contains("hidden")).toBe(false);
    expect(app.card.textContent).toContain("phishing");
    expect(app.card.textContent).toContain("93.4%");
    expect(app.banner.classList.contains("hidden")).toBe(true);
    expect(stub.requests).toEqual([{ url: "http://paypal-login.bad.example" }]);
  });

  it("keeps the input editable while a request is in flight", async () => {
    stub = await startStub({ delayMs: 60 });
    const app = mount({ baseUrl: stub.baseUrl });
    const submission = scan(app, "http://slow.example");
    expect(app.input.disabled).toBe(false);
    app.input.value = "http://next.example";
    await submission;
    expect(app.input.value).toBe("http://next.example");
  });

  it("disables the button on empty input and sends no request", async () => {
    stub = await startStub({});
    const app = mount({ baseUrl: stub.baseUrl });
    expect(app.button.disabled).toBe(true);
    app.input.value = "   ";
    app.input.dispatchEvent(new Event("input", { bubbles: true }));
    expect(app.button.disabled).toBe(true);
    app.button.click(); // belt and braces: the guard also refuses
    expect(app.lastSubmission).toBeNull();
    await new Promise((r) => setTimeout(r, 30));
    expect(stub.requests).toHaveLength(0);
  });

  it("shows the error banner when the service is down, keeping results", async () => {
    stub = await startStub({ prediction: "benign", confidence: 0.7 });
    const app = mount({ baseUrl: stub.baseUrl });
    await scan(app, "http://fine.example");
    expect(app.card.textContent).toContain("benign");

    const base = stub.baseUrl;
    await stub.close();
    stub = null;
    const appDown = app;
    appDown.input.value = "http://other.example";
    appDown.input.dispatchEvent(new Event("input", { bubbles: true }));
    appDown.button.click();
    await appDown.lastSubmission;
    expect(appDown.banner.classList.contains("hidden")).toBe(false);
    expect(appDown.banner.textContent).toContain("service unavailable");
    // previous verdict card and history survive
    expect(appDown.card.textContent).toContain("benign");
    expect(appDown.historyList.textContent).toContain("http://fine.example");
    void base;
  });

  it("shows an error banner on a non-200 response", async () => {
    stub = await startStub({ status: 503 });
    const app = mount({ baseUrl: stub.baseUrl });
    await scan(app, "http://x.example");
    expect(app.banner.classList.contains("hidden")).toBe(false);
  });
});

describe("history rendering", () => {
  it("lists scans newest first", async () => {
    stub = await startStub({});
    const app = mount({ baseUrl: stub.baseUrl });
    await scan(app, "http://one.example");
    await scan(app, "http://two.example");
    const items = Array.from(app.historyList.querySelectorAll("li")).map(
      (li) => li.querySelector(".scan-url")?.textContent,
    );
    expect(items).toEqual(["http://two.example", "http://one.example"]);
  });

  it("caps the visible history at 50", async () => {
    stub = await startStub({});
    const app = mount({ baseUrl: stub.baseUrl });
    for (let i = 0; i < 55; i++) {
      await scan(app, `http://u${i}.example`);
    }
    expect(app.historyList.querySelectorAll("li")).toHaveLength(50);
  });
});

describe("concurrent submissions", () => {
  it("matches each response to its own request", async () => {
    // fetchFn resolves out of order: first request answers last
    const resolvers: ((doc: any) => void)[] = [];
    const fetchFn: FetchFn = (_url, init) => {
      const { url } = JSON.parse(String(init?.body));
      return new Promise((resolve) => {
        resolvers.push((doc) =>
          resolve({ ok: true, status: 200, json: () => Promise.resolve({ ...doc, echo: url }) }),
        );
      });
    };
    const app = mount({ fetchFn });
    const first = scan(app, "http://first.example");
    const second = scan(app, "http://second.example");
    const probs = { benign: 1, phishing: 0, defacement: 0, malware: 0 };
    // answer the second request first
    resolvers[1]({ prediction: "malware", confidence: 0.9, probabilities: probs });
    await second;
    resolvers[0]({ prediction: "benign", confidence: 0.6, probabilities: probs });
    await first;
    const entries = app.history.list();
    expect(entries[0].url).toBe("http://second.example");
    expect(entries[0].result?.prediction).toBe("malware");
    expect(entries[1].url).toBe("http://first.example");
    expect(entries[1].result?.prediction).toBe("benign");
    // the card belongs to the latest submission, not the last response
    const verdict = app.card.querySelector(".verdict");
    expect(verdict?.textContent).toBe("malware");
  });
});

describe("title animation", () => {
  it("renders the full title instantly under reduced motion", async () => {
    const root = document.createElement("div");
    document.body.appendChild(root);
    const app = initApp(root, { reducedMotion: true, fetchFn: nodeFetch });
    await app.titleDone;
    expect(root.querySelector("#title")?.textContent).toBe("URL Threat Scanner");
  });

  it("types the title out once when motion is allowed", async () => {
    const root = document.createElement("div");
    document.body.appendChild(root);
    const app = initApp(root, { reducedMotion: false, fetchFn: nodeFetch, title: "Scan" });
    const el = root.querySelector("#title") as HTMLElement;
    expect((el.textContent ?? "").length).toBeLessThan(4);
    await app.titleDone;
    expect(el.textContent).toBe("Scan");
  });
});
