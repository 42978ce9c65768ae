/** fetch adapter over node:http, so UI tests exercise a real HTTP stub
 * server without depending on the DOM environment's network stack. */
import { request } from "node:http";
import type { FetchFn, FetchResponse } from "../src/api.js";

export const nodeFetch: FetchFn = (url, init) =>
  new Promise<FetchResponse>((resolve, reject) => {
    const req = request(
      url,
      {
        method: init?.method ?? "GET",
        headers: (init?.headers as Record<string, string>) ?? {},
      },
      (res) => {
        let body = "";
        res.setEncoding("utf-8");
        res.on("data", (chunk) => (body += chunk));
        res.on("end", () =>
          resolve({
            ok: (res.statusCode ?? 0) >= 200 && (res.statusCode ?? 0) < 300,
            status: res.statusCode ?? 0,
            json: () => Promise.resolve(JSON.parse(body)),
          }),
        );
      },
    );
    req.on("error", reject);
    if (init?.body) {
      req.write(init.body);
    }
    req.end();
  });
