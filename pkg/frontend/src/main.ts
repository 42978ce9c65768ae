import { initApp } from "./app.js";

const root = document.getElementById("app");
if (root) {
  const reducedMotion = window.matchMedia("(prefers-reduced-motion: reduce)").matches;
  initApp(root, { reducedMotion });
}
