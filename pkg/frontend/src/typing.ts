/** Cosmetic typewriter effect for the page title. Types the text once;
 * with reduced motion requested it appears immediately. Either way the
 * final text is identical and scanning never depends on it. */
export function typeTitle(
  el: HTMLElement,
  text: string,
  opts: { reducedMotion?: boolean; delayMs?: number } = {},
): Promise<void> {
  if (opts.reducedMotion) {
    el.textContent = text;
    return Promise.resolve();
  }
  const delay = opts.delayMs ?? 55;
  el.textContent = "";
  return new Promise((resolve) => {
    let i = 0;
    const tick = () => {
      el.textContent = text.slice(0, ++i);
      if (i < text.length) {
        setTimeout(tick, delay);
      } else {
        resolve();
      }
    };
    tick();
  });
}
