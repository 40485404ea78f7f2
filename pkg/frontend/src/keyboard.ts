// Keyboard-first navigation: arrows advance, enter confirms. Bindings are a
// plain map so views declare intent and tests can drive them directly.

export type KeyHandler = (event: KeyboardEvent) => void;

export interface Bindings {
  [key: string]: () => void;
}

export function makeKeydownHandler(bindings: Bindings): KeyHandler {
  return (event: KeyboardEvent) => {
    const target = event.target as HTMLElement | null;
    if (target && (target.tagName === "INPUT" || target.tagName === "TEXTAREA")) {
      if (event.key !== "Enter" && event.key !== "Escape") return;
    }
    const action = bindings[event.key];
    if (action) {
      event.preventDefault();
      action();
    }
  };
}
