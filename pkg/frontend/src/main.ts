import { api } from "./api.js";
import { ImageBrowser } from "./browser.js";
import { ObjectExaminer } from "./examiner.js";
import { MatchExaminer } from "./matches.js";
import { ViewState } from "./state.js";

const TABS = ["browse", "objects", "matches"] as const;
type Tab = (typeof TABS)[number];

function banner(kind: "error" | "hint", message: string): void {
  const element = document.querySelector<HTMLElement>("#banner")!;
  element.className = kind;
  element.textContent = message;
  element.hidden = false;
  window.setTimeout(() => (element.hidden = true), kind === "hint" ? 2500 : 6000);
}

async function main(): Promise<void> {
  const state = new ViewState();
  const content = document.querySelector<HTMLElement>("#content")!;
  const status = document.querySelector<HTMLElement>("#status")!;

  try {
    const info = await api.info();
    status.textContent =
      `${info["num images"]} images, ${info["num objects"]} objects` +
      ` — ${info.mode} session${info.writable ? "" : " (read-only)"}` +
      (info.dirty ? " — uncommitted edits" : "");
  } catch (error) {
    banner("error", `server unreachable: ${(error as Error).message}`);
    status.textContent = "server unreachable";
  }

  const views: Record<Tab, () => Promise<void>> = {
    browse: async () => {
      const browser = new ImageBrowser(content, state, (m) => banner("error", m));
      await browser.mount();
    },
    objects: async () => {
      const examiner = new ObjectExaminer(content, state, (m) => banner("error", m));
      await examiner.mount();
    },
    matches: async () => {
      const matches = new MatchExaminer(
        content,
        state,
        (m) => banner("error", m),
        (m) => banner("hint", m)
      );
      await matches.mount();
    },
  };

  async function activate(tab: Tab): Promise<void> {
    for (const button of document.querySelectorAll<HTMLButtonElement>("nav button")) {
      button.classList.toggle("active", button.dataset.tab === tab);
    }
    content.innerHTML = "";
    content.tabIndex = 0;
    await views[tab]();
    content.focus();
  }

  for (const button of document.querySelectorAll<HTMLButtonElement>("nav button")) {
    button.addEventListener("click", () => void activate(button.dataset.tab as Tab));
  }
  await activate("browse");
}

void main();
