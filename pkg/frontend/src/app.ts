// Wires the store to the DOM. Exported separately from main.ts so tests can
// mount the app against any API client.

import { ApiClient } from "./api.js";
import { renderCandidates } from "./candidates.js";
import { renderChecklist } from "./checklist.js";
import { SessionStore, UiSessionState } from "./state.js";

export interface AppElements {
    checklist: HTMLElement;
    candidates: HTMLElement;
    banner: HTMLElement;
    nextPrompt: HTMLElement;
    presentOnlyToggle: HTMLInputElement;
}

export interface App {
    store: SessionStore;
    ready: Promise<void>;
}

export function mountApp(api: ApiClient, el: AppElements): App {
    const store = new SessionStore(api);
    let presentOnly = false;

    const render = (state: UiSessionState) => {
        el.banner.hidden = state.connected;
        for (const button of el.checklist.querySelectorAll("button")) {
            (button as HTMLButtonElement).disabled = !state.connected;
        }
        if (state.view === null) return;
        renderChecklist(el.checklist, state.symptoms, state.states, state.view.next_symptom, {
            onToggle(index) {
                void store
                    .setSymptomState(index, store.nextState(index, presentOnly))
                    .catch(() => undefined); // failure already reflected via the banner
            },
        });
        renderCandidates(el.candidates, state.view);
        const next = state.view.next_symptom;
        el.nextPrompt.textContent =
            next === null
                ? "No further question suggested"
                : `Suggested next question: ${state.symptoms[next] ?? `#${next}`}`;
    };

    store.subscribe(render);
    el.presentOnlyToggle.addEventListener("change", () => {
        presentOnly = el.presentOnlyToggle.checked;
    });

    const ready = store.init().catch((err) => {
        el.banner.hidden = false;
        throw err;
    });
    return { store, ready };
}
