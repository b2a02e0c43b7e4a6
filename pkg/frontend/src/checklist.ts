// Tri-state symptom checklist: one focusable button per symptom, cycling
// unknown -> present -> absent; the server's suggested next symptom is
// highlighted. Fully keyboard operable (native buttons).

import { SymptomState } from "./api.js";

export interface ChecklistCallbacks {
    onToggle(index: number): void;
}

const STATE_GLYPH: Record<SymptomState, string> = {
    unknown: "?",
    present: "+",
    absent: "-",
};

export function renderChecklist(
    container: HTMLElement,
    symptoms: string[],
    states: SymptomState[],
    nextSymptom: number | null,
    callbacks: ChecklistCallbacks,
): void {
    container.textContent = "";
    const list = document.createElement("ul");
    list.className = "checklist";
    symptoms.forEach((name, index) => {
        const item = document.createElement("li");
        const button = document.createElement("button");
        const state = states[index] ?? "unknown";
        button.type = "button";
        button.className = `tristate state-${state}`;
        if (index === nextSymptom) button.classList.add("suggested");
        button.dataset.index = String(index);
        button.dataset.state = state;
        button.setAttribute("aria-label", `${name}: ${state}`);
        button.textContent = `${STATE_GLYPH[state]} ${name}`;
        button.addEventListener("click", () => callbacks.onToggle(index));
        item.appendChild(button);
        list.appendChild(item);
    });
    container.appendChild(list);
}
