// Candidate panel: look-up match count and list, network top-k with posterior
// bars, and the decision-tree prediction badge once a path is complete.

import { CandidateView } from "./api.js";

const MAX_LISTED = 40;

export function renderCandidates(container: HTMLElement, view: CandidateView): void {
    container.textContent = "";

    const badge = document.createElement("div");
    badge.className = "tree-badge";
    if (view.tree_prediction !== null) {
        badge.classList.add("active");
        badge.dataset.prediction = view.tree_prediction;
        badge.textContent = `Tree identifies: ${view.tree_prediction}`;
    } else {
        badge.textContent = "Tree: more answers needed";
    }
    container.appendChild(badge);

    const summary = document.createElement("p");
    summary.className = "lookup-count";
    summary.textContent =
        `${view.lookup_candidates.count} candidate` +
        `${view.lookup_candidates.count === 1 ? "" : "s"} match the present symptoms`;
    container.appendChild(summary);

    const ranked = document.createElement("ol");
    ranked.className = "ann-topk";
    for (const row of view.ann_topk) {
        const item = document.createElement("li");
        const bar = document.createElement("span");
        bar.className = "posterior-bar";
        bar.style.width = `${(row.posterior * 100).toFixed(2)}%`;
        const label = document.createElement("span");
        label.className = "posterior-label";
        label.textContent = `${row.name} (${(row.posterior * 100).toFixed(1)}%)`;
        item.appendChild(bar);
        item.appendChild(label);
        ranked.appendChild(item);
    }
    container.appendChild(ranked);

    const list = document.createElement("ul");
    list.className = "lookup-list";
    for (const name of view.lookup_candidates.names.slice(0, MAX_LISTED)) {
        const item = document.createElement("li");
        item.textContent = name;
        list.appendChild(item);
    }
    if (view.lookup_candidates.count > MAX_LISTED) {
        const more = document.createElement("li");
        more.className = "more";
        more.textContent = `... ${view.lookup_candidates.count - MAX_LISTED} more`;
        list.appendChild(more);
    }
    container.appendChild(list);

    const note = document.createElement("p");
    note.className = "model-note";
    note.textContent = view.note;
    container.appendChild(note);
}
