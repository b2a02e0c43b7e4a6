// Shared test scaffolding: canned views and a fake fetch for unit tests.

import { vi } from "vitest";
import { CandidateView, ModelMeta, SymptomState } from "../src/api.js";
import { AppElements } from "../src/app.js";

export const META: ModelMeta = {
    db_hash: "deadbeefdeadbeef",
    n_chemicals: 4,
    n_symptoms: 4,
    tree_depth: 2,
    ann_dims: [4, 3, 4],
};

export function makeView(partial: Partial<CandidateView> = {}): CandidateView {
    return {
        lookup_candidates: { names: ["a", "b", "c", "d"], count: 4, query_popcount: 0 },
        tree_prediction: null,
        ann_topk: [
            { name: "a", posterior: 0.4 },
            { name: "b", posterior: 0.3 },
            { name: "c", posterior: 0.2 },
            { name: "d", posterior: 0.1 },
        ],
        next_symptom: 1,
        note: "test note",
        observations: {},
        model: META,
        ...partial,
    };
}

export function jsonResponse(body: unknown, status = 200): Response {
    return new Response(JSON.stringify(body), {
        status,
        headers: { "content-type": "application/json" },
    });
}

export function installFetchMock(router: (url: string, init?: RequestInit) => unknown) {
    const mock = vi.fn(async (input: RequestInfo | URL, init?: RequestInit) => {
        const url = String(input);
        const body = router(url, init);
        if (body instanceof Response) return body;
        return jsonResponse(body);
    });
    vi.stubGlobal("fetch", mock);
    return mock;
}

export function appElements(): AppElements {
    document.body.innerHTML = `
        <div id="offline-banner" hidden></div>
        <p id="next-prompt"></p>
        <input type="checkbox" id="present-only">
        <section id="checklist"></section>
        <aside id="candidates"></aside>
    `;
    return {
        checklist: document.getElementById("checklist") as HTMLElement,
        candidates: document.getElementById("candidates") as HTMLElement,
        banner: document.getElementById("offline-banner") as HTMLElement,
        nextPrompt: document.getElementById("next-prompt") as HTMLElement,
        presentOnlyToggle: document.getElementById("present-only") as HTMLInputElement,
    };
}

export function sessionRouterFactory(symptoms: string[]) {
    // minimal stateful fake of the service: presence-only candidate filtering
    const observations = new Map<number, SymptomState>();
    return {
        observations,
        route(url: string, init?: RequestInit): unknown {
            if (url.endsWith("/symptoms")) return { symptoms, model: META };
            if (url.endsWith("/sessions") && init?.method === "POST") {
                return { session_id: "s1", model: META };
            }
            const put = url.match(/\/sessions\/s1\/observations\/(\d+)$/);
            if (put && init?.method === "PUT") {
                const index = Number(put[1]);
                const { state } = JSON.parse(String(init.body)) as { state: SymptomState };
                if (state === "unknown") observations.delete(index);
                else observations.set(index, state);
            }
            const obs: Record<string, SymptomState> = {};
            for (const [i, s] of observations) obs[String(i)] = s;
            const present = [...observations.entries()].filter(([, s]) => s === "present");
            return makeView({
                observations: obs,
                lookup_candidates: {
                    names: ["a", "b", "c", "d"].slice(0, 4 - present.length),
                    count: 4 - present.length,
                    query_popcount: present.length,
                },
            });
        },
    };
}
