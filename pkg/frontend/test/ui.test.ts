import { afterEach, describe, expect, it, vi } from "vitest";
import { ApiClient } from "../src/api.js";
import { mountApp } from "../src/app.js";
import { renderCandidates } from "../src/candidates.js";
import { renderChecklist } from "../src/checklist.js";
import { appElements, installFetchMock, makeView, sessionRouterFactory } from "./helpers.js";

afterEach(() => {
    vi.unstubAllGlobals();
    document.body.innerHTML = "";
});

function flush() {
    return new Promise((r) => setTimeout(r, 0));
}

describe("checklist rendering", () => {
    it("renders one tri-state control per symptom, all unknown initially", () => {
        const names = Array.from({ length: 79 }, (_, i) => `ssx_${i}`);
        const host = document.createElement("div");
        renderChecklist(host, names, names.map(() => "unknown"), null, { onToggle() {} });
        const buttons = host.querySelectorAll("button.tristate");
        expect(buttons.length).toBe(79);
        for (const b of buttons) expect((b as HTMLElement).dataset.state).toBe("unknown");
    });

    it("highlights the server-suggested next symptom", () => {
        const host = document.createElement("div");
        renderChecklist(host, ["a", "b", "c"], ["unknown", "unknown", "unknown"], 2, {
            onToggle() {},
        });
        const suggested = host.querySelectorAll("button.suggested");
        expect(suggested.length).toBe(1);
        expect((suggested[0] as HTMLElement).dataset.index).toBe("2");
    });
});

describe("candidate panel rendering", () => {
    it("shows count and no badge for the full library", () => {
        const host = document.createElement("div");
        renderCandidates(host, makeView({ tree_prediction: null }));
        expect(host.querySelector(".lookup-count")?.textContent).toContain("4 candidates");
        expect(host.querySelector(".tree-badge.active")).toBeNull();
    });

    it("shows the prediction badge when the tree path is complete", () => {
        const host = document.createElement("div");
        renderCandidates(host, makeView({ tree_prediction: "chem_007" }));
        const badge = host.querySelector(".tree-badge.active") as HTMLElement;
        expect(badge).not.toBeNull();
        expect(badge.dataset.prediction).toBe("chem_007");
        expect(badge.textContent).toContain("chem_007");
    });

    it("renders posterior bars in non-increasing width order", () => {
        const host = document.createElement("div");
        renderCandidates(host, makeView());
        const widths = [...host.querySelectorAll(".posterior-bar")].map((el) =>
            parseFloat((el as HTMLElement).style.width),
        );
        const sorted = [...widths].sort((a, b) => b - a);
        expect(widths).toEqual(sorted);
    });
});

describe("mounted app", () => {
    it("issues exactly one PUT per toggle and re-renders from the response", async () => {
        const router = sessionRouterFactory(["s0", "s1", "s2", "s3"]);
        const mock = installFetchMock(router.route.bind(router));
        const el = appElements();
        const app = mountApp(new ApiClient("http://svc"), el);
        await app.ready;
        await flush();

        const before = mock.mock.calls.filter(([, i]) => i?.method === "PUT").length;
        const button = el.checklist.querySelector('button[data-index="0"]') as HTMLButtonElement;
        button.click();
        await app.store.flush();
        const puts = mock.mock.calls.filter(([, i]) => i?.method === "PUT");
        expect(puts.length - before).toBe(1);
        expect(String(puts[0]![0])).toContain("/observations/0");
        expect(
            (el.checklist.querySelector('button[data-index="0"]') as HTMLElement).dataset.state,
        ).toBe("present");
    });

    it("marking then unmarking a symptom restores the candidate panel", async () => {
        const router = sessionRouterFactory(["s0", "s1", "s2", "s3"]);
        installFetchMock(router.route.bind(router));
        const el = appElements();
        const app = mountApp(new ApiClient("http://svc"), el);
        await app.ready;
        const before = el.candidates.innerHTML;
        await app.store.setSymptomState(1, "present");
        expect(el.candidates.innerHTML).not.toBe(before);
        await app.store.setSymptomState(1, "unknown");
        expect(el.candidates.innerHTML).toBe(before);
    });

    it("shows the offline banner when the service is unreachable", async () => {
        vi.stubGlobal("fetch", async () => {
            throw new TypeError("network down");
        });
        const el = appElements();
        const app = mountApp(new ApiClient("http://svc"), el);
        await expect(app.ready).rejects.toThrow();
        expect(el.banner.hidden).toBe(false);
    });

    it("is keyboard operable: controls are buttons reachable in DOM order", async () => {
        const router = sessionRouterFactory(["s0", "s1"]);
        installFetchMock(router.route.bind(router));
        const el = appElements();
        const app = mountApp(new ApiClient("http://svc"), el);
        await app.ready;
        const controls = el.checklist.querySelectorAll("button.tristate");
        expect(controls.length).toBe(2);
        for (const c of controls) {
            expect((c as HTMLButtonElement).tabIndex).toBeGreaterThanOrEqual(0);
        }
    });
});
