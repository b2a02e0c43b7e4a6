import { ApiClient } from "./api.js";
import { AppElements, mountApp } from "./app.js";

const params = new URLSearchParams(window.location.search);
const baseUrl = params.get("api") ?? "http://127.0.0.1:8000";

const el: AppElements = {
    checklist: document.getElementById("checklist") as HTMLElement,
    candidates: document.getElementById("candidates") as HTMLElement,
    banner: document.getElementById("offline-banner") as HTMLElement,
    nextPrompt: document.getElementById("next-prompt") as HTMLElement,
    presentOnlyToggle: document.getElementById("present-only") as HTMLInputElement,
};

mountApp(new ApiClient(baseUrl), el).ready.catch(() => {
    el.banner.textContent = `Cannot reach triage service at ${baseUrl}`;
});
