// Session store. The server is the source of truth: symptom states and the
// candidate view are always rebuilt from the latest server response, and
// mutations are queued so at most one PUT is in flight per session.

import { ApiClient, CandidateView, SymptomState } from "./api.js";

export interface UiSessionState {
    sessionId: string | null;
    symptoms: string[];
    states: SymptomState[];
    view: CandidateView | null;
    connected: boolean;
}

export type Listener = (state: UiSessionState) => void;

export class SessionStore {
    private state: UiSessionState = {
        sessionId: null,
        symptoms: [],
        states: [],
        view: null,
        connected: false,
    };
    private listeners: Listener[] = [];
    private queue: Promise<unknown> = Promise.resolve();

    constructor(private api: ApiClient) {}

    snapshot(): UiSessionState {
        return {
            ...this.state,
            symptoms: [...this.state.symptoms],
            states: [...this.state.states],
        };
    }

    subscribe(listener: Listener): () => void {
        this.listeners.push(listener);
        return () => {
            this.listeners = this.listeners.filter((l) => l !== listener);
        };
    }

    private emit(): void {
        const snap = this.snapshot();
        for (const listener of this.listeners) listener(snap);
    }

    private applyView(view: CandidateView): void {
        const states: SymptomState[] = this.state.symptoms.map(() => "unknown");
        for (const [index, state] of Object.entries(view.observations)) {
            states[Number(index)] = state;
        }
        this.state = { ...this.state, states, view, connected: true };
        this.emit();
    }

    async init(): Promise<void> {
        try {
            const { symptoms } = await this.api.getSymptoms();
            const { session_id } = await this.api.createSession();
            this.state = {
                ...this.state,
                symptoms,
                states: symptoms.map(() => "unknown"),
                sessionId: session_id,
            };
            this.applyView(await this.api.getCandidates(session_id));
        } catch (err) {
            this.state = { ...this.state, connected: false };
            this.emit();
            throw err;
        }
    }

    /** Queued mutation: resolves with the server view that confirmed it. */
    setSymptomState(index: number, state: SymptomState): Promise<CandidateView> {
        const task = this.queue.then(async () => {
            if (this.state.sessionId === null) {
                throw new Error("session not initialized");
            }
            try {
                const view = await this.api.setObservation(this.state.sessionId, index, state);
                this.applyView(view);
                return view;
            } catch (err) {
                this.state = { ...this.state, connected: false };
                this.emit();
                throw err;
            }
        });
        this.queue = task.catch(() => undefined);
        return task;
    }

    /** Resolves once every queued mutation has settled. */
    flush(): Promise<void> {
        return this.queue.then(() => undefined);
    }

    /** Cycle unknown -> present -> absent -> unknown (present-only skips absent). */
    nextState(index: number, presentOnly = false): SymptomState {
        const current = this.state.states[index] ?? "unknown";
        if (current === "unknown") return "present";
        if (current === "present" && !presentOnly) return "absent";
        return "unknown";
    }
}
