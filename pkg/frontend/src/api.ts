// Typed client for the triage service HTTP/JSON API. The UI never computes
// classifications locally; every displayed value comes from these responses.

export type SymptomState = "present" | "absent" | "unknown";

export interface ModelMeta {
    db_hash: string;
    n_chemicals: number;
    n_symptoms: number;
    tree_depth: number;
    ann_dims: number[];
}

export interface RankedCandidate {
    name: string;
    posterior: number;
}

export interface CandidateView {
    lookup_candidates: { names: string[]; count: number; query_popcount: number };
    tree_prediction: string | null;
    ann_topk: RankedCandidate[];
    next_symptom: number | null;
    note: string;
    observations: Record<string, SymptomState>;
    model: ModelMeta;
}

export class ApiError extends Error {
    constructor(readonly status: number, message: string) {
        super(`API error ${status}: ${message}`);
    }
}

async function request<T>(url: string, init?: RequestInit): Promise<T> {
    const res = await fetch(url, init);
    if (!res.ok) {
        throw new ApiError(res.status, await res.text());
    }
    return (await res.json()) as T;
}

export class ApiClient {
    constructor(readonly baseUrl: string) {}

    private url(path: string): string {
        return `${this.baseUrl.replace(/\/$/, "")}${path}`;
    }

    health(): Promise<{ status: string; model: ModelMeta }> {
        return request(this.url("/healthz"));
    }

    getSymptoms(): Promise<{ symptoms: string[]; model: ModelMeta }> {
        return request(this.url("/symptoms"));
    }

    createSession(): Promise<{ session_id: string; model: ModelMeta }> {
        return request(this.url("/sessions"), { method: "POST" });
    }

    getCandidates(sessionId: string): Promise<CandidateView> {
        return request(this.url(`/sessions/${sessionId}/candidates`));
    }

    setObservation(
        sessionId: string,
        index: number,
        state: SymptomState,
    ): Promise<CandidateView> {
        return request(this.url(`/sessions/${sessionId}/observations/${index}`), {
            method: "PUT",
            headers: { "content-type": "application/json" },
            body: JSON.stringify({ state }),
        });
    }
}
