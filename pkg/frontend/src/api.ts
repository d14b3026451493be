// Thin client over the local JSON service. All math happens server-side;
// the UI only displays what the backend returns.

export interface TrivialVerdict {
  solvable: boolean;
  witness: string | null;
}

export interface ProvenanceNode {
  kind: "leaf" | "combine";
  produced: string;
  input_line?: number;
  matching?: number[];
  union_slot?: number;
  left?: ProvenanceNode;
  right?: ProvenanceNode;
}

export interface ProvenanceLine {
  line: string;
  tree: ProvenanceNode;
  is_witness: boolean;
  expressions: string[] | null;
}

export interface ProvenanceDoc {
  alphabet: string[];
  input_lines: string[];
  lines: ProvenanceLine[];
}

export interface FixedPointPayload {
  problem: ProblemDoc;
  trivial: TrivialVerdict;
  witness_lines: string[];
}

export interface FixedPointResponse {
  payload: FixedPointPayload;
  payload_canonical: string;
  provenance: ProvenanceDoc;
  text: string;
}

export interface ProblemDoc {
  alphabet: string[];
  node_arity: number;
  edge_arity: number;
  node_lines: [string[], number][][];
  edge_lines: [string[], number][][];
}

export interface ValidationResult {
  ok: boolean;
  kind: string | null;
  pair: string[] | null;
}

export type FetchLike = (url: string, init?: any) => Promise<{
  ok: boolean;
  status: number;
  json(): Promise<any>;
}>;

export class ApiError extends Error {
  constructor(message: string, readonly status: number) {
    super(message);
  }
}

export class Client {
  constructor(
    private readonly base: string,
    private readonly fetchImpl: FetchLike = fetch,
  ) {}

  private async post<T>(path: string, body: unknown): Promise<T> {
    const resp = await this.fetchImpl(this.base + path, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(body),
    });
    const doc = await resp.json();
    if (!resp.ok) {
      throw new ApiError(doc.error ?? `HTTP ${resp.status}`, resp.status);
    }
    return doc as T;
  }

  parse(problem: string): Promise<{ problem: ProblemDoc; text: string }> {
    return this.post("/parse", { problem });
  }

  defaultDiagram(problem: string): Promise<{ diagram: string }> {
    return this.post("/default-diagram", { problem });
  }

  validateDiagram(diagram: string): Promise<ValidationResult> {
    return this.post("/validate-diagram", { diagram });
  }

  fixedpoint(problem: string, diagram: string): Promise<FixedPointResponse> {
    return this.post("/fixedpoint", { problem, diagram });
  }

  checkTrivial(problem: string): Promise<TrivialVerdict> {
    return this.post("/check-trivial", { problem });
  }
}
