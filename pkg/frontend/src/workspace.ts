// Workspace state: the problem text, the editable diagram, run history,
// and the selected provenance tree. Pure logic; rendering lives elsewhere.
// Every history entry stores the exact inputs that produced it, so any
// result can be reproduced by replaying the entry.

import {
  Client,
  FixedPointResponse,
  ProvenanceLine,
  ValidationResult,
} from "./api.js";
import {
  DiagramModel,
  addEdge,
  addNode,
  parseDiagramText,
  removeEdge,
  removeNode,
  serializeDiagram,
} from "./diagram.js";

export interface HistoryEntry {
  problem: string;
  diagram: string;
  result: FixedPointResponse;
}

export interface WorkspaceState {
  problemText: string;
  diagram: DiagramModel;
  validation: ValidationResult | null;
  history: HistoryEntry[];
  current: HistoryEntry | null;
  selectedLine: string | null;
  error: string | null;
}

export const TOY_PROBLEM = `# 1-defective 2-coloring on 3-regular graphs
A A [A X]
B B [B Y]

[A X] [B Y]
[X Y] [X Y]
`;

export function emptyState(): WorkspaceState {
  return {
    problemText: TOY_PROBLEM,
    diagram: { nodes: [], edges: [] },
    validation: null,
    history: [],
    current: null,
    selectedLine: null,
    error: null,
  };
}

export class Workspace {
  state: WorkspaceState = emptyState();
  onChange: (state: WorkspaceState) => void = () => {};

  constructor(private readonly client: Client) {}

  private update(patch: Partial<WorkspaceState>): void {
    this.state = { ...this.state, ...patch };
    this.onChange(this.state);
  }

  setProblemText(text: string): void {
    this.update({ problemText: text });
  }

  /** Replace the diagram with the backend's default for the current problem. */
  async useDefaultDiagram(): Promise<void> {
    try {
      const { diagram } = await this.client.defaultDiagram(
        this.state.problemText,
      );
      await this.setDiagram(parseDiagramText(diagram));
    } catch (e) {
      this.update({ error: String(e) });
    }
  }

  async setDiagramText(text: string): Promise<void> {
    try {
      await this.setDiagram(parseDiagramText(text));
    } catch (e) {
      this.update({ error: String(e) });
    }
  }

  async setDiagram(model: DiagramModel): Promise<void> {
    this.update({ diagram: model, error: null });
    await this.revalidate();
  }

  /** Live lattice validation; an invalid diagram blocks the run button. */
  async revalidate(): Promise<ValidationResult | null> {
    if (this.state.diagram.nodes.length === 0) {
      this.update({ validation: null });
      return null;
    }
    try {
      const v = await this.client.validateDiagram(this.diagramText());
      this.update({ validation: v });
      return v;
    } catch (e) {
      this.update({ error: String(e) });
      return null;
    }
  }

  diagramText(): string {
    return serializeDiagram(this.state.diagram);
  }

  canRun(): boolean {
    return (
      this.state.diagram.nodes.length > 0 &&
      this.state.validation !== null &&
      this.state.validation.ok
    );
  }

  /** Why the run button is blocked, with the offending pair named. */
  blockedReason(): string | null {
    if (this.state.diagram.nodes.length === 0) return "no diagram loaded";
    const v = this.state.validation;
    if (v === null) return "diagram not validated yet";
    if (v.ok) return null;
    const pair = v.pair ? `(${v.pair.join(", ")})` : "";
    return `lattice violation: ${v.kind} for ${pair}`;
  }

  async addNode(name: string): Promise<void> {
    try {
      await this.setDiagram(addNode(this.state.diagram, name));
    } catch (e) {
      this.update({ error: String(e) });
    }
  }

  async removeNode(name: string): Promise<void> {
    await this.setDiagram(removeNode(this.state.diagram, name));
  }

  async addEdge(from: string, to: string): Promise<void> {
    try {
      await this.setDiagram(addEdge(this.state.diagram, from, to));
    } catch (e) {
      this.update({ error: String(e) });
    }
  }

  async removeEdge(from: string, to: string): Promise<void> {
    await this.setDiagram(removeEdge(this.state.diagram, from, to));
  }

  /** Run the fixed-point generator on the current inputs. */
  async run(): Promise<HistoryEntry | null> {
    if (!this.canRun()) {
      this.update({ error: this.blockedReason() });
      return null;
    }
    try {
      const problem = this.state.problemText;
      const diagram = this.diagramText();
      const result = await this.client.fixedpoint(problem, diagram);
      const entry: HistoryEntry = { problem, diagram, result };
      this.update({
        history: [...this.state.history, entry],
        current: entry,
        selectedLine: null,
        error: null,
      });
      return entry;
    } catch (e) {
      this.update({ error: String(e) });
      return null;
    }
  }

  /** Re-run a history entry from its stored inputs (reproducibility). */
  async replay(index: number): Promise<HistoryEntry | null> {
    const old = this.state.history[index];
    const result = await this.client.fixedpoint(old.problem, old.diagram);
    const entry: HistoryEntry = { problem: old.problem, diagram: old.diagram, result };
    this.update({ current: entry, selectedLine: null });
    return entry;
  }

  selectLine(line: string): void {
    this.update({ selectedLine: line });
  }

  selectedProvenance(): ProvenanceLine | null {
    const cur = this.state.current;
    if (!cur || this.state.selectedLine === null) return null;
    return (
      cur.result.provenance.lines.find(
        (ln) => ln.line === this.state.selectedLine,
      ) ?? null
    );
  }

  /** One-line verdict for the banner. */
  verdictText(): string {
    const cur = this.state.current;
    if (!cur) return "no run yet";
    const t = cur.result.payload.trivial;
    return t.solvable
      ? `TRIVIAL: 0-round solvable with witness ${t.witness}`
      : "NON-TRIVIAL: not 0-round solvable";
  }

  exportWorkspace(): string {
    return JSON.stringify(
      {
        problem: this.state.problemText,
        diagram: this.diagramText(),
        history: this.state.history.map((h) => ({
          problem: h.problem,
          diagram: h.diagram,
        })),
      },
      null,
      2,
    );
  }

  async importWorkspace(text: string): Promise<void> {
    const doc = JSON.parse(text);
    this.update({ problemText: doc.problem, history: [], current: null });
    await this.setDiagramText(doc.diagram);
  }
}
