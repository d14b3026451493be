// DOM rendering: constraint tables in the usual two-column layout, the
// verdict banner, the diagram editor lists, and the provenance tree.

import { ProblemDoc } from "./api.js";
import { Workspace, WorkspaceState } from "./workspace.js";
import { flattenTree } from "./tree.js";

function el(tag: string, cls?: string, text?: string): HTMLElement {
  const node = document.createElement(tag);
  if (cls) node.className = cls;
  if (text !== undefined) node.textContent = text;
  return node;
}

function partText(part: [string[], number]): string {
  const [labels, count] = part;
  const body = labels.length === 1 ? labels[0] : `[${labels.join(" ")}]`;
  return count > 1 ? `${body}^${count}` : body;
}

function lineText(line: [string[], number][]): string {
  return line.map(partText).join(" ");
}

export function renderConstraints(
  container: HTMLElement,
  problem: ProblemDoc,
  witnessLines: string[],
  onSelect: (line: string) => void,
): void {
  container.replaceChildren();
  const table = el("div", "constraints");
  const nodeCol = el("div", "constraint-col");
  nodeCol.append(el("h3", undefined, "node constraint"));
  for (const line of problem.node_lines) {
    const text = lineText(line);
    const row = el("div", "line", text);
    if (witnessLines.includes(text)) {
      row.classList.add("witness");
      row.title = "certifies 0-round solvability";
    }
    row.addEventListener("click", () => onSelect(text));
    nodeCol.append(row);
  }
  const edgeCol = el("div", "constraint-col");
  edgeCol.append(el("h3", undefined, "edge constraint"));
  for (const line of problem.edge_lines) {
    edgeCol.append(el("div", "line", lineText(line)));
  }
  table.append(nodeCol, edgeCol);
  container.append(table);
}

export function renderVerdict(container: HTMLElement, ws: Workspace): void {
  container.replaceChildren();
  const cur = ws.state.current;
  const banner = el("div", "verdict", ws.verdictText());
  if (cur) {
    banner.classList.add(
      cur.result.payload.trivial.solvable ? "trivial" : "nontrivial",
    );
  }
  container.append(banner);
}

export function renderBlocked(container: HTMLElement, ws: Workspace): void {
  container.replaceChildren();
  const reason = ws.blockedReason();
  if (reason !== null && ws.state.diagram.nodes.length > 0) {
    container.append(el("div", "blocked", reason));
  }
  const err = ws.state.error;
  if (err) container.append(el("div", "error", err));
}

export function renderDiagramEditor(
  container: HTMLElement,
  ws: Workspace,
): void {
  container.replaceChildren();
  const state = ws.state;
  const nodes = el("div", "nodes");
  nodes.append(el("h3", undefined, `nodes (${state.diagram.nodes.length})`));
  for (const n of state.diagram.nodes) {
    const row = el("span", "node-chip", n);
    const x = el("button", "remove", "x");
    x.addEventListener("click", () => void ws.removeNode(n));
    row.append(x);
    nodes.append(row);
  }
  const edges = el("div", "edges");
  edges.append(el("h3", undefined, `edges (${state.diagram.edges.length})`));
  for (const [a, b] of state.diagram.edges) {
    const row = el("div", "edge-row", `${a} → ${b}`);
    const x = el("button", "remove", "x");
    x.addEventListener("click", () => void ws.removeEdge(a, b));
    row.append(x);
    edges.append(row);
  }
  container.append(nodes, edges);
}

export function renderProvenance(container: HTMLElement, ws: Workspace,
                                 onLeaf: (inputLine: number) => void): void {
  container.replaceChildren();
  const sel = ws.selectedProvenance();
  if (!sel) {
    container.append(el("div", "hint",
      "click a node line to inspect its derivation"));
    return;
  }
  container.append(el("h3", undefined, `derivation of ${sel.line}`));
  for (const row of flattenTree(sel.tree)) {
    const div = el("div", `tree-row ${row.kind}`,
      `${"  ".repeat(row.depth)}${row.produced}   (${row.detail})`);
    if (row.kind === "leaf" && row.inputLine !== null) {
      div.classList.add("leaf-link");
      div.addEventListener("click", () => onLeaf(row.inputLine as number));
    }
    container.append(div);
  }
  if (sel.expressions) {
    container.append(el("h3", undefined, "slot expressions"));
    for (const e of sel.expressions) {
      container.append(el("div", "expr", e));
    }
  }
}

export function renderHistory(container: HTMLElement, ws: Workspace): void {
  container.replaceChildren();
  ws.state.history.forEach((h, i) => {
    const verdict = h.result.payload.trivial.solvable ? "trivial" : "non-trivial";
    const row = el("div", "history-row",
      `#${i + 1}: ${verdict} (${h.result.payload.problem.node_lines.length} node lines)`);
    const btn = el("button", undefined, "replay");
    btn.addEventListener("click", () => void ws.replay(i));
    row.append(btn);
    container.append(row);
  });
}

export function renderAll(ws: Workspace, state: WorkspaceState): void {
  const $ = (id: string) => document.getElementById(id) as HTMLElement;
  renderVerdict($("verdict"), ws);
  renderBlocked($("blocked"), ws);
  renderDiagramEditor($("diagram-editor"), ws);
  renderHistory($("history"), ws);
  const cur = state.current;
  if (cur) {
    renderConstraints($("result"), cur.result.payload.problem,
      cur.result.payload.witness_lines,
      (line) => ws.selectLine(line));
    renderProvenance($("provenance"), ws, (inputLine) => {
      const input = document.querySelectorAll("#inputs .line")[inputLine];
      document.querySelectorAll("#inputs .line.highlight")
        .forEach((n) => n.classList.remove("highlight"));
      input?.classList.add("highlight");
    });
  }
  const inputs = $("inputs");
  inputs.replaceChildren();
  if (cur) {
    inputs.append(el("h3", undefined, "input node lines"));
    for (const line of cur.result.provenance.input_lines) {
      inputs.append(el("div", "line", line));
    }
  }
  const dt = $("diagram-text") as HTMLTextAreaElement;
  if (document.activeElement !== dt) dt.value = ws.diagramText();
}
