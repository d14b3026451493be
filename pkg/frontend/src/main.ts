// Wiring: backend client, workspace, and the static page.

import { Client } from "./api.js";
import { Workspace, TOY_PROBLEM } from "./workspace.js";
import { renderAll } from "./render.js";

const backend = (window as any).LCLRE_BACKEND ?? "http://127.0.0.1:8321";
const ws = new Workspace(new Client(backend));

function $(id: string): HTMLElement {
  return document.getElementById(id) as HTMLElement;
}

function bind(): void {
  const problem = $("problem") as HTMLTextAreaElement;
  problem.value = ws.state.problemText;
  problem.addEventListener("input", () => ws.setProblemText(problem.value));

  $("load-toy").addEventListener("click", () => {
    problem.value = TOY_PROBLEM;
    ws.setProblemText(TOY_PROBLEM);
  });

  $("use-default").addEventListener("click", () => void ws.useDefaultDiagram());

  const diagramText = $("diagram-text") as HTMLTextAreaElement;
  $("apply-diagram").addEventListener("click", () =>
    void ws.setDiagramText(diagramText.value));

  $("add-node").addEventListener("click", () => {
    const name = ($("node-name") as HTMLInputElement).value.trim();
    if (name) void ws.addNode(name);
  });

  $("add-edge").addEventListener("click", () => {
    const from = ($("edge-from") as HTMLInputElement).value.trim();
    const to = ($("edge-to") as HTMLInputElement).value.trim();
    if (from && to) void ws.addEdge(from, to);
  });

  const runBtn = $("run") as HTMLButtonElement;
  runBtn.addEventListener("click", () => void ws.run());

  $("export").addEventListener("click", () => {
    const blob = new Blob([ws.exportWorkspace()], { type: "application/json" });
    const a = document.createElement("a");
    a.href = URL.createObjectURL(blob);
    a.download = "workspace.json";
    a.click();
  });

  ($("import") as HTMLInputElement).addEventListener("change", async (ev) => {
    const file = (ev.target as HTMLInputElement).files?.[0];
    if (file) await ws.importWorkspace(await file.text());
  });

  ws.onChange = (state) => {
    runBtn.disabled = !ws.canRun();
    renderAll(ws, state);
  };
  ws.onChange(ws.state);
}

bind();
