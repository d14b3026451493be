// Editable diagram model mirroring the backend's text format:
// one `a -> b` per line, `node x` for isolated nodes, `#` comments.

export interface DiagramModel {
  nodes: string[];
  edges: [string, string][];
}

export function parseDiagramText(text: string): DiagramModel {
  const nodes: string[] = [];
  const seen = new Set<string>();
  const edges: [string, string][] = [];
  const add = (name: string) => {
    if (!seen.has(name)) {
      seen.add(name);
      nodes.push(name);
    }
  };
  for (const raw of text.split("\n")) {
    const line = raw.trim();
    if (!line || line.startsWith("#")) continue;
    if (line.startsWith("node ")) {
      for (const tok of line.slice(5).split(/\s+/)) add(tok);
      continue;
    }
    const m = line.match(/^(\S+)\s*->\s*(\S+)$/);
    if (!m) throw new Error(`cannot read diagram line: ${line}`);
    add(m[1]);
    add(m[2]);
    edges.push([m[1], m[2]]);
  }
  return { nodes: nodes.sort(), edges };
}

export function serializeDiagram(model: DiagramModel): string {
  const covered = new Set<string>();
  const lines: string[] = [];
  const sorted = [...model.edges].sort(
    (a, b) => a[0].localeCompare(b[0]) || a[1].localeCompare(b[1]),
  );
  for (const [a, b] of sorted) {
    lines.push(`${a} -> ${b}`);
    covered.add(a);
    covered.add(b);
  }
  for (const n of [...model.nodes].sort()) {
    if (!covered.has(n)) lines.push(`node ${n}`);
  }
  return lines.join("\n") + "\n";
}

export function addNode(model: DiagramModel, name: string): DiagramModel {
  if (!name || /[\s\[\]^]/.test(name)) {
    throw new Error(`invalid node name: ${JSON.stringify(name)}`);
  }
  if (model.nodes.includes(name)) return model;
  return { nodes: [...model.nodes, name].sort(), edges: model.edges };
}

export function removeNode(model: DiagramModel, name: string): DiagramModel {
  return {
    nodes: model.nodes.filter((n) => n !== name),
    edges: model.edges.filter(([a, b]) => a !== name && b !== name),
  };
}

export function addEdge(model: DiagramModel, from: string, to: string): DiagramModel {
  if (from === to) throw new Error("self-loops are not allowed");
  let out = addNode(addNode(model, from), to);
  if (out.edges.some(([a, b]) => a === from && b === to)) return out;
  return { nodes: out.nodes, edges: [...out.edges, [from, to]] };
}

export function removeEdge(model: DiagramModel, from: string, to: string): DiagramModel {
  return {
    nodes: model.nodes,
    edges: model.edges.filter(([a, b]) => !(a === from && b === to)),
  };
}
