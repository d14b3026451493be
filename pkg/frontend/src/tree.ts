// Flatten a provenance tree into indented rows for rendering.

import { ProvenanceNode } from "./api.js";

export interface TreeRow {
  depth: number;
  produced: string;
  kind: "leaf" | "combine";
  inputLine: number | null;
  detail: string;
}

export function flattenTree(node: ProvenanceNode, depth = 0): TreeRow[] {
  if (node.kind === "leaf") {
    return [
      {
        depth,
        produced: node.produced,
        kind: "leaf",
        inputLine: node.input_line ?? null,
        detail: `input line ${node.input_line}`,
      },
    ];
  }
  const head: TreeRow = {
    depth,
    produced: node.produced,
    kind: "combine",
    inputLine: null,
    detail: `matching (${(node.matching ?? []).join(" ")}), join slot ${node.union_slot}`,
  };
  return [
    head,
    ...flattenTree(node.left!, depth + 1),
    ...flattenTree(node.right!, depth + 1),
  ];
}

export function leafInputLines(node: ProvenanceNode): number[] {
  return flattenTree(node)
    .filter((r) => r.kind === "leaf" && r.inputLine !== null)
    .map((r) => r.inputLine as number);
}
