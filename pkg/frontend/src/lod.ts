// Level-of-detail policy: dense slices must stay interactive (target 30+ fps
// at ~8k visible nodes), so past a cutoff nodes degrade to bare points and
// edges fade further.

export const POINTS_ONLY_THRESHOLD = 5000;

export interface LodPolicy {
  pointsOnly: boolean;
  nodeRadius: number;
  edgeAlpha: number;
  drawEdges: boolean;
}

export function lodFor(nodeCount: number, edgeCount: number): LodPolicy {
  const pointsOnly = nodeCount > POINTS_ONLY_THRESHOLD;
  return {
    pointsOnly,
    nodeRadius: pointsOnly ? 1.5 : nodeCount > 1000 ? 2.5 : 4,
    edgeAlpha: pointsOnly ? 0.06 : 0.2,
    drawEdges: edgeCount <= 30000,
  };
}
