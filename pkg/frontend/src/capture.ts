/**
 * In-page capture and highlight overlays (content-script side).
 *
 * Capture mode outlines the hovered element and click sends a
 * capture-request; after a second sibling capture the engine's selector
 * match count drives a highlight of every matching item. Source tracing
 * scrolls to and outlines the resolved node, or reports it gone.
 */

import type { Frame, ProtocolClient } from './protocol.js';

export interface HighlightView {
  nodeId: number;
  kind: 'hover' | 'match' | 'source';
}

export interface CaptureResult {
  cell: unknown;
  sourceRef: { snapshot_id: string; node_id: number; url: string };
}

export class CaptureOverlay {
  private hovered: number | null = null;
  private matches: number[] = [];
  private sourceNode: number | null = null;
  private prompt: string | null = null;

  constructor(
    private client: ProtocolClient,
    private snapshotId: string,
  ) {}

  hover(nodeId: number | null): void {
    this.hovered = nodeId;
  }

  async captureClick(nodeId: number): Promise<CaptureResult | null> {
    const response = await this.client.request('capture-request', {
      snapshot_id: this.snapshotId,
      node_id: nodeId,
    });
    if (response.kind === 'error') return null;
    const body = response.body as {
      cell: unknown;
      source_ref: CaptureResult['sourceRef'];
    };
    return { cell: body.cell, sourceRef: body.source_ref };
  }

  /**
   * The engine detected a repeating pattern: highlight every matched node
   * and surface the confirmation prompt ("Select all (N) matching items?").
   */
  showMatches(nodeIds: number[], matchCount: number): void {
    this.matches = [...nodeIds];
    this.prompt = `Select all (${matchCount}) matching items?`;
  }

  clearMatches(): void {
    this.matches = [];
    this.prompt = null;
  }

  promptText(): string | null {
    return this.prompt;
  }

  async traceSource(ref: CaptureResult['sourceRef']): Promise<Frame> {
    const response = await this.client.request('trace-request', {
      source_ref: ref,
    });
    if (response.kind === 'trace-result') {
      this.sourceNode = (response.body as { node_id: number }).node_id;
    } else {
      this.sourceNode = null;   // "source gone" toast
    }
    return response;
  }

  render(): HighlightView[] {
    const views: HighlightView[] = [];
    if (this.hovered !== null) {
      views.push({ nodeId: this.hovered, kind: 'hover' });
    }
    for (const nodeId of this.matches) {
      views.push({ nodeId, kind: 'match' });
    }
    if (this.sourceNode !== null) {
      views.push({ nodeId: this.sourceNode, kind: 'source' });
    }
    return views;
  }
}
