/**
 * Shelf-based visualization editor: drag a column onto the x / y / color /
 * size shelves to re-encode the chart. The engine owns the spec; the editor
 * only reflects it and re-renders whatever state-sync returns.
 */

import type { Frame, ProtocolClient, VisualizationJson } from './protocol.js';
import type { PanelState } from './state.js';

export const CHANNELS = ['x', 'y', 'color', 'size'] as const;
export type Channel = (typeof CHANNELS)[number];

export interface ShelfView {
  chartType: string;
  shelves: Record<Channel, string | null>;
  availableColumns: string[];
  interactions: string[];
}

export class ShelfEditor {
  constructor(
    private client: ProtocolClient,
    private state: PanelState,
    private vizId: string,
  ) {}

  private viz(): VisualizationJson {
    const viz = this.state.visualization(this.vizId);
    if (!viz) throw new Error(`no visualization ${this.vizId}`);
    return viz;
  }

  render(): ShelfView {
    const viz = this.viz();
    const shelves: Record<Channel, string | null> = {
      x: null,
      y: null,
      color: null,
      size: null,
    };
    for (const [channel, column] of viz.encodings) {
      shelves[channel as Channel] = column;
    }
    const source = this.state.table(viz.source_instance_id);
    return {
      chartType: viz.chart_type,
      shelves,
      availableColumns: source ? source.columns.map((c) => c.name) : [],
      interactions: viz.interactions,
    };
  }

  /** Dropping a column onto a shelf replaces that channel's encoding. */
  async drop(column: string, channel: Channel): Promise<Frame> {
    const viz = this.viz();
    const source = this.state.table(viz.source_instance_id);
    if (source && !source.columns.some((c) => c.name === column)) {
      // stale view: surface the engine's verdict instead of guessing
    }
    const encodings = viz.encodings.filter(([ch]) => ch !== channel);
    encodings.push([channel, column]);
    encodings.sort(
      (a, b) => CHANNELS.indexOf(a[0] as Channel) - CHANNELS.indexOf(b[0] as Channel),
    );
    const updated: VisualizationJson = { ...viz, encodings };
    const response = await this.client.request('event', {
      mutation: {
        tool: 'updateInstance',
        args: { instanceId: viz.id, newInstance: updated },
        call_id: `shelf-${viz.id}-${channel}-${column}`,
      },
      event: { kind: 'viz-edited', payload: { instance_id: viz.id } },
    });
    if (response.kind !== 'error') {
      this.state.instances.set(viz.id, updated);   // incremental render
    }
    return response;
  }

  async forceResync(): Promise<void> {
    const sync = await this.client.request('state-sync', {});
    this.state.applyStateSync(sync);
  }
}
