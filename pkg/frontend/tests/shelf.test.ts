import { describe, expect, it } from 'vitest';

import { ProtocolClient, type TableJson, type VisualizationJson } from '../src/protocol.js';
import { ShelfEditor } from '../src/shelf.js';
import { PanelState } from '../src/state.js';
import { MockTransport } from './mock.js';

function setup() {
  const transport = new MockTransport();
  const table: TableJson = {
    kind: 'table',
    id: 'Combined',
    name: 'Combined',
    columns: [
      { name: 'Price', type: 'number' },
      { name: 'User Rating', type: 'number' },
      { name: 'Resolution', type: 'text' },
    ],
    rows: [],
  };
  const viz: VisualizationJson = {
    kind: 'visualization',
    id: 'Viz1',
    name: 'Viz1',
    source_instance_id: 'Combined',
    chart_type: 'scatter',
    encodings: [['y', 'User Rating']],
    interactions: ['zoom-pan', 'tooltip'],
    valid: true,
  };
  transport.engine.instances.set(table.id, table);
  transport.engine.instances.set(viz.id, viz);
  const client = new ProtocolClient(transport);
  const state = new PanelState();
  state.instances.set(table.id, table);
  state.instances.set(viz.id, { ...viz });
  const editor = new ShelfEditor(client, state, 'Viz1');
  return { transport, state, editor };
}

describe('shelf editor', () => {
  it('drag Price onto x updates the encoding through the engine', async () => {
    const { transport, editor } = setup();
    const response = await editor.drop('Price', 'x');
    expect(response.kind).toBe('state-sync');
    const mutation = transport.engine.mutations[0].body as {
      mutation: { tool: string; args: { newInstance: VisualizationJson } };
    };
    expect(mutation.mutation.tool).toBe('updateInstance');
    expect(mutation.mutation.args.newInstance.encodings).toContainEqual(['x', 'Price']);
    const view = editor.render();
    expect(view.shelves.x).toBe('Price');
    expect(view.shelves.y).toBe('User Rating');
  });

  it('forced state-sync renders the identical encoding set', async () => {
    const { editor } = setup();
    await editor.drop('Price', 'x');
    await editor.drop('Resolution', 'color');
    const incremental = editor.render();
    await editor.forceResync();
    const resynced = editor.render();
    expect(resynced.shelves).toEqual(incremental.shelves);
    expect(resynced.chartType).toBe(incremental.chartType);
    expect(resynced.availableColumns).toEqual(incremental.availableColumns);
  });

  it('dropping onto an occupied shelf replaces the encoding', async () => {
    const { editor } = setup();
    await editor.drop('Price', 'y');
    const view = editor.render();
    expect(view.shelves.y).toBe('Price');
    const occupied = Object.values(view.shelves).filter((v) => v !== null);
    expect(occupied).toHaveLength(1);
  });

  it('interactions ride along untouched', async () => {
    const { editor } = setup();
    await editor.drop('Price', 'x');
    expect(editor.render().interactions).toEqual(['zoom-pan', 'tooltip']);
  });
});
