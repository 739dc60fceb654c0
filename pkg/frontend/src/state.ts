/**
 * Panel state: a cache of the engine's authoritative workspace.
 *
 * The UI never owns data. Every mutation flows through the protocol and the
 * cache is rebuilt from state-sync frames; a forced full sync must render
 * identically to the incremental path. Canvas layout is the one panel-owned
 * concern, and layout changes emit only minor events.
 */

import type { Frame, InstanceJson, SuggestionJson } from './protocol.js';

export interface CanvasRect {
  x: number;
  y: number;
  width: number;
  height: number;
}

export class CanvasLayout {
  private rects = new Map<string, CanvasRect>();
  private zOrder: string[] = [];

  place(instanceId: string, rect: CanvasRect): void {
    if (!this.rects.has(instanceId)) this.zOrder.push(instanceId);
    this.rects.set(instanceId, rect);
  }

  raise(instanceId: string): void {
    this.zOrder = this.zOrder.filter((id) => id !== instanceId);
    this.zOrder.push(instanceId);
  }

  rect(instanceId: string): CanvasRect | undefined {
    return this.rects.get(instanceId);
  }

  ordered(): string[] {
    return [...this.zOrder];
  }

  toJSON(): Record<string, CanvasRect> {
    return Object.fromEntries(this.rects);
  }
}

export class PanelState {
  versionId = 0;
  stateHash = '';
  title = '';
  instances = new Map<string, InstanceJson>();
  peripheral: SuggestionJson[] = [];
  inSitu: SuggestionJson[] = [];
  readonly layout = new CanvasLayout();

  applyStateSync(frame: Frame): void {
    const body = frame.body as {
      mode: string;
      version_id: number;
      state_hash: string;
      title?: string;
      workspace?: { instances: InstanceJson[] };
    };
    this.versionId = body.version_id;
    this.stateHash = body.state_hash;
    if (body.mode === 'full' && body.workspace) {
      if (body.title !== undefined) this.title = body.title;
      this.instances = new Map(
        body.workspace.instances.map((inst) => [inst.id, inst]),
      );
      for (const id of this.instances.keys()) {
        if (!this.layout.rect(id)) {
          this.layout.place(id, defaultRect(this.layout.ordered().length));
        }
      }
    }
  }

  applySuggestionPush(frame: Frame): void {
    const body = frame.body as {
      peripheral: SuggestionJson[];
      in_situ: SuggestionJson[];
    };
    this.peripheral = body.peripheral;
    this.inSitu = body.in_situ;
  }

  table(id: string) {
    const inst = this.instances.get(id);
    return inst && inst.kind === 'table' ? inst : undefined;
  }

  visualization(id: string) {
    const inst = this.instances.get(id);
    return inst && inst.kind === 'visualization' ? inst : undefined;
  }

  instanceNames(): string[] {
    return [...this.instances.values()].map((inst) => inst.name).sort();
  }
}

function defaultRect(index: number): CanvasRect {
  const column = index % 3;
  const row = Math.floor(index / 3);
  return { x: 24 + column * 340, y: 24 + row * 260, width: 320, height: 240 };
}
