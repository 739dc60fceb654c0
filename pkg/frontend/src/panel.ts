/**
 * Composition root for the side panel: one protocol client feeding the
 * state store, suggestion panel, chat view, and per-editor controllers.
 * Rendering stays in view models so the panel logic runs headlessly; the
 * thin DOM binding lives with the extension shell.
 */

import { ProtocolClient, type Frame, type Transport } from './protocol.js';
import { PanelState } from './state.js';
import { GhostDiffController } from './ghost.js';
import { ShelfEditor } from './shelf.js';
import { SuggestionPanel } from './suggestions.js';
import { ChatView } from './chat.js';

export class SidePanel {
  readonly client: ProtocolClient;
  readonly state = new PanelState();
  readonly suggestions: SuggestionPanel;
  readonly chat: ChatView;
  userBusy = false;

  constructor(transport: Transport) {
    this.client = new ProtocolClient(transport);
    this.suggestions = new SuggestionPanel(this.client);
    this.chat = new ChatView(this.client, this.state);
    this.client.onPush((frame) => this.handlePush(frame));
  }

  async connect(): Promise<void> {
    const sync = await this.client.hello();
    this.state.applyStateSync(sync);
  }

  private handlePush(frame: Frame): void {
    this.state.applySuggestionPush(frame);
    this.suggestions.receive(this.state.peripheral, this.userBusy);
  }

  async sync(frame?: Frame): Promise<void> {
    const response = frame ?? (await this.client.request('state-sync', {}));
    this.state.applyStateSync(response);
  }

  tableEditor(instanceId: string): GhostDiffController {
    return new GhostDiffController(this.client, instanceId);
  }

  vizEditor(vizId: string): ShelfEditor {
    return new ShelfEditor(this.client, this.state, vizId);
  }

  /** Layout moves are minor interactions: logged but never trigger-bearing. */
  async moveInstance(instanceId: string, x: number, y: number): Promise<void> {
    const rect = this.state.layout.rect(instanceId);
    this.state.layout.place(instanceId, {
      x,
      y,
      width: rect?.width ?? 320,
      height: rect?.height ?? 240,
    });
    await this.client.request('event', {
      event: {
        kind: 'selection-made',
        payload: { instance_id: instanceId, scope: 'instance', moved: true },
        major: false,
      },
    });
  }
}
