/**
 * Chat view with "@" mention autocomplete over instance names.
 */

import type { Frame, ProtocolClient } from './protocol.js';
import type { PanelState } from './state.js';

export interface ChatEntryView {
  role: 'user' | 'assistant';
  text: string;
  steps: string[];
  error: string | null;
}

export class ChatView {
  readonly log: ChatEntryView[] = [];
  draft = '';

  constructor(
    private client: ProtocolClient,
    private state: PanelState,
  ) {}

  setDraft(text: string): void {
    this.draft = text;
  }

  /** Completions for the "@" token under the caret, if any. */
  mentionCandidates(caret: number): string[] {
    const upToCaret = this.draft.slice(0, caret);
    const at = upToCaret.lastIndexOf('@');
    if (at < 0) return [];
    const token = upToCaret.slice(at + 1);
    if (!/^[A-Za-z0-9_]*$/.test(token)) return [];
    return this.state.instanceNames().filter((name) => name.startsWith(token));
  }

  acceptMention(caret: number, name: string): void {
    const upToCaret = this.draft.slice(0, caret);
    const at = upToCaret.lastIndexOf('@');
    this.draft = this.draft.slice(0, at + 1) + name + this.draft.slice(caret);
  }

  async send(): Promise<Frame> {
    const text = this.draft;
    this.draft = '';
    this.log.push({ role: 'user', text, steps: [], error: null });
    const response = await this.client.request('chat-send', { text });
    if (response.kind === 'chat-response') {
      const body = response.body as {
        message: {
          text: string;
          error?: string | null;
          attached_plan?: { rendered_steps?: string[] };
        };
      };
      this.log.push({
        role: 'assistant',
        text: body.message.text,
        steps: body.message.attached_plan?.rendered_steps ?? [],
        error: body.message.error ?? null,
      });
    } else {
      const body = response.body as { message: string; candidates?: string[] };
      this.log.push({
        role: 'assistant',
        text: body.candidates?.length
          ? `${body.message} (try: ${body.candidates.join(', ')})`
          : body.message,
        steps: [],
        error: 'error',
      });
    }
    return response;
  }
}
