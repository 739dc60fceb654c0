/**
 * Peripheral suggestion panel: descriptions plus rendered plan steps in
 * confidence order, with a processing indicator while generation is in
 * flight and a subtle badge (never focus-stealing) when new ones arrive.
 */

import type { Frame, ProtocolClient, SuggestionJson } from './protocol.js';

export interface SuggestionCardView {
  id: string;
  trigger: string;
  description: string;
  steps: string[];
  confidence: number;
  needsNavigation: boolean;
}

export interface SuggestionPanelView {
  cards: SuggestionCardView[];
  processing: boolean;
  unseenBadge: boolean;
}

export class SuggestionPanel {
  private suggestions: SuggestionJson[] = [];
  private processing = false;
  private unseen = false;

  constructor(private client: ProtocolClient) {}

  setProcessing(flag: boolean): void {
    this.processing = flag;
  }

  /** New push while the user works elsewhere: badge only, no focus steal. */
  receive(suggestions: SuggestionJson[], userBusy: boolean): void {
    const previous = new Set(this.suggestions.map((s) => s.id));
    const hasNew = suggestions.some((s) => !previous.has(s.id));
    this.suggestions = suggestions;
    this.processing = false;
    if (hasNew && userBusy) this.unseen = true;
  }

  markSeen(): void {
    this.unseen = false;
  }

  render(): SuggestionPanelView {
    return {
      cards: this.suggestions.map((s) => ({
        id: s.id,
        trigger: s.trigger_rule,
        description: s.description,
        steps: s.plan.rendered_steps,
        confidence: s.confidence,
        needsNavigation: Boolean(s.needs_navigation),
      })),
      processing: this.processing,
      unseenBadge: this.unseen,
    };
  }

  apply(suggestionId: string): Promise<Frame> {
    return this.client.request('apply-suggestion', {
      suggestion_id: suggestionId,
    });
  }

  dismiss(suggestionId: string): Promise<Frame> {
    return this.client.request('event', {
      event: {
        kind: 'suggestion-dismissed',
        payload: { suggestion_id: suggestionId },
      },
    });
  }
}
