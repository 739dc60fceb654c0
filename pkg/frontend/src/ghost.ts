/**
 * Ghost-diff controller for the table editor.
 *
 * An in-situ suggestion renders as a preview over the grid: added cells in
 * green, removed in red, modified highlighted. Nothing reaches the engine
 * until the user accepts with Tab; typing into a ghost cell or pressing
 * Escape dismisses instead, and the engine withdraws the suggestion.
 */

import type { CellValue, ProtocolClient, SuggestionJson } from './protocol.js';

export type GhostCellState = 'added' | 'removed' | 'modified';

export interface GhostCellView {
  row: number;
  col: number;
  value: CellValue;
  state: GhostCellState;
}

export class GhostDiffController {
  private active: SuggestionJson | null = null;

  constructor(
    private client: ProtocolClient,
    private targetInstanceId: string,
  ) {}

  /** The newest in-situ suggestion aimed at the open editor, if any. */
  present(suggestions: SuggestionJson[]): void {
    const mine = suggestions.filter(
      (s) =>
        s.modality === 'in-situ' &&
        s.status === 'offered' &&
        s.ghost_diff?.instance_id === this.targetInstanceId,
    );
    this.active = mine.length ? mine[mine.length - 1] : null;
  }

  activeSuggestion(): SuggestionJson | null {
    return this.active;
  }

  /** Pure render model; building it never talks to the engine. */
  render(): GhostCellView[] {
    if (!this.active?.ghost_diff) return [];
    const ghost = this.active.ghost_diff;
    const cells: GhostCellView[] = [];
    if (ghost.added_rows && ghost.start_row !== undefined) {
      ghost.added_rows.forEach((row, offset) => {
        row.forEach((value, col) => {
          cells.push({
            row: ghost.start_row! + offset,
            col,
            value,
            state: 'added',
          });
        });
      });
    }
    if (ghost.cells) {
      for (const [row, value] of Object.entries(ghost.cells)) {
        cells.push({ row: Number(row), col: -1, value, state: 'modified' });
      }
    }
    return cells;
  }

  /**
   * Keyboard entry point. Tab accepts (exactly one apply frame); Escape
   * dismisses. Returns what was emitted so callers can chain.
   */
  async handleKey(key: string): Promise<'applied' | 'dismissed' | 'ignored'> {
    if (!this.active) return 'ignored';
    if (key === 'Tab') {
      const suggestion = this.active;
      this.active = null;
      await this.client.request('apply-suggestion', {
        suggestion_id: suggestion.id,
      });
      return 'applied';
    }
    if (key === 'Escape') {
      await this.dismiss();
      return 'dismissed';
    }
    return 'ignored';
  }

  /** Typing into a ghost cell yields to the user (conflict avoidance). */
  async handleCellInput(row: number, col: number): Promise<boolean> {
    if (!this.active) return false;
    const touched = this.render().some(
      (cell) => cell.row === row && (cell.col === col || cell.col === -1),
    );
    if (!touched) return false;
    await this.dismiss();
    return true;
  }

  private async dismiss(): Promise<void> {
    if (!this.active) return;
    const suggestion = this.active;
    this.active = null;
    await this.client.request('event', {
      event: {
        kind: 'suggestion-dismissed',
        payload: { suggestion_id: suggestion.id },
      },
    });
  }
}
