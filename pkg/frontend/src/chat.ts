import type { ServerFrame } from './types.js'

export type TranscriptEntry =
  | { kind: 'user'; text: string }
  | { kind: 'context'; bytes: number; text: string }
  | { kind: 'tool_call'; toolkitId: string; endpoint: string; params: Record<string, unknown> }
  | { kind: 'reply'; text: string; modulesUsed: string[]; latencyS: number }
  | { kind: 'error'; text: string }
  | { kind: 'toast'; ruleId: string; text: string }
  | { kind: 'gap' }

/** Whether the send control should be enabled for this input. */
export function canSend(text: string): boolean {
  return text.trim().length > 0
}

/**
 * Ordered chat transcript. Frames are appended in arrival order; a reply
 * frame carrying an error becomes an error bubble instead of a reply.
 * state_event frames belong to the card grid and are ignored here.
 */
export class ChatTranscript {
  readonly entries: TranscriptEntry[] = []
  private listeners: Array<() => void> = []

  onChange(listener: () => void): void {
    this.listeners.push(listener)
  }

  addUserMessage(text: string): boolean {
    if (!canSend(text)) return false
    this.push({ kind: 'user', text: text.trim() })
    return true
  }

  applyFrame(frame: ServerFrame): void {
    switch (frame.type) {
      case 'context_injected':
        this.push({ kind: 'context', bytes: frame.bytes, text: frame.text })
        break
      case 'tool_call':
        this.push({
          kind: 'tool_call',
          toolkitId: frame.toolkit_id,
          endpoint: frame.endpoint,
          params: frame.params,
        })
        break
      case 'reply':
        if (frame.error) {
          this.push({ kind: 'error', text: frame.error })
        } else {
          this.push({
            kind: 'reply',
            text: frame.text,
            modulesUsed: frame.modules_used,
            latencyS: frame.latency_s,
          })
        }
        break
      case 'notification':
        this.push({ kind: 'toast', ruleId: frame.rule_id, text: frame.text })
        break
      case 'gap':
        this.push({ kind: 'gap' })
        break
      case 'state_event':
        break
    }
  }

  private push(entry: TranscriptEntry): void {
    this.entries.push(entry)
    for (const listener of this.listeners) listener()
  }
}
