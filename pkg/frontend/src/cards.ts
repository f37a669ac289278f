import type { ModuleDescriptor, ModuleState, StateEventFrame } from './types.js'

export interface Card {
  descriptor: ModuleDescriptor
  state: ModuleState | null
  /** Endpoint whose control is optimistically disabled until the next state lands. */
  pendingEndpoint: string | null
}

export type EventOutcome = 'refetch' | 'unknown_module' | 'stale'

/**
 * View model for the instrument grid. Holds no authoritative data: every
 * value comes from GET /state, and every state_event triggers a re-fetch.
 * Displayed versions are monotonic — a fetch that raced an older version
 * is dropped rather than shown.
 */
export class CardStore {
  private cards = new Map<string, Card>()

  setModules(descriptors: ModuleDescriptor[]): void {
    const next = new Map<string, Card>()
    for (const descriptor of descriptors) {
      const existing = this.cards.get(descriptor.toolkit_id)
      next.set(descriptor.toolkit_id, {
        descriptor,
        state: existing?.state ?? null,
        pendingEndpoint: existing?.pendingEndpoint ?? null,
      })
    }
    this.cards = next
  }

  list(): Card[] {
    return [...this.cards.values()]
  }

  get(toolkitId: string): Card | undefined {
    return this.cards.get(toolkitId)
  }

  version(toolkitId: string): number {
    return this.cards.get(toolkitId)?.state?.version ?? 0
  }

  /** Returns true when the state was newer and the card was updated. */
  applyState(state: ModuleState): boolean {
    const card = this.cards.get(state.toolkit_id)
    if (!card) return false
    if (card.state && state.version < card.state.version) return false
    card.state = state
    card.pendingEndpoint = null
    return true
  }

  /**
   * Classify an incoming state_event: 'refetch' when the event is ahead of
   * the displayed version, 'stale' when we already show it, and
   * 'unknown_module' when the module list itself needs refreshing.
   */
  applyEvent(frame: StateEventFrame): EventOutcome {
    const card = this.cards.get(frame.toolkit_id)
    if (!card) return 'unknown_module'
    if (frame.version <= this.version(frame.toolkit_id)) return 'stale'
    return 'refetch'
  }

  markPending(toolkitId: string, endpoint: string): void {
    const card = this.cards.get(toolkitId)
    if (card) card.pendingEndpoint = endpoint
  }

  clearPending(toolkitId: string): void {
    const card = this.cards.get(toolkitId)
    if (card) card.pendingEndpoint = null
  }
}

/** Flatten a state body into display rows for the generic field-list card. */
export function fieldRows(body: Record<string, unknown>): Array<[string, string]> {
  const rows: Array<[string, string]> = []
  for (const [key, value] of Object.entries(body)) {
    if (Array.isArray(value)) {
      rows.push([key, `${value.length} entr${value.length === 1 ? 'y' : 'ies'}`])
    } else if (typeof value === 'object' && value !== null) {
      for (const [inner, innerValue] of Object.entries(value)) {
        rows.push([`${key}.${inner}`, String(innerValue)])
      }
    } else {
      rows.push([key, String(value)])
    }
  }
  return rows
}

/**
 * Validate a log form against an endpoint's parameter descriptors before
 * any POST is issued. Returns field-name → message for missing/bad values.
 */
export function validateParams(
  params: Array<{ name: string; type: string; required: boolean }>,
  values: Record<string, string>,
): Record<string, string> {
  const errors: Record<string, string> = {}
  for (const param of params) {
    const raw = (values[param.name] ?? '').trim()
    if (!raw) {
      if (param.required) errors[param.name] = 'required'
      continue
    }
    if ((param.type === 'number' || param.type === 'integer') && Number.isNaN(Number(raw))) {
      errors[param.name] = 'must be a number'
    }
  }
  return errors
}

/** Convert validated form strings into typed action parameters. */
export function coerceParams(
  params: Array<{ name: string; type: string; required: boolean }>,
  values: Record<string, string>,
): Record<string, unknown> {
  const out: Record<string, unknown> = {}
  for (const param of params) {
    const raw = (values[param.name] ?? '').trim()
    if (!raw) continue
    if (param.type === 'number') out[param.name] = Number(raw)
    else if (param.type === 'integer') out[param.name] = Math.trunc(Number(raw))
    else if (param.type === 'boolean') out[param.name] = raw === 'true' || raw === 'yes'
    else out[param.name] = raw
  }
  return out
}
