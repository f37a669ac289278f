import { describe, expect, it } from 'vitest'

import { CardStore, coerceParams, fieldRows, validateParams } from '../src/cards.js'
import type { ModuleDescriptor, ModuleState } from '../src/types.js'

function descriptor(id: string): ModuleDescriptor {
  return {
    toolkit_id: id,
    display_name: id[0]!.toUpperCase() + id.slice(1),
    keywords: [id],
    summary_source: 'builtin',
    endpoints: [],
  }
}

function state(id: string, version: number, body: Record<string, unknown> = {}): ModuleState {
  return { toolkit_id: id, version, updated_at: null, body }
}

describe('CardStore', () => {
  it('renders one card per module descriptor', () => {
    const store = new CardStore()
    store.setModules([descriptor('health'), descriptor('parking')])
    expect(store.list().map((c) => c.descriptor.toolkit_id)).toEqual(['health', 'parking'])
    expect(store.version('health')).toBe(0)
  })

  it('keeps displayed versions non-decreasing', () => {
    const store = new CardStore()
    store.setModules([descriptor('health')])
    expect(store.applyState(state('health', 3, { total: 1 }))).toBe(true)
    // an out-of-order fetch result must not roll the card back
    expect(store.applyState(state('health', 2, { total: 0 }))).toBe(false)
    expect(store.get('health')!.state!.body).toEqual({ total: 1 })
    expect(store.applyState(state('health', 4))).toBe(true)
    expect(store.version('health')).toBe(4)
  })

  it('classifies state events against the displayed version', () => {
    const store = new CardStore()
    store.setModules([descriptor('health')])
    store.applyState(state('health', 2))
    expect(store.applyEvent({ type: 'state_event', toolkit_id: 'health', version: 3 })).toBe(
      'refetch',
    )
    expect(store.applyEvent({ type: 'state_event', toolkit_id: 'health', version: 2 })).toBe(
      'stale',
    )
    expect(store.applyEvent({ type: 'state_event', toolkit_id: 'sleep', version: 1 })).toBe(
      'unknown_module',
    )
  })

  it('clears the optimistic pending flag when fresh state arrives', () => {
    const store = new CardStore()
    store.setModules([descriptor('parking')])
    store.markPending('parking', 'skip_date')
    expect(store.get('parking')!.pendingEndpoint).toBe('skip_date')
    store.applyState(state('parking', 1))
    expect(store.get('parking')!.pendingEndpoint).toBeNull()
  })

  it('preserves state when the module list is refreshed', () => {
    const store = new CardStore()
    store.setModules([descriptor('health')])
    store.applyState(state('health', 5))
    store.setModules([descriptor('health'), descriptor('sleep')])
    expect(store.version('health')).toBe(5)
    expect(store.version('sleep')).toBe(0)
  })
})

describe('fieldRows', () => {
  it('flattens scalars, nested objects, and summarizes lists', () => {
    expect(
      fieldRows({
        weight_kg: 87.5,
        totals: { calories: 1030, protein_g: 62 },
        entries: [{ a: 1 }, { a: 2 }],
      }),
    ).toEqual([
      ['weight_kg', '87.5'],
      ['totals.calories', '1030'],
      ['totals.protein_g', '62'],
      ['entries', '2 entries'],
    ])
  })

  it('pluralizes entry counts correctly', () => {
    expect(fieldRows({ entries: [1] })).toEqual([['entries', '1 entry']])
  })
})

describe('form validation', () => {
  const params = [
    { name: 'calories', type: 'number', required: true },
    { name: 'protein_g', type: 'number', required: false },
    { name: 'note', type: 'string', required: false },
  ]

  it('blocks a food form with no calories', () => {
    expect(validateParams(params, { note: 'lunch' })).toEqual({ calories: 'required' })
  })

  it('rejects non-numeric input for numeric fields', () => {
    expect(validateParams(params, { calories: 'lots' })).toEqual({
      calories: 'must be a number',
    })
  })

  it('passes and coerces a complete form', () => {
    const values = { calories: '650', protein_g: '35', note: 'egg curry with rice' }
    expect(validateParams(params, values)).toEqual({})
    expect(coerceParams(params, values)).toEqual({
      calories: 650,
      protein_g: 35,
      note: 'egg curry with rice',
    })
  })

  it('omits blank optional fields from the payload', () => {
    expect(coerceParams(params, { calories: '500', protein_g: '', note: ' ' })).toEqual({
      calories: 500,
    })
  })
})
