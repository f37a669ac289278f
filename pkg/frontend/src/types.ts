/** Wire types shared by the REST client, the chat socket, and the view models. */

export interface ParamDescriptor {
  name: string
  type: string
  required: boolean
  unit: string | null
}

export interface EndpointDescriptor {
  name: string
  description: string
  params: ParamDescriptor[]
}

export interface ModuleDescriptor {
  toolkit_id: string
  display_name: string
  keywords: string[]
  summary_source: string
  endpoints: EndpointDescriptor[]
}

export interface ModuleState {
  toolkit_id: string
  version: number
  updated_at: string | null
  body: Record<string, unknown>
}

export interface ActionResult {
  version: number | null
  result: Record<string, unknown>
}

/** Error envelope returned by the gateway on every non-2xx response. */
export interface ApiErrorBody {
  error: string
  detail: unknown
}

// -- /chat frames -------------------------------------------------------------

export interface UserMsgFrame {
  type: 'user_msg'
  text: string
  condition?: string
  frozen_clock?: string
  debug_context?: boolean
}

export interface ContextInjectedFrame {
  type: 'context_injected'
  bytes: number
  text: string
}

export interface ToolCallFrame {
  type: 'tool_call'
  toolkit_id: string
  endpoint: string
  params: Record<string, unknown>
  result: Record<string, unknown>
}

export interface ReplyFrame {
  type: 'reply'
  text: string
  modules_used: string[]
  latency_s: number
  error: string | null
}

export interface StateEventFrame {
  type: 'state_event'
  toolkit_id: string
  version: number
}

export interface NotificationFrame {
  type: 'notification'
  rule_id: string
  text: string
}

/** Emitted by the server when a slow subscriber's event buffer overflowed. */
export interface GapFrame {
  type: 'gap'
}

export type ServerFrame =
  | ContextInjectedFrame
  | ToolCallFrame
  | ReplyFrame
  | StateEventFrame
  | NotificationFrame
  | GapFrame

export function isServerFrame(value: unknown): value is ServerFrame {
  if (typeof value !== 'object' || value === null) return false
  const type = (value as { type?: unknown }).type
  return (
    type === 'context_injected' ||
    type === 'tool_call' ||
    type === 'reply' ||
    type === 'state_event' ||
    type === 'notification' ||
    type === 'gap'
  )
}
