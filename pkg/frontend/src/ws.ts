import { isServerFrame } from './types.js'
import type { ServerFrame, UserMsgFrame } from './types.js'

/** Minimal WebSocket surface so tests can inject a fake socket. */
export interface SocketLike {
  send(data: string): void
  close(): void
  onopen: (() => void) | null
  onmessage: ((ev: { data: string }) => void) | null
  onclose: (() => void) | null
}

export type SocketStatus = 'connecting' | 'open' | 'closed'

export interface ChatSocketOptions {
  url: string
  onFrame: (frame: ServerFrame) => void
  onStatus?: (status: SocketStatus) => void
  createSocket?: (url: string) => SocketLike
  baseDelayMs?: number
  maxDelayMs?: number
}

/** Exponential backoff: base * 2^attempt, capped. */
export function backoffDelay(attempt: number, baseMs = 500, maxMs = 15000): number {
  return Math.min(baseMs * 2 ** attempt, maxMs)
}

/**
 * Persistent /chat connection. Parses incoming frames, reconnects with
 * backoff after a drop, and refuses sends while disconnected so callers
 * can surface an offline state instead of losing messages silently.
 */
export class ChatSocket {
  private socket: SocketLike | null = null
  private attempts = 0
  private timer: ReturnType<typeof setTimeout> | null = null
  private stopped = false
  status: SocketStatus = 'closed'

  constructor(private readonly opts: ChatSocketOptions) {}

  connect(): void {
    if (this.stopped) return
    this.setStatus('connecting')
    const create =
      this.opts.createSocket ??
      ((url: string) => new WebSocket(url) as unknown as SocketLike)
    const socket = create(this.opts.url)
    this.socket = socket
    socket.onopen = () => {
      this.attempts = 0
      this.setStatus('open')
    }
    socket.onmessage = (ev) => {
      let parsed: unknown
      try {
        parsed = JSON.parse(ev.data)
      } catch {
        return
      }
      if (isServerFrame(parsed)) this.opts.onFrame(parsed)
    }
    socket.onclose = () => {
      this.socket = null
      this.setStatus('closed')
      this.scheduleReconnect()
    }
  }

  send(msg: Omit<UserMsgFrame, 'type'>): boolean {
    if (this.status !== 'open' || !this.socket) return false
    this.socket.send(JSON.stringify({ type: 'user_msg', ...msg }))
    return true
  }

  close(): void {
    this.stopped = true
    if (this.timer !== null) clearTimeout(this.timer)
    this.socket?.close()
    this.socket = null
    this.setStatus('closed')
  }

  private scheduleReconnect(): void {
    if (this.stopped) return
    const delay = backoffDelay(
      this.attempts,
      this.opts.baseDelayMs ?? 500,
      this.opts.maxDelayMs ?? 15000,
    )
    this.attempts += 1
    this.timer = setTimeout(() => this.connect(), delay)
  }

  private setStatus(status: SocketStatus): void {
    this.status = status
    this.opts.onStatus?.(status)
  }
}
