import type {
  ActionResult,
  ApiErrorBody,
  ModuleDescriptor,
  ModuleState,
} from './types.js'

/** Minimal fetch surface so tests can inject a fake transport. */
export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>

export class GatewayError extends Error {
  constructor(
    public readonly status: number,
    public readonly error: string,
    public readonly detail: unknown,
  ) {
    super(`${status}: ${error}`)
    this.name = 'GatewayError'
  }
}

/** Thin client over the gateway's REST routes; all mutations go through POST /actions. */
export class GatewayClient {
  private readonly base: string
  private readonly fetchFn: FetchLike

  constructor(baseUrl: string, fetchFn?: FetchLike) {
    this.base = baseUrl.replace(/\/+$/, '')
    this.fetchFn = fetchFn ?? ((url, init) => fetch(url, init))
  }

  async health(): Promise<{ status: string; modules: number }> {
    return this.json('GET', '/health')
  }

  async context(asOf?: string): Promise<string> {
    const query = asOf ? `?as_of=${encodeURIComponent(asOf)}` : ''
    const res = await this.fetchFn(`${this.base}/context${query}`)
    if (!res.ok) throw await this.toError(res)
    return res.text()
  }

  async modules(): Promise<ModuleDescriptor[]> {
    return this.json('GET', '/modules')
  }

  async addModule(manifest: Record<string, unknown>): Promise<ModuleDescriptor> {
    return this.json('POST', '/modules', manifest)
  }

  async state(toolkitId: string): Promise<ModuleState> {
    return this.json('GET', `/state/${encodeURIComponent(toolkitId)}`)
  }

  async action(
    toolkitId: string,
    endpoint: string,
    params: Record<string, unknown>,
  ): Promise<ActionResult> {
    const path = `/actions/${encodeURIComponent(toolkitId)}/${encodeURIComponent(endpoint)}`
    return this.json('POST', path, params)
  }

  private async json<T>(method: string, path: string, body?: unknown): Promise<T> {
    const init: RequestInit = { method }
    if (body !== undefined) {
      init.headers = { 'content-type': 'application/json' }
      init.body = JSON.stringify(body)
    }
    const res = await this.fetchFn(`${this.base}${path}`, init)
    if (!res.ok) throw await this.toError(res)
    return (await res.json()) as T
  }

  private async toError(res: Response): Promise<GatewayError> {
    let body: ApiErrorBody = { error: res.statusText || 'request failed', detail: null }
    try {
      body = (await res.json()) as ApiErrorBody
    } catch {
      // non-JSON error body; keep the status-text fallback
    }
    return new GatewayError(res.status, body.error, body.detail)
  }
}
