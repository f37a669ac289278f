/** Browser entry point: wires the card grid and chat panel to the gateway. */
import { GatewayClient, GatewayError } from './api.js'
import { CardStore, coerceParams, fieldRows, validateParams } from './cards.js'
import { ChatTranscript, canSend } from './chat.js'
import { ChatSocket } from './ws.js'
import type { Card } from './cards.js'
import type { EndpointDescriptor, ServerFrame } from './types.js'

const httpBase = location.origin
const wsBase = (location.protocol === 'https:' ? 'wss' : 'ws') + `://${location.host}`

const client = new GatewayClient(httpBase)
const cards = new CardStore()
const transcript = new ChatTranscript()

const root = document.getElementById('app')!
root.innerHTML = `
  <div id="banner" class="banner hidden">Runtime unreachable — retrying…</div>
  <main>
    <section id="grid" class="grid"></section>
    <aside class="chat">
      <div id="transcript" class="transcript"></div>
      <form id="chat-form">
        <input id="chat-input" autocomplete="off" placeholder="Message the agent…" />
        <button id="chat-send" type="submit" disabled>Send</button>
      </form>
    </aside>
  </main>
  <div id="toasts" class="toasts"></div>
`

const banner = document.getElementById('banner')!
const grid = document.getElementById('grid')!
const transcriptEl = document.getElementById('transcript')!
const chatForm = document.getElementById('chat-form') as HTMLFormElement
const chatInput = document.getElementById('chat-input') as HTMLInputElement
const chatSend = document.getElementById('chat-send') as HTMLButtonElement

// -- card grid ---------------------------------------------------------------

async function syncAll(): Promise<void> {
  const descriptors = await client.modules()
  cards.setModules(descriptors)
  await Promise.all(
    descriptors.map(async (d) => {
      cards.applyState(await client.state(d.toolkit_id))
    }),
  )
  renderGrid()
}

async function refetchModule(toolkitId: string): Promise<void> {
  try {
    cards.applyState(await client.state(toolkitId))
  } catch (err) {
    if (err instanceof GatewayError && err.status === 404) {
      await syncAll()
      return
    }
    throw err
  }
  renderGrid()
}

function renderGrid(): void {
  grid.replaceChildren(...cards.list().map(renderCard))
}

function renderCard(card: Card): HTMLElement {
  const el = document.createElement('article')
  el.className = 'card'
  const version = card.state?.version ?? 0
  el.innerHTML = `<header><h2>${card.descriptor.display_name}</h2><span class="version">v${version}</span></header>`

  const body = document.createElement('dl')
  for (const [label, value] of fieldRows(card.state?.body ?? {})) {
    const dt = document.createElement('dt')
    dt.textContent = label
    const dd = document.createElement('dd')
    dd.textContent = value
    body.append(dt, dd)
  }
  el.append(body)

  for (const endpoint of card.descriptor.endpoints) {
    el.append(renderEndpointForm(card, endpoint))
  }
  return el
}

function renderEndpointForm(card: Card, endpoint: EndpointDescriptor): HTMLElement {
  const form = document.createElement('form')
  form.className = 'endpoint'
  const disabled = card.pendingEndpoint === endpoint.name
  const inputs: Record<string, HTMLInputElement> = {}
  for (const param of endpoint.params) {
    const input = document.createElement('input')
    input.name = param.name
    input.placeholder = param.unit ? `${param.name} (${param.unit})` : param.name
    input.disabled = disabled
    inputs[param.name] = input
    form.append(input)
  }
  const submit = document.createElement('button')
  submit.type = 'submit'
  submit.textContent = endpoint.name.replace(/_/g, ' ')
  submit.disabled = disabled
  form.append(submit)
  const note = document.createElement('p')
  note.className = 'note'
  form.append(note)

  form.addEventListener('submit', async (ev) => {
    ev.preventDefault()
    const values = Object.fromEntries(
      Object.entries(inputs).map(([name, input]) => [name, input.value]),
    )
    const errors = validateParams(endpoint.params, values)
    if (Object.keys(errors).length > 0) {
      note.textContent = Object.entries(errors)
        .map(([field, msg]) => `${field}: ${msg}`)
        .join('; ')
      return
    }
    cards.markPending(card.descriptor.toolkit_id, endpoint.name)
    renderGrid()
    try {
      await client.action(
        card.descriptor.toolkit_id,
        endpoint.name,
        coerceParams(endpoint.params, values),
      )
    } catch (err) {
      cards.clearPending(card.descriptor.toolkit_id)
      note.textContent =
        err instanceof GatewayError ? `${err.error}: ${JSON.stringify(err.detail)}` : String(err)
      renderGrid()
    }
  })
  return form
}

// -- chat panel ----------------------------------------------------------------

function renderTranscript(): void {
  transcriptEl.replaceChildren(
    ...transcript.entries.map((entry) => {
      const el = document.createElement('div')
      el.className = `entry ${entry.kind}`
      switch (entry.kind) {
        case 'user':
          el.textContent = entry.text
          break
        case 'reply':
          el.textContent = entry.text
          if (entry.modulesUsed.length > 0) {
            const chips = document.createElement('div')
            chips.className = 'chips'
            for (const mod of entry.modulesUsed) {
              const chip = document.createElement('span')
              chip.className = 'chip'
              chip.textContent = mod
              chips.append(chip)
            }
            el.append(chips)
          }
          break
        case 'tool_call':
          el.textContent = `${entry.toolkitId}.${entry.endpoint}(${JSON.stringify(entry.params)})`
          break
        case 'error':
          el.textContent = entry.text
          break
        case 'context':
          el.textContent = `context injected (${entry.bytes} bytes)`
          break
        case 'toast':
          el.textContent = entry.text
          break
        case 'gap':
          el.textContent = 'some events were missed'
          break
      }
      return el
    }),
  )
  transcriptEl.scrollTop = transcriptEl.scrollHeight
}

function showToast(text: string): void {
  const toasts = document.getElementById('toasts')!
  const toast = document.createElement('div')
  toast.className = 'toast'
  toast.textContent = text
  toasts.append(toast)
  setTimeout(() => toast.remove(), 6000)
}

function onFrame(frame: ServerFrame): void {
  if (frame.type === 'state_event') {
    const outcome = cards.applyEvent(frame)
    if (outcome === 'refetch') void refetchModule(frame.toolkit_id)
    else if (outcome === 'unknown_module') void syncAll()
    return
  }
  if (frame.type === 'notification') showToast(frame.text)
  transcript.applyFrame(frame)
}

const socket = new ChatSocket({
  url: `${wsBase}/chat`,
  onFrame,
  onStatus: (status) => {
    banner.classList.toggle('hidden', status === 'open')
    if (status === 'open') void syncAll()
  },
})

transcript.onChange(renderTranscript)
chatInput.addEventListener('input', () => {
  chatSend.disabled = !canSend(chatInput.value) || socket.status !== 'open'
})
chatForm.addEventListener('submit', (ev) => {
  ev.preventDefault()
  const text = chatInput.value
  if (!canSend(text)) return
  if (socket.send({ text })) {
    transcript.addUserMessage(text)
    chatInput.value = ''
    chatSend.disabled = true
  }
})

socket.connect()
void syncAll().catch(() => banner.classList.remove('hidden'))
