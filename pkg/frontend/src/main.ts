import { ApiClient } from './api'
import { CodingController } from './coding'
import { DashboardController } from './dashboard'
import { escapeHtml } from './render'

const api = new ApiClient('')

let active: { stop(): void } | null = null

function landing(root: HTMLElement): void {
  root.innerHTML = `
    <section class="landing">
      <h2>Annotation console</h2>
      <form id="code-form">
        <label>Code prompts as rater
          <input name="rater" placeholder="R2" required pattern="[A-Za-z0-9._-]{1,64}" />
        </label>
        <button type="submit">Start coding</button>
      </form>
      <form id="dash-form">
        <label>Agreement dashboard for
          <input name="a" placeholder="R2" required pattern="[A-Za-z0-9._-]{1,64}" />
          <input name="b" placeholder="R3" required pattern="[A-Za-z0-9._-]{1,64}" />
        </label>
        <button type="submit">Open dashboard</button>
      </form>
    </section>`
  root.querySelector<HTMLFormElement>('#code-form')!.addEventListener('submit', (event) => {
    event.preventDefault()
    const rater = new FormData(event.target as HTMLFormElement).get('rater') as string
    location.hash = `#/code/${encodeURIComponent(rater)}`
  })
  root.querySelector<HTMLFormElement>('#dash-form')!.addEventListener('submit', (event) => {
    event.preventDefault()
    const data = new FormData(event.target as HTMLFormElement)
    location.hash = `#/dashboard/${encodeURIComponent(data.get('a') as string)}/${encodeURIComponent(
      data.get('b') as string,
    )}`
  })
}

async function route(): Promise<void> {
  const root = document.getElementById('app')
  if (!root) return
  active?.stop()
  active = null
  const parts = location.hash.replace(/^#\/?/, '').split('/')
  if (parts[0] === 'code' && parts[1]) {
    const controller = new CodingController(root, api, decodeURIComponent(parts[1]))
    active = controller
    await controller.start()
    return
  }
  if (parts[0] === 'dashboard' && parts[1] && parts[2]) {
    const controller = new DashboardController(
      root,
      api,
      decodeURIComponent(parts[1]),
      decodeURIComponent(parts[2]),
    )
    active = controller
    try {
      await controller.start()
    } catch (error) {
      root.innerHTML = `<p class="error">Failed to load dashboard: ${escapeHtml(String(error))}</p>`
    }
    return
  }
  landing(root)
}

window.addEventListener('hashchange', () => void route())
window.addEventListener('DOMContentLoaded', () => void route())
