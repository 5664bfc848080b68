// HTML builders for both views. Pure string functions: every number shown
// comes verbatim from a service response, formatted here and nowhere else.

import { MOTIVES } from './motives'
import type { QueueState } from './queue'
import type { AgreementResponse, DisagreementsResponse, KappaStats } from './types'

export function escapeHtml(text: string): string {
  return text
    .replaceAll('&', '&amp;')
    .replaceAll('<', '&lt;')
    .replaceAll('>', '&gt;')
    .replaceAll('"', '&quot;')
}

export function formatKappa(value: number): string {
  return value.toFixed(2)
}

export function formatCi(ci: [number, number]): string {
  return `[${ci[0].toFixed(2)}; ${ci[1].toFixed(2)}]`
}

function motiveButtons(): string {
  return MOTIVES.map(
    (motive, index) => `
      <button class="motive" data-motive="${motive.name}" title="${escapeHtml(motive.definition)}">
        <span class="key">${index + 1}</span>
        <span class="name">${motive.name}</span>
        <span class="definition">${escapeHtml(motive.definition)}</span>
        <span class="example">${escapeHtml(motive.example)}</span>
      </button>`,
  ).join('')
}

export function renderCodingView(rater: string, state: QueueState): string {
  const { status, current } = state
  if (status === 'loading' || status === 'idle') {
    return `<section class="coding"><p class="muted">Loading queue for ${escapeHtml(rater)}…</p></section>`
  }
  if (status === 'error') {
    return `
      <section class="coding">
        <p class="error">Service error: ${escapeHtml(state.error ?? 'unknown')}</p>
        <button id="retry">Retry</button>
      </section>`
  }
  if (status === 'done' || (current && current.done)) {
    const coded = current?.coded ?? 0
    const total = current?.total ?? 0
    return `
      <section class="coding complete">
        <h2>Queue complete</h2>
        <p>${escapeHtml(rater)} coded ${coded} of ${total} prompts in this round set.</p>
      </section>`
  }
  if (!current || !current.prompt) {
    return `<section class="coding"><p class="error">No prompt loaded.</p></section>`
  }
  const banners: string[] = []
  if (status === 'offline') {
    banners.push(
      `<p class="banner offline">Offline: ${state.outbox.length} submission(s) queued.
       <button id="flush">Retry now</button></p>`,
    )
  }
  if (status === 'conflict') {
    banners.push(
      `<p class="banner conflict">Already coded by you (${escapeHtml(state.error ?? '')}).
       Pick a motive again to amend, or skip.
       <button id="skip-conflict">Skip</button></p>`,
    )
  }
  return `
    <section class="coding">
      ${banners.join('')}
      <div class="progress">round ${current.round} · ${current.coded} / ${current.total} coded</div>
      <div class="prompt-card">
        <div class="prompt-text">“${escapeHtml(current.prompt)}”</div>
        <div class="prompt-freq">seen in ${current.count} text inputs</div>
      </div>
      <div class="motives">${motiveButtons()}</div>
      <p class="hint">Keys 1–7 submit directly.</p>
    </section>`
}

function kappaCell(stats: KappaStats | null): string {
  if (stats === null) return '<td class="muted" colspan="2">not used</td>'
  return `<td>${formatKappa(stats.kappa)}</td><td>${formatCi(stats.ci95)}</td>`
}

export function renderDashboard(
  a: string,
  b: string,
  agreement: AgreementResponse | null,
  disagreements: DisagreementsResponse | null,
): string {
  if (agreement === null) {
    return `<section class="dashboard"><p class="muted">Loading agreement…</p></section>`
  }
  if (!agreement.overlap) {
    return `
      <section class="dashboard">
        <p class="banner">No overlapping codes between ${escapeHtml(a)} and ${escapeHtml(b)} yet.</p>
      </section>`
  }
  if (agreement.degenerate || !agreement.overall) {
    return `
      <section class="dashboard">
        <p class="banner">Agreement is degenerate (a single identical category); kappa undefined.
        n = ${agreement.n}</p>
      </section>`
  }
  const overall = agreement.overall
  const rows = (agreement.per_category ?? [])
    .map(
      (entry) => `
        <tr>
          <td>${escapeHtml(entry.motive)}</td>
          ${kappaCell(entry.kappa)}
        </tr>`,
    )
    .join('')
  const items = disagreements?.items ?? []
  const disagreementRows = items
    .map((item, index) =>
      item.resolved
        ? `<li class="resolved">“${escapeHtml(item.prompt)}” — resolved</li>`
        : `
          <li>
            <span class="prompt">“${escapeHtml(item.prompt)}”</span>
            <span class="codes">${escapeHtml(a)}: ${escapeHtml(item.a)} · ${escapeHtml(b)}: ${escapeHtml(item.b)}</span>
            <span class="freq">${item.count}×</span>
            <button class="resolve" data-index="${index}" data-prompt="${escapeHtml(item.prompt)}">resolve…</button>
          </li>`,
    )
    .join('')
  return `
    <section class="dashboard">
      <div class="kappa-badge">
        <div class="value">κ ${formatKappa(overall.kappa)}</div>
        <div class="ci">95% CI ${formatCi(overall.ci95)}</div>
        <div class="meta">po ${overall.po.toFixed(4)} · pe ${overall.pe.toFixed(4)} · n ${overall.n}</div>
      </div>
      <h3>Per-category agreement</h3>
      <table class="per-category">
        <thead><tr><th>Motive</th><th>κ</th><th>95% CI</th></tr></thead>
        <tbody>${rows}</tbody>
      </table>
      <h3>Disagreements (${items.filter((item) => !item.resolved).length} open)</h3>
      <ul class="disagreements">${disagreementRows || '<li class="muted">none</li>'}</ul>
    </section>`
}

export function renderResolveDialog(prompt: string): string {
  const options = MOTIVES.map(
    (motive) => `<button class="motive" data-motive="${motive.name}">${motive.name}</button>`,
  ).join('')
  return `
    <div class="resolve-dialog">
      <p>Final decision for “${escapeHtml(prompt)}”:</p>
      <div class="motives">${options}</div>
      <button id="cancel-resolve">cancel</button>
    </div>`
}
