import { ApiClient, newSubmissionId } from './api'
import { renderDashboard, renderResolveDialog } from './render'
import type { AgreementResponse, DisagreementsResponse } from './types'

const POLL_INTERVAL_MS = 3000

export class DashboardController {
  private agreement: AgreementResponse | null = null
  private disagreements: DisagreementsResponse | null = null
  private timer: ReturnType<typeof setInterval> | null = null
  private resolvingPrompt: string | null = null

  constructor(
    private readonly root: HTMLElement,
    private readonly api: ApiClient,
    readonly raterA: string,
    readonly raterB: string,
    readonly resolver = 'R1',
  ) {}

  async start(poll = true): Promise<void> {
    await this.refresh()
    if (poll) {
      this.timer = setInterval(() => void this.refresh(), POLL_INTERVAL_MS)
    }
  }

  stop(): void {
    if (this.timer !== null) clearInterval(this.timer)
    this.timer = null
  }

  async refresh(): Promise<void> {
    this.agreement = await this.api.agreement(this.raterA, this.raterB)
    this.disagreements = this.agreement.overlap
      ? await this.api.disagreements(this.raterA, this.raterB)
      : { overlap: false, items: [] }
    this.render()
  }

  async resolve(prompt: string, motive: string): Promise<void> {
    await this.api.resolve({
      prompt,
      motive,
      resolver: this.resolver,
      submission_id: newSubmissionId(),
    })
    this.resolvingPrompt = null
    await this.refresh()
  }

  private render(): void {
    let html = renderDashboard(this.raterA, this.raterB, this.agreement, this.disagreements)
    if (this.resolvingPrompt !== null) {
      html += renderResolveDialog(this.resolvingPrompt)
    }
    this.root.innerHTML = html
    for (const button of this.root.querySelectorAll<HTMLButtonElement>('button.resolve')) {
      button.addEventListener('click', () => {
        this.resolvingPrompt = button.dataset.prompt!
        this.render()
      })
    }
    const dialog = this.root.querySelector('.resolve-dialog')
    if (dialog && this.resolvingPrompt !== null) {
      const prompt = this.resolvingPrompt
      for (const button of dialog.querySelectorAll<HTMLButtonElement>('button.motive')) {
        button.addEventListener('click', () => void this.resolve(prompt, button.dataset.motive!))
      }
      dialog.querySelector('#cancel-resolve')?.addEventListener('click', () => {
        this.resolvingPrompt = null
        this.render()
      })
    }
  }
}
