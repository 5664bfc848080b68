import type {
  AgreementResponse,
  CodeResult,
  CodeSubmission,
  DisagreementsResponse,
  NextPromptResponse,
  ResolveSubmission,
} from './types'

export class HttpError extends Error {
  constructor(
    public readonly status: number,
    public readonly detail: string,
  ) {
    super(`HTTP ${status}: ${detail}`)
  }
}

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>

let submissionCounter = 0

/** Client-generated id so a retried mutation is idempotent on the server. */
export function newSubmissionId(): string {
  const g = globalThis as { crypto?: { randomUUID?: () => string } }
  if (g.crypto?.randomUUID) return g.crypto.randomUUID()
  submissionCounter += 1
  return `sub-${Date.now()}-${submissionCounter}`
}

export class ApiClient {
  constructor(
    private readonly baseUrl = '',
    private readonly fetchFn: FetchLike = (url, init) => fetch(url, init),
  ) {}

  private async request<T>(url: string, init?: RequestInit): Promise<T> {
    const response = await this.fetchFn(this.baseUrl + url, init)
    if (!response.ok) {
      let detail = response.statusText
      try {
        const body = (await response.json()) as { detail?: string }
        if (body.detail) detail = body.detail
      } catch {
        /* non-JSON error body */
      }
      throw new HttpError(response.status, detail)
    }
    return (await response.json()) as T
  }

  nextPrompt(rater: string): Promise<NextPromptResponse> {
    return this.request(`/api/prompts/next?rater=${encodeURIComponent(rater)}`)
  }

  submitCode(body: CodeSubmission, amend = false): Promise<CodeResult> {
    const qs = amend ? '?amend=true' : ''
    return this.request(`/api/codes${qs}`, {
      method: 'POST',
      headers: { 'content-type': 'application/json' },
      body: JSON.stringify(body),
    })
  }

  agreement(a: string, b: string): Promise<AgreementResponse> {
    return this.request(
      `/api/agreement?a=${encodeURIComponent(a)}&b=${encodeURIComponent(b)}`,
    )
  }

  disagreements(a: string, b: string): Promise<DisagreementsResponse> {
    return this.request(
      `/api/disagreements?a=${encodeURIComponent(a)}&b=${encodeURIComponent(b)}`,
    )
  }

  resolve(body: ResolveSubmission): Promise<CodeResult> {
    return this.request('/api/resolve', {
      method: 'POST',
      headers: { 'content-type': 'application/json' },
      body: JSON.stringify(body),
    })
  }

  async exportMapping(): Promise<string> {
    const response = await this.fetchFn(`${this.baseUrl}/api/mapping/export`)
    if (!response.ok) throw new HttpError(response.status, response.statusText)
    return response.text()
  }
}
