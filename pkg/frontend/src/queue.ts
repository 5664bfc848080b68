import { ApiClient, HttpError, newSubmissionId } from './api'
import type { CodeSubmission, NextPromptResponse } from './types'

export type QueueStatus = 'idle' | 'loading' | 'ready' | 'done' | 'offline' | 'conflict' | 'error'

export interface QueueState {
  status: QueueStatus
  current: NextPromptResponse | null
  outbox: CodeSubmission[]
  error: string | null
  /** prompt the server rejected with 409; resubmit with amend to overwrite */
  conflictPrompt: string | null
}

/**
 * Coding-queue state machine for one rater.
 *
 * Submissions that fail with a network error are kept in an outbox and
 * flushed before the next submit; each carries a client-generated
 * submission id, so flushing after an uncertain failure cannot double-code.
 */
export class CodingQueue {
  readonly state: QueueState = {
    status: 'idle',
    current: null,
    outbox: [],
    error: null,
    conflictPrompt: null,
  }

  constructor(
    private readonly api: ApiClient,
    readonly rater: string,
    private readonly onChange: (state: QueueState) => void = () => {},
  ) {}

  private emit(patch: Partial<QueueState>): void {
    Object.assign(this.state, patch)
    this.onChange(this.state)
  }

  async load(): Promise<void> {
    this.emit({ status: 'loading', error: null })
    try {
      await this.flush()
    } catch (error) {
      if (error instanceof HttpError) {
        this.fail(error)
      } else {
        // still offline; the outbox is preserved for the next attempt
        this.emit({ status: 'offline', error: String(error) })
      }
      return
    }
    try {
      const next = await this.api.nextPrompt(this.rater)
      this.emit({
        status: next.done ? 'done' : 'ready',
        current: next,
        conflictPrompt: null,
      })
    } catch (error) {
      this.fail(error)
    }
  }

  /** Retry everything queued while offline. Safe to call repeatedly. */
  async flush(): Promise<void> {
    while (this.state.outbox.length > 0) {
      const pending = this.state.outbox[0]!
      await this.api.submitCode(pending)
      this.emit({ outbox: this.state.outbox.slice(1) })
    }
  }

  async submit(motive: string, amend = false): Promise<void> {
    const current = this.state.current
    if (this.state.status !== 'ready' && this.state.status !== 'conflict') return
    if (!current || current.done || !current.prompt) return
    const body: CodeSubmission = {
      rater: this.rater,
      prompt: current.prompt,
      motive,
      submission_id: newSubmissionId(),
    }
    try {
      await this.flush()
      await this.api.submitCode(body, amend)
      await this.load()
    } catch (error) {
      if (error instanceof HttpError && error.status === 409) {
        this.emit({ status: 'conflict', conflictPrompt: current.prompt, error: error.detail })
        return
      }
      if (error instanceof HttpError) {
        this.fail(error)
        return
      }
      // network failure: keep the submission for a later flush
      this.emit({
        status: 'offline',
        outbox: [...this.state.outbox, body],
        error: String(error),
      })
    }
  }

  async amendCurrent(motive: string): Promise<void> {
    await this.submit(motive, true)
  }

  private fail(error: unknown): void {
    const message = error instanceof Error ? error.message : String(error)
    this.emit({ status: 'error', error: message })
  }
}
