import { describe, expect, it } from 'vitest'

import { ApiClient, HttpError, newSubmissionId } from '../src/api'
import type { AgreementResponse } from '../src/types'
import agreementFixture from './fixtures/agreement.json'
import { jsonResponse, routedFetch } from './helpers'

describe('ApiClient', () => {
  it('returns the recorded agreement payload verbatim', async () => {
    const api = new ApiClient(
      '',
      routedFetch({ 'GET /api/agreement?a=R2&b=R3': agreementFixture }),
    )
    const agreement = await api.agreement('R2', 'R3')
    expect(agreement).toEqual(agreementFixture as AgreementResponse)
    expect(agreement.overall!.kappa).toBe((agreementFixture as AgreementResponse).overall!.kappa)
  })

  it('url-encodes rater ids', async () => {
    const api = new ApiClient(
      '',
      routedFetch({ 'GET /api/prompts/next?rater=R%202': { done: true, coded: 0, total: 0 } }),
    )
    await expect(api.nextPrompt('R 2')).resolves.toMatchObject({ done: true })
  })

  it('raises HttpError with the service detail', async () => {
    const api = new ApiClient(
      '',
      routedFetch({
        'POST /api/codes': jsonResponse({ detail: 'unknown prompt' }, 404),
      }),
    )
    await expect(
      api.submitCode({ rater: 'R2', prompt: 'x', motive: 'Search', submission_id: 's1' }),
    ).rejects.toMatchObject({ status: 404, detail: 'unknown prompt' })
  })

  it('passes amend as a query parameter', async () => {
    const api = new ApiClient(
      '',
      routedFetch({ 'POST /api/codes?amend=true': { status: 'amended', version: 2 } }),
    )
    const result = await api.submitCode(
      { rater: 'R2', prompt: 'x', motive: 'Search', submission_id: 's1' },
      true,
    )
    expect(result.version).toBe(2)
  })

  it('exports mapping as text', async () => {
    const api = new ApiClient('', async () => new Response('a\tMessaging\n', { status: 200 }))
    expect(await api.exportMapping()).toContain('Messaging')
  })

  it('HttpError is an Error', () => {
    expect(new HttpError(409, 'dup')).toBeInstanceOf(Error)
  })

  it('submission ids are unique', () => {
    const ids = new Set(Array.from({ length: 200 }, () => newSubmissionId()))
    expect(ids.size).toBe(200)
  })
})
