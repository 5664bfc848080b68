import { describe, expect, it } from 'vitest'

import { ApiClient } from '../src/api'
import { CodingQueue } from '../src/queue'
import codingSession from './fixtures/coding_session.json'
import { RecordedStep, jsonResponse, replayFetch, routedFetch } from './helpers'

const STEPS = codingSession as RecordedStep[]

function raterSteps(rater: string): RecordedStep[] {
  return STEPS.filter((step) =>
    step.request.method === 'GET'
      ? step.request.url.includes(`rater=${rater}`)
      : step.request.body?.rater === rater,
  )
}

async function replayCodingRun(rater: string) {
  const steps = raterSteps(rater)
  const { fetch, served } = replayFetch(steps, () =>
    jsonResponse({ done: true, coded: 50, total: 60 }),
  )
  const queue = new CodingQueue(new ApiClient('', fetch), rater)
  await queue.load()
  let submissions = 0
  while (queue.state.status === 'ready' && submissions < 100) {
    // re-submit exactly the motive the recorded session chose for this prompt
    const prompt = queue.state.current!.prompt!
    const recorded = steps.find(
      (step) => step.request.method === 'POST' && step.request.body?.prompt === prompt,
    )
    expect(recorded, `no recorded code for ${prompt}`).toBeDefined()
    await queue.submit(recorded!.request.body!.motive as string)
    submissions += 1
  }
  return { queue, submissions, served: served(), total: steps.length }
}

describe('CodingQueue against the recorded session', () => {
  // S1, console side: both raters coding 50 prompts through the UI state
  // machine reproduces the recorded service conversation request for request.
  it.each(['R2', 'R3'])('replays the full %s coding run', async (rater) => {
    const { queue, submissions, served, total } = await replayCodingRun(rater)
    expect(submissions).toBe(50)
    expect(served).toBe(total) // every recorded request was reproduced
    expect(queue.state.status).toBe('done')
    expect(queue.state.outbox).toHaveLength(0)
  })

  it('serves prompts in recorded frequency-descending order', async () => {
    const gets = raterSteps('R2').filter((s) => s.request.method === 'GET')
    const counts = gets.map((s) => (s.response.json as { count: number }).count)
    const sorted = [...counts].sort((a, b) => b - a)
    expect(counts).toEqual(sorted)
  })
})

describe('CodingQueue error handling', () => {
  const nextPrompt = {
    done: false,
    prompt: 'write review 00',
    count: 500,
    round: 1,
    coded: 0,
    total: 60,
  }

  it('surfaces 409 as a conflict with amend affordance', async () => {
    let amended = false
    const fetch = routedFetch({
      'GET /api/prompts/next?rater=R2': () => jsonResponse(nextPrompt),
      'POST /api/codes': () => jsonResponse({ detail: 'already coded' }, 409),
      'POST /api/codes?amend=true': () => {
        amended = true
        return jsonResponse({ status: 'amended', version: 2 })
      },
    })
    const queue = new CodingQueue(new ApiClient('', fetch), 'R2')
    await queue.load()
    await queue.submit('Search')
    expect(queue.state.status).toBe('conflict')
    expect(queue.state.conflictPrompt).toBe('write review 00')
    await queue.amendCurrent('Other')
    expect(amended).toBe(true)
    expect(queue.state.status).toBe('ready')
  })

  it('queues submissions while offline and flushes them on reload', async () => {
    let online = false
    const posted: string[] = []
    const fetch = async (url: string, init?: RequestInit) => {
      if (url.startsWith('/api/prompts/next')) return jsonResponse(nextPrompt)
      if (!online) throw new TypeError('network down')
      posted.push(String(init?.body))
      return jsonResponse({ status: 'recorded', version: 1 })
    }
    const queue = new CodingQueue(new ApiClient('', fetch), 'R2')
    await queue.load()
    await queue.submit('Search')
    expect(queue.state.status).toBe('offline')
    expect(queue.state.outbox).toHaveLength(1)
    const queuedId = queue.state.outbox[0]!.submission_id

    online = true
    await queue.load()
    expect(queue.state.status).toBe('ready')
    expect(queue.state.outbox).toHaveLength(0)
    expect(posted).toHaveLength(1)
    // the retried submission keeps its id, so the server can deduplicate
    expect(posted[0]).toContain(queuedId)
  })

  it('keeps idempotent ids across repeated flush attempts', async () => {
    const attempts: string[] = []
    let failures = 2
    const fetch = async (url: string, init?: RequestInit) => {
      if (url.startsWith('/api/prompts/next')) return jsonResponse(nextPrompt)
      attempts.push((JSON.parse(String(init?.body)) as { submission_id: string }).submission_id)
      if (failures > 0) {
        failures -= 1
        throw new TypeError('flaky network')
      }
      return jsonResponse({ status: 'recorded', version: 1 })
    }
    const queue = new CodingQueue(new ApiClient('', fetch), 'R2')
    await queue.load()
    await queue.submit('Search') // fails, queued
    await queue.load() // flush fails again
    await queue.load() // flush succeeds
    const uniqueIds = new Set(attempts)
    expect(attempts.length).toBeGreaterThanOrEqual(3)
    expect(uniqueIds.size).toBe(1)
  })
})
