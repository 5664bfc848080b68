import type { FetchLike } from '../src/api'

export interface RecordedStep {
  request: { method: string; url: string; body: Record<string, unknown> | null }
  response: { status: number; json: unknown }
}

export function jsonResponse(body: unknown, status = 200): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { 'content-type': 'application/json' },
  })
}

/** Fetch stub serving fixed responses keyed by "METHOD url". */
export function routedFetch(routes: Record<string, unknown>): FetchLike {
  return async (url, init) => {
    const key = `${init?.method ?? 'GET'} ${url}`
    if (!(key in routes)) throw new Error(`unrouted request: ${key}`)
    const value = routes[key]
    if (value instanceof Response) return value
    if (typeof value === 'function') return (value as () => Response)()
    return jsonResponse(value)
  }
}

/**
 * Replays a recorded request/response session, asserting each incoming
 * request matches the next recorded one (submission ids are client-generated
 * and excluded from the comparison). When the recording is exhausted the
 * fallback answers.
 */
export function replayFetch(
  steps: RecordedStep[],
  fallback: (url: string, init?: RequestInit) => Response,
): { fetch: FetchLike; served: () => number } {
  let cursor = 0
  const fetchFn: FetchLike = async (url, init) => {
    if (cursor >= steps.length) return fallback(url, init)
    const step = steps[cursor]!
    cursor += 1
    const method = init?.method ?? 'GET'
    if (method !== step.request.method || url !== step.request.url) {
      throw new Error(
        `request #${cursor} mismatch: got ${method} ${url}, ` +
          `recorded ${step.request.method} ${step.request.url}`,
      )
    }
    if (step.request.body !== null) {
      const got = JSON.parse(String(init?.body)) as Record<string, unknown>
      for (const [key, value] of Object.entries(step.request.body)) {
        if (key === 'submission_id') continue
        if (got[key] !== value) {
          throw new Error(`request #${cursor} body mismatch on ${key}: ${got[key]} != ${value}`)
        }
      }
    }
    return jsonResponse(step.response.json, step.response.status)
  }
  return { fetch: fetchFn, served: () => cursor }
}
