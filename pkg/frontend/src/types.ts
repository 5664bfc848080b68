// JSON contract of the annotation service. The console consumes these
// shapes exclusively; it never derives statistics on its own.

export interface KappaStats {
  kappa: number
  po: number
  pe: number
  se: number
  ci95: [number, number]
  n: number
}

export interface NextPromptResponse {
  done: boolean
  prompt?: string
  count?: number
  round?: number
  coded: number
  total: number
}

export interface CodeResult {
  status: 'recorded' | 'amended' | 'duplicate_submission' | 'resolved'
  version?: number
}

export interface PerCategoryKappa {
  motive: string
  kappa: KappaStats | null
}

export interface AgreementResponse {
  overlap: boolean
  n: number
  degenerate?: boolean
  overall?: KappaStats
  per_category?: PerCategoryKappa[]
  labels?: string[]
  matrix?: number[][]
}

export interface DisagreementItem {
  prompt: string
  a: string
  b: string
  count: number
  resolved: boolean
}

export interface DisagreementsResponse {
  overlap: boolean
  items: DisagreementItem[]
}

export interface CodeSubmission {
  rater: string
  prompt: string
  motive: string
  submission_id: string
}

export interface ResolveSubmission {
  prompt: string
  motive: string
  resolver: string
  submission_id: string
}
