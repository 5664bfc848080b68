// The seven assignable motives with the coding rubric shown to raters.
// Keyboard shortcut = list position (1-7).

export interface MotiveInfo {
  name: string
  definition: string
  example: string
}

export const MOTIVES: MotiveInfo[] = [
  {
    name: 'Messaging',
    definition: 'Chat content meant only for its recipients, one-to-one or in a group.',
    example: '"Type a message", "Enter your message here"',
  },
  {
    name: 'Posting',
    definition: 'A new social-media post, shared openly or with a follower audience.',
    example: '"Write a caption", "What are you doing?"',
  },
  {
    name: 'Commenting',
    definition: 'A reply placed under an existing post, typically as visible as that post.',
    example: '"Comment ...", "Tweet your reply"',
  },
  {
    name: 'Search',
    definition: 'A query typed into a search box.',
    example: '"Search apps, web, and more...", "Search photos..."',
  },
  {
    name: 'DataInput',
    definition: 'A form answer: addresses, credentials, or other requested details.',
    example: '"email address", "Stop, address, ..."',
  },
  {
    name: 'Other',
    definition: 'The purpose is clear but none of the five main motives fits (notes, survey answers, ...).',
    example: '"write a note..."',
  },
  {
    name: 'Ambiguous',
    definition: 'No purpose can be read from the prompt at all.',
    example: '"0", "???"',
  },
]

export function motiveByShortcut(key: string): MotiveInfo | undefined {
  const index = Number.parseInt(key, 10) - 1
  return Number.isInteger(index) ? MOTIVES[index] : undefined
}
