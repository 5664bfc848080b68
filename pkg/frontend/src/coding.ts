import { ApiClient } from './api'
import { motiveByShortcut } from './motives'
import { CodingQueue } from './queue'
import { renderCodingView } from './render'

export class CodingController {
  private readonly queue: CodingQueue
  private keyHandler: ((event: KeyboardEvent) => void) | null = null

  constructor(
    private readonly root: HTMLElement,
    api: ApiClient,
    readonly rater: string,
  ) {
    this.queue = new CodingQueue(api, rater, () => this.render())
  }

  async start(): Promise<void> {
    this.keyHandler = (event) => {
      const motive = motiveByShortcut(event.key)
      if (motive) void this.pick(motive.name)
    }
    document.addEventListener('keydown', this.keyHandler)
    await this.queue.load()
  }

  stop(): void {
    if (this.keyHandler) document.removeEventListener('keydown', this.keyHandler)
    this.keyHandler = null
  }

  private async pick(motive: string): Promise<void> {
    if (this.queue.state.status === 'conflict') {
      await this.queue.amendCurrent(motive)
    } else {
      await this.queue.submit(motive)
    }
  }

  private render(): void {
    this.root.innerHTML = renderCodingView(this.rater, this.queue.state)
    for (const button of this.root.querySelectorAll<HTMLButtonElement>('button.motive')) {
      button.addEventListener('click', () => void this.pick(button.dataset.motive!))
    }
    this.root.querySelector<HTMLButtonElement>('#retry')?.addEventListener('click', () => {
      void this.queue.load()
    })
    this.root.querySelector<HTMLButtonElement>('#flush')?.addEventListener('click', () => {
      void this.queue.load()
    })
    this.root
      .querySelector<HTMLButtonElement>('#skip-conflict')
      ?.addEventListener('click', () => void this.queue.load())
  }
}
