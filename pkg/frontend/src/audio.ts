import type { AudioLike } from "./types.js";

/**
 * Playback policy: replies autoplay once when voice is enabled; any voiced
 * message can be replayed on demand (no new chat request) regardless of
 * when it arrived; the global mute only gates autoplay, never replay.
 */
export class AudioController {
  private muted: boolean;
  private createAudio: (url: string) => AudioLike;

  constructor(createAudio: (url: string) => AudioLike, muted: boolean) {
    this.createAudio = createAudio;
    this.muted = muted;
  }

  get isMuted(): boolean {
    return this.muted;
  }

  setMuted(muted: boolean): void {
    this.muted = muted;
  }

  /** Called when a voiced bot message arrives. Returns true if it played. */
  autoplay(url: string): boolean {
    if (this.muted) return false;
    void this.createAudio(url).play();
    return true;
  }

  /** Explicit user action: always plays. */
  replay(url: string): void {
    void this.createAudio(url).play();
  }
}
