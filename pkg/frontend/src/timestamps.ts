/**
 * Typed text has no microphone clock, so word timings are synthesized at a
 * configurable speaking rate: each word occupies one slot of 60000/wpm ms
 * and is "spoken" for the first 80% of its slot.
 */

export interface WordTiming {
  text: string;
  t_ms: number;
  start_ms: number;
  end_ms: number;
}

export const DEFAULT_WPM = 150;

export function wordTimings(text: string, t0: number, wpm: number = DEFAULT_WPM): WordTiming[] {
  const words = text.split(/\s+/).filter(Boolean);
  const gap = Math.round(60000 / Math.max(1, wpm));
  return words.map((word, i) => {
    const start = t0 + i * gap;
    return { text: word, t_ms: start, start_ms: start, end_ms: start + Math.round(gap * 0.8) };
  });
}
