// Optional audio input: push-to-talk capture and a WAV-upload fallback.
// Both paths end in 16 kHz PCM16 mono chunks sent as audio frames.

export const TARGET_RATE = 16_000;
export const CHUNK_SAMPLES = 320; // 20 ms

export function floatTo16(samples: Float32Array): Int16Array {
  const out = new Int16Array(samples.length);
  for (let i = 0; i < samples.length; i++) {
    const v = Math.max(-1, Math.min(1, samples[i]!));
    out[i] = Math.round(v * 32767);
  }
  return out;
}

/** Nearest-sample resample; good enough for speech capture. */
export function resampleTo16k(samples: Float32Array, fromRate: number): Float32Array {
  if (fromRate === TARGET_RATE) return samples;
  const outLength = Math.floor((samples.length * TARGET_RATE) / fromRate);
  const out = new Float32Array(outLength);
  for (let i = 0; i < outLength; i++) {
    out[i] = samples[Math.min(samples.length - 1, Math.floor((i * fromRate) / TARGET_RATE))]!;
  }
  return out;
}

export interface WavData {
  sampleRate: number;
  samples: Int16Array;
}

/** Parse a PCM16LE mono WAV file (the replay fixture format). */
export function parseWavPcm16(bytes: Uint8Array): WavData {
  const view = new DataView(bytes.buffer, bytes.byteOffset, bytes.byteLength);
  const tag = (offset: number) =>
    String.fromCharCode(bytes[offset]!, bytes[offset + 1]!, bytes[offset + 2]!, bytes[offset + 3]!);
  if (tag(0) !== "RIFF" || tag(8) !== "WAVE") throw new Error("not a WAV file");

  let offset = 12;
  let sampleRate = 0;
  let channels = 0;
  let bits = 0;
  let dataOffset = -1;
  let dataLength = 0;
  while (offset + 8 <= bytes.length) {
    const chunkId = tag(offset);
    const size = view.getUint32(offset + 4, true);
    if (chunkId === "fmt ") {
      const format = view.getUint16(offset + 8, true);
      if (format !== 1) throw new Error(`not PCM (format ${format})`);
      channels = view.getUint16(offset + 10, true);
      sampleRate = view.getUint32(offset + 12, true);
      bits = view.getUint16(offset + 22, true);
    } else if (chunkId === "data") {
      dataOffset = offset + 8;
      dataLength = size;
    }
    offset += 8 + size + (size % 2);
  }
  if (dataOffset < 0) throw new Error("missing data chunk");
  if (channels !== 1 || bits !== 16) {
    throw new Error(`want 16-bit mono, got ${bits}-bit ${channels}ch`);
  }
  const samples = new Int16Array(Math.floor(dataLength / 2));
  for (let i = 0; i < samples.length; i++) {
    samples[i] = view.getInt16(dataOffset + 2 * i, true);
  }
  return { sampleRate, samples };
}

export function* chunked(samples: Int16Array, size = CHUNK_SAMPLES): Generator<Int16Array> {
  for (let start = 0; start < samples.length; start += size) {
    yield samples.subarray(start, Math.min(samples.length, start + size));
  }
}

/** Microphone push-to-talk; emits PCM16 chunks while active. Browser only. */
export class PushToTalk {
  private ctx: AudioContext | null = null;
  private stream: MediaStream | null = null;
  private node: ScriptProcessorNode | null = null;

  constructor(private onChunk: (chunk: Int16Array) => void) {}

  async start(): Promise<void> {
    this.stream = await navigator.mediaDevices.getUserMedia({ audio: true });
    this.ctx = new AudioContext();
    const source = this.ctx.createMediaStreamSource(this.stream);
    this.node = this.ctx.createScriptProcessor(4096, 1, 1);
    const rate = this.ctx.sampleRate;
    this.node.onaudioprocess = (event) => {
      const mono = resampleTo16k(event.inputBuffer.getChannelData(0), rate);
      for (const piece of chunked(floatTo16(mono))) {
        this.onChunk(piece);
      }
    };
    source.connect(this.node);
    this.node.connect(this.ctx.destination);
  }

  stop(): void {
    this.node?.disconnect();
    this.stream?.getTracks().forEach((track) => track.stop());
    void this.ctx?.close();
    this.node = null;
    this.stream = null;
    this.ctx = null;
  }
}
