// Heat colors are a pure function of the metric value so rendering is
// snapshot-testable and the legend always agrees with the nodes.

const COLD: [number, number, number] = [232, 238, 247]; // faint blue-grey
const HOT: [number, number, number] = [217, 48, 37]; // saturated red

export function heatColor(heat: number): string {
  const t = Math.min(1, Math.max(0, heat));
  const mix = (a: number, b: number) => Math.round(a + (b - a) * t);
  return `rgb(${mix(COLD[0], HOT[0])}, ${mix(COLD[1], HOT[1])}, ${mix(COLD[2], HOT[2])})`;
}

export interface LegendStop {
  value: number;
  color: string;
}

export function legendStops(count = 5): LegendStop[] {
  const stops: LegendStop[] = [];
  for (let i = 0; i < count; i++) {
    const value = i / (count - 1);
    stops.push({ value, color: heatColor(value) });
  }
  return stops;
}

export const BADGE_COLORS: Record<string, string> = {
  added: "#188038",
  changed: "#f9ab00",
  removed: "#d93025",
};

export const KIND_FILL: Record<string, string> = {
  Package: "#f1f3f4",
  Class: "#e8f0fe",
  Interface: "#e6f4ea",
  Enum: "#fef7e0",
  Method: "#ffffff",
  Field: "#ffffff",
  ExternalType: "#f8f9fa",
};
