/** Marching-squares iso-line extraction on a regular grid. */

export type Segment = [number, number, number, number];

/**
 * Extract level-set segments of z (row-major, ny rows of nx values) over the
 * rectangle [x0,x1] x [y0,y1].  Returns segments in data coordinates.
 */
export function isoSegments(
  z: Float64Array,
  nx: number,
  ny: number,
  x0: number,
  x1: number,
  y0: number,
  y1: number,
  level: number,
): Segment[] {
  const dx = (x1 - x0) / (nx - 1);
  const dy = (y1 - y0) / (ny - 1);
  const segs: Segment[] = [];
  const at = (i: number, j: number) => z[j * nx + i];
  // linear interpolation of the crossing along one cell edge
  const lerp = (va: number, vb: number, a: number, b: number) =>
    a + ((level - va) / (vb - va)) * (b - a);

  for (let j = 0; j < ny - 1; j++) {
    for (let i = 0; i < nx - 1; i++) {
      const v00 = at(i, j);
      const v10 = at(i + 1, j);
      const v01 = at(i, j + 1);
      const v11 = at(i + 1, j + 1);
      const xa = x0 + i * dx;
      const xb = xa + dx;
      const ya = y0 + j * dy;
      const yb = ya + dy;
      let code = 0;
      if (v00 > level) code |= 1;
      if (v10 > level) code |= 2;
      if (v11 > level) code |= 4;
      if (v01 > level) code |= 8;
      if (code === 0 || code === 15) continue;

      const bottom = (): [number, number] => [lerp(v00, v10, xa, xb), ya];
      const top = (): [number, number] => [lerp(v01, v11, xa, xb), yb];
      const left = (): [number, number] => [xa, lerp(v00, v01, ya, yb)];
      const right = (): [number, number] => [xb, lerp(v10, v11, ya, yb)];

      const push = (p: [number, number], q: [number, number]) =>
        segs.push([p[0], p[1], q[0], q[1]]);

      switch (code) {
        case 1:
        case 14:
          push(left(), bottom());
          break;
        case 2:
        case 13:
          push(bottom(), right());
          break;
        case 3:
        case 12:
          push(left(), right());
          break;
        case 4:
        case 11:
          push(right(), top());
          break;
        case 5: // saddle
          push(left(), bottom());
          push(right(), top());
          break;
        case 6:
        case 9:
          push(bottom(), top());
          break;
        case 7:
        case 8:
          push(left(), top());
          break;
        case 10: // saddle
          push(bottom(), right());
          push(left(), top());
          break;
      }
    }
  }
  return segs;
}
