/** The two hardcoded 2-D benchmark objectives used for contour backgrounds.
 *
 * Both are p = 2 residual powers f(x) = 0.5 * ||u(x)||^2; the plots consume
 * only these closed forms, never the optimizer.
 */

export type Objective2d = (x1: number, x2: number) => number;

export const OBJECTIVES_2D: Record<string, Objective2d> = {
  rosenbrock: (x1, x2) => {
    const u1 = 1 - x1;
    const u2 = 10 * (x2 - x1 * x1);
    return 0.5 * (u1 * u1 + u2 * u2);
  },
  chebyshev2: (x1, x2) => {
    const u1 = 0.5 * (1 - x1);
    const u2 = x2 - (2 * x1 * x1 - 1);
    return 0.5 * (u1 * u1 + u2 * u2);
  },
};
