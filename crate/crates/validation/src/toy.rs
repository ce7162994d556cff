//! Two coupled cells with Shannon capacities, small enough to solve by
//! bisection.

const CELLS: [(f64, f64, f64); 2] = [(1e-9, 4e-10, 1e-11), (5e-10, 6e-10, 1e-11)];

/// Capacity of cell `c` in bit/s when the other cell is busy `rho[1 - c]`
/// of the time.
pub fn capacity(c: usize, rho: &[f64]) -> f64 {
    let (s, i, n) = CELLS[c];
    20e6 * (1.0 + s / (n + rho[1 - c] * i)).log2()
}

pub fn bisect(mut lo: f64, mut hi: f64, f: impl Fn(f64) -> f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Unsaturated loads of the two cells for `demand`, by eliminating the
/// second load and bisecting on the first.
pub fn loads(demand: [f64; 2]) -> [f64; 2] {
    let rho2_of = |r1: f64| demand[1] / capacity(1, &[r1, 0.0]);
    let residual = |r1: f64| r1 - demand[0] / capacity(0, &[0.0, rho2_of(r1)]);
    let r1 = bisect(0.0, 1.0, residual);
    [r1, rho2_of(r1)]
}
