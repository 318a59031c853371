//! Deterministic low-discrepancy probe points (Halton sequences).
//!
//! Every sampled check in the library draws from these, so reports are
//! byte-reproducible; no RNG anywhere.

const PRIMES: [u32; 8] = [2, 3, 5, 7, 11, 13, 17, 19];

/// i-th element of the van der Corput sequence in the given base.
pub fn van_der_corput(mut i: u64, base: u32) -> f64 {
    let b = base as f64;
    let mut f = 1.0;
    let mut r = 0.0;
    while i > 0 {
        f /= b;
        r += f * (i % base as u64) as f64;
        i /= base as u64;
    }
    r
}

/// `count` Halton points in the open unit cube (0,1)^dim.
pub fn unit_cube(count: usize, dim: usize) -> Vec<Vec<f64>> {
    assert!(dim <= PRIMES.len(), "probe dimension too large");
    (1..=count as u64)
        .map(|i| (0..dim).map(|d| van_der_corput(i, PRIMES[d])).collect())
        .collect()
}

/// `count` points in the closed ball of the given center and radius,
/// including the center and the axis-aligned boundary extremes.
pub fn ball(center: &[f64], radius: f64, count: usize) -> Vec<Vec<f64>> {
    let dim = center.len();
    let mut out = Vec::with_capacity(count + 2 * dim + 1);
    out.push(center.to_vec());
    for d in 0..dim {
        for s in [-1.0, 1.0] {
            let mut p = center.to_vec();
            p[d] += s * radius;
            out.push(p);
        }
    }
    for u in unit_cube(count, dim) {
        // map the cube to the ball: recenter, then pull overshoots onto
        // the sphere so every probe stays inside
        let v: Vec<f64> = u.iter().map(|&t| 2.0 * t - 1.0).collect();
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        let scale = if n > 1.0 { radius / n } else { radius };
        out.push(
            center.iter().zip(&v).map(|(&c, &x)| c + scale * x).collect(),
        );
    }
    out
}

/// `count` points in the box given by per-axis bounds, plus all corners
/// (corner count caps at dimension 8 by the probe-dimension limit).
pub fn in_box(lo: &[f64], hi: &[f64], count: usize) -> Vec<Vec<f64>> {
    let dim = lo.len();
    let mut out = Vec::new();
    for mask in 0..(1u32 << dim) {
        out.push(
            (0..dim)
                .map(|d| if mask >> d & 1 == 0 { lo[d] } else { hi[d] })
                .collect(),
        );
    }
    for u in unit_cube(count, dim) {
        out.push(
            (0..dim).map(|d| lo[d] + u[d] * (hi[d] - lo[d])).collect(),
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn van_der_corput_base2() {
        assert_eq!(van_der_corput(1, 2), 0.5);
        assert_eq!(van_der_corput(2, 2), 0.25);
        assert_eq!(van_der_corput(3, 2), 0.75);
    }

    #[test]
    fn ball_points_stay_inside() {
        let pts = ball(&[1.0, -2.0], 0.5, 64);
        for p in &pts {
            let d = ((p[0] - 1.0).powi(2) + (p[1] + 2.0).powi(2)).sqrt();
            assert!(d <= 0.5 + 1e-12);
        }
        assert!(pts.len() >= 64);
    }

    #[test]
    fn box_includes_corners() {
        let pts = in_box(&[0.0, -1.0], &[1.0, 1.0], 16);
        assert!(pts.contains(&vec![0.0, -1.0]));
        assert!(pts.contains(&vec![1.0, 1.0]));
        for p in &pts {
            assert!(p[0] >= 0.0 && p[0] <= 1.0 && p[1] >= -1.0 && p[1] <= 1.0);
        }
    }
}
