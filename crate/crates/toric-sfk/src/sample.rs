//! Deterministic low-discrepancy sampling. Verification sweeps use Halton
//! sequences so reruns are byte-identical; no RNG state is involved.

/// Halton radical inverse of `index` in the given base, in (0, 1).
pub fn halton(index: usize, base: usize) -> f64 {
    debug_assert!(base >= 2);
    let mut i = index + 1;
    let mut f = 1.0;
    let mut x = 0.0;
    let b = base as f64;
    while i > 0 {
        f /= b;
        x += f * (i % base) as f64;
        i /= base;
    }
    x
}

/// n Halton pairs in the unit square, bases 2 and 3.
pub fn unit_square(n: usize) -> impl Iterator<Item = (f64, f64)> {
    (0..n).map(|i| (halton(i, 2), halton(i, 3)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn halton_base2_prefix() {
        let want = [0.5, 0.25, 0.75, 0.125, 0.625];
        for (i, &w) in want.iter().enumerate() {
            assert_eq!(halton(i, 2), w);
        }
    }

    #[test]
    fn samples_fill_the_square() {
        let pts: Vec<_> = unit_square(256).collect();
        for (u, v) in &pts {
            assert!(*u > 0.0 && *u < 1.0 && *v > 0.0 && *v < 1.0);
        }
        // Quadrant counts stay balanced for a low-discrepancy set.
        let q = pts
            .iter()
            .filter(|(u, v)| *u < 0.5 && *v < 0.5)
            .count();
        assert!((q as i64 - 64).abs() <= 8, "quadrant count {q}");
    }
}
