//! Exact rational arithmetic helpers. Chart offsets and edge lengths are
//! solved over Q so that equalities (cusp offset coincidence, cone-angle
//! identities, edge-trace residuals) can be asserted exactly rather than to a
//! floating tolerance.

use num::bigint::BigInt;
use num::rational::BigRational;
use num::traits::ToPrimitive;
use num::{Signed, Zero};

pub type Rat = BigRational;

pub fn rat(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

pub fn rat_frac(num: i64, den: i64) -> Rat {
    Rat::new(BigInt::from(num), BigInt::from(den))
}

/// Exact conversion: every finite f64 is a dyadic rational.
pub fn rat_of_f64(v: f64) -> Option<Rat> {
    Rat::from_float(v)
}

/// Nearest f64 (rounds only when the exact value needs more than 53 bits).
pub fn f64_of(q: &Rat) -> f64 {
    q.to_f64().unwrap_or(f64::NAN)
}

/// "p/q" in lowest terms ("p" when q = 1), for reports.
pub fn rat_display(q: &Rat) -> String {
    if q.denom() == &BigInt::from(1) {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

pub fn rat_is_zero(q: &Rat) -> bool {
    q.is_zero()
}

pub fn rat_abs(q: &Rat) -> Rat {
    q.abs()
}

/// Solve the 2x2 system m * z = rhs exactly. None when singular.
pub fn solve2_rat(m: &[[Rat; 2]; 2], rhs: &[Rat; 2]) -> Option<[Rat; 2]> {
    let det = &m[0][0] * &m[1][1] - &m[0][1] * &m[1][0];
    if det.is_zero() {
        return None;
    }
    let z0 = (&rhs[0] * &m[1][1] - &rhs[1] * &m[0][1]) / &det;
    let z1 = (&m[0][0] * &rhs[1] - &m[1][0] * &rhs[0]) / &det;
    Some([z0, z1])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn f64_roundtrip_is_exact_for_dyadics() {
        for &v in &[0.5, -1.25, 3.0, 0.1, -7.625e-3, 1e20] {
            let q = rat_of_f64(v).unwrap();
            assert_eq!(f64_of(&q), v);
        }
        assert!(rat_of_f64(f64::NAN).is_none());
        assert!(rat_of_f64(f64::INFINITY).is_none());
    }

    #[test]
    fn one_tenth_is_not_a_tenth_exactly() {
        // 0.1 as f64 is the dyadic nearest to 1/10; the conversion must expose
        // that, not silently rationalize to 1/10.
        let q = rat_of_f64(0.1).unwrap();
        assert_ne!(q, rat_frac(1, 10));
    }

    #[test]
    fn solve2_exact() {
        let m = [
            [rat(2), rat(1)],
            [rat(1), rat(1)],
        ];
        let rhs = [rat(3), rat_frac(5, 2)];
        let z = solve2_rat(&m, &rhs).unwrap();
        assert_eq!(z[0], rat_frac(1, 2));
        assert_eq!(z[1], rat(2));
    }
}
