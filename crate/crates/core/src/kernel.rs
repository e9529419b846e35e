//! State-dependent compute kernel of the synthetic benchmark.
//!
//! Cost is strictly nested by state: state 0 does nothing, state 1 sums `W`
//! sines and small integer powers, state 2 adds `W` cosines, state 3 adds `W`
//! hyperbolic sines with arguments kept in `[0, 1)`.
//!
//! The transcendental functions come from a [`KernelMath`] backend.
//! [`PortableMath`] (pure-Rust `libm`) gives bit-identical results on every
//! target; hosted builds can plug in the platform's faster routines.

pub const DEFAULT_WORK: usize = 32;

pub trait KernelMath {
    fn sin(x: f64) -> f64;
    fn cos(x: f64) -> f64;
    fn sinh(x: f64) -> f64;
}

/// `libm` backend.
pub struct PortableMath;

impl KernelMath for PortableMath {
    #[inline]
    fn sin(x: f64) -> f64 {
        libm::sin(x)
    }
    #[inline]
    fn cos(x: f64) -> f64 {
        libm::cos(x)
    }
    #[inline]
    fn sinh(x: f64) -> f64 {
        libm::sinh(x)
    }
}

pub fn kernel_cost(i: usize, state: u8, work: usize) -> f64 {
    kernel_cost_with::<PortableMath>(i, state, work)
}

#[inline]
pub fn kernel_cost_with<M: KernelMath>(i: usize, state: u8, work: usize) -> f64 {
    if state == 0 {
        return 0.0;
    }
    let x = i as f64;
    let base = (i % 7) as f64;
    let mut acc = 0.0;
    for k in 1..=work {
        acc += M::sin(x * k as f64) + int_pow(base, k % 5);
    }
    if state >= 2 {
        for k in 1..=work {
            acc += M::cos(x * k as f64);
        }
    }
    if state >= 3 {
        let scale = (i % 13) as f64 / (13.0 * work as f64);
        for k in 1..=work {
            acc += M::sinh(scale * k as f64);
        }
    }
    acc
}

#[inline]
fn int_pow(base: f64, exp: usize) -> f64 {
    let mut r = 1.0;
    for _ in 0..exp {
        r *= base;
    }
    r
}

/// Fixed-point image of a kernel result, folded into checksums with
/// wrapping integer addition so the reduction is order independent.
#[inline]
pub fn fixed_point(value: f64) -> u64 {
    libm::round(value * 65536.0) as i64 as u64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn idle_state_is_free() {
        assert_eq!(kernel_cost(123, 0, 32), 0.0);
        assert_eq!(kernel_cost(0, 0, 1), 0.0);
    }

    #[test]
    fn single_term_reference() {
        // sin(5) + (5 mod 7)^(1 mod 5)
        let expected = (5.0f64).sin() + 5.0;
        assert!((kernel_cost(5, 1, 1) - expected).abs() < 1e-12);
    }

    #[test]
    fn nested_states() {
        let one = kernel_cost(17, 1, 3);
        let two = kernel_cost(17, 2, 3);
        let cos_part: f64 = (1..=3).map(|k| (17.0 * k as f64).cos()).sum();
        assert!((two - one - cos_part).abs() < 1e-9);
        let three = kernel_cost(17, 3, 3);
        let sinh_part: f64 = (1..=3)
            .map(|k| ((17 % 13) as f64 * k as f64 / 39.0).sinh())
            .sum();
        assert!((three - two - sinh_part).abs() < 1e-9);
    }

    #[test]
    fn deterministic() {
        assert_eq!(
            kernel_cost(999_999, 3, 32).to_bits(),
            kernel_cost(999_999, 3, 32).to_bits()
        );
    }

    #[test]
    fn fixed_point_handles_negatives() {
        assert_eq!(fixed_point(1.0), 65536);
        assert_eq!(fixed_point(-1.0), (-65536i64) as u64);
        assert_eq!(fixed_point(1.0).wrapping_add(fixed_point(-1.0)), 0);
    }
}
