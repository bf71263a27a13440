use std::fmt;
use std::ops::{Add, AddAssign, Neg, Sub};
use std::str::FromStr;

use super::CircuitError;

/// log2 of the number of phase quanta per half turn.
pub const QUANTUM_BITS: u32 = 20;

const HALF_TURN: i64 = 1 << QUANTUM_BITS;
const FULL_TURN: i64 = 2 << QUANTUM_BITS;

/// A rotation angle that is an exact multiple of `π / 2^20`.
///
/// The value is `numerator / denominator · π` with the fraction in lowest
/// terms, the denominator a power of two no larger than `2^20`, and the
/// numerator normalized into `(-denominator, denominator]`. Internally the
/// angle is kept as a quanta count in `(-2^20, 2^20]`, which makes addition
/// exact modulo `2π`.
#[derive(Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Phase {
    quanta: i32,
}

impl Phase {
    pub const ZERO: Phase = Phase { quanta: 0 };
    pub const PI: Phase = Phase {
        quanta: HALF_TURN as i32,
    };
    pub const HALF_PI: Phase = Phase {
        quanta: (HALF_TURN / 2) as i32,
    };
    pub const MINUS_HALF_PI: Phase = Phase {
        quanta: -(HALF_TURN / 2) as i32,
    };
    pub const QUARTER_PI: Phase = Phase {
        quanta: (HALF_TURN / 4) as i32,
    };
    pub const MINUS_QUARTER_PI: Phase = Phase {
        quanta: -(HALF_TURN / 4) as i32,
    };

    /// Builds `numerator / denominator · π`. The denominator must divide `2^20`.
    pub fn new(numerator: i64, denominator: u64) -> Result<Phase, CircuitError> {
        if denominator == 0 || !denominator.is_power_of_two() || denominator > HALF_TURN as u64 {
            return Err(CircuitError::InvalidPhase(format!(
                "{numerator}/{denominator}: denominator must be a power of two dividing 2^{QUANTUM_BITS}"
            )));
        }
        let scale = HALF_TURN / denominator as i64;
        let quanta = (numerator % (2 * denominator as i64)) * scale;
        Ok(Phase::from_quanta(quanta))
    }

    /// Phase of `quanta · π / 2^20`, wrapped into `(-π, π]`.
    pub fn from_quanta(quanta: i64) -> Phase {
        let mut r = quanta.rem_euclid(FULL_TURN);
        if r > HALF_TURN {
            r -= FULL_TURN;
        }
        Phase { quanta: r as i32 }
    }

    pub fn quanta(self) -> i64 {
        i64::from(self.quanta)
    }

    pub fn numerator(self) -> i64 {
        self.reduced().0
    }

    pub fn denominator(self) -> u64 {
        self.reduced().1
    }

    fn reduced(self) -> (i64, u64) {
        if self.quanta == 0 {
            return (0, 1);
        }
        let shift = self.quanta.trailing_zeros().min(QUANTUM_BITS);
        (
            i64::from(self.quanta >> shift),
            1u64 << (QUANTUM_BITS - shift),
        )
    }

    pub fn radians(self) -> f64 {
        self.quanta as f64 * std::f64::consts::PI / HALF_TURN as f64
    }

    /// Integer multiple of this phase, modulo `2π`.
    pub fn scaled(self, factor: i64) -> Phase {
        Phase::from_quanta(self.quanta() * factor)
    }

    pub fn is_zero(self) -> bool {
        self.quanta == 0
    }

    /// `0` or `π`.
    pub fn is_pauli(self) -> bool {
        self.quanta == 0 || i64::from(self.quanta) == HALF_TURN
    }

    /// `±π/2`.
    pub fn is_proper_clifford(self) -> bool {
        i64::from(self.quanta).abs() == HALF_TURN / 2
    }

    pub fn is_clifford(self) -> bool {
        i64::from(self.quanta) % (HALF_TURN / 2) == 0
    }
}

/// Rounds `theta` (radians) to the nearest multiple of `π / 2^20`, wrapped
/// into `(-π, π]`. Ties round away from zero.
pub fn quantize_phase(theta: f64) -> Result<Phase, CircuitError> {
    if !theta.is_finite() {
        return Err(CircuitError::NonFiniteAngle(theta));
    }
    let turns = theta.rem_euclid(2.0 * std::f64::consts::PI);
    let quanta = (turns / std::f64::consts::PI * HALF_TURN as f64).round() as i64;
    Ok(Phase::from_quanta(quanta))
}

impl Add for Phase {
    type Output = Phase;
    fn add(self, rhs: Phase) -> Phase {
        Phase::from_quanta(self.quanta() + rhs.quanta())
    }
}

impl AddAssign for Phase {
    fn add_assign(&mut self, rhs: Phase) {
        *self = *self + rhs;
    }
}

impl Sub for Phase {
    type Output = Phase;
    fn sub(self, rhs: Phase) -> Phase {
        Phase::from_quanta(self.quanta() - rhs.quanta())
    }
}

impl Neg for Phase {
    type Output = Phase;
    fn neg(self) -> Phase {
        Phase::from_quanta(-self.quanta())
    }
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (n, d) = self.reduced();
        write!(f, "{n}/{d}")
    }
}

impl fmt::Debug for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Phase({self}π)")
    }
}

impl FromStr for Phase {
    type Err = CircuitError;

    /// Accepts `num/den` or a bare integer numerator (`1` is `π`).
    fn from_str(s: &str) -> Result<Phase, CircuitError> {
        let bad = || CircuitError::InvalidPhase(s.to_string());
        let (num, den) = match s.split_once('/') {
            Some((n, d)) => (
                n.trim().parse::<i64>().map_err(|_| bad())?,
                d.trim().parse::<u64>().map_err(|_| bad())?,
            ),
            None => (s.trim().parse::<i64>().map_err(|_| bad())?, 1),
        };
        Phase::new(num, den)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    #[test]
    fn exact_fractions_quantize_exactly() {
        assert_eq!(quantize_phase(PI / 4.0).unwrap(), Phase::new(1, 4).unwrap());
        assert_eq!(quantize_phase(0.0).unwrap(), Phase::ZERO);
        assert_eq!(quantize_phase(PI).unwrap(), Phase::PI);
        assert_eq!(quantize_phase(-PI).unwrap(), Phase::PI);
        assert_eq!(
            quantize_phase(3.0 * PI / 2.0).unwrap(),
            Phase::MINUS_HALF_PI
        );
    }

    #[test]
    fn reduced_form_and_display() {
        let p = Phase::new(1, 4).unwrap();
        assert_eq!((p.numerator(), p.denominator()), (1, 4));
        assert_eq!(Phase::ZERO.to_string(), "0/1");
        assert_eq!(Phase::PI.to_string(), "1/1");
        assert_eq!(Phase::new(-1, 1).unwrap(), Phase::PI);
        assert_eq!(Phase::new(3, 2).unwrap().to_string(), "-1/2");
        assert_eq!(Phase::new(4, 8).unwrap().to_string(), "1/2");
        assert_eq!("-1/4".parse::<Phase>().unwrap(), Phase::MINUS_QUARTER_PI);
        assert_eq!("1".parse::<Phase>().unwrap(), Phase::PI);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(Phase::new(1, 3).is_err());
        assert!(Phase::new(1, 0).is_err());
        assert!(Phase::new(1, 1 << 21).is_err());
        assert!(quantize_phase(f64::NAN).is_err());
        assert!(quantize_phase(f64::INFINITY).is_err());
        assert!("1/x".parse::<Phase>().is_err());
    }

    #[test]
    fn addition_wraps_mod_two_pi() {
        assert_eq!(Phase::HALF_PI + Phase::HALF_PI, Phase::PI);
        assert_eq!(Phase::PI + Phase::PI, Phase::ZERO);
        assert_eq!(Phase::PI + Phase::HALF_PI, Phase::MINUS_HALF_PI);
        assert_eq!(-Phase::PI, Phase::PI);
        assert_eq!(Phase::QUARTER_PI.scaled(2), Phase::HALF_PI);
    }

    #[test]
    fn idempotent_on_random_angles() {
        let mut rng = crate::rng::PortableRng::new(5);
        for _ in 0..1000 {
            let x = (rng.next_f64() - 0.5) * 40.0;
            let p = quantize_phase(x).unwrap();
            assert_eq!(quantize_phase(p.radians()).unwrap(), p);
        }
    }

    proptest! {
        #[test]
        fn quantization_error_is_half_a_quantum(x in -100.0f64..100.0) {
            let p = quantize_phase(x).unwrap();
            let diff = (x - p.radians()).rem_euclid(2.0 * PI);
            let diff = diff.min(2.0 * PI - diff);
            prop_assert!(diff <= PI / (1u64 << 21) as f64 + 1e-12);
        }

        #[test]
        fn reduced_fraction_invariants(q in -(1i64 << 22)..(1i64 << 22)) {
            let p = Phase::from_quanta(q);
            let (n, d) = (p.numerator(), p.denominator());
            prop_assert!(d.is_power_of_two() && d <= 1 << QUANTUM_BITS);
            prop_assert!(n > -(d as i64) && n <= d as i64);
            prop_assert!(n % 2 != 0 || d == 1);
            prop_assert_eq!(Phase::new(n, d).unwrap(), p);
        }
    }
}
