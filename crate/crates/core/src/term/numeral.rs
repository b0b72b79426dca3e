use std::fmt;

use num_bigint::BigUint;
use num_traits::{One, Zero};

/// Binary spelling of a numeral with `zero`, `one`, `bit0 x = x + x` and
/// `bit1 x = x + x + 1`. Numerals are stored as plain integers; this view
/// only annotates numeral steps in traces.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BinaryNumeral {
    Zero,
    One,
    Bit0(Box<BinaryNumeral>),
    Bit1(Box<BinaryNumeral>),
}

impl BinaryNumeral {
    pub fn of(value: &BigUint) -> BinaryNumeral {
        if value.is_zero() {
            return BinaryNumeral::Zero;
        }
        // Collect the bits below the leading one, most significant first.
        let bits = value.bits();
        let mut out = BinaryNumeral::One;
        for i in (0..bits - 1).rev() {
            out = if value.bit(i) {
                BinaryNumeral::Bit1(Box::new(out))
            } else {
                BinaryNumeral::Bit0(Box::new(out))
            };
        }
        out
    }

    pub fn eval(&self) -> BigUint {
        match self {
            BinaryNumeral::Zero => BigUint::zero(),
            BinaryNumeral::One => BigUint::one(),
            BinaryNumeral::Bit0(x) => {
                let v = x.eval();
                &v + &v
            }
            BinaryNumeral::Bit1(x) => {
                let v = x.eval();
                &v + &v + 1u32
            }
        }
    }
}

impl fmt::Display for BinaryNumeral {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BinaryNumeral::Zero => f.write_str("zero"),
            BinaryNumeral::One => f.write_str("one"),
            BinaryNumeral::Bit0(x) => write!(f, "bit0({x})"),
            BinaryNumeral::Bit1(x) => write!(f, "bit1({x})"),
        }
    }
}
