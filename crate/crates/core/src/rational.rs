//! Exact rational helpers.
//!
//! Every size, weight, multiplicity and prefix sum in this crate is a
//! [`Q`]. Floats only appear inside the LP column generation and the
//! coloring walk, and are converted back exactly at the boundary.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Arbitrary-precision rational number.
pub type Q = BigRational;

pub fn q(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

pub fn qi(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

pub fn qu(n: u64) -> Q {
    Q::from_integer(BigInt::from(n))
}

pub fn to_f64(x: &Q) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// Exact conversion of a finite float. Non-finite values map to zero.
pub fn from_f64(x: f64) -> Q {
    Q::from_float(x).unwrap_or_else(Q::zero)
}

/// Rounds `x` up to the next multiple of `1 / 2^bits`.
pub fn ceil_to_grid(x: f64, bits: u32) -> Q {
    let scale = (1u64 << bits) as f64;
    let scaled = (x * scale).ceil();
    Q::new(from_f64(scaled).to_integer(), BigInt::one() << bits)
}

pub fn floor(x: &Q) -> Q {
    x.floor()
}

pub fn ceil(x: &Q) -> Q {
    x.ceil()
}

pub fn frac(x: &Q) -> Q {
    x - x.floor()
}

pub fn is_integral(x: &Q) -> bool {
    x.is_integer()
}

pub fn lcm_u64(a: u64, b: u64) -> Option<u64> {
    let g = a.gcd(&b);
    (a / g).checked_mul(b)
}

/// `x` as a non-negative integer, if it is one and fits.
pub fn to_u64_exact(x: &Q) -> Option<u64> {
    if x.is_integer() && !x.is_negative() {
        x.to_integer().to_u64()
    } else {
        None
    }
}

pub fn max_q(a: Q, b: Q) -> Q {
    if a >= b {
        a
    } else {
        b
    }
}

/// Rational as a `["num","den"]` string pair, the wire form used by every JSON format.
pub fn to_pair(x: &Q) -> [String; 2] {
    [x.numer().to_string(), x.denom().to_string()]
}

pub fn from_pair(p: &[String; 2]) -> Option<Q> {
    let n: BigInt = p[0].trim().parse().ok()?;
    let d: BigInt = p[1].trim().parse().ok()?;
    if d.is_zero() {
        return None;
    }
    Some(Q::new(n, d))
}

pub mod serde_q {
    //! Serde adapter storing a [`Q`] as a `["num","den"]` pair.
    use super::{from_pair, to_pair, Q};
    use serde::{de::Error, Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(x: &Q, s: S) -> Result<S::Ok, S::Error> {
        to_pair(x).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Q, D::Error> {
        let p = <[String; 2]>::deserialize(d)?;
        from_pair(&p).ok_or_else(|| D::Error::custom("invalid rational pair"))
    }
}

pub mod serde_q_vec {
    use super::{from_pair, to_pair, Q};
    use serde::{de::Error, Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(xs: &[Q], s: S) -> Result<S::Ok, S::Error> {
        xs.iter().map(to_pair).collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Q>, D::Error> {
        let ps = Vec::<[String; 2]>::deserialize(d)?;
        ps.iter()
            .map(|p| from_pair(p).ok_or_else(|| D::Error::custom("invalid rational pair")))
            .collect()
    }
}
