//! Natural-number utilities: arbitrary-precision naturals, the Cantor pairing
//! bijection, and the canonical bitmask coding of finite sets.

use num_bigint::BigUint;
use num_traits::{One, Zero};

/// The workbench works over exact naturals throughout; Goedel numbers of even
/// small programs overflow machine words, so everything is arbitrary precision.
pub type Nat = BigUint;

pub fn nat(n: u64) -> Nat {
    Nat::from(n)
}

/// Cantor pairing `<x, y> = (x+y)(x+y+1)/2 + y`, a bijection omega^2 -> omega.
pub fn cantor_pair(x: &Nat, y: &Nat) -> Nat {
    let s = x + y;
    (&s * (&s + 1u32)) / 2u32 + y
}

/// Inverse of [`cantor_pair`].
pub fn cantor_unpair(z: &Nat) -> (Nat, Nat) {
    // w = floor((sqrt(8z+1) - 1) / 2) is the diagonal index.
    let w = ((z * 8u32 + 1u32).sqrt() - 1u32) / 2u32;
    let t = (&w * (&w + 1u32)) / 2u32;
    let y = z - t;
    let x = &w - &y;
    (x, y)
}

pub fn cantor_pair_u64(x: u64, y: u64) -> Nat {
    cantor_pair(&nat(x), &nat(y))
}

/// Canonical code of a finite set: `sum_{n in s} 2^n`.
pub fn d_encode(s: &[u64]) -> Nat {
    let mut code = Nat::zero();
    for &n in s {
        code |= Nat::one() << n;
    }
    code
}

/// Bit test against a canonical finite-set code.
pub fn d_member(code: &Nat, n: &Nat) -> bool {
    use num_traits::ToPrimitive;
    match n.to_u64() {
        Some(k) => code.bit(k),
        None => false,
    }
}

/// Elements of a canonical finite-set code, ascending.
pub fn d_elements(code: &Nat) -> Vec<u64> {
    let mut out = Vec::new();
    for k in 0..code.bits() {
        if code.bit(k) {
            out.push(k);
        }
    }
    out
}

/// Serde for naturals: emits a JSON number when the value fits in u64 and a
/// decimal string otherwise; accepts either on input.
pub mod serde_nat {
    use super::Nat;
    use num_traits::ToPrimitive;
    use serde::de::Error as _;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(n: &Nat, s: S) -> Result<S::Ok, S::Error> {
        match n.to_u64() {
            Some(v) => s.serialize_u64(v),
            None => s.serialize_str(&n.to_string()),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Nat, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Int(u64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Int(v) => Ok(Nat::from(v)),
            Raw::Text(t) => t
                .parse::<Nat>()
                .map_err(|_| D::Error::custom(format!("bad natural `{t}`"))),
        }
    }
}
