//! The total Goedel numbering of kernel terms.
//!
//! `encode(e) = tag(e) + 9*payload(e)` with tags Var=0, Lam=1, App=2, Zero=3,
//! Succ=4, Case=5, Fix=6, Query=7, Run=8. Multi-child payloads use Cantor
//! pairing; `Case` packs `<scrut, <zero, succ>>`. Decode is total: the payload
//! of `Zero` is ignored, which makes the numbering a surjection rather than a
//! bijection.

use std::fmt;
use std::sync::Arc;

use num_integer::Integer;
use num_traits::{Pow, ToPrimitive};
use thiserror::Error;

use super::expr::Expr;
use crate::nat::{cantor_pair, cantor_unpair, Nat};

/// A Goedel number. `decode` is total on these, so every natural is a Code.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Code(pub Nat);

impl Code {
    pub fn from_u64(n: u64) -> Code {
        Code(Nat::from(n))
    }

    pub fn of(e: &Expr) -> Code {
        Code(encode(e))
    }

    pub fn decode(&self) -> Expr {
        decode(&self.0)
    }
}

impl fmt::Display for Code {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

impl fmt::Debug for Code {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Code({})", self.0)
    }
}

impl From<u64> for Code {
    fn from(n: u64) -> Code {
        Code::from_u64(n)
    }
}

/// Hard cap on the bit length of any Goedel number we will materialize.
/// Unary numerals make quoting exponential (`encode(Num k)` has about 3.17*k
/// bits), so this bound is what "desk scale" means for code arithmetic.
pub const ENCODE_BIT_CAP: u64 = 1 << 28;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("encoding would exceed {cap} bits (estimated {estimate})")]
pub struct EncodeOverflow {
    pub estimate: u64,
    pub cap: u64,
}

/// Cheap saturating upper bound on `bits(encode(e))`, used to refuse
/// infeasible encodings before doing any bignum work.
pub fn encode_bits_estimate(e: &Expr) -> u64 {
    match e {
        Expr::Var(i) => i.bits().saturating_add(4),
        Expr::Num(k) => match k.to_u64() {
            Some(v) => v.saturating_mul(13).saturating_div(4).saturating_add(6),
            None => u64::MAX,
        },
        Expr::Lam(b) | Expr::Fix(b) | Expr::Query(b) | Expr::Succ(b) => {
            encode_bits_estimate(b).saturating_add(4)
        }
        Expr::App(f, a) | Expr::Run(f, a) => encode_bits_estimate(f)
            .max(encode_bits_estimate(a))
            .saturating_mul(2)
            .saturating_add(8),
        Expr::Case(s, z, b) => {
            let inner = encode_bits_estimate(z)
                .max(encode_bits_estimate(b))
                .saturating_mul(2)
                .saturating_add(8);
            encode_bits_estimate(s)
                .max(inner)
                .saturating_mul(2)
                .saturating_add(8)
        }
    }
}

/// `encode` with an explicit bit budget; the tool's construction paths use
/// this so infeasibility surfaces as a value instead of an allocation storm.
pub fn encode_checked(e: &Expr, bit_cap: u64) -> Result<Nat, EncodeOverflow> {
    let estimate = encode_bits_estimate(e);
    if estimate > bit_cap {
        return Err(EncodeOverflow {
            estimate,
            cap: bit_cap,
        });
    }
    Ok(encode_unchecked(e))
}

/// Total on canonical terms produced by this crate's constructors.
/// Panics only if the result would exceed [`ENCODE_BIT_CAP`] bits.
pub fn encode(e: &Expr) -> Nat {
    match encode_checked(e, ENCODE_BIT_CAP) {
        Ok(n) => n,
        Err(err) => panic!("encode: {err}"),
    }
}

fn encode_unchecked(e: &Expr) -> Nat {
    let nine = Nat::from(9u32);
    match e {
        Expr::Var(i) => i * &nine,
        Expr::Lam(b) => encode_unchecked(b) * &nine + 1u32,
        Expr::App(f, a) => {
            cantor_pair(&encode_unchecked(f), &encode_unchecked(a)) * &nine + 2u32
        }
        Expr::Num(k) => quote_value(k),
        Expr::Succ(b) => encode_unchecked(b) * &nine + 4u32,
        Expr::Case(s, z, b) => {
            let inner = cantor_pair(&encode_unchecked(z), &encode_unchecked(b));
            cantor_pair(&encode_unchecked(s), &inner) * &nine + 5u32
        }
        Expr::Fix(b) => encode_unchecked(b) * &nine + 6u32,
        Expr::Query(b) => encode_unchecked(b) * &nine + 7u32,
        Expr::Run(c, a) => {
            cantor_pair(&encode_unchecked(c), &encode_unchecked(a)) * &nine + 8u32
        }
    }
}

/// Closed form for `encode(Succ^n(Zero))`: satisfies q(0)=3, q(n+1)=4+9*q(n),
/// i.e. `q(n) = 3*9^n + (9^n - 1)/2`.
fn quote_value(n: &Nat) -> Nat {
    let exp = n
        .to_u64()
        .expect("numeral too large to quote at desk scale");
    let p: Nat = Pow::pow(&Nat::from(9u32), exp);
    (&p - 1u32) / 2u32 + p * 3u32
}

/// `quote_numeral(n) = encode(numeral n)`, the Goedel number of the canonical
/// numeral. Exponential in n by construction; see [`ENCODE_BIT_CAP`].
pub fn quote_numeral(n: &Nat) -> Code {
    Code(encode(&Expr::Num(n.clone())))
}

/// Checked variant for construction paths that must not panic.
pub fn try_quote_numeral(n: &Nat, bit_cap: u64) -> Result<Code, EncodeOverflow> {
    encode_checked(&Expr::Num(n.clone()), bit_cap).map(Code)
}

/// Total inverse-ish of [`encode`]: every natural decodes to a term, and
/// `decode(encode(e)) == e` for canonical terms. Payload components strictly
/// shrink, so this terminates on every input.
pub fn decode(c: &Nat) -> Expr {
    let nine = Nat::from(9u32);
    let mut succs: u64 = 0;
    let mut cur = c.clone();
    // Collapse Succ chains iteratively; chain length is at most bits(c)/3.
    loop {
        let (payload, tag) = cur.div_rem(&nine);
        match tag.to_u8().expect("tag < 9") {
            3 => return Expr::Num(Nat::from(succs)),
            4 => {
                succs += 1;
                cur = payload;
            }
            t => {
                let inner = decode_node(t, &payload);
                return wrap_succs(inner, succs);
            }
        }
    }
}

fn wrap_succs(mut e: Expr, n: u64) -> Expr {
    for _ in 0..n {
        e = match e {
            Expr::Num(k) => Expr::Num(k + 1u32),
            other => Expr::Succ(Arc::new(other)),
        };
    }
    e
}

fn decode_node(tag: u8, payload: &Nat) -> Expr {
    match tag {
        0 => Expr::Var(payload.clone()),
        1 => Expr::Lam(Arc::new(decode(payload))),
        2 => {
            let (f, a) = cantor_unpair(payload);
            Expr::App(Arc::new(decode(&f)), Arc::new(decode(&a)))
        }
        5 => {
            let (s, zb) = cantor_unpair(payload);
            let (z, b) = cantor_unpair(&zb);
            Expr::Case(
                Arc::new(decode(&s)),
                Arc::new(decode(&z)),
                Arc::new(decode(&b)),
            )
        }
        6 => Expr::Fix(Arc::new(decode(payload))),
        7 => Expr::Query(Arc::new(decode(payload))),
        8 => {
            let (c, a) = cantor_unpair(payload);
            Expr::Run(Arc::new(decode(&c)), Arc::new(decode(&a)))
        }
        other => unreachable!("tag {other} handled in decode"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::expr::{app, lam, num, query, succ, var, zero};
    use crate::nat::nat;

    #[test]
    fn encode_examples() {
        assert_eq!(encode(&lam(var(0))), nat(1));
        assert_eq!(encode(&succ(zero())), nat(31));
        assert_eq!(encode(&num(2u32)), nat(283));
        assert_eq!(encode(&lam(query(var(0)))), nat(64));
    }

    #[test]
    fn quote_numeral_recurrence() {
        assert_eq!(quote_numeral(&nat(0)).0, nat(3));
        assert_eq!(quote_numeral(&nat(1)).0, nat(31));
        assert_eq!(quote_numeral(&nat(2)).0, nat(283));
        let mut q = nat(3);
        for n in 1u64..200 {
            q = q * 9u32 + 4u32;
            assert_eq!(quote_numeral(&nat(n)).0, q, "q({n})");
        }
    }

    #[test]
    fn decode_examples() {
        assert_eq!(decode(&nat(12)), zero());
        assert_eq!(decode(&nat(1)), lam(var(0)));
        assert_eq!(decode(&nat(10)), lam(lam(var(0))));
        assert_eq!(decode(&nat(0)), var(0));
    }

    #[test]
    fn decode_encode_round_trip() {
        let samples = vec![
            lam(var(0)),
            app(lam(var(0)), num(5u32)),
            num(40u32),
            lam(query(var(0))),
            crate::kernel::expr::case(var(0), zero(), succ(var(0))),
            crate::kernel::expr::fix(lam(crate::kernel::expr::run(var(0), var(1)))),
        ];
        for e in samples {
            assert_eq!(decode(&encode(&e)), e, "round trip failed for {e}");
        }
    }

    #[test]
    fn decode_total_on_initial_segment() {
        for n in 0u64..5_000 {
            let e = decode(&nat(n));
            // Canonicity: re-encoding a decoded term re-decodes to itself.
            let e2 = decode(&encode(&e));
            assert_eq!(e, e2, "n={n}");
        }
    }

    #[test]
    fn encode_overflow_is_reported() {
        let huge = Expr::Num(Nat::from(u64::MAX));
        assert!(encode_checked(&huge, 1 << 20).is_err());
    }
}
