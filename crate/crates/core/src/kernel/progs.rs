//! A small library of kernel-language programs: unary arithmetic, Cantor
//! pairing, numeral quoting, code specialization (s-m-n), and the catalog of
//! programs the test suites run against.
//!
//! Arithmetic is unary (`case`/`succ` recursion), so costs are proportional
//! to the values involved; the recursion argument order below is chosen so
//! the common compositions recurse on the cheaper side.

use std::sync::Arc;

use num_traits::ToPrimitive;

use super::code::{encode, Code};
use super::expr::{app, apps, case, fix, lam, num, query, run, succ, var, zero, Expr};
use crate::nat::Nat;

/// add x y = x + y, recursing on y.
pub fn add_prog() -> Expr {
    fix(lam(lam(case(
        var(0),
        var(1),
        succ(apps(var(3), &[var(2), var(0)])),
    ))))
}

/// Truncated subtraction x .- y, recursing on y and peeling x.
pub fn sub_prog() -> Expr {
    fix(lam(lam(case(
        var(0),
        var(1),
        case(var(2), num(0u32), apps(var(4), &[var(0), var(1)])),
    ))))
}

/// mul x y = x * y, recursing on x, adding y each level.
pub fn mul_prog() -> Expr {
    fix(lam(lam(case(
        var(1),
        num(0u32),
        apps(add_prog(), &[apps(var(3), &[var(0), var(1)]), var(1)]),
    ))))
}

/// floor(n / 2), peeling two at a time.
pub fn half_prog() -> Expr {
    fix(lam(case(
        var(0),
        num(0u32),
        case(var(0), num(0u32), succ(app(var(3), var(0)))),
    )))
}

/// Triangular number tri(n) = n(n+1)/2, via tri(n) = tri(n-1) + n.
pub fn tri_prog() -> Expr {
    fix(lam(case(
        var(0),
        num(0u32),
        apps(add_prog(), &[app(var(2), var(0)), var(1)]),
    )))
}

/// Cantor pairing as a curried program: pair x y = tri(x+y) + y.
pub fn pair_prog() -> Expr {
    lam(lam(apps(
        add_prog(),
        &[
            app(tri_prog(), apps(add_prog(), &[var(1), var(0)])),
            var(0),
        ],
    )))
}

/// Least w with tri(w+1) > z, the diagonal index of z.
fn findw_prog() -> Expr {
    fix(lam(lam(case(
        apps(sub_prog(), &[app(tri_prog(), succ(var(1))), var(0)]),
        apps(var(2), &[succ(var(1)), var(0)]),
        var(2),
    ))))
}

/// First projection of the Cantor pairing.
pub fn fst_prog() -> Expr {
    lam(app(
        lam(apps(
            sub_prog(),
            &[
                var(0),
                apps(sub_prog(), &[var(1), app(tri_prog(), var(0))]),
            ],
        )),
        apps(findw_prog(), &[num(0u32), var(0)]),
    ))
}

/// Second projection of the Cantor pairing.
pub fn snd_prog() -> Expr {
    lam(apps(
        sub_prog(),
        &[var(0), app(tri_prog(), apps(findw_prog(), &[num(0u32), var(0)]))],
    ))
}

/// Goedel number of the canonical numeral: q(0) = 3, q(n+1) = 4 + 9*q(n).
pub fn quote_prog() -> Expr {
    fix(lam(case(
        var(0),
        num(3u32),
        apps(
            add_prog(),
            &[
                apps(mul_prog(), &[num(9u32), app(var(2), var(0))]),
                num(4u32),
            ],
        ),
    )))
}

/// Largest code value the construction helpers will quote as a numeral;
/// beyond it `apply_code_expr` falls back to structural inlining, since the
/// unary quote grows a bit per unit of value.
pub const QUOTE_VALUE_CAP: u64 = 1 << 16;

/// The expression applying program `c` to `arg`: reflective dispatch
/// `Run(quote c, arg)` when `c` is small enough to quote, otherwise the
/// decoded body applied directly (shifted, assuming one enclosing binder).
/// Both forms compute `phi_c(arg)`.
pub fn apply_code_expr(c: &Code, arg: Expr) -> Expr {
    use num_traits::ToPrimitive;
    if c.0.to_u64().is_some_and(|v| v <= QUOTE_VALUE_CAP) {
        run(num(c.0.clone()), arg)
    } else {
        app(shift_free(&c.decode(), 0), arg)
    }
}

/// Shift free de Bruijn indices at or above `cutoff` up by one.
pub fn shift_free(e: &Expr, cutoff: u64) -> Expr {
    match e {
        Expr::Var(i) => {
            if i.to_u64().is_some_and(|v| v < cutoff) {
                e.clone()
            } else {
                Expr::Var(i + 1u32)
            }
        }
        Expr::Num(_) => e.clone(),
        Expr::Lam(b) => lam(shift_free(b, cutoff + 1)),
        Expr::Fix(b) => fix(shift_free(b, cutoff + 1)),
        Expr::Succ(b) => Expr::Succ(Arc::new(shift_free(b, cutoff))),
        Expr::Query(b) => query(shift_free(b, cutoff)),
        Expr::App(f, a) => app(shift_free(f, cutoff), shift_free(a, cutoff)),
        Expr::Run(c, a) => run(shift_free(c, cutoff), shift_free(a, cutoff)),
        Expr::Case(s, z, b) => case(
            shift_free(s, cutoff),
            shift_free(z, cutoff),
            shift_free(b, cutoff + 1),
        ),
    }
}

/// s-m-n as code specialization: `phi_{smn(e,m)}(x) = phi_e(<m,x>)` for every
/// oracle and input, up to a constant fuel overhead for the in-language
/// pairing. Total and oracle-independent; the specialized program inlines the
/// decoded body (shifted under the new binder) rather than quoting it, so the
/// result grows only linearly in the size of `e`.
pub fn smn(e: &Code, m: &Nat) -> Code {
    let body = shift_free(&e.decode(), 0);
    let pair_arg = apps(
        add_prog(),
        &[
            app(tri_prog(), apps(add_prog(), &[num(m.clone()), var(0)])),
            var(0),
        ],
    );
    Code(encode(&lam(app(body, pair_arg))))
}

/// Semantics-preserving eta-padding: a distinct code for the same function.
pub fn pad(e: &Code) -> Code {
    let body = shift_free(&e.decode(), 0);
    Code(encode(&lam(app(body, var(0)))))
}

/// Program converging exactly on input `i`, via |d - i| = 0.
pub fn conv_exactly(i: &Nat) -> Expr {
    lam(case(
        apps(
            add_prog(),
            &[
                apps(sub_prog(), &[var(0), num(i.clone())]),
                apps(sub_prog(), &[num(i.clone()), var(0)]),
            ],
        ),
        num(0u32),
        fix(var(0)),
    ))
}

/// `phi_{e_i}(d) = phi_d(i)`: the domain of this program is `{d : i in W_d}`.
pub fn w_index_prog(i: &Nat) -> Expr {
    lam(run(var(0), num(i.clone())))
}

/// Remainder modulo a small constant, by peeling `m` at a time.
pub fn mod_prog(m: u64) -> Expr {
    assert!(m >= 1, "modulus must be positive");
    // Under fix, lam and m case binders the self-reference sits at m+1;
    // the innermost branch recurses on the freshly peeled value.
    let mut body = app(var(m + 1), var(0));
    for r in (1..m).rev() {
        body = case(var(0), num(r), body);
    }
    fix(lam(case(var(0), num(0u32), body)))
}

/// Total 0/1 test for divisibility by `m`.
pub fn is_multiple_prog(m: u64) -> Expr {
    lam(case(
        app(mod_prog(m), var(0)),
        num(1u32),
        num(0u32),
    ))
}

pub fn identity_prog() -> Expr {
    lam(var(0))
}

pub fn const_prog(k: &Nat) -> Expr {
    lam(num(k.clone()))
}

pub fn succ_map_prog() -> Expr {
    lam(succ(var(0)))
}

pub fn query_map_prog() -> Expr {
    lam(query(var(0)))
}

pub fn diverge_prog() -> Expr {
    lam(fix(var(0)))
}

/// Converges only at 0; partial with nonempty, nontotal domain.
pub fn zero_only_prog() -> Expr {
    lam(case(var(0), num(0u32), fix(var(0))))
}

pub fn double_prog() -> Expr {
    lam(apps(add_prog(), &[var(0), var(0)]))
}

/// The diagonal program: on input x runs phi_x(x).
pub fn diag_prog() -> Expr {
    lam(run(var(0), var(0)))
}

/// Queries x and branches: even answer gives x, odd answer diverges.
pub fn query_gate_prog() -> Expr {
    lam(case(query(var(0)), fix(var(0)), var(1)))
}

#[derive(Clone, Debug)]
pub struct CatalogEntry {
    pub name: &'static str,
    pub code: Code,
}

/// The standing program catalog: total, partial, divergent, querying and
/// reflective members, all with small Goedel numbers.
pub fn catalog() -> Vec<CatalogEntry> {
    let e = |name, expr: Expr| CatalogEntry {
        name,
        code: Code(encode(&expr)),
    };
    vec![
        e("identity", identity_prog()),
        e("const0", const_prog(&Nat::from(0u32))),
        e("const1", const_prog(&Nat::from(1u32))),
        e("const5", const_prog(&Nat::from(5u32))),
        e("succ", succ_map_prog()),
        e("double", double_prog()),
        e("query", query_map_prog()),
        e("query-gate", query_gate_prog()),
        e("diverge", diverge_prog()),
        e("zero-only", zero_only_prog()),
        e("diagonal", diag_prog()),
        e("stuck", zero()),
    ]
}
