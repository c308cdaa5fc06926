//! Fuel-bounded call-by-value evaluation with oracle tracing.
//!
//! The machine is a small-step CEK-style loop: deterministic, one fuel unit
//! per transition, and `Converged`/`Stuck` verdicts are terminal states, so
//! re-running with more fuel can only turn `FuelExhausted` into something
//! else, never flip a settled verdict. Numerals are machine values carrying
//! an exact natural, so large numbers flow through programs at unit cost per
//! step; producing a number by `succ` still costs one step per increment.

use std::collections::HashMap;
use std::sync::Arc;

use num_traits::{ToPrimitive, Zero};

use super::code::{decode, Code};
use super::expr::Expr;
use super::oracle::OracleSpec;
use crate::nat::Nat;

pub type Fuel = u64;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    Converged(Nat),
    FuelExhausted,
    Stuck,
}

/// Result of a run: the verdict plus the ordered list of queried naturals.
/// A run that terminates on a non-numeral value is `Stuck` and counts as
/// divergence for the program/domain semantics.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Outcome {
    pub verdict: Verdict,
    pub trace: Vec<Nat>,
}

impl Outcome {
    /// The use of the run: the largest queried natural, if any.
    pub fn use_max(&self) -> Option<Nat> {
        self.trace.iter().max().cloned()
    }

    pub fn converged(&self) -> Option<&Nat> {
        match &self.verdict {
            Verdict::Converged(v) => Some(v),
            _ => None,
        }
    }

    pub fn is_converged(&self) -> bool {
        matches!(self.verdict, Verdict::Converged(_))
    }
}

#[derive(Clone)]
enum Value {
    Num(Arc<Nat>),
    Closure(Arc<Expr>, Env),
}

#[derive(Clone)]
enum Binding {
    Val(Value),
    /// Self-reference installed by `fix`; looking it up re-enters the fix.
    SelfRef(Arc<Expr>, Env),
}

#[derive(Clone, Default)]
struct Env(Option<Arc<EnvNode>>);

struct EnvNode {
    binding: Binding,
    rest: Env,
}

impl Env {
    fn nil() -> Env {
        Env(None)
    }

    fn push(&self, binding: Binding) -> Env {
        Env(Some(Arc::new(EnvNode {
            binding,
            rest: self.clone(),
        })))
    }

    fn lookup(&self, index: &Nat) -> Option<Binding> {
        let mut remaining = index.to_u64()?;
        let mut cur = self;
        loop {
            let node = cur.0.as_deref()?;
            if remaining == 0 {
                return Some(node.binding.clone());
            }
            remaining -= 1;
            cur = &node.rest;
        }
    }
}

enum Frame {
    AppFun { arg: Arc<Expr>, env: Env },
    AppArg { fun: Value },
    /// Apply the value being returned to an already-evaluated argument.
    AppFlip { arg: Value },
    Succ1,
    Case1 { zero: Arc<Expr>, succ: Arc<Expr>, env: Env },
    Query1,
    RunCode { arg: Arc<Expr>, env: Env },
    RunArg { code: Arc<Nat> },
}

enum State {
    Eval(Arc<Expr>, Env),
    Ret(Value),
}

/// Answer a single oracle query. Program oracles run under their own fuel
/// against the empty oracle; failure to produce a bit is reported so the
/// surrounding run can exhaust, per the oracle totality contract.
pub fn oracle_answer(oracle: &OracleSpec, k: &Nat) -> Result<u8, OracleFailure> {
    match oracle {
        OracleSpec::Table { bits, default } => Ok(k
            .to_usize()
            .and_then(|i| bits.get(i).copied())
            .unwrap_or(*default)),
        OracleSpec::Program {
            code,
            fuel_per_query,
        } => {
            let out = phi_apply(&Code(code.clone()), k, &OracleSpec::empty(), *fuel_per_query);
            match out.verdict {
                Verdict::Converged(v) => {
                    v.to_u8().filter(|b| *b <= 1).ok_or(OracleFailure::NotABit)
                }
                _ => Err(OracleFailure::NoAnswer),
            }
        }
        OracleSpec::Staged { entries } => Ok(entries
            .iter()
            .any(|(elem, _)| Nat::from(*elem) == *k) as u8),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OracleFailure {
    NoAnswer,
    NotABit,
}

/// Deterministic small-step evaluation of a closed term under an oracle.
pub fn eval(e: &Expr, oracle: &OracleSpec, fuel: Fuel) -> Outcome {
    run_machine(Arc::new(e.clone()), oracle, fuel)
}

/// The universal application: evaluates `App(decode(e), numeral x)`.
/// Convergence of this run is what membership and function semantics mean.
pub fn phi_apply(code: &Code, x: &Nat, oracle: &OracleSpec, fuel: Fuel) -> Outcome {
    let start = Expr::App(
        Arc::new(code.decode()),
        Arc::new(Expr::Num(x.clone())),
    );
    run_machine(Arc::new(start), oracle, fuel)
}

/// Domain membership: `x` is in the domain of program `e` iff this run
/// converges to a numeral. Monotone in fuel.
pub fn w_member(code: &Code, x: &Nat, oracle: &OracleSpec, fuel: Fuel) -> bool {
    phi_apply(code, x, oracle, fuel).is_converged()
}

/// The use of `phi_apply(e, x)`: the largest queried natural, or none.
pub fn use_of(code: &Code, x: &Nat, oracle: &OracleSpec, fuel: Fuel) -> Option<Nat> {
    phi_apply(code, x, oracle, fuel).use_max()
}

fn run_machine(start: Arc<Expr>, oracle: &OracleSpec, fuel: Fuel) -> Outcome {
    let mut trace: Vec<Nat> = Vec::new();
    let mut stack: Vec<Frame> = Vec::new();
    let mut decode_cache: HashMap<Nat, Arc<Expr>> = HashMap::new();
    let mut state = State::Eval(start, Env::nil());
    let mut remaining = fuel;

    loop {
        if remaining == 0 {
            return Outcome {
                verdict: Verdict::FuelExhausted,
                trace,
            };
        }
        remaining -= 1;

        state = match state {
            State::Eval(e, env) => match &*e {
                Expr::Var(i) => match env.lookup(i) {
                    None => return stuck(trace),
                    Some(Binding::Val(v)) => State::Ret(v),
                    Some(Binding::SelfRef(fx, fenv)) => State::Eval(fx, fenv),
                },
                Expr::Num(k) => State::Ret(Value::Num(Arc::new(k.clone()))),
                Expr::Lam(b) => State::Ret(Value::Closure(b.clone(), env)),
                Expr::App(f, a) => {
                    stack.push(Frame::AppFun {
                        arg: a.clone(),
                        env: env.clone(),
                    });
                    State::Eval(f.clone(), env)
                }
                Expr::Succ(b) => {
                    stack.push(Frame::Succ1);
                    State::Eval(b.clone(), env)
                }
                Expr::Case(s, z, b) => {
                    stack.push(Frame::Case1 {
                        zero: z.clone(),
                        succ: b.clone(),
                        env: env.clone(),
                    });
                    State::Eval(s.clone(), env)
                }
                Expr::Fix(b) => {
                    let self_ref = Binding::SelfRef(e.clone(), env.clone());
                    State::Eval(b.clone(), env.push(self_ref))
                }
                Expr::Query(b) => {
                    stack.push(Frame::Query1);
                    State::Eval(b.clone(), env)
                }
                Expr::Run(c, a) => {
                    stack.push(Frame::RunCode {
                        arg: a.clone(),
                        env: env.clone(),
                    });
                    State::Eval(c.clone(), env)
                }
            },

            State::Ret(v) => match stack.pop() {
                None => {
                    return match v {
                        Value::Num(k) => Outcome {
                            verdict: Verdict::Converged((*k).clone()),
                            trace,
                        },
                        Value::Closure(..) => stuck(trace),
                    }
                }
                Some(Frame::AppFun { arg, env }) => {
                    stack.push(Frame::AppArg { fun: v });
                    State::Eval(arg, env)
                }
                Some(Frame::AppArg { fun }) => match fun {
                    Value::Closure(body, cenv) => {
                        State::Eval(body, cenv.push(Binding::Val(v)))
                    }
                    Value::Num(_) => return stuck(trace),
                },
                Some(Frame::AppFlip { arg }) => match v {
                    Value::Closure(body, cenv) => {
                        State::Eval(body, cenv.push(Binding::Val(arg)))
                    }
                    Value::Num(_) => return stuck(trace),
                },
                Some(Frame::Succ1) => match v {
                    Value::Num(k) => State::Ret(Value::Num(Arc::new((*k).clone() + 1u32))),
                    Value::Closure(..) => return stuck(trace),
                },
                Some(Frame::Case1 { zero, succ, env }) => match v {
                    Value::Num(k) if k.is_zero() => State::Eval(zero, env),
                    Value::Num(k) => {
                        let pred = Value::Num(Arc::new((*k).clone() - 1u32));
                        State::Eval(succ, env.push(Binding::Val(pred)))
                    }
                    Value::Closure(..) => return stuck(trace),
                },
                Some(Frame::Query1) => match v {
                    Value::Num(k) => {
                        trace.push((*k).clone());
                        match oracle_answer(oracle, &k) {
                            Ok(bit) => State::Ret(Value::Num(Arc::new(Nat::from(bit)))),
                            Err(_) => {
                                return Outcome {
                                    verdict: Verdict::FuelExhausted,
                                    trace,
                                }
                            }
                        }
                    }
                    Value::Closure(..) => return stuck(trace),
                },
                Some(Frame::RunCode { arg, env }) => match v {
                    Value::Num(c) => {
                        stack.push(Frame::RunArg { code: c });
                        State::Eval(arg, env)
                    }
                    Value::Closure(..) => return stuck(trace),
                },
                Some(Frame::RunArg { code }) => match v {
                    num_val @ Value::Num(_) => {
                        let prog = decode_cache
                            .entry((*code).clone())
                            .or_insert_with(|| Arc::new(decode(&code)))
                            .clone();
                        stack.push(Frame::AppFlip { arg: num_val });
                        State::Eval(prog, Env::nil())
                    }
                    Value::Closure(..) => return stuck(trace),
                },
            },
        };
    }
}

fn stuck(trace: Vec<Nat>) -> Outcome {
    Outcome {
        verdict: Verdict::Stuck,
        trace,
    }
}
