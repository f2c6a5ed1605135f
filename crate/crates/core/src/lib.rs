//! A kernel for recursively specified sequent-calculus proofs with
//! induction: terms and formula schemata over three parameter kinds, an
//! equational rewrite engine, a proof checker, schema validation and
//! unfolding, translation to and from the explicit-induction calculus, and
//! Herbrand-system extraction for the strict fragment.

pub mod calculus;
pub mod psk;
pub mod schema;
pub mod sexp;
pub mod check;
pub mod cli;
pub mod evaluation;
pub mod formula;
pub mod herbrand;
pub mod rewrite;
pub mod sequent;
pub mod sig;
pub mod subst;
pub mod term;
pub mod translate;
