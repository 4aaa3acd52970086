//! Core of the Extensible Scenarios Notation toolkit.
//!
//! A traffic scenario is a collection of logical facts (`holds`, `occurs`
//! and timeless static atoms) plus Horn-style rules with negation as
//! failure, comparisons and arithmetic assignment. This crate provides the
//! ground datamodel, the `.esn` text language parser and formatter, the
//! stratified semi-naive fixpoint engine with proof recording, the shipped
//! rule library, and privacy-preserving export views.
//!
//! The crate is `no_std` (with `alloc`); everything that touches the file
//! system, JSONL logs or the command line lives in the companion `esn`
//! crate.

#![no_std]

extern crate alloc;

pub mod datamodel;
pub mod engine;
pub mod events;
pub mod parser;
pub mod privacy;

#[cfg(feature = "testkit")]
pub mod testkit;

pub use datamodel::{Fact, FactBase, Numeric, PredSig, Substitution, Term};
pub use parser::{Expr, Literal, Program, Rule};
