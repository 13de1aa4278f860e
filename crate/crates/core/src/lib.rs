//! Self-consistency viewed as empirical mode estimation.
//!
//! The crate covers per-question error (exact enumeration, Monte Carlo and
//! the exponential margin bound), synthetic dataset families and their
//! Laplace-transform error curves, fixed and dynamic sample-allocation
//! policies (vanilla SC, oracle fixed allocation, ASC, ESC, PPR-1v1 and
//! Blend-ASC), the experiment harness that turns runs into error-vs-budget
//! curves and fits, file formats, and a chat-completions sample collector.

// `!(x > 0.0)` style checks are meant to reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod answer_model;
pub mod cli;
pub mod collector;
pub mod data_io;
pub mod error;
pub mod harness;
pub mod oracle_bounds;
pub mod policies;
pub mod quadrature;
pub mod rng;
pub mod specfun;
pub mod synth;

pub use answer_model::{
    Alignment, AnswerDist, EmpiricalCounts, QuestionInstance, QuestionSet, TailBucket,
};
pub use error::{Error, Result};
pub use oracle_bounds::{ErrorEstimate, EstimateMethod, LowerBound};
pub use synth::{MarginPdfSpec, TopTwoSample};
