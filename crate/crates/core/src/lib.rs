//! Braid monodromy of complex plane curves by numerical path tracking.
//!
//! A curve `f(z, t) = 0` is viewed as a branched cover of the `t`-line. For
//! each branch point the fiber is tracked around a small loop based at a
//! common base point, and the way the real parts of the roots exchange order
//! is recorded as a word in the braid group.

pub mod poly;
pub mod homotopy;
pub mod branchlocus;
pub mod braid;
pub mod crossdetect;
pub mod looper;
pub mod engine;
