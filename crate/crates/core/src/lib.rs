//! Desk-scale constructions for time-bounded randomness of interleaved sequences.

pub mod bits;
pub mod capital;
pub mod coding;
pub mod construct;
pub mod kolmo;
pub mod lookahead;
pub mod machine;
pub mod martingale;
pub mod par;
