//! Exact invariants of spatial polygon spaces N(ℓ).

pub mod catalog;
pub mod cohomology;
pub mod exact;
pub mod genetics;
pub mod immersion;
pub mod ktheory;
pub mod linalg;
pub mod verify;
