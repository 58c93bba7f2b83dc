//! Exact arithmetic for cubic étale algebras over F_p and Z/p^k, prescribed
//! trace/norm point counts, norm-one torus coset counts, and a certified
//! local branch algorithm for trace equations along p-adic orbits.

pub mod algebra;
pub mod arith;
pub mod branch;
pub mod census;
pub mod stats;
pub mod counts;
pub mod rankd;
pub mod torus;
pub mod verify;
pub mod wieferich;
