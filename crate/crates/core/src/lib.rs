//! Exact engine for generalized q-Schur algebras `S(π)` of a finite-type root
//! datum, the inverse limit `Û = lim S(π)`, and the embeddings of `U` and `U̇`
//! into it.
//!
//! Everything is computed over exact rings: Laurent polynomials `ℤ[v, v⁻¹]`,
//! the rational function field `ℚ(v)`, and specialization targets (`ℚ` and
//! cyclotomic fields).

pub mod intspec;
pub mod linalg;
pub mod qarith;
pub mod rootdata;
pub mod schur;
pub mod ulimit;
pub mod weylmod;
