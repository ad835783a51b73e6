//! Shift-invariant S-boxes generated by local Boolean rules.
//!
//! A rule `f` on `k` variables induces the map `F` on `n` bits whose `i`-th
//! output is `f(x_i, ..., x_{i+k-1})` with indices taken mod `n`. Bit `i` of a
//! word holds `x_{i+1}`.

pub mod boolfun;
pub mod circulant;
pub mod constructions;
pub mod equivalence;
pub mod error;
pub mod metrics;
pub mod sbox;
pub mod search;

pub use boolfun::{parse_function, AnfPolynomial, BooleanFunction, WalshSpectrum};
pub use circulant::{count_invertible_circulant, count_shift_invariant_bijections, CirculantKMatrix};
pub use equivalence::{cyclic_equivalent, essential_orbit, strong_affine_equivalent, EquivalenceWitness};
pub use error::{Error, Result};
pub use metrics::{metrics_record, MetricsRecord};
pub use sbox::{induce, inv_set, LookupTable, RSBox};
pub use search::{enumerate_liftings, LiftingReport, ResumeToken, SearchConstraints};
