//! Exact machinery around ideals of generic fat points in projective space:
//! Cremona-reduction emptiness certificates, a proof calculus for lower
//! bounds on Waldschmidt constants, monomial-ideal containment checks for
//! points in general coordinate position, and a finite-field interpolation
//! oracle for independent numerical confirmation.

pub mod cremona;
pub mod error;
pub mod forms;
pub mod glue;
pub mod monomials;
pub mod oracle;
pub mod prover;
pub mod report;

pub use error::Error;
