//! Monodromy of punctured projective lines from the intersection behavior of
//! their branch points.
//!
//! The pipeline runs
//! [`intersection`] → [`clusters`] → [`monodromy`], producing the action of a
//! generator `delta` of the (tame) inertia on the free generators
//! `x1..xd` as a product of commuting Dehn twists, one per cluster, and the
//! resulting generators-and-relations presentation. Two independent routes
//! check it: [`braid`] rebuilds each twist from the Artin action of a braid
//! word, and [`topocheck`] recovers the whole monodromy braid numerically by
//! tracking the branch points of a witness polynomial family. [`quotients`]
//! pushes the action down to finite groups and measures field-of-moduli
//! degrees of cover classes.
//!
//! The emitted presentation is a discrete one; the fundamental group of
//! interest is its prime-to-p profinite completion.

pub mod braid;
pub mod clusters;
pub mod error;
pub mod freegroup;
pub mod intersection;
pub mod monodromy;
pub mod quotients;
pub mod rational;
pub mod topocheck;

pub use error::{Error, Result};

/// Version tag written into every JSON document this crate produces.
pub const SCHEMA_VERSION: u32 = 1;
