//! Zero-sum invariants of finite abelian groups.

pub mod abelian;
pub mod certify;
pub mod constructions;
pub mod error;
pub mod invariants;
pub mod lemma_lab;
pub mod seq;

pub use abelian::{automorphisms, doubling_hom, AutomorphismSet, Element, GroupSpec, Homomorphism};
pub use error::{Error, Result};
pub use seq::{ReachTable, Sequence};
pub use certify::{Certificate, Certifier, ResultCache, RunConfig, Status, Theorem};
pub use invariants::{InvariantKind, InvariantResult, SearchBudget};
pub use lemma_lab::{LemmaCertificate, LemmaId};
