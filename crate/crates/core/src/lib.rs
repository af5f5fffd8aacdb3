//! Exact and modular computations in the bigraded Jacobian ring of an open
//! complete intersection `U = X \ Z` in projective space.
//!
//! Given forms `F_1..F_r` cutting out `X` and `G_1..G_s` cutting out the
//! boundary `Z`, [`JacobianRing`] computes the quotient pieces `B_q(l)`, the
//! trace on the top piece and multiplication maps. On top of it sit
//! checkers for the duality pairing ([`duality`]), Koszul exactness
//! ([`koszul`]), residues of logarithmic forms ([`logforms`]), comparisons
//! with independent Hodge number oracles ([`oracles`]) and transversality
//! certificates ([`certify`]).
//!
//! ```
//! use jacring::{reference, BiDegree, JacobianRing, PrimeField};
//!
//! let quartic = reference::fermat_quartic();
//! let ring = JacobianRing::new(&quartic, PrimeField::new(1_000_003).unwrap()).unwrap();
//! assert_eq!(ring.dim_b(BiDegree::new(1, 0)).unwrap(), 19);
//! ```

pub mod bigraded;
pub mod certify;
pub mod duality;
pub mod error;
pub mod field;
pub mod instance;
pub mod io;
pub mod jacring;
pub mod koszul;
pub mod linalg;
pub mod logforms;
pub mod modular;
pub mod oracles;
pub mod poly;
pub mod verdict;

pub use bigraded::{AlgElement, AlgPoly, BiDegree, Grading};
pub use certify::{certify_transversality, generate_certified, Transversality, TransversalityReport};
pub use duality::{duality_check, duality_condition, eta_kernel, pairing_matrix, DualityCondition};
pub use error::{Error, Result};
pub use field::{Field, FieldSpec, PrimeField, RationalField};
pub use instance::{reference, Instance};
pub use io::{instance_digest, load_instance, InstanceFile};
pub use jacring::{JacobianRing, Trace};
pub use koszul::{exactness_condition, koszul_complex, koszul_exactness_check, multiplication_kernel, ExactnessCondition};
pub use linalg::SparseLinearMap;
pub use logforms::{residue_matrix_check, DlogElement, DlogWord};
pub use modular::{RingTask, Workbench, WorkbenchOptions};
pub use poly::{HomogPoly, Monomial};
pub use verdict::Verdict;

/// The guide's code snippets, compiled and run as doc-tests.
#[cfg(doctest)]
pub mod guide {
    #[doc = include_str!("../../../README.md")]
    pub struct Readme;
    #[doc = include_str!("../../../book/src/introduction.md")]
    pub struct Introduction;
    #[doc = include_str!("../../../book/src/instances.md")]
    pub struct Instances;
    #[doc = include_str!("../../../book/src/jacobian-ring.md")]
    pub struct JacobianRingChapter;
    #[doc = include_str!("../../../book/src/duality.md")]
    pub struct Duality;
    #[doc = include_str!("../../../book/src/koszul.md")]
    pub struct Koszul;
    #[doc = include_str!("../../../book/src/log-forms.md")]
    pub struct LogForms;
    #[doc = include_str!("../../../book/src/certification.md")]
    pub struct Certification;
    #[doc = include_str!("../../../book/src/modular.md")]
    pub struct Modular;
    #[doc = include_str!("../../../book/src/cli.md")]
    pub struct Cli;
}
