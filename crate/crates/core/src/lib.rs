//! Numerical evidence for local uniqueness of autonomous ODEs `z' = F(z)`.
//!
//! A solution through `p₀` is unique when `F` is transversal to a local
//! foliation through `p₀` and Lipschitz along its leaves, even if `F` is not
//! Lipschitz. This crate builds such foliations (affine, graph, from a
//! moving frame, or from an explicit map), pulls fields back into foliation
//! coordinates, samples Lipschitz constants and moduli of continuity, and
//! reports a verdict. Integration harnesses and residual checks show what
//! happens when the hypotheses fail.
//!
//! ```
//! use foliant::checker::{check_main, CheckParams, Verdict};
//! use foliant::field::registry_get;
//! use foliant::foliation::Foliation;
//! use foliant::linalg::Vector;
//!
//! let field = registry_get("parabola-field").unwrap().into_field().unwrap();
//! let map = registry_get("parabola-foliation").unwrap().into_map().unwrap();
//! let phi = Foliation::from_map(map, Vector::new(vec![0.0, 0.0]).unwrap()).unwrap();
//! let report = check_main(&field, &phi, &CheckParams::default());
//! assert_eq!(report.verdict, Verdict::Supported);
//! ```

pub mod checker;
pub mod cli;
pub mod config;
pub mod expr;
pub mod field;
pub mod foliation;
pub mod linalg;
pub mod modulus;
pub mod ode;
pub mod projective;
pub mod report;
pub mod rotation;
pub mod sampling;
pub mod transform;
