//! Exact formal normal forms for finite-type real hypersurfaces in ℂ².
//!
//! A hypersurface is written `v = F(x, y, u)` in coordinates `z = x + iy`,
//! `w = u + iv`, with `F` truncated at a chosen weight `N` (`x`, `y` have
//! weight one, `u` has weight `k`). All arithmetic is over the rationals or
//! Gaussian rationals; results hold exactly through weight `N`.

pub mod equivalence;
pub mod error;
pub mod hypersurface;
pub mod linalg;
pub mod normalize;
pub mod number;
pub mod series;
pub mod symmetry;
pub mod transform;

pub use error::{Error, Result};
pub use hypersurface::{validate, BasisTag, Hypersurface, ModelInfo};
pub use number::{GaussRat, QuarterTurn, Rat};
pub use series::{ComplexSeries, HoloMonomial, HoloSeries, Monomial, RealSeries};
pub use transform::{apply_linear, compose, invert, model_automorphism, pushforward, FormalMap, LinearFactor, ModelAutParams};
pub use equivalence::{rigid_equivalence_reduce, tube_equivalent, RadicalReal, TubeWitness};
pub use normalize::{check, nt_normalize, rigid_normalize, t_normalize, NormalFormKind};
pub use symmetry::{classify_aut, rotation_order, AutClass, AutTag};
