//! Continuum counterparts: Fourier modes, the conformal map of the slit-strip,
//! Pfaffian kernels, pole functions and continuum fusion coefficients.

pub mod conformal;
pub mod fusion;
pub mod kernels;
pub mod modes;
pub mod pfaffian;
pub mod poles;
pub mod quadrature;

pub use conformal::{conformal_eval, ConformalEval};
pub use fusion::{continuum_fusion, continuum_recursion, ContinuumValue, Heights, IndexTuple};
pub use kernels::{two_point_kernel, Coefficient, KernelVariant};
pub use modes::{ContinuumMode, ModeFamily};
pub use pfaffian::pfaffian;
pub use poles::{ContinuumInnerProducts, ContinuumPole};
pub use quadrature::QuadratureConfig;
