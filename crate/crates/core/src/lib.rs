//! Numerical laboratory for traces of weighted Sobolev functions on the half-space:
//! heat and Poisson extensions, Besov seminorms, liftings and Riesz transforms on
//! periodic grids.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod besov;
pub mod error;
pub mod extension;
pub mod family;
pub mod fit;
pub mod grid;
pub mod jet;
pub mod kernels;
pub mod liftings;
pub mod quadrature;
pub mod riesz;
pub mod spectral;

pub use besov::{besov_seminorm, besov_seminorm_with, BesovOptions, BesovParams, SeminormReport};
pub use error::{Error, Result};
pub use extension::{
    extend, extension_derivative, weighted_seminorm, ExtensionField, HalfSpaceField, RatioOptions, RatioReport,
    RatioRow, WeightParams,
};
pub use family::{family_generator, family_members, FamilyMember, FamilyOptions};
pub use fit::LinearFit;
pub use grid::{GridFunction, GridSpec};
pub use jet::CutoffProfile;
pub use kernels::{KernelDerivative, KernelKind};
pub use liftings::{DecayRow, LiftingResult};
pub use quadrature::TQuadrature;
pub use riesz::RieszIndex;
pub use rustfft::num_complex::Complex64;
pub use spectral::{convolve, dilate, forward_transform, partial_derivative, MultiIndex, Nyquist, SpectralFunction};
