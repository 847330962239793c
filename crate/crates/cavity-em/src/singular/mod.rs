//! Aperture integrals of trigonometric modes against the free-space
//! Helmholtz kernel g(r) = e^{iκr}/(4πr).

pub mod bessel;
pub mod cache;
pub mod fresnel;
pub mod gram;
pub mod oracle;
pub mod transform;

pub use bessel::{bessel_osc_integral, Regime};
pub use fresnel::{fresnel_tail, fresnel_tail_32};
pub use gram::{exp_gram, trig_gram, ExpGram, GramTensor, Tensor4};
pub use transform::{rect_mode_transform, FftGrid, KernelTable};
