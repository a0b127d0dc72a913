//! Projective spectra of matrix tuples.
//!
//! For a tuple A = (A_0, ..., A_n) of k x k complex matrices, the pencil
//! A(z) = z_0 A_0 + ... + z_n A_n is singular on a degree-k projective
//! hypersurface, the projective spectrum. This crate computes that
//! spectrum and the analytic structure living on its complement:
//!
//! - [`linalg`]: dense complex kernels (LU, eigenvalues, singular values);
//! - [`pencil`]: tuples, the pencil, projective points, JSON interchange;
//! - [`detpoly`]: det A(z) as a homogeneous polynomial; line restrictions
//!   and their roots;
//! - [`spectrum`]: membership margins, line/cloud sampling, affine slices;
//! - [`arrangement`]: the hyperplane decomposition of commutative tuples
//!   via joint eigenvalues;
//! - [`mcform`]: the form A(z)^-1 dA(z), its differential identities, and
//!   scalar forms phi(omega_A);
//! - [`periods`]: contour integration, winding numbers, de Rham
//!   nontriviality certificates;
//! - [`equiv`]: similarity of forms and recovery of U A_j V = B_j;
//! - [`demos`]: clock-and-shift rotation model and the disk-algebra demo.

pub mod arrangement;
pub mod demos;
pub mod detpoly;
pub mod equiv;
pub mod linalg;
pub mod mcform;
pub mod pencil;
pub mod periods;
pub mod rng;
pub mod spectrum;
