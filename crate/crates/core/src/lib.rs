//! Numerical harmonic analysis on periodic grids: Poisson, Bessel and Riesz
//! kernels, tangential approach regions and their maximal functions,
//! fractional measures, and Lipschitz graph geometry.

pub mod data;
pub mod error;
pub mod extension;
pub mod fractal;
pub mod grid;
pub mod io;
pub mod kernels;
pub mod lipschitz;
pub mod maximal;
pub mod potentials;
pub mod quad;

pub use error::{Error, Result};
pub use grid::{ball_average, fft_convolve, lp_norm, make_grid, Grid, GridFunction};
