//! Expected hypervolume improvement for separable normal predictions.

mod evi;
pub mod grid;
pub mod integrals;

pub use evi::{
    box_intersects_ellipsoid, evi_exact, evi_truncated, sector_intersects_ellipsoid, EviGrid,
    TruncationEllipsoid,
};
pub use grid::{Bound, GridAxis, Sector, SectorGrid};
pub use integrals::{
    gaussian_integral_i1, gaussian_integral_i2, gaussian_integral_i3, gaussian_mass_below,
    prob_at_least,
};
