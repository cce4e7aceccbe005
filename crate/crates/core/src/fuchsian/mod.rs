//! Discrete subgroups of `PSL(2, R)`: presentations, orbit enumeration,
//! concave lattice points, Poincaré series and free products.

mod concave;
mod group;
mod orbit;
mod series;

pub use concave::{count_concave_lattice_points, thick_diameter, ConcaveConfig, ConcaveCounts};
pub use group::{free_product, reduce_modular, Arc, Generator, GroupKind, GroupPresentation};
pub use orbit::{enumerate_orbit, Element, OrbitConfig, OrbitEnumeration, OrbitRecord};
pub use series::{
    estimate_critical_exponent, free_product_lower_bound, poincare_partial_sum, CriticalExponent,
    PoincareSeriesEstimate, SeriesVerdict,
};
