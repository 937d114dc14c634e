//! Beam synthesis for cylindrical reconfigurable intelligent surfaces.
//!
//! The crate covers three levels of modelling for a cylinder illuminated by a
//! plane wave:
//!
//! * [`exact`]: the modal-expansion surface impedance that reproduces a
//!   steered plane wave on the surface, with gain and loss regions;
//! * [`go`]: the locally passive, purely reactive tangent-plane design and its
//!   far field by physical-optics propagation;
//! * [`discrete`] plus [`meta_atom`]: a conformal array of switchable
//!   elements, synthesized by the strategies in [`optim`].
//!
//! ```
//! use cylris::geometry::{CylinderGeometry, SteeringSpec};
//! use cylris::discrete::{build_array, ElementPattern};
//! use cylris::meta_atom::{ideal_one_bit, PhaseTaper, StateSets};
//! use cylris::optim::{go_quantized, Problem};
//!
//! let geom = CylinderGeometry::new(0.4, 3.6e9)?;
//! let array = build_array(&geom, 30, 0.038, ElementPattern::Cosine)?;
//! let phi_o = 30f64.to_radians();
//! let width = 1.2 * cylris::discrete::reference_beamwidth(&array, phi_o)?;
//! let sets = StateSets::for_array(&ideal_one_bit(PhaseTaper::Constant), &array);
//! let problem = Problem::new(array, SteeringSpec::new(phi_o, width)?, sets, 361)?;
//! let result = go_quantized(&problem);
//! assert!(result.objective < 1.0);
//! # Ok::<(), cylris::Error>(())
//! ```

pub mod discrete;
pub mod exact;
pub mod export;
pub mod geometry;
pub mod go;
pub mod meta_atom;
pub mod optim;
pub mod pattern;
pub mod specfun;

mod error;

pub use error::{Error, Result};

// book chapters as doc-tests
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/special-functions.md")]
    mod special_functions {}
    #[doc = include_str!("../../../book/src/geometry.md")]
    mod geometry {}
    #[doc = include_str!("../../../book/src/exact-synthesis.md")]
    mod exact_synthesis {}
    #[doc = include_str!("../../../book/src/go-synthesis.md")]
    mod go_synthesis {}
    #[doc = include_str!("../../../book/src/discrete-model.md")]
    mod discrete_model {}
    #[doc = include_str!("../../../book/src/meta-atoms.md")]
    mod meta_atoms {}
    #[doc = include_str!("../../../book/src/optimizers.md")]
    mod optimizers {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
