pub mod amra;
pub mod analysis;
pub mod bankgen;
pub mod error;
pub mod intlat;
pub mod mask;
pub mod ops;
pub mod rotapprox;
pub mod signal;
pub mod uep;

pub use amra::{NodeId, Pyramid, TreePlan};
pub use analysis::{GridFunction, RefinablePair};
pub use bankgen::{SeedBank1D, SeedName};
pub use error::{Error, Result};
pub use intlat::{CosetRep, IntMatrix, RatMatrix, RationalVec, SmithFactors};
pub use mask::{Band, Mask};
pub use rotapprox::RotationSolution;
pub use signal::Signal;
pub use uep::{BankItem, FilterBank, UepReport, Violation};
