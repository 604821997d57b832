pub mod acceptance;
pub mod error;
pub mod flow;
pub mod free;
pub mod geom;
pub mod json;
pub mod lip;
pub mod lp;
pub mod metric;
pub mod pairs;
pub mod random;
pub mod scalar;
pub mod smooth;

pub use error::{Error, Result};
pub use free::{check_duality, check_duality_tol, kr_norm, kr_norm_dual, kr_norm_primal, FreeVector};
pub use lip::{mcshane_extend, LipFunction};
pub use metric::PointedMetricSpace;
pub use pairs::PairSystem;
pub use scalar::{Rational, Scalar, Surd};
pub use smooth::{c1_extend, C1Extension, ExtensionCertificate, ExtensionJob};

pub type ExactSpace = PointedMetricSpace<Surd>;
pub type RationalSpace = PointedMetricSpace<Rational>;
pub type FloatSpace = PointedMetricSpace<f64>;
