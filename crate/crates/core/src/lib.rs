//! Posit and fixed-point number formats, a bit-level posit to fixed-point
//! converter, MAC unit models, quantization analysis and a small
//! accelerator simulator.

pub mod accel;
pub mod dyadic;
pub mod error;
pub mod fxp;
pub mod mac;
pub mod normalized;
pub mod pareto;
pub mod pofx;
pub mod posit;
pub mod quant;

pub use accel::{AccelKind, AcceleratorDesign, ResourceAccount};
pub use dyadic::DyadicRational;
pub use error::{Error, Result};
pub use fxp::{FxpConfig, FxpPattern, Requant, SignMagPattern};
pub use mac::{MacDesign, MacKind, MacTrace};
pub use normalized::NormalizedPositPattern;
pub use pareto::ParetoPoint;
pub use pofx::{ConverterSpec, StageTrace, Variant};
pub use posit::{PositConfig, PositPattern};
pub use quant::{ErrorReport, LayerTensor, QuantScheme};
