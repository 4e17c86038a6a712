//! Bit-accurate MAC unit models.
//!
//! Every design multiplies `m`-bit activations with weights and reduces the
//! products to one `FxP(m, f)` word:
//!
//! | kind | weights | datapath |
//! |---|---|---|
//! | `FxpOnly` | FxP | `m×m` multiply, `3m` accumulate |
//! | `PoFxConvertPerUse` | normalized posit | convert each use, then as `FxpOnly` |
//! | `PositOnly` | normalized posit | posit multiply, posit add, in order |
//! | `PositFma` | normalized posit | exact sum of products, one rounding |

use serde::{Deserialize, Serialize};

use crate::dyadic::DyadicRational;
use crate::error::{Error, Result};
use crate::fxp::{fxp_multiply, fxp_quantize_with, relu, requantize, Accumulator, FxpConfig, FxpPattern, Requant};
use crate::normalized::{self, NormalizedPositPattern};
use crate::pofx::{self, ConverterSpec};
use crate::posit::{decode_value, encode_round, posit_add, posit_fma_accumulate, posit_mul, PositConfig, PositPattern};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MacKind {
    FxpOnly,
    PoFxConvertPerUse,
    PositOnly,
    PositFma,
}

impl MacKind {
    pub fn takes_posit_weights(self) -> bool {
        self != MacKind::FxpOnly
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct MacDesign {
    pub kind: MacKind,
    /// Weight format for the posit kinds; ignored by `FxpOnly`.
    pub posit: PositConfig,
    /// Activation and output format, and the converter target.
    pub fxp: FxpConfig,
    pub requant: Requant,
}

impl MacDesign {
    pub fn new(kind: MacKind, posit: PositConfig, fxp: FxpConfig, requant: Requant) -> Result<Self> {
        if kind == MacKind::PoFxConvertPerUse {
            ConverterSpec::normalized(posit, fxp.m())?;
            if fxp.f() + 1 != fxp.m() {
                return Err(Error::NormalizedFractionMismatch { m: fxp.m(), f: fxp.f() });
            }
        }
        Ok(MacDesign {
            kind,
            posit,
            fxp,
            requant,
        })
    }

    /// Bits per weight read from weight memory.
    pub fn weight_bits(&self) -> u32 {
        match self.kind {
            MacKind::FxpOnly => self.fxp.m(),
            MacKind::PoFxConvertPerUse => self.posit.n() - 1,
            MacKind::PositOnly | MacKind::PositFma => self.posit.n(),
        }
    }

    fn converter(&self) -> ConverterSpec {
        ConverterSpec::normalized(self.posit, self.fxp.m()).expect("validated in new")
    }
}

/// Event counts of one or more MAC evaluations.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MacTrace {
    pub conversions: u64,
    pub weight_bits_fetched: u64,
    pub accumulator_saturations: u64,
}

impl std::ops::AddAssign for MacTrace {
    fn add_assign(&mut self, o: Self) {
        self.conversions += o.conversions;
        self.weight_bits_fetched += o.weight_bits_fetched;
        self.accumulator_saturations += o.accumulator_saturations;
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Weights<'a> {
    Fxp(&'a [FxpPattern]),
    Posit(&'a [NormalizedPositPattern]),
}

impl Weights<'_> {
    pub fn len(&self) -> usize {
        match self {
            Weights::Fxp(w) => w.len(),
            Weights::Posit(w) => w.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// The result before narrowing to the output format.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RawResult {
    /// The `(3m, 2f)` accumulator.
    Accumulator(FxpPattern),
    Posit(PositPattern),
}

impl RawResult {
    pub fn value(&self) -> Option<DyadicRational> {
        match self {
            RawResult::Accumulator(a) => Some(a.value()),
            RawResult::Posit(p) => decode_value(*p),
        }
    }
}

/// Output of the converter as a two's-complement word. A flagged underflow
/// has magnitude 0 and so becomes 0; −1 becomes `-(1 - 2^-f)`.
pub fn converted_weight(spec: &ConverterSpec, w: NormalizedPositPattern) -> Result<FxpPattern> {
    let (sm, _) = pofx::convert(spec, w)?;
    let mag = sm.magnitude as i128;
    FxpPattern::new(sm.config, if sm.sign { -mag } else { mag })
}

pub fn dot_product_raw(design: &MacDesign, weights: Weights<'_>, acts: &[FxpPattern]) -> Result<(RawResult, MacTrace)> {
    if weights.len() != acts.len() {
        return Err(Error::LengthMismatch {
            expected: weights.len(),
            found: acts.len(),
        });
    }
    if acts.iter().any(|a| a.config() != design.fxp) {
        return Err(Error::ConfigMismatch);
    }
    let mut trace = MacTrace {
        weight_bits_fetched: weights.len() as u64 * design.weight_bits() as u64,
        ..MacTrace::default()
    };
    match (design.kind, weights) {
        (MacKind::FxpOnly, Weights::Fxp(ws)) => {
            let mut acc = Accumulator::new(design.fxp);
            for (w, a) in ws.iter().zip(acts) {
                acc.add(fxp_multiply(*w, *a)?)?;
            }
            trace.accumulator_saturations = acc.saturations();
            Ok((RawResult::Accumulator(acc.value()), trace))
        }
        (MacKind::PoFxConvertPerUse, Weights::Posit(ws)) => {
            let spec = design.converter();
            let mut acc = Accumulator::new(design.fxp);
            for (w, a) in ws.iter().zip(acts) {
                check_posit(design, *w)?;
                let fw = converted_weight(&spec, *w)?;
                trace.conversions += 1;
                acc.add(fxp_multiply(fw, *a)?)?;
            }
            trace.accumulator_saturations = acc.saturations();
            Ok((RawResult::Accumulator(acc.value()), trace))
        }
        (MacKind::PositOnly, Weights::Posit(ws)) => {
            let mut acc = PositPattern::zero(design.posit);
            for (w, a) in ws.iter().zip(acts) {
                check_posit(design, *w)?;
                let pa = encode_round(&a.value(), design.posit);
                let prod = posit_mul(normalized::expand(*w), pa)?;
                acc = posit_add(acc, prod)?;
            }
            Ok((RawResult::Posit(acc), trace))
        }
        (MacKind::PositFma, Weights::Posit(ws)) => {
            for w in ws {
                check_posit(design, *w)?;
            }
            let pairs = ws
                .iter()
                .zip(acts)
                .map(|(w, a)| (normalized::expand(*w), encode_round(&a.value(), design.posit)));
            let p = posit_fma_accumulate(design.posit, pairs)?;
            Ok((RawResult::Posit(p), trace))
        }
        _ => Err(Error::WeightKindMismatch),
    }
}

fn check_posit(design: &MacDesign, w: NormalizedPositPattern) -> Result<()> {
    if w.config() != design.posit {
        return Err(Error::ConfigMismatch);
    }
    Ok(())
}

/// Narrows a raw result to `design.fxp` per `design.requant`.
pub fn narrow(design: &MacDesign, raw: RawResult) -> Result<FxpPattern> {
    match raw {
        RawResult::Accumulator(a) => Ok(requantize(a, design.fxp, design.requant)),
        RawResult::Posit(p) => {
            let v = decode_value(p).ok_or(Error::NotAReal)?;
            Ok(fxp_quantize_with(&v, design.fxp, design.requant))
        }
    }
}

pub fn dot_product(design: &MacDesign, weights: Weights<'_>, acts: &[FxpPattern]) -> Result<(FxpPattern, MacTrace)> {
    let (raw, trace) = dot_product_raw(design, weights, acts)?;
    Ok((narrow(design, raw)?, trace))
}

/// Row-major `rows × cols` matrix; row `r` holds the weights of output `r`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Matrix<T> {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<T>,
}

impl<T> Matrix<T> {
    pub fn new(rows: usize, cols: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::ShapeMismatch(format!(
                "{} elements for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(Matrix { rows, cols, data })
    }

    pub fn row(&self, r: usize) -> &[T] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum WeightMatrix {
    Fxp(Matrix<FxpPattern>),
    Posit(Matrix<NormalizedPositPattern>),
}

impl WeightMatrix {
    pub fn rows(&self) -> usize {
        match self {
            WeightMatrix::Fxp(m) => m.rows,
            WeightMatrix::Posit(m) => m.rows,
        }
    }

    pub fn cols(&self) -> usize {
        match self {
            WeightMatrix::Fxp(m) => m.cols,
            WeightMatrix::Posit(m) => m.cols,
        }
    }

    pub fn len(&self) -> usize {
        self.rows() * self.cols()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn row(&self, r: usize) -> Weights<'_> {
        match self {
            WeightMatrix::Fxp(m) => Weights::Fxp(m.row(r)),
            WeightMatrix::Posit(m) => Weights::Posit(m.row(r)),
        }
    }
}

/// One dot product per row, then ReLU. Outputs are already in `design.fxp`.
pub fn layer_forward(design: &MacDesign, w: &WeightMatrix, acts: &[FxpPattern]) -> Result<(Vec<FxpPattern>, MacTrace)> {
    if acts.len() != w.cols() {
        return Err(Error::ShapeMismatch(format!(
            "{} activations for {} weight columns",
            acts.len(),
            w.cols()
        )));
    }
    let mut trace = MacTrace::default();
    let mut out = Vec::with_capacity(w.rows());
    for r in 0..w.rows() {
        let (y, t) = dot_product(design, w.row(r), acts)?;
        trace += t;
        out.push(relu(y));
    }
    Ok((out, trace))
}
