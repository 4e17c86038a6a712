//! Weight-stationary simulation of one fully-connected layer with ReLU,
//! with payload bit accounting for the weights and activations.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::fxp::{fxp_quantize, FxpConfig, FxpPattern, Requant};
use crate::mac::{converted_weight, layer_forward, MacDesign, MacKind, Matrix, MacTrace, WeightMatrix};
use crate::normalized::{quantize_normalized, NormalizedPositPattern};
use crate::pofx::ConverterSpec;
use crate::posit::PositConfig;
use crate::quant::LayerTensor;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AccelKind {
    /// Weights and arithmetic in `Posit(n, es)`.
    PositAll,
    /// `n - 1` bits moved, converted once at load, stored as `FxP(m)`.
    PoFxMove,
    /// `n - 1` bits moved and stored, converted on every use.
    PoFxMoveStore,
    FxpOnly,
}

/// Text form: `fxp:M`, `posit:N:ES:M`, `pofx-move:N:ES:M`,
/// `pofx-store:N:ES:M`. Activations are `FxP(M, M - 1)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct AcceleratorDesign {
    pub kind: AccelKind,
    /// `None` only for `FxpOnly`.
    pub posit: Option<PositConfig>,
    pub fxp: FxpConfig,
    pub requant: Requant,
}

impl AcceleratorDesign {
    pub fn new(kind: AccelKind, posit: Option<PositConfig>, m: u32) -> Result<Self> {
        let fxp = FxpConfig::normalized(m)?;
        match (kind, posit) {
            (AccelKind::FxpOnly, None) => {}
            (AccelKind::FxpOnly, Some(_)) | (_, None) => return Err(Error::ConfigMismatch),
            (_, Some(p)) => {
                ConverterSpec::normalized(p, m)?;
            }
        }
        Ok(AcceleratorDesign {
            kind,
            posit,
            fxp,
            requant: Requant::default(),
        })
    }

    /// Bits per weight on the bus and in weight memory.
    pub fn weight_bits(&self) -> (u32, u32) {
        let n = self.posit.map_or(0, |p| p.n());
        let m = self.fxp.m();
        match self.kind {
            AccelKind::PositAll => (n, n),
            AccelKind::PoFxMove => (n - 1, m),
            AccelKind::PoFxMoveStore => (n - 1, n - 1),
            AccelKind::FxpOnly => (m, m),
        }
    }

    pub fn activation_bits(&self) -> u32 {
        match self.kind {
            AccelKind::PositAll => self.posit.expect("validated").n(),
            _ => self.fxp.m(),
        }
    }

    /// The MAC that computes the layer once weights are in memory.
    pub fn mac_design(&self) -> MacDesign {
        let (kind, posit) = match self.kind {
            AccelKind::PositAll => (MacKind::PositOnly, self.posit.expect("validated")),
            AccelKind::PoFxMoveStore => (MacKind::PoFxConvertPerUse, self.posit.expect("validated")),
            AccelKind::PoFxMove | AccelKind::FxpOnly => (
                MacKind::FxpOnly,
                // unused by FxpOnly
                self.posit.unwrap_or(PositConfig::new(2, 0).expect("valid")),
            ),
        };
        MacDesign::new(kind, posit, self.fxp, self.requant).expect("validated")
    }
}

impl fmt::Display for AcceleratorDesign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let m = self.fxp.m();
        match (self.kind, self.posit) {
            (AccelKind::FxpOnly, _) => write!(f, "fxp:{m}"),
            (kind, Some(p)) => {
                let tag = match kind {
                    AccelKind::PositAll => "posit",
                    AccelKind::PoFxMove => "pofx-move",
                    _ => "pofx-store",
                };
                write!(f, "{tag}:{}:{}:{m}", p.n(), p.es())
            }
            _ => unreachable!("validated"),
        }
    }
}

impl FromStr for AcceleratorDesign {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::parse("accelerator design", s);
        let mut parts = s.split(':');
        let tag = parts.next().ok_or_else(bad)?;
        let nums: Vec<u32> = parts
            .map(|p| p.parse::<u32>().map_err(|_| bad()))
            .collect::<Result<_>>()?;
        let kind = match tag {
            "fxp" => AccelKind::FxpOnly,
            "posit" => AccelKind::PositAll,
            "pofx-move" => AccelKind::PoFxMove,
            "pofx-store" => AccelKind::PoFxMoveStore,
            _ => return Err(bad()),
        };
        match (kind, nums.as_slice()) {
            (AccelKind::FxpOnly, &[m]) => Self::new(kind, None, m),
            (AccelKind::FxpOnly, _) => Err(bad()),
            (_, &[n, es, m]) => Self::new(kind, Some(PositConfig::new(n, es)?), m),
            _ => Err(bad()),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ResourceAccount {
    pub weight_count: u64,
    pub weight_bits_moved: u64,
    pub weight_bits_stored: u64,
    pub conversions_at_load: u64,
    pub conversions_per_inference: u64,
    pub batch: u64,
    /// Input plus output activation bits over the whole batch.
    pub activation_bits_moved: u64,
    pub accumulator_saturations: u64,
}

/// Weights `[inputs, outputs]`, activations `[batch, inputs]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SimOutput {
    pub outputs: Vec<Vec<FxpPattern>>,
    pub account: ResourceAccount,
}

impl SimOutput {
    /// SHA-256 over the output words (bits as little-endian i64), hex.
    pub fn outputs_hash(&self) -> String {
        let mut h = Sha256::new();
        for row in &self.outputs {
            for p in row {
                h.update((p.bits() as i64).to_le_bytes());
            }
        }
        hex::encode(h.finalize())
    }
}

fn dims(weights: &LayerTensor) -> Result<(usize, usize)> {
    match weights.shape[..] {
        [i, o] => Ok((i, o)),
        _ => Err(Error::ShapeMismatch(format!(
            "weights must be [inputs, outputs], got {:?}",
            weights.shape
        ))),
    }
}

/// Weight memory contents, one row per output neuron.
pub fn load_weights(design: &AcceleratorDesign, weights: &LayerTensor) -> Result<WeightMatrix> {
    let (inputs, outputs) = dims(weights)?;
    let at = |r: usize, c: usize| &weights.values[c * outputs + r];
    let fxp = |f: &dyn Fn(usize, usize) -> FxpPattern| {
        Matrix::new(
            outputs,
            inputs,
            (0..outputs).flat_map(|r| (0..inputs).map(move |c| (r, c))).map(|(r, c)| f(r, c)).collect(),
        )
    };
    match design.kind {
        AccelKind::FxpOnly => Ok(WeightMatrix::Fxp(fxp(&|r, c| fxp_quantize(at(r, c), design.fxp))?)),
        AccelKind::PoFxMove => {
            let p = design.posit.expect("validated");
            let spec = ConverterSpec::normalized(p, design.fxp.m())?;
            Ok(WeightMatrix::Fxp(fxp(&|r, c| {
                converted_weight(&spec, quantize_normalized(at(r, c), p)).expect("normalized input")
            })?))
        }
        AccelKind::PositAll | AccelKind::PoFxMoveStore => {
            let p = design.posit.expect("validated");
            let data: Vec<NormalizedPositPattern> = (0..outputs)
                .flat_map(|r| (0..inputs).map(move |c| (r, c)))
                .map(|(r, c)| quantize_normalized(at(r, c), p))
                .collect();
            Ok(WeightMatrix::Posit(Matrix::new(outputs, inputs, data)?))
        }
    }
}

pub fn quantize_activations(design: &AcceleratorDesign, activations: &LayerTensor, inputs: usize) -> Result<Vec<Vec<FxpPattern>>> {
    let batch = match activations.shape[..] {
        [b, i] if i == inputs => b,
        [i] if i == inputs => 1,
        _ => {
            return Err(Error::ShapeMismatch(format!(
                "activations {:?} do not match {inputs} weight inputs",
                activations.shape
            )))
        }
    };
    Ok((0..batch)
        .map(|b| {
            activations.values[b * inputs..(b + 1) * inputs]
                .iter()
                .map(|v| fxp_quantize(v, design.fxp))
                .collect()
        })
        .collect())
}

pub fn simulate(design: &AcceleratorDesign, weights: &LayerTensor, activations: &LayerTensor) -> Result<SimOutput> {
    let (inputs, outputs_per) = dims(weights)?;
    let batch = quantize_activations(design, activations, inputs)?;
    let mem = load_weights(design, weights)?;
    let mac = design.mac_design();
    let mut trace = MacTrace::default();
    let mut outputs = Vec::with_capacity(batch.len());
    for acts in &batch {
        let (y, t) = layer_forward(&mac, &mem, acts)?;
        trace += t;
        outputs.push(y);
    }
    let count = weights.values.len() as u64;
    let (moved, stored) = design.weight_bits();
    let account = ResourceAccount {
        weight_count: count,
        weight_bits_moved: count * moved as u64,
        weight_bits_stored: count * stored as u64,
        conversions_at_load: if design.kind == AccelKind::PoFxMove { count } else { 0 },
        conversions_per_inference: if design.kind == AccelKind::PoFxMoveStore { count } else { 0 },
        batch: batch.len() as u64,
        activation_bits_moved: batch.len() as u64 * (inputs + outputs_per) as u64 * design.activation_bits() as u64,
        accumulator_saturations: trace.accumulator_saturations,
    };
    Ok(SimOutput { outputs, account })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DesignReport {
    pub design: String,
    pub outputs_hash: String,
    pub account: ResourceAccount,
    pub stored_ratio: f64,
    pub moved_ratio: f64,
    /// Storage in whole blocks of the requested size, when one is given.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stored_blocks: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub baseline: String,
    pub designs: Vec<DesignReport>,
}

fn ratio(a: u64, b: u64) -> f64 {
    if b == 0 {
        if a == 0 {
            1.0
        } else {
            f64::INFINITY
        }
    } else {
        a as f64 / b as f64
    }
}

/// Simulates every design; ratios are relative to the first one.
pub fn compare_designs(
    designs: &[AcceleratorDesign],
    weights: &LayerTensor,
    activations: &LayerTensor,
    block_bits: Option<u64>,
) -> Result<Comparison> {
    let Some(base) = designs.first() else {
        return Err(Error::EmptyDesignList);
    };
    let runs = designs
        .iter()
        .map(|d| simulate(d, weights, activations))
        .collect::<Result<Vec<_>>>()?;
    let b = runs[0].account;
    let reports = designs
        .iter()
        .zip(&runs)
        .map(|(d, r)| DesignReport {
            design: d.to_string(),
            outputs_hash: r.outputs_hash(),
            account: r.account,
            stored_ratio: ratio(r.account.weight_bits_stored, b.weight_bits_stored),
            moved_ratio: ratio(r.account.weight_bits_moved, b.weight_bits_moved),
            stored_blocks: block_bits
                .filter(|&s| s > 0)
                .map(|s| r.account.weight_bits_stored.div_ceil(s)),
        })
        .collect();
    Ok(Comparison {
        baseline: base.to_string(),
        designs: reports,
    })
}
