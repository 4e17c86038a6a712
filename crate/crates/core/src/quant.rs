//! Quantization schemes, error statistics and the hardware cost table.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dyadic::DyadicRational;
use crate::error::{Error, Result};
use crate::fxp::{fxp_quantize, FxpConfig};
use crate::mac::converted_weight;
use crate::normalized::{quantize_normalized, NormalizedPositPattern};
use crate::pofx::ConverterSpec;
use crate::posit::{decode_value, encode_round, PositConfig};

/// A quantization path.
///
/// Text form: `fxp:M:F`, `posit:N:ES`, `pofx:N:ES:M`, `fpf:M:N:ES`. For the
/// two converter paths `N` is the full posit width; `N - 1` bits are stored.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum QuantScheme {
    FxpDirect { m: u32, f: u32 },
    PositDirect { n: u32, es: u32 },
    /// Normalized posit, converted to `FxP(m, m - 1)`.
    PositToFxp { n: u32, es: u32, m: u32 },
    /// `FxP(m, m - 1)` first, then the `PositToFxp` chain.
    FxpToPositToFxp { m: u32, n: u32, es: u32 },
}

impl QuantScheme {
    pub fn validate(self) -> Result<Self> {
        match self {
            QuantScheme::FxpDirect { m, f } => {
                FxpConfig::new(m, f)?;
            }
            QuantScheme::PositDirect { n, es } => {
                PositConfig::new(n, es)?;
            }
            QuantScheme::PositToFxp { n, es, m } | QuantScheme::FxpToPositToFxp { m, n, es } => {
                ConverterSpec::normalized(PositConfig::new(n, es)?, m)?;
            }
        }
        Ok(self)
    }

    /// Uses the posit-to-fixed-point converter.
    pub fn uses_converter(self) -> bool {
        matches!(
            self,
            QuantScheme::PositToFxp { .. } | QuantScheme::FxpToPositToFxp { .. }
        )
    }

    /// Bits stored per parameter.
    pub fn param_bits(self) -> u32 {
        match self {
            QuantScheme::FxpDirect { m, .. } => m,
            QuantScheme::PositDirect { n, .. } => n,
            QuantScheme::PositToFxp { n, .. } | QuantScheme::FxpToPositToFxp { n, .. } => n - 1,
        }
    }

    /// Key into the cost table: `(kind, n, es, m)`, unused fields 0.
    pub fn cost_key(self) -> (&'static str, u32, u32, u32) {
        match self {
            QuantScheme::FxpDirect { m, .. } => ("fxp", 0, 0, m),
            QuantScheme::PositDirect { n, es } => ("posit", n, es, 0),
            QuantScheme::PositToFxp { n, es, m } | QuantScheme::FxpToPositToFxp { m, n, es } => {
                ("pofx", n, es, m)
            }
        }
    }
}

impl fmt::Display for QuantScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            QuantScheme::FxpDirect { m, f: fr } => write!(f, "fxp:{m}:{fr}"),
            QuantScheme::PositDirect { n, es } => write!(f, "posit:{n}:{es}"),
            QuantScheme::PositToFxp { n, es, m } => write!(f, "pofx:{n}:{es}:{m}"),
            QuantScheme::FxpToPositToFxp { m, n, es } => write!(f, "fpf:{m}:{n}:{es}"),
        }
    }
}

impl FromStr for QuantScheme {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::parse("quantization scheme", s);
        let mut parts = s.split(':');
        let kind = parts.next().ok_or_else(bad)?;
        let nums: Vec<u32> = parts
            .map(|p| p.parse::<u32>().map_err(|_| bad()))
            .collect::<Result<_>>()?;
        let scheme = match (kind, nums.as_slice()) {
            ("fxp", &[m, f]) => QuantScheme::FxpDirect { m, f },
            ("posit", &[n, es]) => QuantScheme::PositDirect { n, es },
            ("pofx", &[n, es, m]) => QuantScheme::PositToFxp { n, es, m },
            ("fpf", &[m, n, es]) => QuantScheme::FxpToPositToFxp { m, n, es },
            _ => return Err(bad()),
        };
        scheme.validate()
    }
}

impl Serialize for QuantScheme {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for QuantScheme {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// What the converter paths do with weights that quantize to −1, which
/// the converter can only approximate by `-(1 - 2^-f)`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NegOnePolicy {
    /// Keep −1 and take the converter's saturated output.
    #[default]
    Saturate,
    /// Move −1 to the next pattern up before conversion.
    Exclude,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LayerTensor {
    pub name: String,
    pub shape: Vec<usize>,
    pub values: Vec<DyadicRational>,
}

impl LayerTensor {
    pub fn new(name: impl Into<String>, shape: Vec<usize>, values: Vec<DyadicRational>) -> Result<Self> {
        let count: usize = shape.iter().product();
        if count != values.len() {
            return Err(Error::ShapeMismatch(format!(
                "shape {shape:?} holds {count} elements, got {}",
                values.len()
            )));
        }
        Ok(LayerTensor {
            name: name.into(),
            shape,
            values,
        })
    }

    /// Lossless import; NaN and infinities are rejected.
    pub fn from_f32(name: impl Into<String>, shape: Vec<usize>, data: &[f32]) -> Result<Self> {
        let values = data
            .iter()
            .map(|&x| DyadicRational::from_f32(x).ok_or_else(|| Error::parse("finite f32", &x.to_string())))
            .collect::<Result<_>>()?;
        Self::new(name, shape, values)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Quantizes one value along a scheme's path.
pub fn quantize_value(scheme: QuantScheme, v: &DyadicRational, policy: NegOnePolicy) -> DyadicRational {
    match scheme {
        QuantScheme::FxpDirect { m, f } => fxp_quantize(v, FxpConfig::new(m, f).expect("validated")).value(),
        QuantScheme::PositDirect { n, es } => {
            let c = PositConfig::new(n, es).expect("validated");
            decode_value(encode_round(v, c)).expect("rounding never yields NaR")
        }
        QuantScheme::PositToFxp { n, es, m } => via_converter(v, n, es, m, policy),
        QuantScheme::FxpToPositToFxp { m, n, es } => {
            let pre = fxp_quantize(v, FxpConfig::normalized(m).expect("validated")).value();
            via_converter(&pre, n, es, m, policy)
        }
    }
}

fn via_converter(v: &DyadicRational, n: u32, es: u32, m: u32, policy: NegOnePolicy) -> DyadicRational {
    let c = PositConfig::new(n, es).expect("validated");
    let spec = ConverterSpec::normalized(c, m).expect("validated");
    let mut np = quantize_normalized(v, c);
    if policy == NegOnePolicy::Exclude && np.is_neg_one() {
        np = NormalizedPositPattern::new(c, np.bits() + 1).expect("fits");
    }
    converted_weight(&spec, np).expect("normalized input").value()
}

pub fn apply_scheme(scheme: QuantScheme, t: &LayerTensor) -> LayerTensor {
    apply_scheme_with(scheme, t, NegOnePolicy::default())
}

pub fn apply_scheme_with(scheme: QuantScheme, t: &LayerTensor, policy: NegOnePolicy) -> LayerTensor {
    LayerTensor {
        name: t.name.clone(),
        shape: t.shape.clone(),
        values: t.values.iter().map(|v| quantize_value(scheme, v, policy)).collect(),
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ErrorReport {
    pub count: u64,
    pub avg_abs: f64,
    /// Mean of `|q - w| / |w|` over nonzero `w`.
    pub avg_abs_rel: f64,
    pub max_abs: f64,
    /// Zero references left out of `avg_abs_rel`.
    pub excluded_zeros: u64,
}

/// Error statistics of `quantized` against `reference`, element-wise.
/// Each difference is exact before it is rounded to `f64`.
pub fn error_report(reference: &[DyadicRational], quantized: &[DyadicRational]) -> Result<ErrorReport> {
    if reference.len() != quantized.len() {
        return Err(Error::LengthMismatch {
            expected: reference.len(),
            found: quantized.len(),
        });
    }
    let mut r = ErrorReport {
        count: reference.len() as u64,
        ..ErrorReport::default()
    };
    let (mut sum_abs, mut sum_rel) = (0.0f64, 0.0f64);
    for (w, q) in reference.iter().zip(quantized) {
        let err = (q - w).abs().to_f64();
        sum_abs += err;
        r.max_abs = r.max_abs.max(err);
        if w.is_zero() {
            r.excluded_zeros += 1;
        } else {
            sum_rel += err / w.abs().to_f64();
        }
    }
    if r.count > 0 {
        r.avg_abs = sum_abs / r.count as f64;
    }
    let nonzero = r.count - r.excluded_zeros;
    if nonzero > 0 {
        r.avg_abs_rel = sum_rel / nonzero as f64;
    }
    Ok(r)
}

pub fn weight_error_report(original: &LayerTensor, quantized: &LayerTensor) -> Result<ErrorReport> {
    if original.shape != quantized.shape {
        return Err(Error::ShapeMismatch(format!(
            "{:?} vs {:?}",
            original.shape, quantized.shape
        )));
    }
    error_report(&original.values, &quantized.values)
}

/// Output-activation errors of a fully-connected layer with ReLU.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ActivationErrorReport {
    /// Exact outputs with quantized weights.
    pub pre: ErrorReport,
    /// The same outputs after quantizing them with the scheme.
    pub post: ErrorReport,
}

/// Weights have shape `[inputs, outputs]`; output `j` is
/// `relu(sum_i x_i * w[i][j])`. Inputs stay at full precision, so the only
/// error source before `post` is the weights. The fixed-point MAC
/// accumulates exactly, so for representable inputs this equals its result.
pub fn layer_outputs(weights: &[DyadicRational], shape: &[usize], inputs: &[DyadicRational]) -> Result<Vec<DyadicRational>> {
    let &[rows, cols] = shape else {
        return Err(Error::ShapeMismatch(format!("expected a 2-D weight tensor, got {shape:?}")));
    };
    if inputs.len() != rows {
        return Err(Error::ShapeMismatch(format!("{} inputs for {rows} weight rows", inputs.len())));
    }
    Ok((0..cols)
        .map(|j| {
            let s: DyadicRational = inputs
                .iter()
                .enumerate()
                .filter(|(_, x)| !x.is_zero())
                .map(|(i, x)| x * &weights[i * cols + j])
                .sum();
            if s.is_negative() {
                DyadicRational::zero()
            } else {
                s
            }
        })
        .collect())
}

pub fn activation_error_report(
    scheme: QuantScheme,
    weights: &LayerTensor,
    inputs: &[Vec<DyadicRational>],
) -> Result<ActivationErrorReport> {
    let q = apply_scheme(scheme, weights);
    let (mut reference, mut pre) = (Vec::new(), Vec::new());
    for x in inputs {
        reference.extend(layer_outputs(&weights.values, &weights.shape, x)?);
        pre.extend(layer_outputs(&q.values, &q.shape, x)?);
    }
    let post: Vec<_> = pre
        .iter()
        .map(|v| quantize_value(scheme, v, NegOnePolicy::default()))
        .collect();
    Ok(ActivationErrorReport {
        pre: error_report(&reference, &pre)?,
        post: error_report(&reference, &post)?,
    })
}

/// Schemes with `avg_abs <= max_avg` and `max_abs <= max_max`, ordered by
/// average error, then stored bits, then name.
pub fn prune_configs(reports: &[(QuantScheme, ErrorReport)], max_avg: f64, max_max: f64) -> Vec<QuantScheme> {
    let mut keep: Vec<_> = reports
        .iter()
        .filter(|(_, r)| r.avg_abs <= max_avg && r.max_abs <= max_max)
        .collect();
    keep.sort_by(|(a, ra), (b, rb)| {
        ra.avg_abs
            .total_cmp(&rb.avg_abs)
            .then(a.param_bits().cmp(&b.param_bits()))
            .then_with(|| a.to_string().cmp(&b.to_string()))
    });
    keep.into_iter().map(|(s, _)| *s).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CostRow {
    pub kind: String,
    #[serde(deserialize_with = "blank_as_zero")]
    pub n: u32,
    #[serde(deserialize_with = "blank_as_zero")]
    pub es: u32,
    #[serde(deserialize_with = "blank_as_zero")]
    pub m: u32,
    pub pdp: f64,
    pub luts: f64,
    pub cpd: f64,
    pub power: f64,
}

fn blank_as_zero<'de, D: serde::Deserializer<'de>>(d: D) -> std::result::Result<u32, D::Error> {
    let s = String::deserialize(d)?;
    let s = s.trim();
    if s.is_empty() {
        Ok(0)
    } else {
        s.parse().map_err(serde::de::Error::custom)
    }
}

pub const COST_OBJECTIVES: [&str; 4] = ["pdp", "luts", "cpd", "power"];

impl CostRow {
    pub fn objective(&self, name: &str) -> Option<f64> {
        match name {
            "pdp" => Some(self.pdp),
            "luts" => Some(self.luts),
            "cpd" => Some(self.cpd),
            "power" => Some(self.power),
            _ => None,
        }
    }
}

/// Synthesis results keyed by `(kind, n, es, m)`; see
/// [`QuantScheme::cost_key`].
#[derive(Clone, Debug, Default, PartialEq)]
pub struct CostTable {
    pub rows: Vec<CostRow>,
}

impl CostTable {
    pub fn from_reader(r: impl std::io::Read) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(r);
        let headers = rdr.headers().map_err(|e| Error::CostTable(e.to_string()))?.clone();
        let want = ["kind", "n", "es", "m", "pdp", "luts", "cpd", "power"];
        if headers.iter().collect::<Vec<_>>() != want {
            return Err(Error::CostTable(format!("header must be {}", want.join(","))));
        }
        let rows = rdr
            .deserialize()
            .collect::<std::result::Result<Vec<CostRow>, _>>()
            .map_err(|e| Error::CostTable(e.to_string()))?;
        Ok(CostTable { rows })
    }

    pub fn from_path(p: &Path) -> std::io::Result<Result<Self>> {
        let f = std::fs::File::open(p)?;
        Ok(Self::from_reader(f))
    }

    pub fn lookup(&self, scheme: QuantScheme) -> Result<&CostRow> {
        let (kind, n, es, m) = scheme.cost_key();
        self.rows
            .iter()
            .find(|r| r.kind == kind && r.n == n && r.es == es && r.m == m)
            .ok_or_else(|| Error::MissingCost(scheme.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal};

    fn d(v: f64) -> DyadicRational {
        DyadicRational::from_f64(v).unwrap()
    }

    fn tensor(vals: &[f64]) -> LayerTensor {
        LayerTensor::new("t", vec![vals.len()], vals.iter().map(|&v| d(v)).collect()).unwrap()
    }

    fn all_schemes() -> Vec<QuantScheme> {
        let mut v = Vec::new();
        for n in 3..=9 {
            for es in 0..=2 {
                v.push(QuantScheme::PositDirect { n, es });
                for m in [6, 8] {
                    v.push(QuantScheme::PositToFxp { n, es, m });
                    v.push(QuantScheme::FxpToPositToFxp { m, n, es });
                }
            }
        }
        for m in 4..=9 {
            v.push(QuantScheme::FxpDirect { m, f: m - 1 });
            v.push(QuantScheme::FxpDirect { m, f: m / 2 });
        }
        v
    }

    fn gaussian(seed: u64, sigma: f64, count: usize) -> LayerTensor {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let dist = Normal::new(0.0, sigma).unwrap();
        let vals: Vec<f64> = (0..count)
            .map(|_| (dist.sample(&mut rng) as f32).clamp(-0.999_999, 0.999_999) as f64)
            .collect();
        tensor(&vals)
    }

    #[test]
    fn grammar_round_trip() {
        for s in ["fxp:8:7", "posit:8:2", "pofx:7:1:8", "fpf:8:6:0"] {
            let q: QuantScheme = s.parse().unwrap();
            assert_eq!(q.to_string(), s);
        }
        assert_eq!("pofx:6:1:8".parse::<QuantScheme>().unwrap().param_bits(), 5);
        for bad in ["fxp:8", "fxp:8:8", "posit:40:0", "pofx:6:1", "foo:1:2", "fxp:a:b", ""] {
            assert!(bad.parse::<QuantScheme>().is_err(), "{bad}");
        }
    }

    #[test]
    fn scheme_examples() {
        let t = tensor(&[0.25, -0.5]);
        assert_eq!(apply_scheme(QuantScheme::PositDirect { n: 4, es: 0 }, &t), t);
        let t = tensor(&[0.3]);
        let q = apply_scheme(QuantScheme::PositDirect { n: 4, es: 0 }, &t);
        assert_eq!(q.values[0], d(0.25));
        let q = apply_scheme(QuantScheme::FxpDirect { m: 8, f: 7 }, &t);
        assert_eq!(q.values[0], d(0.296875));
        // 0.3 -> posit 0.25 -> exact in FxP(8,7)
        let q = apply_scheme(QuantScheme::PositToFxp { n: 4, es: 0, m: 8 }, &t);
        assert_eq!(q.values[0], d(0.25));
    }

    #[test]
    fn neg_one_policy() {
        let s = QuantScheme::PositToFxp { n: 4, es: 0, m: 8 };
        let v = d(-1.0);
        assert_eq!(quantize_value(s, &v, NegOnePolicy::Saturate), d(-127.0 / 128.0));
        assert_eq!(quantize_value(s, &v, NegOnePolicy::Exclude), d(-0.75));
    }

    #[test]
    fn report_examples() {
        let t = tensor(&[0.3, 0.0, -0.1]);
        let r = weight_error_report(&t, &t).unwrap();
        assert_eq!((r.avg_abs, r.avg_abs_rel, r.max_abs), (0.0, 0.0, 0.0));
        assert_eq!(r.excluded_zeros, 1);

        let r = weight_error_report(&tensor(&[0.3]), &tensor(&[0.25])).unwrap();
        let err = 0.3 - 0.25;
        assert!((r.avg_abs - err).abs() < 1e-15);
        assert!((r.avg_abs_rel - err / 0.3).abs() < 1e-15);
        assert!((r.avg_abs_rel - 1.0 / 6.0).abs() < 1e-9);
        assert_eq!(r.max_abs, r.avg_abs);

        let a = tensor(&[0.3, 0.1]);
        assert!(weight_error_report(&a, &tensor(&[0.3])).is_err());
    }

    #[test]
    fn schemes_are_idempotent() {
        let t = gaussian(5, 0.3, 3000);
        for s in all_schemes() {
            let once = apply_scheme(s, &t);
            let twice = apply_scheme(s, &once);
            assert_eq!(once, twice, "{s}");
        }
    }

    #[test]
    fn posit_clusters_near_zero() {
        for seed in 0..4 {
            for sigma in [0.01, 0.03, 0.05] {
                let t = gaussian(seed, sigma, 20_000);
                let p = weight_error_report(&t, &apply_scheme(QuantScheme::PositDirect { n: 8, es: 2 }, &t)).unwrap();
                let f = weight_error_report(&t, &apply_scheme(QuantScheme::FxpDirect { m: 8, f: 7 }, &t)).unwrap();
                assert!(p.avg_abs_rel < f.avg_abs_rel, "seed {seed} sigma {sigma}: {p:?} {f:?}");
            }
        }
    }

    #[test]
    fn fxp_first_is_closer_to_fxp_reference() {
        for seed in 0..4 {
            let t = gaussian(seed, 0.05, 20_000);
            let reference = apply_scheme(QuantScheme::FxpDirect { m: 8, f: 7 }, &t);
            for (n, es) in [(6, 0), (7, 1), (8, 1), (6, 1)] {
                let fpf = apply_scheme(QuantScheme::FxpToPositToFxp { m: 8, n, es }, &t);
                let pofx = apply_scheme(QuantScheme::PositToFxp { n, es, m: 8 }, &t);
                let a = weight_error_report(&reference, &fpf).unwrap();
                let b = weight_error_report(&reference, &pofx).unwrap();
                assert!(a.avg_abs <= b.avg_abs, "seed {seed} ({n},{es}): {a:?} {b:?}");
            }
        }
    }

    #[test]
    fn prune_examples() {
        let t = gaussian(1, 0.1, 500);
        let reports: Vec<_> = all_schemes()
            .into_iter()
            .map(|s| (s, weight_error_report(&t, &apply_scheme(s, &t)).unwrap()))
            .collect();
        assert_eq!(prune_configs(&reports, f64::INFINITY, f64::INFINITY).len(), reports.len());
        let exact = tensor(&[0.25, -0.5, 0.0]);
        let er: Vec<_> = [
            QuantScheme::PositDirect { n: 4, es: 0 },
            QuantScheme::FxpDirect { m: 3, f: 1 },
            QuantScheme::FxpDirect { m: 4, f: 2 },
        ]
        .into_iter()
        .map(|s| (s, weight_error_report(&exact, &apply_scheme(s, &exact)).unwrap()))
        .collect();
        let kept = prune_configs(&er, 0.0, 0.0);
        assert_eq!(
            kept,
            [QuantScheme::FxpDirect { m: 4, f: 2 }, QuantScheme::PositDirect { n: 4, es: 0 }]
        );
        let pruned = prune_configs(&reports, 0.01, f64::INFINITY);
        assert!(!pruned.contains(&QuantScheme::PositToFxp { n: 4, es: 2, m: 8 }));
        assert!(pruned.contains(&QuantScheme::PositToFxp { n: 8, es: 1, m: 8 }));
    }

    #[test]
    fn activation_report_matches_float_reference() {
        let w = gaussian(9, 0.2, 640);
        let w = LayerTensor::new("fc", vec![64, 10], w.values).unwrap();
        let inputs: Vec<Vec<DyadicRational>> = (0..20)
            .map(|i| gaussian(100 + i, 0.5, 64).values.into_iter().map(|v| v.abs()).collect())
            .collect();
        for s in [QuantScheme::PositDirect { n: 6, es: 0 }, QuantScheme::FxpDirect { m: 8, f: 7 }] {
            let r = activation_error_report(s, &w, &inputs).unwrap();
            let q = apply_scheme(s, &w);
            let (mut sum, mut max) = (0.0f64, 0.0f64);
            let mut count = 0;
            for x in &inputs {
                for j in 0..10 {
                    let dot = |t: &LayerTensor| -> f64 {
                        (0..64).map(|i| x[i].to_f64() * t.values[i * 10 + j].to_f64()).sum::<f64>().max(0.0)
                    };
                    let e = (dot(&w) - dot(&q)).abs();
                    sum += e;
                    max = max.max(e);
                    count += 1;
                }
            }
            assert!((r.pre.avg_abs - sum / count as f64).abs() < 2f64.powi(-20), "{s}");
            assert!((r.pre.max_abs - max).abs() < 2f64.powi(-20), "{s}");
            assert!(r.post.count == r.pre.count);
        }
        let zero = vec![vec![DyadicRational::zero(); 64]];
        let r = activation_error_report(QuantScheme::PositDirect { n: 6, es: 0 }, &w, &zero).unwrap();
        assert_eq!((r.pre.avg_abs, r.post.max_abs), (0.0, 0.0));
    }

    #[test]
    fn cost_table() {
        let csv = "kind,n,es,m,pdp,luts,cpd,power\nfxp,,,8,1.5,100,2.0,0.1\npofx,7,1,8,1.0,80,2.5,0.09\n";
        let t = CostTable::from_reader(csv.as_bytes()).unwrap();
        assert_eq!(t.lookup(QuantScheme::FxpDirect { m: 8, f: 7 }).unwrap().luts, 100.0);
        assert_eq!(t.lookup(QuantScheme::FxpToPositToFxp { m: 8, n: 7, es: 1 }).unwrap().pdp, 1.0);
        assert!(matches!(
            t.lookup(QuantScheme::PositDirect { n: 8, es: 0 }),
            Err(Error::MissingCost(_))
        ));
        assert!(CostTable::from_reader("a,b\n1,2\n".as_bytes()).is_err());
    }
}
