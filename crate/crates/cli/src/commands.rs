use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use pofx_core::accel::{compare_designs, AcceleratorDesign, Comparison};
use pofx_core::fxp::signmag_to_twos;
use pofx_core::normalized::{self, compress, in_normalized_range, quantize_normalized};
use pofx_core::pareto::{compare_hypervolume, pareto_front_indices, HypervolumeComparison};
use pofx_core::pofx::{self, ConverterInput};
use pofx_core::posit::{decode_value, encode_round, enumerate_all, raw_fields};
use pofx_core::quant::{
    activation_error_report, apply_scheme_with, weight_error_report, ActivationErrorReport, CostTable,
    NegOnePolicy, COST_OBJECTIVES,
};
use pofx_core::{
    ConverterSpec, DyadicRational, ErrorReport, FxpConfig, LayerTensor, NormalizedPositPattern, ParetoPoint,
    PositConfig, PositPattern, QuantScheme, Variant,
};
use serde::{Deserialize, Serialize};

use crate::{report, tensor, CliError, CliResult};

const TOOL: &str = "pofx";
const VERSION: &str = env!("CARGO_PKG_VERSION");

pub fn table(n: u32, es: u32) -> CliResult<()> {
    let c = PositConfig::new(n, es)?;
    let mut out = String::from("bits\ts\tk\te\tf\tvalue\tnormalized\tstored\n");
    for (p, value) in enumerate_all(c)? {
        let fields = raw_fields(p);
        let s = (fields.sign < 0) as u8;
        let (e, f, v) = match value {
            Some(v) => (fields.e.to_string(), fields.fraction().to_string(), v.to_string()),
            None => ("-".into(), "-".into(), "NaR".into()),
        };
        let (flag, stored) = if in_normalized_range(p) {
            ("yes", compress(p)?.to_bit_string())
        } else {
            ("no", "-".into())
        };
        let _ = writeln!(out, "{p}\t{s}\t{}\t{e}\t{f}\t{v}\t{flag}\t{stored}", fields.k);
    }
    print!("{out}");
    Ok(())
}

pub struct ConvertArgs {
    pub value: Option<f64>,
    pub posit_bits: Option<String>,
    pub n: u32,
    pub es: u32,
    pub m: u32,
    pub f: Option<u32>,
    pub variant: Variant,
    pub trace: bool,
}

pub fn convert(a: ConvertArgs) -> CliResult<()> {
    let pc = PositConfig::new(a.n, a.es)?;
    let fx = FxpConfig::new(a.m, a.f.unwrap_or(a.m.saturating_sub(1)))?;
    let spec = ConverterSpec::new(pc, fx, a.variant)?;
    let input: ConverterInput = match (a.value, a.posit_bits.as_deref(), a.variant) {
        (Some(v), _, variant) => {
            let d = DyadicRational::from_f64(v).ok_or_else(|| CliError::Usage(format!("value {v} is not finite")))?;
            match variant {
                Variant::Normalized => quantize_normalized(&d, pc).into(),
                Variant::General => encode_round(&d, pc).into(),
            }
        }
        (None, Some(bits), Variant::Normalized) => NormalizedPositPattern::from_bit_str(pc, bits)?.into(),
        (None, Some(bits), Variant::General) => PositPattern::from_bit_str(pc, bits)?.into(),
        (None, None, _) => return Err(CliError::Usage("give --value or --posit-bits".into())),
    };
    let full = match input {
        ConverterInput::Posit(p) => p,
        ConverterInput::Normalized(np) => normalized::expand(np),
    };
    let (sm, trace) = pofx::convert(&spec, input)?;
    let mut out = String::new();
    let _ = writeln!(out, "posit\t{full}");
    if let ConverterInput::Normalized(np) = input {
        let _ = writeln!(out, "stored\t{np}");
    }
    let pv = decode_value(full).map_or("NaR".to_string(), |v| v.to_string());
    let _ = writeln!(out, "posit_value\t{pv}");
    let _ = writeln!(out, "fxp\t{fx}");
    let _ = writeln!(out, "sign\t{}", sm.sign as u8);
    let _ = writeln!(out, "magnitude\t{}", sm.magnitude_string());
    let _ = writeln!(out, "signmag\t{}", sm.to_bit_string());
    let twos = signmag_to_twos(sm).map_or("-".to_string(), |t| t.to_bit_string());
    let _ = writeln!(out, "twos\t{twos}");
    let _ = writeln!(out, "fxp_value\t{}", sm.value());
    let _ = writeln!(out, "overflow\t{}", sm.overflow);
    let _ = writeln!(out, "neg_one_saturated\t{}", trace.neg_one_saturated);
    if a.trace {
        out.push_str(&trace.dump());
    }
    print!("{out}");
    if sm.overflow {
        return Err(CliError::Domain("result does not fit the fixed-point format".into()));
    }
    Ok(())
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TensorInfo {
    pub name: String,
    pub shape: Vec<usize>,
    pub count: usize,
}

impl From<&LayerTensor> for TensorInfo {
    fn from(t: &LayerTensor) -> Self {
        TensorInfo {
            name: t.name.clone(),
            shape: t.shape.clone(),
            count: t.len(),
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
pub struct SchemeResult {
    pub scheme: QuantScheme,
    pub param_bits: u32,
    pub uses_converter: bool,
    pub weights: ErrorReport,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub activations: Option<ActivationErrorReport>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct AnalyzeReport {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub tensor: TensorInfo,
    pub neg_one_policy: NegOnePolicy,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub activations: Option<TensorInfo>,
    pub results: Vec<SchemeResult>,
}

fn rows(t: &LayerTensor, width: usize) -> CliResult<Vec<Vec<DyadicRational>>> {
    let ok = match t.shape[..] {
        [_, w] | [w] => w == width,
        _ => false,
    };
    if !ok || width == 0 {
        return Err(CliError::Domain(format!(
            "activations {:?} do not match {width} weight inputs",
            t.shape
        )));
    }
    Ok(t.values.chunks(width).map(|c| c.to_vec()).collect())
}

pub fn analyze(
    weights: &Path,
    schemes: &[QuantScheme],
    activations: Option<&Path>,
    neg_one: NegOnePolicy,
    out: Option<&Path>,
) -> CliResult<()> {
    let w = tensor::load(weights)?;
    let acts = activations.map(tensor::load).transpose()?;
    let inputs = match &acts {
        Some(a) => {
            let width = match w.shape[..] {
                [i, _] => i,
                _ => return Err(CliError::Domain(format!("weights must be [inputs, outputs], got {:?}", w.shape))),
            };
            Some(rows(a, width)?)
        }
        None => None,
    };
    let mut results = Vec::new();
    for &scheme in schemes {
        let q = apply_scheme_with(scheme, &w, neg_one);
        let act = match &inputs {
            Some(x) => Some(activation_error_report(scheme, &w, x)?),
            None => None,
        };
        results.push(SchemeResult {
            scheme,
            param_bits: scheme.param_bits(),
            uses_converter: scheme.uses_converter(),
            weights: weight_error_report(&w, &q)?,
            activations: act,
        });
    }
    let rep = AnalyzeReport {
        tool: TOOL.into(),
        version: VERSION.into(),
        command: "analyze".into(),
        tensor: (&w).into(),
        neg_one_policy: neg_one,
        activations: acts.as_ref().map(TensorInfo::from),
        results,
    };
    report::emit(&rep, out)
}

#[derive(Debug, Serialize)]
struct ParetoEntry {
    scheme: QuantScheme,
    uses_converter: bool,
    objectives: Vec<f64>,
    on_front: bool,
}

#[derive(Debug, Serialize)]
struct ParetoReport {
    tool: String,
    version: String,
    command: String,
    reports: Vec<String>,
    objectives: Vec<String>,
    points: Vec<ParetoEntry>,
    front: Vec<QuantScheme>,
    hypervolume: HypervolumeComparison,
}

/// Per-scheme errors over all reports: means of the averages, maximum of
/// the maxima.
struct Merged {
    avg_abs: f64,
    avg_abs_rel: f64,
    max_abs: f64,
    seen: u32,
}

const ERROR_OBJECTIVES: [&str; 4] = ["avg_abs", "avg_abs_rel", "max_abs", "param_bits"];

pub fn pareto(
    dir: &Path,
    costs: Option<&Path>,
    objectives: &[String],
    reference: Option<Vec<f64>>,
    out: Option<&Path>,
) -> CliResult<()> {
    for o in objectives {
        if !COST_OBJECTIVES.contains(&o.as_str()) && !ERROR_OBJECTIVES.contains(&o.as_str()) {
            return Err(pofx_core::Error::UnknownObjective(o.clone()).into());
        }
    }
    if let Some(r) = &reference {
        if r.len() != objectives.len() {
            return Err(CliError::Usage(format!(
                "reference has {} values for {} objectives",
                r.len(),
                objectives.len()
            )));
        }
    }
    let needs_costs = objectives.iter().any(|o| COST_OBJECTIVES.contains(&o.as_str()));
    let table = match (needs_costs, costs) {
        (false, _) => None,
        (true, None) => return Err(CliError::Usage("cost objectives need --costs or EXPAND_COSTS".into())),
        (true, Some(p)) => Some(
            CostTable::from_path(p)
                .map_err(|e| CliError::Io(format!("{}: {e}", p.display())))?
                .map_err(|e| CliError::Io(format!("{}: {e}", p.display())))?,
        ),
    };

    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    files.sort();
    let mut order = Vec::new();
    let mut merged: BTreeMap<QuantScheme, Merged> = BTreeMap::new();
    for f in &files {
        let text = std::fs::read_to_string(f).map_err(|e| CliError::Io(format!("{}: {e}", f.display())))?;
        let rep: AnalyzeReport =
            serde_json::from_str(&text).map_err(|e| CliError::Io(format!("{}: {e}", f.display())))?;
        for r in rep.results {
            let m = merged.entry(r.scheme).or_insert_with(|| {
                order.push(r.scheme);
                Merged {
                    avg_abs: 0.0,
                    avg_abs_rel: 0.0,
                    max_abs: 0.0,
                    seen: 0,
                }
            });
            m.avg_abs += r.weights.avg_abs;
            m.avg_abs_rel += r.weights.avg_abs_rel;
            m.max_abs = m.max_abs.max(r.weights.max_abs);
            m.seen += 1;
        }
    }
    if order.is_empty() {
        return Err(CliError::Io(format!("{}: no analyze reports found", dir.display())));
    }

    let mut points = Vec::new();
    for scheme in &order {
        let m = &merged[scheme];
        let mut objs = Vec::new();
        for o in objectives {
            let v = match o.as_str() {
                "avg_abs" => m.avg_abs / m.seen as f64,
                "avg_abs_rel" => m.avg_abs_rel / m.seen as f64,
                "max_abs" => m.max_abs,
                "param_bits" => scheme.param_bits() as f64,
                cost => table
                    .as_ref()
                    .expect("checked above")
                    .lookup(*scheme)?
                    .objective(cost)
                    .expect("checked above"),
            };
            objs.push(v);
        }
        points.push(ParetoPoint {
            scheme: *scheme,
            names: objectives.to_vec(),
            objectives: objs,
        });
    }
    let on_front = pareto_front_indices(&points)?;
    let hv = compare_hypervolume(&points, reference)?;
    let rep = ParetoReport {
        tool: TOOL.into(),
        version: VERSION.into(),
        command: "pareto".into(),
        reports: files
            .iter()
            .map(|f| f.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default())
            .collect(),
        objectives: objectives.to_vec(),
        front: on_front.iter().map(|&i| points[i].scheme).collect(),
        points: points
            .iter()
            .enumerate()
            .map(|(i, p)| ParetoEntry {
                scheme: p.scheme,
                uses_converter: p.scheme.uses_converter(),
                objectives: p.objectives.clone(),
                on_front: on_front.contains(&i),
            })
            .collect(),
        hypervolume: hv,
    };
    report::emit(&rep, out)
}

#[derive(Debug, Serialize)]
struct SimulateReport {
    tool: String,
    version: String,
    command: String,
    weights: TensorInfo,
    activations: TensorInfo,
    #[serde(flatten)]
    comparison: Comparison,
}

pub fn simulate(
    weights: &Path,
    activations: &Path,
    designs: &[AcceleratorDesign],
    block_bits: Option<u64>,
    out: Option<&Path>,
) -> CliResult<()> {
    let w = tensor::load(weights)?;
    let a = tensor::load(activations)?;
    let comparison = compare_designs(designs, &w, &a, block_bits)?;
    let rep = SimulateReport {
        tool: TOOL.into(),
        version: VERSION.into(),
        command: "simulate".into(),
        weights: (&w).into(),
        activations: (&a).into(),
        comparison,
    };
    report::emit(&rep, out)
}
