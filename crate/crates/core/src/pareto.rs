//! Pareto fronts and hypervolume. All objectives are minimized.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quant::QuantScheme;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParetoPoint {
    pub scheme: QuantScheme,
    pub names: Vec<String>,
    pub objectives: Vec<f64>,
}

/// `a` is no worse everywhere and strictly better somewhere.
pub fn dominates(a: &[f64], b: &[f64]) -> bool {
    a.iter().zip(b).all(|(x, y)| x <= y) && a.iter().zip(b).any(|(x, y)| x < y)
}

fn check(points: &[ParetoPoint]) -> Result<()> {
    let Some(first) = points.first() else { return Ok(()) };
    for p in points {
        if p.names != first.names || p.objectives.len() != first.names.len() {
            return Err(Error::InconsistentObjectives(p.scheme.to_string()));
        }
        if p.objectives.iter().any(|v| !v.is_finite()) {
            return Err(Error::InconsistentObjectives(format!("{}: non-finite objective", p.scheme)));
        }
    }
    Ok(())
}

/// Indices of the non-dominated points, in input order.
pub fn pareto_front_indices(points: &[ParetoPoint]) -> Result<Vec<usize>> {
    check(points)?;
    Ok((0..points.len())
        .filter(|&i| !points.iter().any(|q| dominates(&q.objectives, &points[i].objectives)))
        .collect())
}

pub fn pareto_front(points: &[ParetoPoint]) -> Result<Vec<ParetoPoint>> {
    Ok(pareto_front_indices(points)?
        .into_iter()
        .map(|i| points[i].clone())
        .collect())
}

/// Per-objective maximum times 1.01; a non-positive maximum gets `+0.01`
/// instead so the box never collapses.
pub fn default_reference(points: &[Vec<f64>]) -> Vec<f64> {
    let Some(first) = points.first() else { return Vec::new() };
    (0..first.len())
        .map(|i| {
            let max = points.iter().map(|p| p[i]).fold(f64::NEG_INFINITY, f64::max);
            if max > 0.0 {
                max * 1.01
            } else {
                max + 0.01
            }
        })
        .collect()
}

/// Measure of the region dominated by `front` and bounded by `reference`.
/// Points beyond the reference in any objective are an error.
pub fn hypervolume(front: &[Vec<f64>], reference: &[f64]) -> Result<f64> {
    for p in front {
        if p.len() != reference.len() {
            return Err(Error::InconsistentObjectives(format!(
                "{} objectives against a {}-dimensional reference",
                p.len(),
                reference.len()
            )));
        }
        if p.iter().zip(reference).any(|(x, r)| x > r || !x.is_finite()) {
            return Err(Error::InvalidReference);
        }
    }
    if reference.is_empty() {
        return Ok(0.0);
    }
    let pts: Vec<&[f64]> = front.iter().map(|p| p.as_slice()).collect();
    Ok(slice_volume(&pts, reference))
}

/// Sweeps the last objective; each slab between consecutive values
/// contributes its thickness times the volume of the points below it.
fn slice_volume(points: &[&[f64]], reference: &[f64]) -> f64 {
    let d = reference.len();
    if points.is_empty() {
        return 0.0;
    }
    if d == 1 {
        let min = points.iter().map(|p| p[0]).fold(f64::INFINITY, f64::min);
        return reference[0] - min;
    }
    let mut sorted: Vec<&[f64]> = points.to_vec();
    sorted.sort_by(|a, b| a[d - 1].total_cmp(&b[d - 1]));
    let mut total = 0.0;
    for i in 0..sorted.len() {
        let top = if i + 1 < sorted.len() {
            sorted[i + 1][d - 1]
        } else {
            reference[d - 1]
        };
        let depth = top - sorted[i][d - 1];
        if depth <= 0.0 {
            continue;
        }
        let below: Vec<&[f64]> = sorted[..=i].iter().map(|p| &p[..d - 1]).collect();
        total += depth * slice_volume(&below, &reference[..d - 1]);
    }
    total
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HypervolumeComparison {
    pub reference: Vec<f64>,
    pub full: f64,
    pub without_converter: f64,
    /// `100 * (full - without) / without`; `None` when `without` is 0.
    pub improvement_percent: Option<f64>,
}

/// Hypervolume of all points against that of the points not using the
/// converter, under one shared reference.
pub fn compare_hypervolume(points: &[ParetoPoint], reference: Option<Vec<f64>>) -> Result<HypervolumeComparison> {
    check(points)?;
    let all: Vec<Vec<f64>> = points.iter().map(|p| p.objectives.clone()).collect();
    let reference = reference.unwrap_or_else(|| default_reference(&all));
    let front = |keep: &dyn Fn(&ParetoPoint) -> bool| -> Result<Vec<Vec<f64>>> {
        let subset: Vec<ParetoPoint> = points.iter().filter(|p| keep(p)).cloned().collect();
        Ok(pareto_front(&subset)?.into_iter().map(|p| p.objectives).collect())
    };
    let full = hypervolume(&front(&|_| true)?, &reference)?;
    let without_converter = hypervolume(&front(&|p| !p.scheme.uses_converter())?, &reference)?;
    let improvement_percent = (without_converter > 0.0).then(|| 100.0 * (full - without_converter) / without_converter);
    Ok(HypervolumeComparison {
        reference,
        full,
        without_converter,
        improvement_percent,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn pt(i: u32, obj: &[f64]) -> ParetoPoint {
        ParetoPoint {
            scheme: QuantScheme::FxpDirect { m: 2 + i % 30, f: 0 },
            names: (0..obj.len()).map(|k| format!("o{k}")).collect(),
            objectives: obj.to_vec(),
        }
    }

    #[test]
    fn front_examples() {
        let one = [pt(0, &[1.0, 2.0])];
        assert_eq!(pareto_front(&one).unwrap(), one);
        let two = [pt(0, &[2.0, 2.0]), pt(1, &[1.0, 1.0])];
        assert_eq!(pareto_front_indices(&two).unwrap(), [1]);
        let dup = [pt(0, &[1.0, 1.0]), pt(1, &[1.0, 1.0])];
        assert_eq!(pareto_front_indices(&dup).unwrap(), [0, 1]);
        let mut bad = two.to_vec();
        bad[1].names[0] = "x".into();
        assert!(pareto_front(&bad).is_err());
    }

    #[test]
    fn hypervolume_examples() {
        assert_eq!(hypervolume(&[], &[4.0, 4.0]).unwrap(), 0.0);
        assert_eq!(hypervolume(&[vec![1.0, 2.0, 3.0]], &[2.0, 4.0, 7.0]).unwrap(), 8.0);
        let front = [vec![1.0, 3.0], vec![2.0, 2.0], vec![3.0, 1.0]];
        assert_eq!(hypervolume(&front, &[4.0, 4.0]).unwrap(), 6.0);
        let front = [vec![1.0, 3.0], vec![2.0, 1.0]];
        assert_eq!(hypervolume(&front, &[4.0, 4.0]).unwrap(), 7.0);
        assert_eq!(hypervolume(&[vec![5.0, 1.0]], &[4.0, 4.0]), Err(Error::InvalidReference));
    }

    #[test]
    fn reference_rule() {
        assert_eq!(default_reference(&[vec![1.0, -2.0], vec![2.0, -3.0]]), [2.02, -1.99]);
    }

    #[test]
    fn comparison_examples() {
        let single = [pt(0, &[1.0, 1.0])];
        let c = compare_hypervolume(&single, None).unwrap();
        assert_eq!(c.improvement_percent, Some(0.0));

        let mut pts = vec![pt(0, &[1.0, 3.0]), pt(1, &[3.0, 1.0])];
        let mut conv = pt(2, &[3.0, 3.0]);
        conv.scheme = QuantScheme::PositToFxp { n: 6, es: 0, m: 8 };
        pts.push(conv.clone());
        let c = compare_hypervolume(&pts, Some(vec![4.0, 4.0])).unwrap();
        assert_eq!((c.full, c.without_converter, c.improvement_percent), (5.0, 5.0, Some(0.0)));

        conv.objectives = vec![2.0, 2.0];
        pts[2] = conv;
        let c = compare_hypervolume(&pts, Some(vec![4.0, 4.0])).unwrap();
        assert_eq!(c.full, 6.0);
        assert_eq!(c.improvement_percent, Some(20.0));
    }

    /// Counts grid cells of a `k^d` lattice dominated by some point.
    fn lattice_volume(front: &[Vec<f64>], d: usize) -> f64 {
        let mut total = 0u64;
        let cells = 8u64.pow(d as u32);
        for c in 0..cells {
            let x: Vec<f64> = (0..d).map(|k| ((c / 8u64.pow(k as u32)) % 8) as f64 + 0.5).collect();
            if front.iter().any(|p| p.iter().zip(&x).all(|(a, b)| a <= b)) {
                total += 1;
            }
        }
        total as f64
    }

    proptest! {
        #[test]
        fn integer_points_match_lattice(
            pts in prop::collection::vec(prop::collection::vec(0u8..8, 3), 0..12),
        ) {
            let front: Vec<Vec<f64>> = pts.iter().map(|p| p.iter().map(|&v| v as f64).collect()).collect();
            let hv = hypervolume(&front, &[8.0, 8.0, 8.0]).unwrap();
            prop_assert_eq!(hv, lattice_volume(&front, 3));
        }

        #[test]
        fn dominated_points_change_nothing(
            pts in prop::collection::vec(prop::collection::vec(0.0f64..10.0, 3), 1..20),
            pick in 0usize..20,
            bump in prop::collection::vec(0.0f64..1.0, 3),
        ) {
            let points: Vec<_> = pts.iter().enumerate().map(|(i, p)| pt(i as u32, p)).collect();
            let base = pareto_front(&points).unwrap();
            let mut extra = points.clone();
            let mut o = points[pick % points.len()].objectives.clone();
            for (x, b) in o.iter_mut().zip(&bump) {
                *x += b + 0.01;
            }
            extra.push(pt(99, &o));
            prop_assert_eq!(pareto_front(&extra).unwrap(), base.clone());
            let r = [11.0, 11.0, 11.0];
            let f = |ps: &[ParetoPoint]| ps.iter().map(|p| p.objectives.clone()).collect::<Vec<_>>();
            let h0 = hypervolume(&f(&base), &r).unwrap();
            let mut grown = f(&base);
            grown.push(vec![bump[0], bump[1], bump[2]]);
            prop_assert!(hypervolume(&grown, &r).unwrap() >= h0 - 1e-9);
        }
    }
}
