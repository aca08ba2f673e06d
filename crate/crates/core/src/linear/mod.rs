//! Best response within the linear predictor class in fixed low dimension.
//!
//! The three public operations follow one pipeline: [`pvf`] decides whether a
//! vector of per-point region labels (inside the tolerance slab, strictly
//! above it, strictly below it, or unconstrained) is realizable by some
//! linear predictor and produces a witness; [`enumerate_regions`] builds all
//! realizable label vectors incrementally, extending feasible partial
//! vectors one point at a time; [`best_linear_response`] weights each point
//! by the competition currently satisfying it and returns a witness for the
//! most valuable feasible label vector.

mod region;

pub use region::{Region, Row};

use crate::arith::Scalar;
use crate::error::{Error, Result};
use crate::model::{satisfies, Hypothesis, Sample};

/// Per-point label of a linear predictor relative to the tolerance slab.
///
/// The variant order (One, Above, Below) is the lexicographic order used for
/// tie-breaking and output ordering.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum RegionLabel {
    /// Inside the slab: the point is satisfied (closed condition).
    One,
    /// Prediction strictly above label plus tolerance.
    Above,
    /// Prediction strictly below label minus tolerance.
    Below,
    /// No constraint; only appears in partial vectors during enumeration.
    Free,
}

impl RegionLabel {
    pub fn symbol(&self) -> char {
        match self {
            RegionLabel::One => '1',
            RegionLabel::Above => 'a',
            RegionLabel::Below => 'b',
            RegionLabel::Free => '0',
        }
    }
}

/// One label per sample point.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct RegionVector {
    labels: Vec<RegionLabel>,
}

impl RegionVector {
    pub fn new(labels: Vec<RegionLabel>) -> Self {
        RegionVector { labels }
    }

    pub fn all_free(m: usize) -> Self {
        RegionVector {
            labels: vec![RegionLabel::Free; m],
        }
    }

    pub fn labels(&self) -> &[RegionLabel] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn is_complete(&self) -> bool {
        self.labels.iter().all(|l| *l != RegionLabel::Free)
    }

    /// Satisfaction pattern: true where the label is One.
    pub fn satisfied_pattern(&self) -> Vec<bool> {
        self.labels.iter().map(|l| *l == RegionLabel::One).collect()
    }

    /// Compact text form, one symbol per point.
    pub fn to_text(&self) -> String {
        self.labels.iter().map(|l| l.symbol()).collect()
    }
}

/// Outcome of a feasibility query.
#[derive(Debug, Clone, PartialEq)]
pub enum FeasibilityResult<S: Scalar> {
    Feasible {
        /// Homogeneous linear witness, one coefficient per feature.
        witness: Vec<S>,
        /// Margin the witness holds on every strict constraint.
        slack: S,
    },
    Infeasible,
}

impl<S: Scalar> FeasibilityResult<S> {
    pub fn is_feasible(&self) -> bool {
        matches!(self, FeasibilityResult::Feasible { .. })
    }
}

/// Limits for the linear oracle.
#[derive(Debug, Clone)]
pub struct LinearConfig {
    /// Largest feature dimension handled (after any bias augmentation).
    pub dimension_limit: usize,
    /// Cap on live label vectors during enumeration.
    pub region_budget: usize,
    /// Half-width of the coefficient search box: witnesses are sought in
    /// `[-bound, bound]` per coordinate. The default comfortably exceeds any
    /// coefficient reachable from sanely scaled data while keeping
    /// floating-point residuals classifiable; raise it (in rational mode)
    /// for extreme data.
    pub coefficient_bound: f64,
}

impl Default for LinearConfig {
    fn default() -> Self {
        LinearConfig {
            dimension_limit: 3,
            region_budget: 100_000,
            coefficient_bound: 1e8,
        }
    }
}

fn check_dimension<S: Scalar>(sample: &Sample<S>, config: &LinearConfig) -> Result<()> {
    if sample.dimension() > config.dimension_limit {
        return Err(Error::Unsupported(format!(
            "linear oracle handles dimension up to {}, sample has {}",
            config.dimension_limit,
            sample.dimension()
        )));
    }
    Ok(())
}

/// Closed rows for one labeled point. `One` produces the two slab rows;
/// `Above`/`Below` produce one strict row each; `Free` produces none.
fn rows_for_label<S: Scalar>(
    point: &crate::model::UserPoint<S>,
    label: RegionLabel,
) -> Vec<Row<S>> {
    let x = &point.features;
    let upper = point.label.clone() + point.tolerance.clone();
    let lower = point.label.clone() - point.tolerance.clone();
    match label {
        RegionLabel::Free => vec![],
        RegionLabel::One => vec![
            // h.x <= y + t
            Row {
                coeffs: x.clone(),
                rhs: upper,
                strict: false,
            },
            // h.x >= y - t
            Row {
                coeffs: x.iter().map(|v| -v.clone()).collect(),
                rhs: -lower,
                strict: false,
            },
        ],
        RegionLabel::Above => vec![
            // h.x > y + t, relaxed to -h.x <= -(y + t)
            Row {
                coeffs: x.iter().map(|v| -v.clone()).collect(),
                rhs: -upper,
                strict: true,
            },
        ],
        RegionLabel::Below => vec![
            // h.x < y - t, relaxed to h.x <= y - t
            Row {
                coeffs: x.clone(),
                rhs: lower,
                strict: true,
            },
        ],
    }
}

/// A clipped region is strictly feasible when it is non-empty and no strict
/// row is tight across all of it; the vertex centroid then realizes every
/// strict row with positive margin.
fn strict_feasibility<S: Scalar>(region: &Region<S>) -> Option<(Vec<S>, S)> {
    if region.is_empty() {
        return None;
    }
    let threshold = S::strictness_threshold();
    for row in region.strict_rows() {
        let margin = region.max_margin(row)?;
        if margin <= threshold {
            return None;
        }
    }
    let witness = region.centroid()?;
    let mut slack = S::zero();
    let mut first = true;
    for row in region.strict_rows() {
        let mut dot = S::zero();
        for (a, v) in row.coeffs.iter().zip(witness.iter()) {
            dot = dot + a.clone() * v.clone();
        }
        let margin = row.rhs.clone() - dot;
        if first || margin < slack {
            slack = margin;
            first = false;
        }
    }
    Some((witness, slack))
}

/// Build the clipped region for a label vector.
fn region_for<S: Scalar>(sample: &Sample<S>, v: &RegionVector, config: &LinearConfig) -> Region<S> {
    let mut region = Region::full(sample.dimension(), config.coefficient_bound);
    for (point, label) in sample.points().iter().zip(v.labels().iter()) {
        for row in rows_for_label(point, *label) {
            if !region.clip(row) {
                return region;
            }
        }
    }
    region
}

/// Decide whether some linear predictor realizes the label vector, and hand
/// back a witness if one does.
pub fn pvf<S: Scalar>(
    sample: &Sample<S>,
    v: &RegionVector,
    config: &LinearConfig,
) -> Result<FeasibilityResult<S>> {
    check_dimension(sample, config)?;
    if v.len() != sample.len() {
        return Err(Error::InvalidInput(format!(
            "label vector length {} does not match sample size {}",
            v.len(),
            sample.len()
        )));
    }
    let region = region_for(sample, v, config);
    Ok(match strict_feasibility(&region) {
        Some((witness, slack)) => FeasibilityResult::Feasible { witness, slack },
        None => FeasibilityResult::Infeasible,
    })
}

/// All realizable complete label vectors over the sample, in lexicographic
/// order (One < Above < Below per point).
///
/// Built incrementally: every feasible partial vector is extended with each
/// of the three labels at the next point and infeasible extensions are
/// dropped, so the work stays proportional to the number of realizable
/// vectors rather than 3^m.
pub fn enumerate_regions<S: Scalar>(
    sample: &Sample<S>,
    config: &LinearConfig,
) -> Result<Vec<RegionVector>> {
    check_dimension(sample, config)?;
    struct Node<S: Scalar> {
        labels: Vec<RegionLabel>,
        region: Region<S>,
    }
    let mut live: Vec<Node<S>> = vec![Node {
        labels: Vec::new(),
        region: Region::full(sample.dimension(), config.coefficient_bound),
    }];
    for point in sample.points() {
        let mut next: Vec<Node<S>> = Vec::with_capacity(live.len() * 3);
        for node in &live {
            for label in [RegionLabel::One, RegionLabel::Above, RegionLabel::Below] {
                let mut region = node.region.clone();
                let mut alive = true;
                for row in rows_for_label(point, label) {
                    if !region.clip(row) {
                        alive = false;
                        break;
                    }
                }
                if !alive || strict_feasibility(&region).is_none() {
                    continue;
                }
                let mut labels = node.labels.clone();
                labels.push(label);
                next.push(Node { labels, region });
            }
        }
        if next.len() > config.region_budget {
            return Err(Error::Resource(format!(
                "region enumeration exceeded the budget of {} vectors",
                config.region_budget
            )));
        }
        live = next;
    }
    Ok(live
        .into_iter()
        .map(|node| RegionVector::new(node.labels))
        .collect())
}

/// Outcome of a best-response query for the linear class.
#[derive(Debug, Clone)]
pub struct LinearBestResponse<S: Scalar> {
    pub hypothesis: Hypothesis<S>,
    pub payoff: S,
    pub region: RegionVector,
}

/// Best linear response against a set of opponent hypotheses on a sample.
///
/// Each point is worth `1 / (k + 1)` where `k` opponents currently satisfy
/// it: that is the share the responder collects by satisfying the point
/// too. The best response maximizes the summed value of satisfied points
/// over all realizable label vectors; ties go to the lexicographically
/// smallest vector. The reported payoff is averaged over the sample.
pub fn best_linear_response<S: Scalar>(
    sample: &Sample<S>,
    opponents: &[Hypothesis<S>],
    config: &LinearConfig,
) -> Result<LinearBestResponse<S>> {
    check_dimension(sample, config)?;
    let weights = response_weights(sample, opponents)?;
    let regions = enumerate_regions(sample, config)?;
    debug_assert!(!regions.is_empty(), "every sample realizes some labeling");

    let mut best: Option<(S, &RegionVector)> = None;
    for region in &regions {
        let value = S::sum(
            region
                .labels()
                .iter()
                .zip(weights.iter())
                .filter(|(l, _)| **l == RegionLabel::One)
                .map(|(_, w)| w.clone()),
        );
        match &best {
            Some((incumbent, _)) if value <= *incumbent => {}
            _ => best = Some((value, region)),
        }
    }
    let (value, region) =
        best.ok_or_else(|| Error::Internal("region enumeration produced no label vectors".into()))?;
    let witness = match pvf(sample, region, config)? {
        FeasibilityResult::Feasible { witness, .. } => witness,
        FeasibilityResult::Infeasible => {
            return Err(Error::Internal(
                "enumerated label vector failed its feasibility recheck".into(),
            ))
        }
    };
    Ok(LinearBestResponse {
        hypothesis: Hypothesis::linear(witness),
        payoff: value / S::from_usize(sample.len()),
        region: region.clone(),
    })
}

/// Per-point value of satisfying each sample point given the opponents that
/// already satisfy it.
pub fn response_weights<S: Scalar>(
    sample: &Sample<S>,
    opponents: &[Hypothesis<S>],
) -> Result<Vec<S>> {
    sample
        .points()
        .iter()
        .map(|z| {
            let mut rivals = 0i128;
            for h in opponents {
                if satisfies(z, h)? {
                    rivals += 1;
                }
            }
            Ok(S::from_int_ratio(1, rivals + 1))
        })
        .collect()
}
