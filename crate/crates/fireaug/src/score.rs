//! Rank-order-centroid weights, the weighted-sum score F(x), method ranking,
//! and the keep-best tuning trace.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::eval::MetricRecord;
use crate::num::{real, Real};

/// Descending metric weights that sum to 1.
#[derive(Clone, Debug, PartialEq)]
pub struct ScoreWeights {
    w: Vec<f64>,
}

impl ScoreWeights {
    /// Rank-order-centroid weights `w_i = (1/n) * sum_{k=i}^{n} 1/k`,
    /// evaluated in exact rational arithmetic before conversion.
    pub fn roc(n: usize) -> Result<Self> {
        let exact = roc_weights_exact(n)?;
        let w = exact
            .iter()
            .map(|r| r.to_f64().expect("weight convertible to f64"))
            .collect();
        Ok(Self { w })
    }

    pub fn values(&self) -> &[f64] {
        &self.w
    }

    pub fn len(&self) -> usize {
        self.w.len()
    }

    pub fn is_empty(&self) -> bool {
        self.w.is_empty()
    }
}

/// Exact rational ROC weights; descending and summing to exactly 1.
pub fn roc_weights_exact(n: usize) -> Result<Vec<BigRational>> {
    if n == 0 {
        return Err(Error::InvalidParam("roc weights need n >= 1".into()));
    }
    let n_big = BigRational::from_integer(BigInt::from(n as u64));
    let mut tail = BigRational::zero(); // sum_{k=i}^{n} 1/k, built from the back
    let mut weights = vec![BigRational::zero(); n];
    for i in (1..=n).rev() {
        tail += BigRational::new(BigInt::one(), BigInt::from(i as u64));
        weights[i - 1] = &tail / &n_big;
    }
    Ok(weights)
}

/// Weighted-sum score `F = w1*(1 - fire_fnr) + w2*veg_iou + w3*total_iou`.
///
/// All metric inputs are fractions in `[0, 1]`; the weights must be the
/// three-metric set.
pub fn weighted_score<F: Real>(
    fire_fnr: F,
    veg_iou: F,
    total_iou: F,
    weights: &ScoreWeights,
) -> Result<F> {
    if weights.len() != 3 {
        return Err(Error::InvalidParam(format!(
            "weighted score takes 3 weights, got {}",
            weights.len()
        )));
    }
    for (name, v) in [
        ("fire_fnr", fire_fnr),
        ("veg_iou", veg_iou),
        ("total_iou", total_iou),
    ] {
        if v < F::zero() || v > F::one() {
            return Err(Error::InvalidParam(format!("{name} outside [0, 1]")));
        }
    }
    let w: Vec<F> = weights.values().iter().map(|&x| real(x)).collect();
    Ok(w[0] * (F::one() - fire_fnr) + w[1] * veg_iou + w[2] * total_iou)
}

/// Score one metric record from its raw metrics.
pub fn score_record(record: &MetricRecord, weights: &ScoreWeights) -> Result<f64> {
    record.validate()?;
    weighted_score(record.fire_fnr, record.veg_iou, record.total_iou, weights)
}

/// Rank records by F(x), descending. Scores are recomputed from the raw
/// metrics, never trusted from the input. Ties break on lower fire FNR, then
/// method name.
pub fn rank_methods(records: &[MetricRecord], weights: &ScoreWeights) -> Result<Vec<MetricRecord>> {
    let mut scored: Vec<MetricRecord> = records
        .iter()
        .map(|r| {
            let mut r = r.clone();
            r.score = score_record(&r, weights)?;
            Ok(r)
        })
        .collect::<Result<_>>()?;
    scored.sort_by(|a, b| {
        b.score
            .total_cmp(&a.score)
            .then(a.fire_fnr.total_cmp(&b.fire_fnr))
            .then(a.method.cmp(&b.method))
    });
    Ok(scored)
}

/// Outcome of replaying a tuning sweep through the keep-best rule.
#[derive(Clone, Debug, PartialEq)]
pub struct KeepBest {
    /// All rows with recomputed scores, sorted descending.
    pub ranked: Vec<MetricRecord>,
    /// Input-order indices of rows that would have been retained: the first
    /// row always, then every row whose score beats the best so far.
    pub retained: Vec<usize>,
    pub best: MetricRecord,
}

/// Score each row, rank them, and trace which rows the keep-best rule
/// retains in input order.
pub fn keep_best_rank(rows: &[MetricRecord], weights: &ScoreWeights) -> Result<KeepBest> {
    if rows.is_empty() {
        return Err(Error::InvalidParam("keep-best needs at least one row".into()));
    }
    let mut scored = Vec::with_capacity(rows.len());
    for row in rows {
        let mut row = row.clone();
        row.score = score_record(&row, weights)?;
        scored.push(row);
    }

    let mut retained = vec![0];
    let mut best_score = scored[0].score;
    let mut best = scored[0].clone();
    for (i, row) in scored.iter().enumerate().skip(1) {
        if row.score > best_score {
            best_score = row.score;
            best = row.clone();
            retained.push(i);
        }
    }

    let ranked = rank_methods(&scored, weights)?;
    Ok(KeepBest { ranked, retained, best })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(method: &str, fnr_pct: f64, veg_pct: f64, total_pct: f64) -> MetricRecord {
        MetricRecord {
            method: method.into(),
            fire_fnr: fnr_pct / 100.0,
            veg_iou: veg_pct / 100.0,
            total_iou: total_pct / 100.0,
            score: 0.0,
        }
    }

    #[test]
    fn roc_three_metrics() {
        let w = ScoreWeights::roc(3).unwrap();
        // 11/18, 5/18, 1/9
        assert!((w.values()[0] - 11.0 / 18.0).abs() < 1e-15);
        assert!((w.values()[1] - 5.0 / 18.0).abs() < 1e-15);
        assert!((w.values()[2] - 1.0 / 9.0).abs() < 1e-15);
    }

    #[test]
    fn roc_single_metric() {
        assert_eq!(ScoreWeights::roc(1).unwrap().values(), &[1.0]);
    }

    #[test]
    fn roc_two_metrics() {
        // (1/2)(1 + 1/2) = 3/4, (1/2)(1/2) = 1/4
        assert_eq!(ScoreWeights::roc(2).unwrap().values(), &[0.75, 0.25]);
    }

    #[test]
    fn roc_zero_rejected() {
        assert!(ScoreWeights::roc(0).is_err());
    }

    #[test]
    fn roc_exact_sums_to_one() {
        for n in 1..=50 {
            let exact = roc_weights_exact(n).unwrap();
            let sum: BigRational = exact.iter().sum();
            assert!(sum.is_one(), "n = {n}");
            for pair in exact.windows(2) {
                assert!(pair[0] > pair[1], "weights must descend at n = {n}");
            }
        }
    }

    #[test]
    fn perfect_scores_give_one() {
        let w = ScoreWeights::roc(3).unwrap();
        let f: f64 = weighted_score(0.0, 1.0, 1.0, &w).unwrap();
        assert!((f - 1.0).abs() < 1e-12);
    }

    #[test]
    fn published_rows_reproduce() {
        let w = ScoreWeights::roc(3).unwrap();
        let f: f64 = weighted_score(0.0521, 0.6609, 0.5682, &w).unwrap();
        assert!((f - 0.8259).abs() <= 0.001, "f = {f}");
        let f: f64 = weighted_score(0.1616, 0.6083, 0.4526, &w).unwrap();
        assert!((f - 0.7316).abs() <= 0.001, "f = {f}");
    }

    #[test]
    fn out_of_range_inputs_rejected() {
        let w = ScoreWeights::roc(3).unwrap();
        assert!(weighted_score(-0.1f64, 0.5, 0.5, &w).is_err());
        assert!(weighted_score(0.1f64, 1.5, 0.5, &w).is_err());
    }

    #[test]
    fn score_is_generic_over_scalar() {
        let w = ScoreWeights::roc(3).unwrap();
        let f32_score: f32 = weighted_score(0.0521f32, 0.6609, 0.5682, &w).unwrap();
        let f64_score: f64 = weighted_score(0.0521f64, 0.6609, 0.5682, &w).unwrap();
        assert!((f32_score as f64 - f64_score).abs() < 1e-6);
    }

    #[test]
    fn rank_single_record() {
        let w = ScoreWeights::roc(3).unwrap();
        let rows = vec![rec("only", 10.0, 60.0, 50.0)];
        let ranked = rank_methods(&rows, &w).unwrap();
        assert_eq!(ranked.len(), 1);
        assert_eq!(ranked[0].method, "only");
    }

    #[test]
    fn rank_ignores_input_scores() {
        let w = ScoreWeights::roc(3).unwrap();
        let mut good = rec("good", 5.0, 66.0, 56.0);
        good.score = 0.0; // bogus incoming score
        let mut bad = rec("bad", 50.0, 30.0, 20.0);
        bad.score = 99.0;
        let ranked = rank_methods(&[bad, good], &w).unwrap();
        assert_eq!(ranked[0].method, "good");
    }

    #[test]
    fn rank_tie_breaks_on_fnr_then_name() {
        let w = ScoreWeights::roc(3).unwrap();
        // Same score by construction: swap fnr/veg contributions.
        let a = rec("b-name", 10.0, 60.0, 50.0);
        let b = rec("a-name", 10.0, 60.0, 50.0);
        let ranked = rank_methods(&[a, b], &w).unwrap();
        assert_eq!(ranked[0].method, "a-name");
    }

    #[test]
    fn keep_best_trace() {
        let w = ScoreWeights::roc(3).unwrap();
        let rows = vec![
            rec("r0", 20.0, 60.0, 50.0), // baseline, retained
            rec("r1", 30.0, 55.0, 45.0), // worse, dropped
            rec("r2", 5.0, 66.0, 56.0),  // better, retained
            rec("r3", 6.0, 66.0, 56.0),  // worse than r2, dropped
        ];
        let out = keep_best_rank(&rows, &w).unwrap();
        assert_eq!(out.retained, vec![0, 2]);
        assert_eq!(out.best.method, "r2");
        assert_eq!(out.ranked[0].method, "r2");
    }

    #[test]
    fn keep_best_single_row_retained() {
        let w = ScoreWeights::roc(3).unwrap();
        let out = keep_best_rank(&[rec("solo", 10.0, 50.0, 40.0)], &w).unwrap();
        assert_eq!(out.retained, vec![0]);
        assert_eq!(out.best.method, "solo");
    }
}
