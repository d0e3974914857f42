//! Correlation, inter-rater reliability and one-way ANOVA.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

fn check_finite(name: &str, x: &[f64]) -> Result<()> {
    if x.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite(name.into()))
    }
}

/// Sample Pearson correlation.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::dim(format!("pearson: lengths {} and {} differ", x.len(), y.len())));
    }
    if x.len() < 2 {
        return Err(Error::DegenerateVariance(format!("pearson needs >= 2 points, got {}", x.len())));
    }
    check_finite("pearson x", x)?;
    check_finite("pearson y", y)?;
    let (mx, my) = (mean(x), mean(y));
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::DegenerateVariance("pearson: a series is constant".into()));
    }
    Ok((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// Subjects-by-raters score matrix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RaterMatrix {
    rows: Vec<Vec<f64>>,
    scale: (f64, f64),
}

impl RaterMatrix {
    pub fn new(rows: Vec<Vec<f64>>, scale: (f64, f64)) -> Result<Self> {
        let n = rows.len();
        let k = rows.first().map_or(0, Vec::len);
        if n < 2 || k < 2 {
            return Err(Error::dim(format!("rater matrix must be at least 2x2, got {n}x{k}")));
        }
        if let Some(i) = rows.iter().position(|r| r.len() != k) {
            return Err(Error::dim(format!("subject {i} has {} ratings, expected {k}", rows[i].len())));
        }
        if !(scale.0 < scale.1) || !scale.0.is_finite() || !scale.1.is_finite() {
            return Err(Error::Config(format!("invalid rating scale {scale:?}")));
        }
        for r in &rows {
            check_finite("rating", r)?;
            if let Some(v) = r.iter().find(|v| **v < scale.0 || **v > scale.1) {
                return Err(Error::Config(format!("rating {v} outside scale {scale:?}")));
            }
        }
        Ok(RaterMatrix { rows, scale })
    }

    pub fn subjects(&self) -> usize {
        self.rows.len()
    }

    pub fn raters(&self) -> usize {
        self.rows[0].len()
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn scale(&self) -> (f64, f64) {
        self.scale
    }

    /// Per-subject mean rating.
    pub fn subject_means(&self) -> Vec<f64> {
        self.rows.iter().map(|r| mean(r)).collect()
    }
}

/// Mean squares of the two-way (subjects x raters) decomposition without replication.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TwoWayMeanSquares {
    pub rows: f64,
    pub columns: f64,
    pub error: f64,
}

pub fn two_way_mean_squares(m: &RaterMatrix) -> TwoWayMeanSquares {
    let (n, k) = (m.subjects(), m.raters());
    let rows = m.rows();
    let row_means: Vec<f64> = rows.iter().map(|r| mean(r)).collect();
    let col_means: Vec<f64> = (0..k).map(|j| rows.iter().map(|r| r[j]).sum::<f64>() / n as f64).collect();
    let grand = row_means.iter().sum::<f64>() / n as f64;
    let ssr = k as f64 * row_means.iter().map(|r| (r - grand).powi(2)).sum::<f64>();
    let ssc = n as f64 * col_means.iter().map(|c| (c - grand).powi(2)).sum::<f64>();
    let mut sse = 0.0;
    for (i, r) in rows.iter().enumerate() {
        for (j, v) in r.iter().enumerate() {
            sse += (v - row_means[i] - col_means[j] + grand).powi(2);
        }
    }
    TwoWayMeanSquares {
        rows: ssr / (n - 1) as f64,
        columns: ssc / (k - 1) as f64,
        error: sse / ((n - 1) * (k - 1)) as f64,
    }
}

/// ICC(2,k): two-way random effects, absolute agreement, mean of `k` raters.
pub fn icc2k(m: &RaterMatrix) -> Result<f64> {
    let n = m.subjects() as f64;
    let unanimous = m.rows().iter().all(|r| r.iter().all(|v| *v == r[0]));
    let ms = two_way_mean_squares(m);
    if unanimous && ms.rows > 0.0 {
        return Ok(1.0);
    }
    let denominator = ms.rows + (ms.columns - ms.error) / n;
    if !(denominator > 0.0) {
        return Err(Error::UndefinedReliability { denominator });
    }
    Ok((ms.rows - ms.error) / denominator)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnovaResult {
    pub f: f64,
    pub p: f64,
    pub df_between: usize,
    pub df_within: usize,
    pub ss_between: f64,
    pub ss_within: f64,
    /// Groups differ but have no spread of their own, so `F` is infinite.
    pub infinite_f: bool,
}

/// One-way ANOVA over named groups.
pub fn anova_oneway(groups: &[(String, Vec<f64>)]) -> Result<AnovaResult> {
    if groups.len() < 2 {
        return Err(Error::Config(format!("ANOVA needs >= 2 groups, got {}", groups.len())));
    }
    for (name, g) in groups {
        if g.len() < 2 {
            return Err(Error::Config(format!("group `{name}` needs >= 2 observations, got {}", g.len())));
        }
        check_finite(name, g)?;
    }
    let total: usize = groups.iter().map(|(_, g)| g.len()).sum();
    let means: Vec<f64> = groups.iter().map(|(_, g)| mean(g)).collect();
    let grand = groups.iter().flat_map(|(_, g)| g).sum::<f64>() / total as f64;
    let ss_between = if means.iter().all(|m| *m == means[0]) {
        0.0
    } else {
        groups.iter().zip(&means).map(|((_, g), m)| g.len() as f64 * (m - grand).powi(2)).sum()
    };
    let ss_within: f64 = groups
        .iter()
        .zip(&means)
        .map(|((_, g), m)| g.iter().map(|v| (v - m).powi(2)).sum::<f64>())
        .sum();
    let df_between = groups.len() - 1;
    let df_within = total - groups.len();

    if ss_within == 0.0 {
        if ss_between == 0.0 {
            return Err(Error::DegenerateAnova);
        }
        return Ok(AnovaResult {
            f: f64::INFINITY,
            p: 0.0,
            df_between,
            df_within,
            ss_between,
            ss_within,
            infinite_f: true,
        });
    }
    let f = (ss_between / df_between as f64) / (ss_within / df_within as f64);
    Ok(AnovaResult {
        f,
        p: f_survival(f, df_between as f64, df_within as f64),
        df_between,
        df_within,
        ss_between,
        ss_within,
        infinite_f: false,
    })
}

/// Upper tail `P(F > f)` of the F distribution with `(d1, d2)` degrees of freedom.
pub fn f_survival(f: f64, d1: f64, d2: f64) -> f64 {
    if f <= 0.0 {
        return 1.0;
    }
    if f.is_infinite() {
        return 0.0;
    }
    regularized_incomplete_beta(d2 / 2.0, d1 / 2.0, d2 / (d2 + d1 * f))
}

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// `ln Γ(x)` for `x > 0` (Lanczos approximation).
pub fn ln_gamma(x: f64) -> f64 {
    if x < 0.5 {
        // reflection
        let pi = std::f64::consts::PI;
        return (pi / (pi * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut a = LANCZOS[0];
    let t = x + LANCZOS_G + 0.5;
    for (i, c) in LANCZOS.iter().enumerate().skip(1) {
        a += c / (x + i as f64);
    }
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + a.ln()
}

/// Regularized incomplete beta `I_x(a, b)`, continued fraction by the modified
/// Lentz method.
pub fn regularized_incomplete_beta(a: f64, b: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let ln_front = ln_gamma(a + b) - ln_gamma(a) - ln_gamma(b) + a * x.ln() + b * (1.0 - x).ln();
    if x < (a + 1.0) / (a + b + 2.0) {
        ln_front.exp() * beta_cf(a, b, x) / a
    } else {
        1.0 - ln_front.exp() * beta_cf(b, a, 1.0 - x) / b
    }
}

fn beta_cf(a: f64, b: f64, x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    const EPS: f64 = 1e-15;
    let (qab, qap, qam) = (a + b, a + 1.0, a - 1.0);
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..=500 {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < EPS {
            break;
        }
    }
    h
}

/// One dimension of a human-alignment table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlignmentRow {
    pub dimension: String,
    pub items: usize,
    /// Mean objective score over items.
    pub objective_mean: f64,
    /// Mean rating over items and raters, rescaled to `[0, 1]` by the rating scale.
    pub subjective_mean: f64,
    /// Pearson correlation between objective scores and per-item mean ratings.
    pub correlation: f64,
    /// ICC(2,k) of the raters.
    pub consistency: f64,
}

pub fn human_alignment(dimension: &str, objective: &[f64], ratings: &RaterMatrix) -> Result<AlignmentRow> {
    if objective.len() != ratings.subjects() {
        return Err(Error::dim(format!(
            "{} objective scores for {} rated items",
            objective.len(),
            ratings.subjects()
        )));
    }
    let subjective = ratings.subject_means();
    let (lo, hi) = ratings.scale();
    Ok(AlignmentRow {
        dimension: dimension.to_string(),
        items: objective.len(),
        objective_mean: mean(objective),
        subjective_mean: (mean(&subjective) - lo) / (hi - lo),
        correlation: pearson(objective, &subjective)?,
        consistency: icc2k(ratings)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn pearson_reference_cases() {
        let x = [1.0, 2.0, 3.0, 4.5];
        assert_eq!(pearson(&x, &x).unwrap(), 1.0);
        let neg: Vec<f64> = x.iter().map(|v| -v).collect();
        assert_eq!(pearson(&x, &neg).unwrap(), -1.0);
        // hand evaluation: dx = (-1, 0, 1), dy = (-5/3, 1/3, 4/3)
        let r = pearson(&[1.0, 2.0, 3.0], &[2.0, 4.0, 5.0]).unwrap();
        let want = 3.0 / (2.0f64 * (25.0 + 1.0 + 16.0) / 9.0).sqrt();
        assert!((r - want).abs() < 1e-15);
        assert!(matches!(pearson(&[1.0, 1.0], &[1.0, 2.0]), Err(Error::DegenerateVariance(_))));
        assert!(pearson(&[1.0], &[1.0]).is_err());
    }

    proptest! {
        #[test]
        fn pearson_affine_invariant(
            pts in proptest::collection::vec((-10.0f64..10.0, -10.0f64..10.0), 3..20),
            scale in 0.1f64..10.0,
            shift in -5.0f64..5.0,
        ) {
            let x: Vec<f64> = pts.iter().map(|p| p.0).collect();
            let y: Vec<f64> = pts.iter().map(|p| p.1).collect();
            let y2: Vec<f64> = y.iter().map(|v| scale * v + shift).collect();
            if let (Ok(a), Ok(b)) = (pearson(&x, &y), pearson(&x, &y2)) {
                prop_assert!((a - b).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn icc_small_matrix_by_hand() {
        // subjects x raters
        let m = RaterMatrix::new(vec![vec![1.0, 2.0], vec![3.0, 3.0], vec![5.0, 6.0]], (0.0, 10.0)).unwrap();
        // grand 10/3; row means 1.5, 3, 5.5; col means 3, 11/3
        let ms = two_way_mean_squares(&m);
        let ssr = 2.0 * ((1.5f64 - 10.0 / 3.0).powi(2) + (3.0f64 - 10.0 / 3.0).powi(2) + (5.5f64 - 10.0 / 3.0).powi(2));
        let ssc = 3.0 * ((3.0f64 - 10.0 / 3.0).powi(2) + (11.0f64 / 3.0 - 10.0 / 3.0).powi(2));
        let sst: f64 = [1.0, 2.0, 3.0, 3.0, 5.0, 6.0].iter().map(|v: &f64| (v - 10.0 / 3.0).powi(2)).sum();
        let sse = sst - ssr - ssc;
        assert!((ms.rows - ssr / 2.0).abs() < 1e-12);
        assert!((ms.columns - ssc).abs() < 1e-12);
        assert!((ms.error - sse / 2.0).abs() < 1e-12);
        let want = (ms.rows - ms.error) / (ms.rows + (ms.columns - ms.error) / 3.0);
        assert_eq!(icc2k(&m).unwrap(), want);
    }

    #[test]
    fn icc_unanimous_raters_is_one() {
        let m = RaterMatrix::new(vec![vec![0.1; 3], vec![0.7; 3], vec![0.3; 3]], (0.0, 1.0)).unwrap();
        assert_eq!(icc2k(&m).unwrap(), 1.0);
        let flat = RaterMatrix::new(vec![vec![4.0; 3]; 3], (0.0, 10.0)).unwrap();
        assert!(matches!(icc2k(&flat), Err(Error::UndefinedReliability { .. })));
    }

    #[test]
    fn rater_matrix_validation() {
        assert!(RaterMatrix::new(vec![vec![1.0, 2.0]], (0.0, 10.0)).is_err());
        assert!(RaterMatrix::new(vec![vec![1.0, 2.0], vec![1.0]], (0.0, 10.0)).is_err());
        assert!(RaterMatrix::new(vec![vec![1.0, 12.0], vec![1.0, 2.0]], (0.0, 10.0)).is_err());
    }

    fn groups(gs: &[&[f64]]) -> Vec<(String, Vec<f64>)> {
        gs.iter().enumerate().map(|(i, g)| (format!("g{i}"), g.to_vec())).collect()
    }

    #[test]
    fn anova_two_small_groups() {
        // means 2 and 3, grand 2.5: SSB = 3 * 0.25 * 2 = 1.5, SSW = 2 + 2 = 4
        let r = anova_oneway(&groups(&[&[1.0, 2.0, 3.0], &[2.0, 3.0, 4.0]])).unwrap();
        assert_eq!((r.df_between, r.df_within), (1, 4));
        assert!((r.ss_between - 1.5).abs() < 1e-12 && (r.ss_within - 4.0).abs() < 1e-12);
        assert!((r.f - 1.5).abs() < 1e-12);
        assert!(r.p > 0.0 && r.p < 1.0);
    }

    #[test]
    fn anova_identical_and_degenerate_groups() {
        let r = anova_oneway(&groups(&[&[0.1, 0.7, 0.3], &[0.1, 0.7, 0.3], &[0.1, 0.7, 0.3]])).unwrap();
        assert_eq!((r.f, r.p), (0.0, 1.0));
        let shifted = anova_oneway(&groups(&[&[1.0, 1.0], &[2.0, 2.0], &[4.0, 4.0]])).unwrap();
        assert!(shifted.infinite_f && shifted.f.is_infinite() && shifted.p == 0.0);
        assert!(matches!(anova_oneway(&groups(&[&[1.0, 1.0], &[1.0, 1.0]])), Err(Error::DegenerateAnova)));
        assert!(anova_oneway(&groups(&[&[1.0, 2.0]])).is_err());
        assert!(anova_oneway(&groups(&[&[1.0], &[1.0, 2.0]])).is_err());
    }

    #[test]
    fn published_resolution_anova_p_value() {
        // F = 6.18 on (2, 9) degrees of freedom is reported with p = 0.020
        let p = f_survival(6.18, 2.0, 9.0);
        assert!((p - 0.020).abs() < 0.0005, "{p}");
    }

    #[test]
    fn incomplete_beta_closed_forms() {
        // I_x(1, b) = 1 - (1 - x)^b and I_x(a, 1) = x^a
        for &x in &[0.01, 0.3, 0.5, 0.77, 0.999] {
            assert!((regularized_incomplete_beta(1.0, 3.5, x) - (1.0 - (1.0 - x).powf(3.5))).abs() < 1e-13);
            assert!((regularized_incomplete_beta(2.5, 1.0, x) - x.powf(2.5)).abs() < 1e-13);
        }
        assert!((ln_gamma(5.0) - 24f64.ln()).abs() < 1e-13);
        assert!((ln_gamma(0.5) - std::f64::consts::PI.sqrt().ln()).abs() < 1e-13);
    }

    #[test]
    fn f_survival_is_monotone() {
        let mut last = 1.0;
        for i in 0..200 {
            let p = f_survival(i as f64 * 0.1, 3.0, 12.0);
            assert!(p <= last);
            last = p;
        }
    }

    #[test]
    fn alignment_row_composes_primitives() {
        let obj = [0.6, 0.8, 0.7];
        let m = RaterMatrix::new(vec![vec![6.0, 7.0], vec![8.0, 8.0], vec![7.0, 6.0]], (0.0, 10.0)).unwrap();
        let row = human_alignment("VQS", &obj, &m).unwrap();
        assert_eq!(row.correlation, pearson(&obj, &m.subject_means()).unwrap());
        assert_eq!(row.consistency, icc2k(&m).unwrap());
        assert!((row.subjective_mean - 0.7).abs() < 1e-12);
        assert!((row.objective_mean - 0.7).abs() < 1e-12);
    }
}
