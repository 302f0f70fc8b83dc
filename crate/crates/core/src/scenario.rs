//! Scenario generation: percentile wind curves, k-means clustered price
//! days, k-means clustered regulation requirements, their Cartesian product,
//! and the collapse of components that have become known.

use crate::market::{
    DayPrices, HourSeries, ModelError, RegulationPair, Scenario, ScenarioSet, WindCurve, HOURS,
    PRICE_ATTRIBUTES,
};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

fn invalid<T>(msg: impl Into<String>) -> Result<T, ScenarioError> {
    Err(ScenarioError::Invalid(msg.into()))
}

/// Clustering outcome: centroids with their observation shares.
#[derive(Debug, Clone)]
pub struct ClusterModel {
    pub centroids: Vec<Vec<f64>>,
    pub probabilities: Vec<f64>,
    pub inertia: f64,
}

/// Lloyd's algorithm with seeded k-means++ initialization. Ties in
/// assignment go to the lowest centroid index; an emptied cluster is
/// reseeded to the point farthest from its assigned centroid. Identical
/// inputs and seed give identical output.
pub fn kmeans(
    points: &[Vec<f64>],
    k: usize,
    seed: u64,
    max_iter: usize,
) -> Result<ClusterModel, ScenarioError> {
    Ok(kmeans_with_trace(points, k, seed, max_iter)?.0)
}

/// Like [`kmeans`], also returning the inertia recorded after every Lloyd
/// iteration (a non-increasing sequence).
pub fn kmeans_with_trace(
    points: &[Vec<f64>],
    k: usize,
    seed: u64,
    max_iter: usize,
) -> Result<(ClusterModel, Vec<f64>), ScenarioError> {
    let n = points.len();
    if k == 0 {
        return invalid("k must be at least 1");
    }
    if k > n {
        return invalid(format!("k = {k} exceeds the {n} points"));
    }
    let dim = points[0].len();
    for (i, p) in points.iter().enumerate() {
        if p.len() != dim {
            return invalid(format!(
                "point {i} has dimension {}, expected {dim}",
                p.len()
            ));
        }
    }

    let dist2 = |a: &[f64], b: &[f64]| -> f64 {
        a.iter()
            .zip(b)
            .map(|(x, y)| (x - y) * (x - y))
            .sum::<f64>()
    };

    // k-means++ seeding.
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut centroids: Vec<Vec<f64>> = Vec::with_capacity(k);
    let mut chosen = vec![false; n];
    let first = rng.gen_range(0..n);
    centroids.push(points[first].clone());
    chosen[first] = true;
    let mut min_d2: Vec<f64> = points.iter().map(|p| dist2(p, &centroids[0])).collect();
    while centroids.len() < k {
        let total: f64 = min_d2.iter().sum();
        let pick = if total > 0.0 {
            let mut u = rng.gen::<f64>() * total;
            let mut pick = n - 1;
            for (i, &d) in min_d2.iter().enumerate() {
                if u < d {
                    pick = i;
                    break;
                }
                u -= d;
            }
            pick
        } else {
            // All remaining points coincide with a centroid; take the lowest
            // unchosen index so duplicates still yield k centroids.
            (0..n).find(|&i| !chosen[i]).unwrap_or(0)
        };
        chosen[pick] = true;
        centroids.push(points[pick].clone());
        for (i, p) in points.iter().enumerate() {
            let d = dist2(p, centroids.last().unwrap());
            if d < min_d2[i] {
                min_d2[i] = d;
            }
        }
    }

    let assign_all = |centroids: &[Vec<f64>], assignment: &mut [usize]| {
        for (i, p) in points.iter().enumerate() {
            let mut best = 0usize;
            let mut best_d = f64::INFINITY;
            for (c, cent) in centroids.iter().enumerate() {
                let d = dist2(p, cent);
                if d < best_d {
                    best_d = d;
                    best = c;
                }
            }
            assignment[i] = best;
        }
    };

    let mut assignment = vec![0usize; n];
    assign_all(&centroids, &mut assignment);
    let mut trace = Vec::new();
    for _ in 0..max_iter.max(1) {
        // Update step.
        let mut sums = vec![vec![0.0; dim]; k];
        let mut counts = vec![0usize; k];
        for (i, &a) in assignment.iter().enumerate() {
            counts[a] += 1;
            for (s, &v) in sums[a].iter_mut().zip(&points[i]) {
                *s += v;
            }
        }
        for c in 0..k {
            if counts[c] > 0 {
                for s in sums[c].iter_mut() {
                    *s /= counts[c] as f64;
                }
                centroids[c] = sums[c].clone();
            }
        }
        // Reseed empty clusters to the farthest point from its centroid.
        let mut reseeded: Vec<usize> = Vec::new();
        for c in 0..k {
            if counts[c] == 0 {
                let mut far_i = 0usize;
                let mut far_d = -1.0;
                for (i, p) in points.iter().enumerate() {
                    if reseeded.contains(&i) {
                        continue;
                    }
                    let d = dist2(p, &centroids[assignment[i]]);
                    if d > far_d {
                        far_d = d;
                        far_i = i;
                    }
                }
                centroids[c] = points[far_i].clone();
                reseeded.push(far_i);
            }
        }

        // Assignment step.
        let mut next = vec![0usize; n];
        assign_all(&centroids, &mut next);
        let inertia: f64 = points
            .iter()
            .zip(&next)
            .map(|(p, &a)| dist2(p, &centroids[a]))
            .sum();
        trace.push(inertia);
        let stable = next == assignment;
        assignment = next;
        if stable {
            break;
        }
    }

    let mut counts = vec![0usize; k];
    for &a in &assignment {
        counts[a] += 1;
    }
    let probabilities: Vec<f64> = counts.iter().map(|&c| c as f64 / n as f64).collect();
    let inertia = *trace.last().expect("at least one iteration");
    Ok((
        ClusterModel {
            centroids,
            probabilities,
            inertia,
        },
        trace,
    ))
}

/// Percentile wind forecast for one day, one of the issue points before and
/// during the trading day.
#[derive(Debug, Clone, PartialEq)]
pub struct ForecastSnapshot {
    /// Which decision point this forecast serves (1 through 4).
    pub issue_label: u8,
    pub p25: WindCurve,
    pub p50: WindCurve,
    pub p75: WindCurve,
}

impl ForecastSnapshot {
    pub fn validate(&self) -> Result<(), ScenarioError> {
        self.p25.validate()?;
        self.p50.validate()?;
        self.p75.validate()?;
        for t in 0..HOURS {
            if !(self.p25.0[t] <= self.p50.0[t] && self.p50.0[t] <= self.p75.0[t]) {
                return invalid(format!(
                    "percentile ordering violated at hour {t}: {} / {} / {}",
                    self.p25.0[t], self.p50.0[t], self.p75.0[t]
                ));
            }
        }
        Ok(())
    }
}

/// The three equally weighted wind scenarios of a forecast snapshot, in
/// p25, p50, p75 order.
pub fn wind_scenarios(
    snapshot: &ForecastSnapshot,
) -> Result<Vec<(WindCurve, f64)>, ScenarioError> {
    snapshot.validate()?;
    let w = 1.0 / 3.0;
    Ok(vec![
        (snapshot.p25, w),
        (snapshot.p50, w),
        (snapshot.p75, w),
    ])
}

/// Clusters whole price days (168 attributes each) into `k` scenario days
/// with frequentist probabilities. Centroid entries outside the valid price
/// set are repaired (negatives clamp to zero, a reversed balancing pair is
/// swapped) with a note on stderr; identical centroids merge and empty
/// clusters drop.
pub fn price_scenarios(
    history: &[DayPrices],
    k: usize,
    seed: u64,
) -> Result<Vec<(DayPrices, f64)>, ScenarioError> {
    if history.len() < k {
        return invalid(format!(
            "need at least k = {k} price days, got {}",
            history.len()
        ));
    }
    let points: Vec<Vec<f64>> = history.iter().map(|d| d.to_attributes()).collect();
    debug_assert!(points.iter().all(|p| p.len() == PRICE_ATTRIBUTES));
    let model = kmeans(&points, k, seed, 200)?;
    let mut out: Vec<(DayPrices, f64)> = Vec::with_capacity(k);
    for (c, centroid) in model.centroids.iter().enumerate() {
        let prob = model.probabilities[c];
        if prob == 0.0 {
            continue;
        }
        let (prices, repairs) = DayPrices::from_attributes(centroid)?;
        if repairs.any() {
            eprintln!(
                "price cluster {c}: repaired {} negative and {} misordered entries",
                repairs.clamped_negative, repairs.reordered_bm
            );
        }
        if let Some(existing) = out.iter_mut().find(|(p, _)| *p == prices) {
            existing.1 += prob;
        } else {
            out.push((prices, prob));
        }
    }
    Ok(out)
}

/// Clusters (up, down) regulation requirement pairs into `k` scenarios with
/// frequentist probabilities; centroids clamp into the unit square.
pub fn regulation_scenarios(
    history: &[RegulationPair],
    k: usize,
    seed: u64,
) -> Result<Vec<(RegulationPair, f64)>, ScenarioError> {
    if history.len() < k {
        return invalid(format!(
            "need at least k = {k} regulation pairs, got {}",
            history.len()
        ));
    }
    for (i, pair) in history.iter().enumerate() {
        pair.validate()
            .map_err(|e| ScenarioError::Invalid(format!("pair {i}: {e}")))?;
    }
    let points: Vec<Vec<f64>> = history.iter().map(|p| vec![p.pi_up, p.pi_dw]).collect();
    let model = kmeans(&points, k, seed, 200)?;
    let mut out: Vec<(RegulationPair, f64)> = Vec::with_capacity(k);
    for (c, centroid) in model.centroids.iter().enumerate() {
        let prob = model.probabilities[c];
        if prob == 0.0 {
            continue;
        }
        let pair = RegulationPair {
            pi_up: centroid[0].clamp(0.0, 1.0),
            pi_dw: centroid[1].clamp(0.0, 1.0),
        };
        if let Some(existing) = out.iter_mut().find(|(p, _)| *p == pair) {
            existing.1 += prob;
        } else {
            out.push((pair, prob));
        }
    }
    Ok(out)
}

/// Cartesian product of the three independent families; joint probabilities
/// are products of the marginals. Iteration order is wind-major, then
/// prices, then regulation.
pub fn combine(
    wind: &[(WindCurve, f64)],
    prices: &[(DayPrices, f64)],
    regulation: &[(RegulationPair, f64)],
) -> Result<ScenarioSet, ScenarioError> {
    if wind.is_empty() || prices.is_empty() || regulation.is_empty() {
        return invalid("every scenario family must be non-empty");
    }
    let mut scenarios = Vec::with_capacity(wind.len() * prices.len() * regulation.len());
    for (w, pw) in wind {
        for (p, pp) in prices {
            for (r, pr) in regulation {
                scenarios.push(Scenario {
                    wind: *w,
                    prices: p.clone(),
                    regulation: *r,
                    probability: pw * pp * pr,
                });
            }
        }
    }
    Ok(ScenarioSet::new(scenarios)?)
}

/// One of the seven price series of a day.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PriceField {
    BetaDam,
    BetaIdm,
    GammaRm,
    BetaRmUp,
    BetaRmDw,
    LambdaBmUp,
    LambdaBmDw,
}

/// A component of the uncertainty that has become known.
#[derive(Debug, Clone)]
pub enum RealizedComponent {
    Wind(WindCurve),
    Regulation(RegulationPair),
    PriceColumn(PriceField, HourSeries),
}

/// All seven price columns of a realized day.
pub fn all_price_columns(prices: &DayPrices) -> Vec<RealizedComponent> {
    use PriceField::*;
    vec![
        RealizedComponent::PriceColumn(BetaDam, prices.beta_dam),
        RealizedComponent::PriceColumn(BetaIdm, prices.beta_idm),
        RealizedComponent::PriceColumn(GammaRm, prices.gamma_rm),
        RealizedComponent::PriceColumn(BetaRmUp, prices.beta_rm_up),
        RealizedComponent::PriceColumn(BetaRmDw, prices.beta_rm_dw),
        RealizedComponent::PriceColumn(LambdaBmUp, prices.lambda_bm_up),
        RealizedComponent::PriceColumn(LambdaBmDw, prices.lambda_bm_dw),
    ]
}

/// Replaces the named components with their realized values in every
/// scenario, then merges scenarios that became identical, summing their
/// probabilities (first occurrence keeps its position).
pub fn collapse_to_realized(set: &ScenarioSet, realized: &[RealizedComponent]) -> ScenarioSet {
    let mut collapsed: Vec<Scenario> = Vec::with_capacity(set.len());
    for scen in set.iter() {
        let mut s = scen.clone();
        for r in realized {
            match r {
                RealizedComponent::Wind(w) => s.wind = *w,
                RealizedComponent::Regulation(r) => s.regulation = *r,
                RealizedComponent::PriceColumn(field, series) => {
                    let dst = match field {
                        PriceField::BetaDam => &mut s.prices.beta_dam,
                        PriceField::BetaIdm => &mut s.prices.beta_idm,
                        PriceField::GammaRm => &mut s.prices.gamma_rm,
                        PriceField::BetaRmUp => &mut s.prices.beta_rm_up,
                        PriceField::BetaRmDw => &mut s.prices.beta_rm_dw,
                        PriceField::LambdaBmUp => &mut s.prices.lambda_bm_up,
                        PriceField::LambdaBmDw => &mut s.prices.lambda_bm_dw,
                    };
                    *dst = *series;
                }
            }
        }
        if let Some(existing) = collapsed.iter_mut().find(|e| {
            e.wind == s.wind && e.prices == s.prices && e.regulation == s.regulation
        }) {
            existing.probability += s.probability;
        } else {
            collapsed.push(s);
        }
    }
    ScenarioSet::new(collapsed).expect("collapse preserves total probability")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kmeans_saturated_gives_zero_inertia() {
        let points = vec![vec![0.0, 1.0], vec![5.0, 5.0], vec![-3.0, 2.0]];
        let model = kmeans(&points, 3, 1, 100).unwrap();
        assert!(model.inertia.abs() < 1e-12);
        for &p in &model.probabilities {
            assert!((p - 1.0 / 3.0).abs() < 1e-12);
        }
    }

    #[test]
    fn kmeans_two_blobs() {
        let points = vec![
            vec![0.0],
            vec![0.1],
            vec![-0.1],
            vec![10.0],
            vec![10.1],
            vec![9.9],
        ];
        let model = kmeans(&points, 2, 7, 100).unwrap();
        let mut centers: Vec<f64> = model.centroids.iter().map(|c| c[0]).collect();
        centers.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert!((centers[0] - 0.0).abs() < 1e-9, "{centers:?}");
        assert!((centers[1] - 10.0).abs() < 1e-9, "{centers:?}");
        assert!(model.probabilities.iter().all(|&p| (p - 0.5).abs() < 1e-12));
    }

    #[test]
    fn kmeans_inertia_never_increases() {
        let points: Vec<Vec<f64>> = (0..40)
            .map(|i| vec![(i * 37 % 19) as f64, (i * 13 % 7) as f64])
            .collect();
        let (_, trace) = kmeans_with_trace(&points, 4, 3, 100).unwrap();
        for w in trace.windows(2) {
            assert!(w[1] <= w[0] + 1e-12, "inertia rose: {w:?}");
        }
    }

    #[test]
    fn kmeans_is_deterministic() {
        let points: Vec<Vec<f64>> = (0..30).map(|i| vec![(i % 11) as f64, (i % 5) as f64]).collect();
        let a = kmeans(&points, 3, 42, 100).unwrap();
        let b = kmeans(&points, 3, 42, 100).unwrap();
        assert_eq!(a.centroids, b.centroids);
        assert_eq!(a.probabilities, b.probabilities);
    }

    #[test]
    fn kmeans_rejects_bad_inputs() {
        let points = vec![vec![0.0], vec![1.0]];
        assert!(kmeans(&points, 3, 0, 10).is_err());
        assert!(kmeans(&points, 0, 0, 10).is_err());
        let ragged = vec![vec![0.0], vec![1.0, 2.0]];
        assert!(kmeans(&ragged, 1, 0, 10).is_err());
    }

    #[test]
    fn wind_scenarios_equal_weights() {
        let snap = ForecastSnapshot {
            issue_label: 1,
            p25: WindCurve::flat(5.0),
            p50: WindCurve::flat(10.0),
            p75: WindCurve::flat(15.0),
        };
        let out = wind_scenarios(&snap).unwrap();
        assert_eq!(out.len(), 3);
        assert!((out.iter().map(|(_, p)| p).sum::<f64>() - 1.0).abs() < 1e-12);
        assert_eq!(out[0].0, WindCurve::flat(5.0));
    }

    #[test]
    fn wind_scenarios_allow_collapsed_percentiles() {
        let snap = ForecastSnapshot {
            issue_label: 2,
            p25: WindCurve::flat(8.0),
            p50: WindCurve::flat(8.0),
            p75: WindCurve::flat(8.0),
        };
        assert_eq!(wind_scenarios(&snap).unwrap().len(), 3);
    }

    #[test]
    fn wind_scenarios_reject_misordered_percentiles() {
        let snap = ForecastSnapshot {
            issue_label: 1,
            p25: WindCurve::flat(9.0),
            p50: WindCurve::flat(8.0),
            p75: WindCurve::flat(10.0),
        };
        assert!(wind_scenarios(&snap).is_err());
    }

    fn flat_prices(level: f64) -> DayPrices {
        let mut p = DayPrices::zero();
        p.beta_dam = [level; HOURS];
        p.lambda_bm_dw = [level; HOURS];
        p
    }

    #[test]
    fn identical_price_history_collapses() {
        let history: Vec<DayPrices> = (0..10).map(|_| flat_prices(42.0)).collect();
        let out = price_scenarios(&history, 1, 5).unwrap();
        assert_eq!(out.len(), 1);
        assert!((out[0].1 - 1.0).abs() < 1e-12);
        assert_eq!(out[0].0, flat_prices(42.0));
    }

    #[test]
    fn saturated_price_clustering_returns_the_days() {
        let history: Vec<DayPrices> = (0..4).map(|i| flat_prices(10.0 + i as f64)).collect();
        let out = price_scenarios(&history, 4, 9).unwrap();
        assert_eq!(out.len(), 4);
        let mut levels: Vec<f64> = out.iter().map(|(p, _)| p.beta_dam[0]).collect();
        levels.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_eq!(levels, vec![10.0, 11.0, 12.0, 13.0]);
    }

    #[test]
    fn regulation_all_zero_history() {
        let history = vec![
            RegulationPair {
                pi_up: 0.0,
                pi_dw: 0.0
            };
            6
        ];
        let out = regulation_scenarios(&history, 3, 11).unwrap();
        assert_eq!(out.len(), 1, "identical centroids must merge");
        assert!((out[0].1 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn regulation_three_tight_clusters() {
        let mut history = Vec::new();
        for (cx, cy) in [(0.1, 0.1), (0.5, 0.5), (0.9, 0.2)] {
            for d in 0..5 {
                history.push(RegulationPair {
                    pi_up: cx + 0.001 * d as f64,
                    pi_dw: cy + 0.001 * d as f64,
                });
            }
        }
        let out = regulation_scenarios(&history, 3, 2).unwrap();
        assert_eq!(out.len(), 3);
        let mut ups: Vec<f64> = out.iter().map(|(p, _)| p.pi_up).collect();
        ups.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for (got, want) in ups.iter().zip([0.102, 0.502, 0.902]) {
            assert!((got - want).abs() < 0.01, "{got} vs {want}");
        }
    }

    fn tiny_families() -> (
        Vec<(WindCurve, f64)>,
        Vec<(DayPrices, f64)>,
        Vec<(RegulationPair, f64)>,
    ) {
        let wind = vec![
            (WindCurve::flat(5.0), 0.5),
            (WindCurve::flat(10.0), 0.5),
        ];
        let prices = vec![(flat_prices(30.0), 0.25), (flat_prices(50.0), 0.75)];
        let reg = vec![
            (
                RegulationPair {
                    pi_up: 0.2,
                    pi_dw: 0.1,
                },
                0.4,
            ),
            (
                RegulationPair {
                    pi_up: 0.6,
                    pi_dw: 0.3,
                },
                0.6,
            ),
        ];
        (wind, prices, reg)
    }

    #[test]
    fn combine_single_families() {
        let set = combine(
            &[(WindCurve::flat(1.0), 1.0)],
            &[(DayPrices::zero(), 1.0)],
            &[(
                RegulationPair {
                    pi_up: 0.0,
                    pi_dw: 0.0,
                },
                1.0,
            )],
        )
        .unwrap();
        assert_eq!(set.len(), 1);
        assert_eq!(set.get(0).probability, 1.0);
    }

    #[test]
    fn combine_marginalization_recovers_families() {
        let (wind, prices, reg) = tiny_families();
        let set = combine(&wind, &prices, &reg).unwrap();
        assert_eq!(set.len(), 8);
        // Marginal over prices/regulation recovers the wind weights.
        for (w, pw) in &wind {
            let sum: f64 = set
                .iter()
                .filter(|s| s.wind == *w)
                .map(|s| s.probability)
                .sum();
            assert!((sum - pw).abs() < 1e-12);
        }
        for (p, pp) in &prices {
            let sum: f64 = set
                .iter()
                .filter(|s| s.prices == *p)
                .map(|s| s.probability)
                .sum();
            assert!((sum - pp).abs() < 1e-12);
        }
    }

    #[test]
    fn collapse_nothing_is_identity() {
        let (wind, prices, reg) = tiny_families();
        let set = combine(&wind, &prices, &reg).unwrap();
        let same = collapse_to_realized(&set, &[]);
        assert_eq!(same.len(), set.len());
    }

    #[test]
    fn collapse_everything_gives_one_scenario() {
        let (wind, prices, reg) = tiny_families();
        let set = combine(&wind, &prices, &reg).unwrap();
        let mut realized = vec![
            RealizedComponent::Wind(WindCurve::flat(7.0)),
            RealizedComponent::Regulation(RegulationPair {
                pi_up: 0.3,
                pi_dw: 0.2,
            }),
        ];
        realized.extend(all_price_columns(&flat_prices(40.0)));
        let collapsed = collapse_to_realized(&set, &realized);
        assert_eq!(collapsed.len(), 1);
        assert!((collapsed.get(0).probability - 1.0).abs() < 1e-12);
    }

    #[test]
    fn collapse_prices_only_merges_price_axis() {
        let (wind, prices, reg) = tiny_families();
        let set = combine(&wind, &prices, &reg).unwrap();
        let collapsed = collapse_to_realized(&set, &all_price_columns(&flat_prices(40.0)));
        // 2 wind x 2 regulation remain.
        assert_eq!(collapsed.len(), 4);
    }
}
