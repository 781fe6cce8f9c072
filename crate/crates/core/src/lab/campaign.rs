use std::io::Write;

use serde::Serialize;

use crate::evolution::export::fmt;
use crate::spectral::{random_trig, TrigPoly};

use super::{
    ratio_comm_bessel, ratio_comm_l2, ratio_comm_p, ratio_hilbert, ratio_interpolation,
    ratio_poincare, ratio_q, ratio_q_diff, ratio_q_diff_s, BesselVariant, Inequality, LabError,
    RatioSample,
};

/// Parameter values swept by a campaign; samples cycle through the
/// Cartesian product. Lists an inequality does not use are ignored.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ParamGrid {
    pub s: Vec<f64>,
    pub tau: Vec<f64>,
    pub sigma: Vec<f64>,
    pub p: Vec<u32>,
}

impl ParamGrid {
    /// Defaults follow the parameter choices of the energy estimates,
    /// e.g. the three Bessel-commutator regimes `r = 3, 9/4, 5/2`.
    pub fn default_for(ineq: Inequality) -> Self {
        let (s, tau, sigma, p): (Vec<f64>, Vec<f64>, Vec<f64>, Vec<u32>) = match ineq {
            Inequality::Hilbert => (vec![0.0, 1.0, 2.0, 3.0], vec![], vec![], vec![]),
            Inequality::Poincare => (vec![1.0, 2.0, 3.0], vec![], vec![], vec![]),
            Inequality::Interpolation => (vec![2.5, 3.0, 4.0], vec![], vec![], vec![]),
            Inequality::CommL2 => (vec![], vec![0.75, 1.0, 2.0], vec![], vec![]),
            Inequality::CommP => (vec![], vec![0.0, 1.0, 2.0], vec![], vec![0, 1, 2, 3]),
            Inequality::CommBesselI => (vec![], vec![2.0], vec![1.0], vec![]),
            Inequality::CommBesselIi => (vec![], vec![1.25], vec![0.75], vec![]),
            Inequality::CommBesselIii => (vec![], vec![1.5], vec![0.5], vec![]),
            Inequality::Q | Inequality::QDiffS => (vec![3.0, 3.5], vec![], vec![], vec![]),
            Inequality::QDiff => (vec![], vec![], vec![], vec![]),
        };
        ParamGrid { s, tau, sigma, p }
    }

    fn points(&self) -> Vec<Point> {
        fn or<T: Copy>(v: &[T], d: T) -> Vec<T> {
            if v.is_empty() {
                vec![d]
            } else {
                v.to_vec()
            }
        }
        let mut out = Vec::new();
        for &s in &or(&self.s, 3.0) {
            for &tau in &or(&self.tau, 1.0) {
                for &sigma in &or(&self.sigma, 1.0) {
                    for &p in &or(&self.p, 0) {
                        out.push(Point { s, tau, sigma, p });
                    }
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy)]
struct Point {
    s: f64,
    tau: f64,
    sigma: f64,
    p: u32,
}

/// A randomised campaign over one inequality.
#[derive(Debug, Clone, Serialize)]
pub struct Campaign {
    pub inequality: Inequality,
    pub sample_count: usize,
    #[serde(rename = "K_levels")]
    pub k_levels: Vec<usize>,
    pub seed: u64,
    pub params: ParamGrid,
    /// Allowed relative growth of the maximal ratio from the coarsest to the
    /// finest level.
    pub growth_threshold: f64,
}

impl Campaign {
    pub fn new(
        inequality: Inequality,
        sample_count: usize,
        k_levels: Vec<usize>,
        seed: u64,
    ) -> Self {
        Campaign {
            inequality,
            sample_count,
            k_levels,
            seed,
            params: ParamGrid::default_for(inequality),
            growth_threshold: 0.5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Bounded,
    Suspicious,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LevelStats {
    #[serde(rename = "K")]
    pub max_mode: usize,
    pub samples: usize,
    pub max: f64,
    pub median: f64,
    pub p99: f64,
    pub degenerate: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RatioReport {
    pub inequality: Inequality,
    pub sample_count: usize,
    pub levels: Vec<LevelStats>,
    pub degenerate: usize,
    /// Degenerate samples whose left-hand side exceeded the tolerance.
    pub degenerate_violations: usize,
    pub max_ratio: f64,
    /// Max ratio at the finest level over max ratio at the coarsest.
    pub growth: f64,
    pub verdict: Verdict,
}

#[derive(Debug, Clone)]
pub struct CampaignOutcome {
    pub report: RatioReport,
    pub samples: Vec<RatioSample>,
}

fn decays(ineq: Inequality, pt: Point) -> (f64, f64) {
    let Point { s, tau, sigma, p } = pt;
    match ineq {
        Inequality::Hilbert | Inequality::Poincare | Inequality::Interpolation => (s, s),
        Inequality::CommL2 => (tau, 0.5),
        Inequality::CommP => (tau + p as f64, 1.0),
        Inequality::CommBesselI => (tau.max(2.0), sigma.max(tau - 1.0)),
        Inequality::CommBesselIi => ((tau + sigma).max(2.0), (tau - 1.0).max(0.0)),
        Inequality::CommBesselIii => ((tau + 0.5).max(2.0), (tau - 1.0).max(0.5)),
        Inequality::Q => (s.max(3.0), s.max(3.0)),
        Inequality::QDiff => (3.0, 3.0),
        Inequality::QDiffS => (s, s),
    }
}

fn sample_seed(seed: u64, level: usize, index: usize) -> u64 {
    seed ^ ((level as u64) << 40) ^ ((index as u64) << 1)
}

fn evaluate(
    ineq: Inequality,
    pt: Point,
    v: &TrigPoly,
    f: &TrigPoly,
) -> Result<RatioSample, LabError> {
    match ineq {
        Inequality::Hilbert => Ok(ratio_hilbert(f, pt.s)),
        Inequality::Poincare => ratio_poincare(f, pt.s),
        Inequality::Interpolation => ratio_interpolation(f, pt.s),
        Inequality::CommL2 => ratio_comm_l2(pt.tau, v, f),
        Inequality::CommP => ratio_comm_p(pt.tau, pt.p, v, f),
        Inequality::CommBesselI => ratio_comm_bessel(BesselVariant::I, pt.tau, pt.sigma, v, f),
        Inequality::CommBesselIi => ratio_comm_bessel(BesselVariant::Ii, pt.tau, pt.sigma, v, f),
        Inequality::CommBesselIii => ratio_comm_bessel(BesselVariant::Iii, pt.tau, pt.sigma, v, f),
        Inequality::Q => ratio_q(pt.s, v),
        Inequality::QDiff => ratio_q_diff(v, f),
        Inequality::QDiffS => ratio_q_diff_s(pt.s, v, f),
    }
}

fn level_stats(max_mode: usize, samples: &[RatioSample]) -> LevelStats {
    let mut ratios: Vec<f64> = samples
        .iter()
        .filter(|s| !s.degenerate)
        .map(|s| s.ratio)
        .collect();
    ratios.sort_by(f64::total_cmp);
    let pick = |q: f64| {
        if ratios.is_empty() {
            0.0
        } else {
            let rank = ((q * ratios.len() as f64).ceil() as usize).clamp(1, ratios.len());
            ratios[rank - 1]
        }
    };
    let median = if ratios.is_empty() {
        0.0
    } else if ratios.len() % 2 == 1 {
        ratios[ratios.len() / 2]
    } else {
        0.5 * (ratios[ratios.len() / 2 - 1] + ratios[ratios.len() / 2])
    };
    LevelStats {
        max_mode,
        samples: samples.len(),
        max: ratios.last().copied().unwrap_or(0.0),
        median,
        p99: pick(0.99),
        degenerate: samples.iter().filter(|s| s.degenerate).count(),
    }
}

/// Draws `sample_count` random inputs at every level and aggregates the ratios.
/// Deterministic in `seed`.
pub fn run_campaign(c: &Campaign) -> Result<CampaignOutcome, LabError> {
    if c.sample_count == 0 || c.k_levels.is_empty() {
        return Err(LabError::EmptyCampaign);
    }
    let points = c.params.points();
    let mut samples = Vec::with_capacity(c.sample_count * c.k_levels.len());
    let mut levels = Vec::with_capacity(c.k_levels.len());
    for (li, &k) in c.k_levels.iter().enumerate() {
        if k == 0 {
            return Err(LabError::ParameterDomain(
                "resolution levels must be positive".into(),
            ));
        }
        let start = samples.len();
        for i in 0..c.sample_count {
            let pt = points[i % points.len()];
            let (dv, df) = decays(c.inequality, pt);
            let seed = sample_seed(c.seed, li, i);
            let v = random_trig(seed, k, dv, 1.0);
            let f = random_trig(seed + 1, k, df, 1.0);
            samples.push(evaluate(c.inequality, pt, &v, &f)?.with_seed(seed));
        }
        levels.push(level_stats(k, &samples[start..]));
    }

    let first = levels.first().map_or(0.0, |l| l.max);
    let last = levels.last().map_or(0.0, |l| l.max);
    let growth = if first > 0.0 {
        last / first
    } else if last == 0.0 {
        1.0
    } else {
        f64::INFINITY
    };
    let degenerate_violations = samples.iter().filter(|s| s.violates_degenerate()).count();
    let verdict = if growth < 1.0 + c.growth_threshold && degenerate_violations == 0 {
        Verdict::Bounded
    } else {
        Verdict::Suspicious
    };
    let report = RatioReport {
        inequality: c.inequality,
        sample_count: samples.len(),
        degenerate: samples.iter().filter(|s| s.degenerate).count(),
        degenerate_violations,
        max_ratio: levels.iter().map(|l| l.max).fold(0.0, f64::max),
        growth,
        verdict,
        levels,
    };
    Ok(CampaignOutcome { report, samples })
}

pub const SAMPLES_CSV_HEADER: [&str; 11] = [
    "inequality",
    "seed",
    "K",
    "s",
    "tau",
    "sigma",
    "p",
    "lhs",
    "rhs_factor",
    "ratio",
    "degenerate",
];

/// One row per sample; unused parameters are left empty.
pub fn write_samples_csv<W: Write>(
    ineq: Inequality,
    samples: &[RatioSample],
    out: W,
) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SAMPLES_CSV_HEADER)?;
    for s in samples {
        let param = |name: &str| s.params.get(name).map(|v| fmt(*v)).unwrap_or_default();
        w.write_record([
            ineq.id().to_string(),
            s.seed.to_string(),
            s.max_mode.to_string(),
            param("s"),
            param("tau"),
            param("sigma"),
            param("p"),
            fmt(s.lhs),
            fmt(s.rhs_factor),
            fmt(s.ratio),
            s.degenerate.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hard_campaigns_stay_below_one() {
        for ineq in [
            Inequality::Hilbert,
            Inequality::Poincare,
            Inequality::Interpolation,
        ] {
            let out = run_campaign(&Campaign::new(ineq, 50, vec![8, 16], 3)).unwrap();
            assert!(
                out.report.max_ratio <= 1.0 + 1e-12,
                "{ineq}: {}",
                out.report.max_ratio
            );
            assert_eq!(out.report.verdict, Verdict::Bounded);
        }
    }

    #[test]
    fn campaigns_are_deterministic() {
        let c = Campaign::new(Inequality::CommP, 20, vec![8, 16], 9);
        let a = run_campaign(&c).unwrap();
        let b = run_campaign(&c).unwrap();
        assert_eq!(a.report, b.report);
        let mut x = Vec::new();
        let mut y = Vec::new();
        write_samples_csv(c.inequality, &a.samples, &mut x).unwrap();
        write_samples_csv(c.inequality, &b.samples, &mut y).unwrap();
        assert_eq!(x, y);
        assert_eq!(String::from_utf8(x).unwrap().lines().count(), 41);
    }

    #[test]
    fn level_statistics() {
        let samples: Vec<RatioSample> = (1..=100)
            .map(|i| RatioSample::new(4, &[], i as f64, 100.0))
            .chain([RatioSample::new(4, &[], 0.0, 0.0)])
            .collect();
        let st = level_stats(4, &samples);
        assert_eq!(st.max, 1.0);
        assert_eq!(st.p99, 0.99);
        assert!((st.median - 0.505).abs() < 1e-15);
        assert_eq!(st.degenerate, 1);
        assert_eq!(st.samples, 101);
    }

    #[test]
    fn empty_campaign_is_rejected() {
        assert_eq!(
            run_campaign(&Campaign::new(Inequality::Q, 0, vec![8], 1)).unwrap_err(),
            LabError::EmptyCampaign
        );
        assert!(run_campaign(&Campaign::new(Inequality::Q, 3, vec![], 1)).is_err());
    }
}
