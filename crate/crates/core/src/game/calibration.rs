//! Calibration of the successor-value distribution q from best-successor
//! statistics.
//!
//! Samples record, from the mover's point of view, a parent's static value and
//! the static values of all its children. The offset of the best child follows
//! the max-statistic of `n` draws from `q = N(dmu, sigma)` (relative to the
//! parent), so `E[best] = dmu + sigma * e_n` and `sd[best] = sigma * s_n` with
//! `e_n`, `s_n` the standardized max-statistic moments. Those moment equations
//! are inverted per bucket.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use thiserror::Error;

use crate::dist::{NormalParams, OrderStats};
use crate::game::Game;

const HEADER: &str = "mgss-calibration 1";

#[derive(Debug, Error)]
pub enum CalibrationError {
    #[error("no samples to calibrate from")]
    NoSamples,
    #[error("best-successor offsets have zero variance ({count} samples)")]
    ZeroVariance { count: usize },
    #[error("calibration file: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// One visited position: mover-relative parent value and child values.
#[derive(Debug, Clone, PartialEq)]
pub struct PositionSample {
    pub phase: u32,
    pub parent: f64,
    pub children: Vec<f64>,
}

impl PositionSample {
    /// Statically evaluates `state` and each successor from the mover's side.
    /// Returns `None` for terminal states.
    pub fn from_state<G: Game>(game: &G, state: &G::State) -> Option<Self> {
        let moves = game.successors(state);
        if moves.is_empty() {
            return None;
        }
        let mover = game.side_to_move(state);
        let parent = game.evaluate(state) * mover.sign();
        let children = moves
            .into_iter()
            .map(|mv| {
                let child = game.apply(state, mv).expect("successor is legal");
                game.evaluate(&child) * mover.sign()
            })
            .collect();
        Some(Self { phase: game.phase(state), parent, children })
    }

    pub fn best_offset(&self) -> f64 {
        self.children.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - self.parent
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bucket {
    pub phase_lo: u32,
    pub phase_hi: u32,
    pub branch_lo: u32,
    pub branch_hi: u32,
    pub dmu: f64,
    pub sigma: f64,
    pub count: usize,
}

impl Bucket {
    fn contains(&self, phase: u32, branching: u32) -> bool {
        (self.phase_lo..=self.phase_hi).contains(&phase)
            && (self.branch_lo..=self.branch_hi).contains(&branching)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationConfig {
    pub phase_edges: Vec<(u32, u32)>,
    pub branch_edges: Vec<(u32, u32)>,
    pub min_samples: usize,
}

impl Default for CalibrationConfig {
    fn default() -> Self {
        Self {
            phase_edges: vec![(4, 20), (21, 44), (45, 64)],
            branch_edges: vec![(1, 5), (6, 12), (13, 64)],
            min_samples: 50,
        }
    }
}

/// Per-bucket q offsets with a global fallback.
#[derive(Debug, Clone, PartialEq)]
pub struct QCalibration {
    pub global: Bucket,
    pub buckets: Vec<Bucket>,
}

impl QCalibration {
    /// A single bucket covering everything.
    pub fn uniform(dmu: f64, sigma: f64) -> Self {
        Self {
            global: Bucket {
                phase_lo: 0,
                phase_hi: u32::MAX,
                branch_lo: 0,
                branch_hi: u32::MAX,
                dmu,
                sigma,
                count: 0,
            },
            buckets: Vec::new(),
        }
    }

    pub fn lookup(&self, phase: u32, branching: usize) -> &Bucket {
        let branching = branching.min(u32::MAX as usize) as u32;
        self.buckets
            .iter()
            .find(|b| b.contains(phase, branching))
            .unwrap_or(&self.global)
    }

    /// q for a node whose mover-relative static value is `mover_value`: the
    /// successor distribution as seen by the mover.
    pub fn mover_q(&self, phase: u32, branching: usize, mover_value: f64) -> NormalParams<f64> {
        let b = self.lookup(phase, branching);
        NormalParams { mean: mover_value + b.dmu, std: b.sigma }
    }

    /// Text form: a version header, a comment naming the columns, then the global
    /// fallback record followed by one record per bucket.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str(HEADER);
        out.push('\n');
        out.push_str("# phase_lo phase_hi branch_lo branch_hi dmu sigma count (first record is the global fallback)\n");
        for b in std::iter::once(&self.global).chain(self.buckets.iter()) {
            let _ = writeln!(
                out,
                "{} {} {} {} {:?} {:?} {}",
                b.phase_lo, b.phase_hi, b.branch_lo, b.branch_hi, b.dmu, b.sigma, b.count
            );
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self, CalibrationError> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty() && !l.starts_with('#'));
        match lines.next() {
            Some(h) if h.trim() == HEADER => {}
            other => return Err(CalibrationError::Format(format!("bad header {other:?}"))),
        }
        let mut records = Vec::new();
        for line in lines {
            let f: Vec<&str> = line.split_whitespace().collect();
            if f.len() != 7 {
                return Err(CalibrationError::Format(format!("bad record {line:?}")));
            }
            let bad = || CalibrationError::Format(format!("bad record {line:?}"));
            let b = Bucket {
                phase_lo: f[0].parse().map_err(|_| bad())?,
                phase_hi: f[1].parse().map_err(|_| bad())?,
                branch_lo: f[2].parse().map_err(|_| bad())?,
                branch_hi: f[3].parse().map_err(|_| bad())?,
                dmu: f[4].parse().map_err(|_| bad())?,
                sigma: f[5].parse().map_err(|_| bad())?,
                count: f[6].parse().map_err(|_| bad())?,
            };
            if !(b.sigma > 0.0) {
                return Err(CalibrationError::Format(format!("non-positive sigma in {line:?}")));
            }
            records.push(b);
        }
        let mut it = records.into_iter();
        let global = it.next().ok_or_else(|| CalibrationError::Format("no records".into()))?;
        Ok(Self { global, buckets: it.collect() })
    }

    pub fn save(&self, path: &Path) -> Result<(), CalibrationError> {
        fs::write(path, self.to_text())?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, CalibrationError> {
        Self::from_text(&fs::read_to_string(path)?)
    }
}

/// Standardized max-statistic moments `(e_n, s_n)`, memoized per `n`.
struct MaxMoments<'a> {
    stats: &'a OrderStats<f64>,
    cache: BTreeMap<usize, (f64, f64)>,
}

impl<'a> MaxMoments<'a> {
    fn get(&mut self, n: usize) -> (f64, f64) {
        let stats = self.stats;
        *self.cache.entry(n).or_insert_with(|| {
            let e = stats.expected_max(n, &NormalParams::standard()).expect("n >= 1");
            let s = stats.min_stat_std(n).expect("n >= 1");
            (e, s)
        })
    }
}

fn fit(
    samples: &[&PositionSample],
    moments: &mut MaxMoments<'_>,
) -> Result<(f64, f64), CalibrationError> {
    if samples.is_empty() {
        return Err(CalibrationError::NoSamples);
    }
    let n = samples.len() as f64;
    let rows: Vec<(f64, f64, f64)> = samples
        .iter()
        .map(|s| {
            let (e, sd) = moments.get(s.children.len());
            (s.best_offset(), e, sd * sd)
        })
        .collect();
    let mean_b = rows.iter().map(|r| r.0).sum::<f64>() / n;
    let mean_e = rows.iter().map(|r| r.1).sum::<f64>() / n;
    let mean_s2 = rows.iter().map(|r| r.2).sum::<f64>() / n;
    let var_b = rows.iter().map(|r| (r.0 - mean_b).powi(2)).sum::<f64>() / n;
    let var_e = rows.iter().map(|r| (r.1 - mean_e).powi(2)).sum::<f64>() / n;
    let cov = rows.iter().map(|r| (r.0 - mean_b) * (r.1 - mean_e)).sum::<f64>() / n;
    if !(var_b > 1e-12 * (1.0 + mean_b * mean_b)) {
        return Err(CalibrationError::ZeroVariance { count: samples.len() });
    }
    // (s2 - var_e) sigma^2 + 2 cov sigma - var_b = 0, positive root.
    let a = mean_s2 - var_e;
    let sigma = if a > 1e-12 {
        (-cov + (cov * cov + a * var_b).sqrt()) / a
    } else {
        (var_b / mean_s2).sqrt()
    };
    let dmu = mean_b - sigma * mean_e;
    Ok((dmu, sigma))
}

/// Fits q per (phase, branching) bucket. Buckets with fewer than
/// `config.min_samples` samples are left out so lookups fall back to the global
/// fit.
pub fn calibrate_q(
    samples: &[PositionSample],
    stats: &OrderStats<f64>,
    config: &CalibrationConfig,
) -> Result<QCalibration, CalibrationError> {
    let usable: Vec<&PositionSample> = samples.iter().filter(|s| !s.children.is_empty()).collect();
    let mut moments = MaxMoments { stats, cache: BTreeMap::new() };
    let (dmu, sigma) = fit(&usable, &mut moments)?;
    let global = Bucket {
        phase_lo: 0,
        phase_hi: u32::MAX,
        branch_lo: 0,
        branch_hi: u32::MAX,
        dmu,
        sigma,
        count: usable.len(),
    };
    let mut buckets = Vec::new();
    for &(phase_lo, phase_hi) in &config.phase_edges {
        for &(branch_lo, branch_hi) in &config.branch_edges {
            let members: Vec<&PositionSample> = usable
                .iter()
                .copied()
                .filter(|s| {
                    let n = s.children.len() as u32;
                    (phase_lo..=phase_hi).contains(&s.phase) && (branch_lo..=branch_hi).contains(&n)
                })
                .collect();
            if members.len() < config.min_samples {
                continue;
            }
            match fit(&members, &mut moments) {
                Ok((dmu, sigma)) => buckets.push(Bucket {
                    phase_lo,
                    phase_hi,
                    branch_lo,
                    branch_hi,
                    dmu,
                    sigma,
                    count: members.len(),
                }),
                Err(CalibrationError::ZeroVariance { .. }) => continue,
                Err(e) => return Err(e),
            }
        }
    }
    Ok(QCalibration { global, buckets })
}
