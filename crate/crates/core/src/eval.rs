//! Verification and identification metrics, burst-degree ranking of sets,
//! and the agreement statistics used to score synthetic benchmarks.
//!
//! All metrics are exact step functions of the scores: no interpolation and
//! no sampling. Tied scores always share one operating point.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::aggregate::pairwise_similarity;
use crate::burst::{burst_degree, gram};
use crate::error::{Error, Result};
use crate::protocol::IdentificationEntry;
use crate::set::{FeatureSet, SetRepresentation};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RocPoint {
    /// Pairs scoring at least this value are accepted.
    pub threshold: f64,
    pub tar: f64,
    pub far: f64,
}

/// Empirical ROC, ordered by decreasing threshold. The first point sits at
/// `+inf` (nothing accepted), the last at the lowest score (everything
/// accepted).
#[derive(Debug, Clone, PartialEq)]
pub struct RocCurve {
    points: Vec<RocPoint>,
}

impl RocCurve {
    pub fn points(&self) -> &[RocPoint] {
        &self.points
    }
}

/// Builds the ROC of `(score, is_genuine)` pairs.
pub fn roc(scores: &[(f64, bool)]) -> Result<RocCurve> {
    if let Some(i) = scores.iter().position(|(s, _)| s.is_nan()) {
        return Err(Error::Data(format!("score {i} is NaN")));
    }
    let positives = scores.iter().filter(|(_, l)| *l).count();
    let negatives = scores.len() - positives;
    if positives == 0 || negatives == 0 {
        return Err(Error::Protocol(format!(
            "ROC needs both classes, got {positives} genuine and {negatives} impostor scores"
        )));
    }
    let mut sorted = scores.to_vec();
    sorted.sort_by(|a, b| b.0.total_cmp(&a.0));

    let mut points = vec![RocPoint {
        threshold: f64::INFINITY,
        tar: 0.0,
        far: 0.0,
    }];
    let (mut tp, mut fp) = (0usize, 0usize);
    let mut i = 0;
    while i < sorted.len() {
        let t = sorted[i].0;
        while i < sorted.len() && sorted[i].0 == t {
            if sorted[i].1 {
                tp += 1;
            } else {
                fp += 1;
            }
            i += 1;
        }
        points.push(RocPoint {
            threshold: t,
            tar: tp as f64 / positives as f64,
            far: fp as f64 / negatives as f64,
        });
    }
    Ok(RocCurve { points })
}

/// TAR at the most permissive operating point whose FAR does not exceed
/// `far_target`.
pub fn tar_at_far(curve: &RocCurve, far_target: f64) -> Result<f64> {
    if !(far_target > 0.0 && far_target <= 1.0) {
        return Err(Error::Parameter {
            name: "far",
            reason: format!("target must lie in (0, 1], got {far_target}"),
        });
    }
    Ok(curve
        .points
        .iter()
        .take_while(|p| p.far <= far_target)
        .last()
        .map_or(0.0, |p| p.tar))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IdentificationMode {
    /// Every probe must have a mate in the gallery.
    Closed,
    /// Probes without a mate act as impostors for TPIR@FPIR.
    Open,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IdentificationResult {
    /// `(N, fraction of mated probes whose mate ranks within the top N)`.
    pub rank: Vec<(usize, f64)>,
    /// `(FPIR target, TPIR)`; empty when there are no non-mated probes.
    pub tpir: Vec<(f64, f64)>,
    pub mated: usize,
    pub non_mated: usize,
}

/// Closed-set rank-N and open-set TPIR@FPIR over a probe/gallery protocol.
///
/// A mate's rank counts every other gallery entry scoring at least as high,
/// so ties never work in the probe's favor.
pub fn identification(
    entries: &[IdentificationEntry],
    reps: &BTreeMap<String, SetRepresentation>,
    ranks: &[usize],
    fpir_targets: &[f64],
    mode: IdentificationMode,
) -> Result<IdentificationResult> {
    let lookup = |id: &str| {
        reps.get(id)
            .ok_or_else(|| Error::Protocol(format!("no representation for set `{id}`")))
    };
    let gallery: Vec<&IdentificationEntry> = entries.iter().filter(|e| e.gallery).collect();
    if gallery.is_empty() {
        return Err(Error::Protocol("identification gallery is empty".into()));
    }
    let mut by_identity = BTreeMap::new();
    for (g, e) in gallery.iter().enumerate() {
        if by_identity.insert(e.identity.as_str(), g).is_some() {
            return Err(Error::Protocol(format!(
                "identity `{}` is enrolled twice in the gallery",
                e.identity
            )));
        }
    }
    if let Some(&r) = ranks.iter().find(|&&r| r == 0) {
        return Err(Error::param("rank", format!("ranks start at 1, got {r}")));
    }
    if let Some(&f) = fpir_targets.iter().find(|&&f| !(f > 0.0 && f <= 1.0)) {
        return Err(Error::param(
            "fpir",
            format!("target must lie in (0, 1], got {f}"),
        ));
    }
    let gallery_reps: Vec<&SetRepresentation> = gallery
        .iter()
        .map(|e| lookup(&e.set_id))
        .collect::<Result<_>>()?;

    // (rank of mate, mate score) for mated probes; top score for the rest
    let mut mated: Vec<(usize, f64)> = Vec::new();
    let mut non_mated: Vec<f64> = Vec::new();
    for probe in entries.iter().filter(|e| !e.gallery) {
        let rep = lookup(&probe.set_id)?;
        let scores: Vec<f64> = gallery_reps
            .iter()
            .map(|g| pairwise_similarity(rep, g))
            .collect::<Result<_>>()?;
        match by_identity.get(probe.identity.as_str()) {
            Some(&m) => {
                let s = scores[m];
                let rank = 1 + scores
                    .iter()
                    .enumerate()
                    .filter(|&(g, &x)| g != m && x >= s)
                    .count();
                mated.push((rank, s));
            }
            None if mode == IdentificationMode::Closed => {
                return Err(Error::Protocol(format!(
                    "probe `{}` has identity `{}` which is not in the gallery",
                    probe.set_id, probe.identity
                )));
            }
            None => {
                non_mated.push(scores.iter().copied().fold(f64::NEG_INFINITY, f64::max));
            }
        }
    }
    if mated.is_empty() {
        return Err(Error::Protocol("no probe has a mate in the gallery".into()));
    }

    let m = mated.len() as f64;
    let rank = ranks
        .iter()
        .map(|&n| (n, mated.iter().filter(|(r, _)| *r <= n).count() as f64 / m))
        .collect();

    let mut tpir = Vec::new();
    if !non_mated.is_empty() {
        let total = non_mated.len() as f64;
        let mut desc = non_mated.clone();
        desc.sort_by(|a, b| b.total_cmp(a));
        for &f in fpir_targets {
            // largest impostor score whose acceptance rate would exceed f
            let mut barrier = None;
            for (i, &s) in desc.iter().enumerate() {
                let at_or_above = desc[i..].iter().take_while(|&&x| x == s).count() + i;
                if at_or_above as f64 / total > f {
                    barrier = Some(s);
                    break;
                }
            }
            let hits = mated
                .iter()
                .filter(|&&(r, s)| r == 1 && barrier.is_none_or(|b| s > b))
                .count();
            tpir.push((f, hits as f64 / m));
        }
    }
    Ok(IdentificationResult {
        rank,
        tpir,
        mated: mated.len(),
        non_mated: non_mated.len(),
    })
}

/// Burst degree of every set (after row normalization), sorted by decreasing
/// degree with ties broken by `set_id`.
pub fn rank_by_burst_degree(sets: &[FeatureSet]) -> Result<Vec<(String, f64)>> {
    let mut ranked = sets
        .iter()
        .map(|s| {
            let k = gram(&s.normalize()?)?;
            Ok((String::from(s.set_id()), burst_degree(&k)))
        })
        .collect::<Result<Vec<_>>>()?;
    ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    Ok(ranked)
}

/// The `k` sets with the highest burst degree, most bursty first.
pub fn select_bursty_subset(sets: &[FeatureSet], k: usize) -> Result<Vec<String>> {
    if k == 0 {
        return Err(Error::param("k", "must select at least one set"));
    }
    if k > sets.len() {
        return Err(Error::param(
            "k",
            format!("cannot select {k} of {} sets", sets.len()),
        ));
    }
    let mut ranked = rank_by_burst_degree(sets)?;
    ranked.truncate(k);
    Ok(ranked.into_iter().map(|(id, _)| id).collect())
}

fn pairs(x: usize) -> f64 {
    let x = x as f64;
    x * (x - 1.0) / 2.0
}

/// Adjusted Rand index between two labelings of the same elements.
pub fn adjusted_rand_index(a: &[usize], b: &[usize]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::Contract(format!(
            "labelings have different lengths ({} vs {})",
            a.len(),
            b.len()
        )));
    }
    let n = a.len();
    if n < 2 {
        return Ok(1.0);
    }
    let mut table: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    let mut rows: BTreeMap<usize, usize> = BTreeMap::new();
    let mut cols: BTreeMap<usize, usize> = BTreeMap::new();
    for (&x, &y) in a.iter().zip(b) {
        *table.entry((x, y)).or_default() += 1;
        *rows.entry(x).or_default() += 1;
        *cols.entry(y).or_default() += 1;
    }
    let index: f64 = table.values().map(|&c| pairs(c)).sum();
    let sum_a: f64 = rows.values().map(|&c| pairs(c)).sum();
    let sum_b: f64 = cols.values().map(|&c| pairs(c)).sum();
    let expected = sum_a * sum_b / pairs(n);
    let max = 0.5 * (sum_a + sum_b);
    if max == expected {
        return Ok(1.0);
    }
    Ok((index - expected) / (max - expected))
}

/// Ranks starting at 1, ties receiving their average rank.
fn average_ranks(x: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..x.len()).collect();
    order.sort_by(|&i, &j| x[i].total_cmp(&x[j]));
    let mut ranks = vec![0.0; x.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && x[order[j + 1]] == x[order[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &o in &order[i..=j] {
            ranks[o] = avg;
        }
        i = j + 1;
    }
    ranks
}

/// Spearman rank correlation with average ranks for ties. Returns 0 when
/// either side is constant.
pub fn spearman(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(Error::Contract(
            "spearman needs two equally long samples of size >= 2".into(),
        ));
    }
    let (rx, ry) = (average_ranks(x), average_ranks(y));
    let n = x.len() as f64;
    let (mx, my) = (rx.iter().sum::<f64>() / n, ry.iter().sum::<f64>() / n);
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (a, b) in rx.iter().zip(&ry) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        return Ok(0.0);
    }
    Ok(sxy / libm::sqrt(sxx * syy))
}
