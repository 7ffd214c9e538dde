//! Estimating `f(n)`, the smallest sup-norm of an `n`-factor product, by
//! exhaustive enumeration of bounded exponent sequences or by seeded local
//! search when enumeration is out of reach.
//!
//! The objective is the certified upper end of a refined enclosure, so every
//! reported value is a sound upper estimate for its own witness.

use std::cmp::Ordering;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::ops::RangeInclusive;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::norms::{sup_norm_enclosure, tight_enclosure, SupNormEnclosure};
use crate::polyring::{count_canonical, CanonicalSequences, ExponentSequence, IntPolynomial};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    Exhaustive,
    Local,
}

impl std::fmt::Display for Strategy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Strategy::Exhaustive => "exhaustive",
            Strategy::Local => "local",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchParams {
    pub s_max: u64,
    pub grid: usize,
    pub strategy: Strategy,
    /// Only meaningful for local search.
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchRecord {
    pub n: usize,
    pub best_s: ExponentSequence,
    pub enclosure: SupNormEnclosure,
    /// `enclosure.upper`.
    pub objective: f64,
    /// Candidates whose enclosure was computed.
    pub searched: u64,
    pub params: SearchParams,
    pub caveat: String,
    /// Not persisted; output files stay byte-identical across runs.
    #[serde(skip)]
    pub wall_time: f64,
}

impl SearchRecord {
    pub fn key(&self) -> (usize, &SearchParams) {
        (self.n, &self.params)
    }

    /// `objective / (2 sqrt n)`.
    pub fn ratio_to_2sqrt_n(&self) -> f64 {
        self.objective / (2.0 * (self.n as f64).sqrt())
    }

    /// `objective^(1/n)`.
    pub fn nth_root(&self) -> f64 {
        self.objective.powf(1.0 / self.n as f64)
    }
}

#[derive(Debug, Clone)]
pub struct SearchConfig {
    /// Grid for the pruning pass.
    pub coarse_grid: usize,
    /// Share of candidates, ranked by coarse upper bound, that always get the
    /// fine evaluation.
    pub top_fraction: f64,
    pub candidate_cap: u128,
    /// Enclosures of evaluated candidates are refined to this width.
    pub refine_width: f64,
    /// Local search restarts after this many proposals without improvement.
    pub patience: usize,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            coarse_grid: 1 << 10,
            top_fraction: 0.05,
            candidate_cap: 10_000_000,
            refine_width: 1e-6,
            patience: 100,
        }
    }
}

pub const DEFAULT_FINE_GRID: usize = 1 << 14;

fn caveat(s_max: u64) -> String {
    format!("exponents restricted to 1..={s_max}; f(n) ranges over unbounded exponents")
}

/// Refined enclosure used as the search objective.
pub fn evaluate(s: &ExponentSequence, m: usize, cfg: &SearchConfig) -> Result<SupNormEnclosure> {
    tight_enclosure(&IntPolynomial::expand_product(s), m, cfg.refine_width)
}

/// Smaller upper wins, then smaller lower, then the lexicographically smaller sequence.
fn rank(a: &(ExponentSequence, SupNormEnclosure), b: &(ExponentSequence, SupNormEnclosure)) -> Ordering {
    a.1.upper
        .total_cmp(&b.1.upper)
        .then(a.1.lower.total_cmp(&b.1.lower))
        .then_with(|| a.0.cmp(&b.0))
}

fn check_args(n: usize, s_max: u64, m: usize) -> Result<()> {
    if n < 1 {
        return Err(Error::InvalidArgument("n must be at least 1".into()));
    }
    if s_max < 1 {
        return Err(Error::InvalidArgument("s_max must be at least 1".into()));
    }
    if m < 1 {
        return Err(Error::InvalidGrid(m));
    }
    Ok(())
}

pub fn exhaustive_search(n: usize, s_max: u64, m: usize) -> Result<SearchRecord> {
    exhaustive_search_with(n, s_max, m, &SearchConfig::default())
}

/// Minimises the certified sup-norm over all primitive non-decreasing
/// sequences in `[1, s_max]^n`.
///
/// Every candidate gets a coarse enclosure. The best `top_fraction` by coarse
/// upper bound are evaluated finely to set an incumbent; any other candidate
/// whose coarse lower bound does not exceed the incumbent is evaluated too,
/// so pruning never discards a possible winner.
pub fn exhaustive_search_with(
    n: usize,
    s_max: u64,
    m: usize,
    cfg: &SearchConfig,
) -> Result<SearchRecord> {
    check_args(n, s_max, m)?;
    let start = Instant::now();
    let total = count_canonical(n, s_max);
    if total > cfg.candidate_cap {
        return Err(Error::SpaceTooLarge {
            candidates: total,
            cap: cfg.candidate_cap,
        });
    }
    let candidates: Vec<ExponentSequence> = CanonicalSequences::new(n, s_max)
        .filter(ExponentSequence::is_primitive)
        .collect();
    let coarse_grid = cfg.coarse_grid.min(m);
    let coarse: Vec<SupNormEnclosure> = candidates
        .par_iter()
        .map(|s| sup_norm_enclosure(&IntPolynomial::expand_product(s), coarse_grid))
        .collect::<Result<_>>()?;

    let mut order: Vec<usize> = (0..candidates.len()).collect();
    order.sort_by(|&a, &b| {
        coarse[a]
            .upper
            .total_cmp(&coarse[b].upper)
            .then_with(|| candidates[a].cmp(&candidates[b]))
    });
    let top = ((candidates.len() as f64 * cfg.top_fraction).ceil() as usize)
        .clamp(1, candidates.len());
    let (head, tail) = order.split_at(top);

    let fine = |idx: &[usize]| -> Result<Vec<(ExponentSequence, SupNormEnclosure)>> {
        idx.par_iter()
            .map(|&i| Ok((candidates[i].clone(), evaluate(&candidates[i], m, cfg)?)))
            .collect()
    };
    let mut evaluated = fine(head)?;
    let incumbent = evaluated
        .iter()
        .map(|(_, e)| e.upper)
        .fold(f64::INFINITY, f64::min);
    let survivors: Vec<usize> = tail
        .iter()
        .copied()
        .filter(|&i| coarse[i].lower <= incumbent)
        .collect();
    evaluated.extend(fine(&survivors)?);

    let (best_s, enclosure) = evaluated
        .into_iter()
        .min_by(rank)
        .expect("at least one candidate");
    Ok(SearchRecord {
        n,
        objective: enclosure.upper,
        best_s,
        enclosure,
        searched: candidates.len() as u64,
        params: SearchParams {
            s_max,
            grid: m,
            strategy: Strategy::Exhaustive,
            seed: None,
        },
        caveat: caveat(s_max),
        wall_time: start.elapsed().as_secs_f64(),
    })
}

pub fn local_search(n: usize, s_max: u64, m: usize, seed: u64, iters: usize) -> Result<SearchRecord> {
    local_search_with(n, s_max, m, seed, iters, &SearchConfig::default())
}

fn random_sequence(rng: &mut ChaCha8Rng, n: usize, s_max: u64) -> ExponentSequence {
    let draw = (0..n).map(|_| rng.gen_range(1..=s_max)).collect();
    ExponentSequence::new(draw).expect("draws are positive").primitive()
}

/// Seeded hill climbing over single-exponent moves (`+1`, `-1`, or a fresh
/// draw), accepting strict improvements and restarting after `patience`
/// proposals without one. Sequences are kept gcd-reduced, like the
/// exhaustive candidates.
pub fn local_search_with(
    n: usize,
    s_max: u64,
    m: usize,
    seed: u64,
    iters: usize,
    cfg: &SearchConfig,
) -> Result<SearchRecord> {
    check_args(n, s_max, m)?;
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let coarse_grid = cfg.coarse_grid.min(m);

    let mut current = random_sequence(&mut rng, n, s_max);
    let mut current_enc = evaluate(&current, m, cfg)?;
    let mut best = (current.clone(), current_enc);
    let mut searched = 1u64;
    let mut stale = 0usize;

    for _ in 0..iters {
        if stale >= cfg.patience {
            current = random_sequence(&mut rng, n, s_max);
            current_enc = evaluate(&current, m, cfg)?;
            searched += 1;
            stale = 0;
            let cand = (current.clone(), current_enc);
            if rank(&cand, &best) == Ordering::Less {
                best = cand;
            }
            continue;
        }
        let mut exps = current.exponents().to_vec();
        let i = rng.gen_range(0..n);
        exps[i] = match rng.gen_range(0..3u8) {
            0 => (exps[i] + 1).min(s_max),
            1 => exps[i].saturating_sub(1).max(1),
            _ => rng.gen_range(1..=s_max),
        };
        let proposal = ExponentSequence::new(exps)?.primitive();
        stale += 1;
        if proposal == current {
            continue;
        }
        let p = IntPolynomial::expand_product(&proposal);
        // a coarse lower bound at or above the current objective rules out a strict improvement
        if sup_norm_enclosure(&p, coarse_grid)?.lower >= current_enc.upper {
            continue;
        }
        let enc = evaluate(&proposal, m, cfg)?;
        searched += 1;
        if enc.upper < current_enc.upper {
            current = proposal;
            current_enc = enc;
            stale = 0;
            let cand = (current.clone(), current_enc);
            if rank(&cand, &best) == Ordering::Less {
                best = cand;
            }
        }
    }

    let (best_s, enclosure) = best;
    Ok(SearchRecord {
        n,
        objective: enclosure.upper,
        best_s,
        enclosure,
        searched,
        params: SearchParams {
            s_max,
            grid: m,
            strategy: Strategy::Local,
            seed: Some(seed),
        },
        caveat: caveat(s_max),
        wall_time: start.elapsed().as_secs_f64(),
    })
}

#[derive(Debug, Clone)]
pub struct SweepParams {
    pub s_max: u64,
    pub grid: usize,
    pub seed: u64,
    pub iters: usize,
    pub config: SearchConfig,
}

/// One record per `n`: exhaustive where the space fits the candidate cap,
/// local search otherwise.
pub fn sweep(range: RangeInclusive<usize>, params: &SweepParams) -> Result<Vec<SearchRecord>> {
    range
        .map(|n| {
            if count_canonical(n, params.s_max) <= params.config.candidate_cap {
                exhaustive_search_with(n, params.s_max, params.grid, &params.config)
            } else {
                local_search_with(n, params.s_max, params.grid, params.seed, params.iters, &params.config)
            }
        })
        .collect()
}

/// Columns `n, best_s, lower, upper, ratio_to_2sqrt_n, nth_root`.
pub fn write_sweep_csv<W: Write>(records: &[SearchRecord], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["n", "best_s", "lower", "upper", "ratio_to_2sqrt_n", "nth_root"])?;
    for r in records {
        let s = r
            .best_s
            .exponents()
            .iter()
            .map(u64::to_string)
            .collect::<Vec<_>>()
            .join(" ");
        w.write_record([
            r.n.to_string(),
            s,
            r.enclosure.lower.to_string(),
            r.enclosure.upper.to_string(),
            r.ratio_to_2sqrt_n().to_string(),
            r.nth_root().to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Append-only JSONL store of search records keyed by `(n, s_max, grid, strategy, seed)`.
#[derive(Debug, Clone)]
pub struct ResultCache {
    path: PathBuf,
}

impl ResultCache {
    pub fn new(path: impl Into<PathBuf>) -> Self {
        Self { path: path.into() }
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn lookup(&self, n: usize, params: &SearchParams) -> Result<Option<SearchRecord>> {
        let file = match File::open(&self.path) {
            Ok(f) => f,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(None),
            Err(e) => return Err(e.into()),
        };
        for line in BufReader::new(file).lines() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let rec: SearchRecord = serde_json::from_str(&line)?;
            if rec.key() == (n, params) {
                return Ok(Some(rec));
            }
        }
        Ok(None)
    }

    pub fn append(&self, record: &SearchRecord) -> Result<()> {
        if let Some(dir) = self.path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir)?;
        }
        let mut f = OpenOptions::new().create(true).append(true).open(&self.path)?;
        writeln!(f, "{}", serde_json::to_string(record)?)?;
        Ok(())
    }

    /// Returns the cached record for the key, computing and appending it on a miss.
    pub fn get_or_compute(
        &self,
        n: usize,
        params: &SearchParams,
        compute: impl FnOnce() -> Result<SearchRecord>,
    ) -> Result<SearchRecord> {
        if let Some(rec) = self.lookup(n, params)? {
            return Ok(rec);
        }
        let rec = compute()?;
        self.append(&rec)?;
        Ok(rec)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SUP_ONE_TWO: f64 = 3.0792014356780038;

    fn seq(v: &[u64]) -> ExponentSequence {
        ExponentSequence::new(v.to_vec()).unwrap()
    }

    /// Dense direct-evaluation oracle for the sup-norm of a product.
    fn dense_sup(s: &[u64]) -> f64 {
        let samples = 1 << 16;
        (0..samples)
            .map(|i| {
                let t = std::f64::consts::TAU * i as f64 / samples as f64;
                s.iter()
                    .map(|&e| (2.0 * (e as f64 * t / 2.0).sin()).abs())
                    .product::<f64>()
            })
            .fold(0.0, f64::max)
    }

    #[test]
    fn exhaustive_singletons() {
        let r = exhaustive_search(1, 5, 1 << 12).unwrap();
        assert_eq!(r.best_s, seq(&[1]));
        assert!((r.objective - 2.0).abs() < 1e-5);
        assert_eq!(r.searched, 1);
    }

    #[test]
    fn exhaustive_pairs_up_to_three() {
        let oracle: Vec<(Vec<u64>, f64)> = [[1, 1], [1, 2], [1, 3], [2, 3]]
            .iter()
            .map(|s| (s.to_vec(), dense_sup(s)))
            .collect();
        let best = oracle
            .iter()
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap();
        assert_eq!(best.0, vec![1, 2]);
        assert!((best.1 - SUP_ONE_TWO).abs() < 1e-6);

        let r = exhaustive_search(2, 3, DEFAULT_FINE_GRID).unwrap();
        assert_eq!(r.best_s, seq(&[1, 2]));
        assert!((r.objective - SUP_ONE_TWO).abs() < 1e-4);
        assert!(r.enclosure.contains(SUP_ONE_TWO));
    }

    #[test]
    fn cap_is_enforced() {
        let cfg = SearchConfig {
            candidate_cap: 10,
            ..SearchConfig::default()
        };
        assert!(matches!(
            exhaustive_search_with(3, 8, 1024, &cfg),
            Err(Error::SpaceTooLarge { candidates: 120, cap: 10 })
        ));
    }

    #[test]
    fn local_search_basics() {
        let r = local_search(1, 6, 1 << 12, 0, 30).unwrap();
        assert!((r.objective - 2.0).abs() < 1e-5);

        let a = local_search(2, 8, DEFAULT_FINE_GRID, 7, 300).unwrap();
        let b = local_search(2, 8, DEFAULT_FINE_GRID, 7, 300).unwrap();
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
        assert!(a.objective <= 3.08);
    }

    #[test]
    fn sweep_and_csv() {
        let params = SweepParams {
            s_max: 4,
            grid: 1 << 12,
            seed: 1,
            iters: 50,
            config: SearchConfig::default(),
        };
        let recs = sweep(1..=2, &params).unwrap();
        assert_eq!(recs.len(), 2);
        assert!((recs[0].nth_root() - 2.0).abs() < 1e-5);
        let mut buf = Vec::new();
        write_sweep_csv(&recs, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("n,best_s,lower,upper,ratio_to_2sqrt_n,nth_root"));
        assert!(lines.next().unwrap().starts_with("1,1,"));
        assert!(lines.next().unwrap().starts_with("2,1 2,"));
    }

    #[test]
    fn cache_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let cache = ResultCache::new(dir.path().join("nested/cache.jsonl"));
        let rec = exhaustive_search(2, 3, 1 << 12).unwrap();
        assert!(cache.lookup(rec.n, &rec.params).unwrap().is_none());
        let got = cache.get_or_compute(rec.n, &rec.params, || Ok(rec.clone())).unwrap();
        assert_eq!(got, rec);
        let again = cache
            .get_or_compute(rec.n, &rec.params, || panic!("should hit the cache"))
            .unwrap();
        assert_eq!(again.best_s, rec.best_s);
        assert_eq!(again.objective, rec.objective);
        let other = SearchParams { seed: Some(3), ..rec.params.clone() };
        assert!(cache.lookup(rec.n, &other).unwrap().is_none());
    }
}
