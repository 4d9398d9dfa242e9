//! Job interval selection: pick at most one weighted interval per job so the
//! chosen intervals do not overlap, maximizing total weight.
//!
//! Intervals are index pairs `(l, r)` with `l < r` into an ordered point set.
//! [`local_ratio_solve`] is the local-ratio 2-approximation; [`brute_force_jisp`]
//! is an exact exponential oracle for small instances.

use std::collections::HashMap;

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{CakeError, Result};
use crate::rational::{fmt_rat, parse_rat, Rat};

/// Additive weights the solver can work with.
pub trait Weight: Clone + Ord {
    fn zero() -> Self;
    fn add(&self, other: &Self) -> Self;
    fn sub(&self, other: &Self) -> Self;
    fn is_positive(&self) -> bool {
        *self > Self::zero()
    }
}

impl Weight for Rat {
    fn zero() -> Self {
        <Rat as Zero>::zero()
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn sub(&self, other: &Self) -> Self {
        self - other
    }
    fn is_positive(&self) -> bool {
        Signed::is_positive(self)
    }
}

/// Fixed-point weights; the unit is up to the caller.
impl Weight for i128 {
    fn zero() -> Self {
        0
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn sub(&self, other: &Self) -> Self {
        self - other
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Candidate<W> {
    pub l: usize,
    pub r: usize,
    pub w: W,
}

/// Anything that can list candidates grouped by right endpoint.
pub trait CandidateSource {
    type W: Weight;
    fn num_jobs(&self) -> usize;
    /// Candidates use point indices `0..num_points()`.
    fn num_points(&self) -> usize;
    /// Calls `f(job, l, w)` for every candidate `(l, r)` of every job,
    /// jobs in increasing order and `l` increasing within a job.
    fn for_each_ending_at<F: FnMut(usize, usize, Self::W)>(&self, r: usize, f: F);
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct JispInstance<W = Rat> {
    pub jobs: Vec<Vec<Candidate<W>>>,
}

impl<W: Weight> JispInstance<W> {
    pub fn candidate_count(&self) -> usize {
        self.jobs.iter().map(Vec::len).sum()
    }

    pub fn validate(&self) -> Result<()> {
        for (a, job) in self.jobs.iter().enumerate() {
            for c in job {
                if c.l >= c.r {
                    return Err(CakeError::InvalidParameter(format!(
                        "job {a} has candidate ({}, {}) with l >= r",
                        c.l, c.r
                    )));
                }
                if c.w < W::zero() {
                    return Err(CakeError::InvalidParameter(format!("job {a} has a negative weight")));
                }
            }
        }
        Ok(())
    }

    /// Total weight of a solution; `None` if it selects something not offered.
    pub fn weight_of(&self, sol: &JispSolution) -> Option<W> {
        let mut total = W::zero();
        for (a, sel) in sol.selected.iter().enumerate() {
            if let Some((l, r)) = sel {
                let c = self.jobs.get(a)?.iter().find(|c| c.l == *l && c.r == *r)?;
                total = total.add(&c.w);
            }
        }
        Some(total)
    }
}

/// Explicit instances bucket their candidates by right endpoint.
pub struct Bucketed<'a, W> {
    inst: &'a JispInstance<W>,
    by_r: Vec<Vec<(usize, usize)>>,
    points: usize,
}

impl<'a, W: Weight> Bucketed<'a, W> {
    pub fn new(inst: &'a JispInstance<W>) -> Self {
        let points = inst
            .jobs
            .iter()
            .flatten()
            .map(|c| c.r + 1)
            .max()
            .unwrap_or(0);
        let mut by_r = vec![Vec::new(); points];
        for (a, job) in inst.jobs.iter().enumerate() {
            let mut idx: Vec<usize> = (0..job.len()).collect();
            idx.sort_by_key(|&i| job[i].l);
            for i in idx {
                by_r[job[i].r].push((a, i));
            }
        }
        Bucketed { inst, by_r, points }
    }
}

impl<W: Weight> CandidateSource for Bucketed<'_, W> {
    type W = W;
    fn num_jobs(&self) -> usize {
        self.inst.jobs.len()
    }
    fn num_points(&self) -> usize {
        self.points
    }
    fn for_each_ending_at<F: FnMut(usize, usize, W)>(&self, r: usize, mut f: F) {
        for &(a, i) in &self.by_r[r] {
            let c = &self.inst.jobs[a][i];
            f(a, c.l, c.w.clone());
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct JispSolution {
    /// Per job, the selected `(l, r)` if any.
    pub selected: Vec<Option<(usize, usize)>>,
}

impl JispSolution {
    pub fn is_feasible(&self) -> bool {
        let mut picked: Vec<(usize, usize)> = self.selected.iter().flatten().copied().collect();
        picked.sort();
        picked.iter().all(|(l, r)| l < r) && picked.windows(2).all(|w| w[0].1 <= w[1].0)
    }
}

/// Local-ratio 2-approximation.
///
/// The textbook recursion repeatedly takes the positive-residual candidate
/// with the smallest right endpoint (ties: larger residual, lower job, smaller
/// left end), subtracts its residual from everything in conflict with it, and
/// on the way back keeps it when compatible. Because chosen intervals come in
/// order of right endpoint, a later candidate `(a, l, r)` conflicts with an
/// earlier pick `(a*, l*, r*)` iff `l < r*` or `a = a*`. Two prefix tables
/// therefore give each residual in O(1), and at most one candidate per right
/// endpoint is ever picked (after a pick at `r`, every other candidate ending
/// at `r` overlaps it and loses at least as much as it had).
pub fn local_ratio<S: CandidateSource>(src: &S) -> JispSolution {
    let k = src.num_points();
    let n = src.num_jobs();
    let zero = S::W::zero();
    // picks with r* > l, summed
    let mut overlap = vec![zero.clone(); k];
    // picks of job a with r* <= l, summed
    let mut same_job = vec![vec![zero.clone(); k]; n];
    let mut stack: Vec<(usize, usize, usize)> = Vec::new();
    for r in 1..k {
        let mut best: Option<(S::W, usize, usize)> = None;
        src.for_each_ending_at(r, |a, l, w| {
            let res = w.sub(&overlap[l]).sub(&same_job[a][l]);
            if res.is_positive() && best.as_ref().is_none_or(|(bw, _, _)| res > *bw) {
                best = Some((res, a, l));
            }
        });
        if let Some((v, a, l)) = best {
            for x in overlap.iter_mut().take(r) {
                *x = x.add(&v);
            }
            for x in same_job[a].iter_mut().skip(r) {
                *x = x.add(&v);
            }
            stack.push((a, l, r));
        }
    }
    let mut selected = vec![None; n];
    let mut min_left = usize::MAX;
    for &(a, l, r) in stack.iter().rev() {
        if selected[a].is_none() && r <= min_left {
            selected[a] = Some((l, r));
            min_left = l;
        }
    }
    JispSolution { selected }
}

pub fn local_ratio_solve<W: Weight>(jisp: &JispInstance<W>) -> JispSolution {
    if jisp.candidate_count() == 0 {
        return JispSolution {
            selected: vec![None; jisp.jobs.len()],
        };
    }
    local_ratio(&Bucketed::new(jisp))
}

/// Candidate cap for [`brute_force_jisp`] after pruning.
pub const DEFAULT_BRUTE_CAP: usize = 24;

/// Drops zero-weight candidates and candidates of a job that contain another
/// candidate of the same job with at least the same weight.
pub fn prune<W: Weight>(jisp: &JispInstance<W>) -> JispInstance<W> {
    let jobs = jisp
        .jobs
        .iter()
        .map(|job| {
            let mut kept: Vec<Candidate<W>> = Vec::new();
            for (i, c) in job.iter().enumerate() {
                if !c.w.is_positive() {
                    continue;
                }
                // identical twins: only the later copy goes
                let dominated = job.iter().enumerate().any(|(j, d)| {
                    j != i
                        && c.l <= d.l
                        && d.r <= c.r
                        && d.w >= c.w
                        && ((c.l, c.r) != (d.l, d.r) || d.w > c.w || j < i)
                });
                if !dominated {
                    kept.push(c.clone());
                }
            }
            kept
        })
        .collect();
    JispInstance { jobs }
}

/// Exact optimum by memoized search over candidates sorted by right endpoint.
pub fn brute_force_jisp<W: Weight>(jisp: &JispInstance<W>, cap: usize) -> Result<JispSolution> {
    let pruned = prune(jisp);
    let total = pruned.candidate_count();
    if total > cap {
        return Err(CakeError::BudgetExceeded {
            what: "exact JISP oracle candidates".into(),
            required: total as u128,
            budget: cap as u128,
        });
    }
    if pruned.jobs.len() > 64 {
        return Err(CakeError::InvalidParameter("exact JISP oracle supports at most 64 jobs".into()));
    }
    let mut cands: Vec<(usize, usize, usize, W)> = pruned
        .jobs
        .iter()
        .enumerate()
        .flat_map(|(a, job)| job.iter().map(move |c| (c.r, c.l, a, c.w.clone())))
        .collect();
    cands.sort_by_key(|x| (x.0, x.1, x.2));
    // pred[i]: number of candidates whose right end is <= left end of i
    let pred: Vec<usize> = cands
        .iter()
        .map(|c| cands.partition_point(|d| d.0 <= c.1))
        .collect();

    struct Search<'a, W> {
        cands: &'a [(usize, usize, usize, W)],
        pred: &'a [usize],
        memo: HashMap<(usize, u64), (W, bool)>,
    }
    impl<W: Weight> Search<'_, W> {
        // best weight using the first i candidates with jobs in `mask` taken
        fn best(&mut self, i: usize, mask: u64) -> W {
            if i == 0 {
                return W::zero();
            }
            if let Some((w, _)) = self.memo.get(&(i, mask)) {
                return w.clone();
            }
            let skip = self.best(i - 1, mask);
            let (_, _, a, ref w) = self.cands[i - 1];
            let mut out = (skip, false);
            if mask & (1 << a) == 0 {
                let take = w.add(&self.best(self.pred[i - 1], mask | (1 << a)));
                if take > out.0 {
                    out = (take, true);
                }
            }
            self.memo.insert((i, mask), out.clone());
            out.0
        }
    }
    let mut s = Search {
        cands: &cands,
        pred: &pred,
        memo: HashMap::new(),
    };
    s.best(cands.len(), 0);
    let mut selected = vec![None; jisp.jobs.len()];
    let (mut i, mut mask) = (cands.len(), 0u64);
    while i > 0 {
        s.best(i, mask);
        let took = s.memo.get(&(i, mask)).map(|x| x.1).unwrap_or(false);
        if took {
            let (r, l, a, _) = cands[i - 1];
            selected[a] = Some((l, r));
            mask |= 1 << a;
            i = pred[i - 1];
        } else {
            i -= 1;
        }
    }
    Ok(JispSolution { selected })
}

// ---------------------------------------------------------------------------
// JSON

#[derive(Serialize, Deserialize)]
struct JispFile {
    jobs: Vec<Vec<CandidateEntry>>,
}

#[derive(Serialize, Deserialize)]
struct CandidateEntry {
    l: usize,
    r: usize,
    w: String,
}

impl JispInstance<Rat> {
    pub fn from_json_str(s: &str) -> Result<Self> {
        let file: JispFile = serde_json::from_str(s)?;
        let jobs = file
            .jobs
            .into_iter()
            .map(|job| {
                job.into_iter()
                    .map(|c| {
                        Ok(Candidate {
                            l: c.l,
                            r: c.r,
                            w: parse_rat(&c.w)?,
                        })
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        let inst = JispInstance { jobs };
        inst.validate()?;
        Ok(inst)
    }

    pub fn to_json_string(&self) -> String {
        let file = JispFile {
            jobs: self
                .jobs
                .iter()
                .map(|job| {
                    job.iter()
                        .map(|c| CandidateEntry {
                            l: c.l,
                            r: c.r,
                            w: fmt_rat(&c.w),
                        })
                        .collect()
                })
                .collect(),
        };
        serde_json::to_string(&file).expect("jisp serializes")
    }
}
