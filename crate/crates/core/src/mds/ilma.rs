use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result, ResultExt};
use crate::linalg::Matrix;
use crate::lm::{lm_minimize, LmOptions};
use crate::rng::{random_permutation, Rng};

use super::subproblem::{AnchorProblem, Anchors};
use super::{raw_stress, DistanceMatrix, Embedding, RunTrace};

/// Order in which the initialization stage inserts points.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitStrategy {
    /// Uniformly random starting pair and insertion order.
    Random,
    /// Start from the largest distance; next insert the outside point
    /// farthest from the placed set.
    LargestFirst,
    /// Start from the smallest distance; next insert the outside point
    /// nearest to the placed set.
    SmallestFirst,
}

impl InitStrategy {
    pub const ALL: [InitStrategy; 3] = [
        InitStrategy::Random,
        InitStrategy::LargestFirst,
        InitStrategy::SmallestFirst,
    ];

    pub fn name(self) -> &'static str {
        match self {
            InitStrategy::Random => "random",
            InitStrategy::LargestFirst => "largest",
            InitStrategy::SmallestFirst => "smallest",
        }
    }
}

impl FromStr for InitStrategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "random" => Ok(InitStrategy::Random),
            "largest" | "largest-first" => Ok(InitStrategy::LargestFirst),
            "smallest" | "smallest-first" => Ok(InitStrategy::SmallestFirst),
            other => Err(Error::InvalidArgument(format!(
                "unknown strategy {other:?} (expected random, largest or smallest)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IlmaOptions {
    /// Cap on adjustment sweeps.
    pub max_sweeps: usize,
    /// Stop once the relative raw-stress decrease of a sweep falls below this.
    pub tolerance: f64,
    pub strategy: InitStrategy,
    pub seed: u64,
    pub lm: LmOptions,
}

impl Default for IlmaOptions {
    fn default() -> Self {
        Self {
            max_sweeps: 20,
            tolerance: 1e-4,
            strategy: InitStrategy::Random,
            seed: 0,
            lm: LmOptions::default(),
        }
    }
}

impl IlmaOptions {
    pub fn validate(&self) -> Result<()> {
        if self.max_sweeps == 0 {
            return Err(Error::InvalidArgument("max_sweeps must be at least 1".into()));
        }
        if !(self.tolerance > 0.0) {
            return Err(Error::InvalidArgument("tolerance must be positive".into()));
        }
        self.lm.validate()
    }
}

#[derive(Debug, Clone)]
pub struct IlmaInit {
    pub codes: Matrix,
    /// Item indices in insertion order.
    pub order: Vec<usize>,
}

/// Per-outside-point best link into the placed set, for the greedy strategies.
#[derive(Clone, Copy)]
struct Link {
    value: f64,
    anchor: usize,
}

/// Initialization stage: places every item one at a time.
pub fn ilma_init(
    d: &DistanceMatrix,
    m: usize,
    strategy: InitStrategy,
    rng: &mut Rng,
    lm: &LmOptions,
) -> Result<IlmaInit> {
    let n = d.len();
    if n < 2 {
        return Err(Error::InvalidArgument(format!(
            "MDS needs at least 2 items, got {n}"
        )));
    }
    if m == 0 {
        return Err(Error::InvalidArgument("embedding dimension must be at least 1".into()));
    }

    let (i0, j0) = match strategy {
        InitStrategy::Random => {
            let pairs = n * (n - 1) / 2;
            upper_triangle_pair(n, rng.below(pairs))
        }
        InitStrategy::LargestFirst => extreme_pair(d, |a, b| a > b),
        InitStrategy::SmallestFirst => extreme_pair(d, |a, b| a < b),
    };

    let mut codes = Matrix::zeros(n, m);
    codes[(j0, 0)] = d.get(i0, j0);
    let mut order = vec![i0, j0];
    let mut placed = vec![false; n];
    placed[i0] = true;
    placed[j0] = true;
    let mut outside: Vec<usize> = (0..n).filter(|&k| !placed[k]).collect();

    let greedy_better: fn(f64, f64) -> bool = match strategy {
        InitStrategy::SmallestFirst => |a, b| a < b,
        _ => |a, b| a > b,
    };
    let mut links = vec![
        Link {
            value: f64::NAN,
            anchor: usize::MAX,
        };
        n
    ];
    if strategy != InitStrategy::Random {
        for &j in &outside {
            links[j] = Link {
                value: d.get(j, i0),
                anchor: i0,
            };
            update_link(&mut links[j], d.get(j, j0), j0, greedy_better);
        }
    }

    while !outside.is_empty() {
        let pos = match strategy {
            InitStrategy::Random => rng.below(outside.len()),
            _ => best_outside(&outside, &links, greedy_better),
        };
        let j = outside.swap_remove(pos);
        // Keep the candidate list in a canonical order for the greedy scan.
        if strategy != InitStrategy::Random {
            outside.sort_unstable();
        }

        let start = initial_guess(&codes, &order, d.row(j));
        let prob = AnchorProblem::new(&codes, Anchors::Subset(&order), d.row(j));
        let sol = lm_minimize(&prob, &start, lm)
            .context_with(|| format!("placing item {j} during initialization"))?;
        codes.row_mut(j).copy_from_slice(&sol.solution);
        order.push(j);

        if strategy != InitStrategy::Random {
            for &k in &outside {
                update_link(&mut links[k], d.get(k, j), j, greedy_better);
            }
        }
    }

    Ok(IlmaInit { codes, order })
}

fn update_link(link: &mut Link, value: f64, anchor: usize, better: fn(f64, f64) -> bool) {
    if better(value, link.value) || (value == link.value && anchor < link.anchor) {
        *link = Link { value, anchor };
    }
}

/// Position in `outside` of the best link; ties go to the lowest `(anchor, item)`.
fn best_outside(outside: &[usize], links: &[Link], better: fn(f64, f64) -> bool) -> usize {
    let mut best = 0;
    for (pos, &j) in outside.iter().enumerate().skip(1) {
        let (cand, cur) = (links[j], links[outside[best]]);
        let wins = better(cand.value, cur.value)
            || (cand.value == cur.value && (cand.anchor, j) < (cur.anchor, outside[best]));
        if wins {
            best = pos;
        }
    }
    best
}

/// `k`-th entry of the strict upper triangle in row-major order.
fn upper_triangle_pair(n: usize, mut k: usize) -> (usize, usize) {
    for i in 0..n {
        let len = n - 1 - i;
        if k < len {
            return (i, i + 1 + k);
        }
        k -= len;
    }
    unreachable!("pair index out of range")
}

fn extreme_pair(d: &DistanceMatrix, better: impl Fn(f64, f64) -> bool) -> (usize, usize) {
    let n = d.len();
    let mut best = (0, 1);
    for i in 0..n {
        for j in i + 1..n {
            if better(d.get(i, j), d.get(best.0, best.1)) {
                best = (i, j);
            }
        }
    }
    best
}

/// Starting point for inserting a new item: around its nearest placed
/// item, at the target distance along whichever signed axis fits best.
fn initial_guess(codes: &Matrix, placed: &[usize], targets: &[f64]) -> Vec<f64> {
    let m = codes.cols();
    let nearest = placed
        .iter()
        .copied()
        .min_by(|&a, &b| targets[a].total_cmp(&targets[b]).then(a.cmp(&b)))
        .expect("at least two items are placed");
    let base = codes.row(nearest);
    let radius = targets[nearest];
    let prob = AnchorProblem::new(codes, Anchors::Subset(placed), targets);

    let mut best = base.to_vec();
    let mut best_cost = f64::INFINITY;
    let mut cand = vec![0.0; m];
    for axis in 0..m {
        for sign in [1.0, -1.0] {
            cand.copy_from_slice(base);
            cand[axis] += sign * radius;
            let c = prob.cost(&cand);
            if c < best_cost {
                best_cost = c;
                best.copy_from_slice(&cand);
            }
        }
    }
    best
}

/// One adjustment sweep in the order `perm`.
fn adjustment_sweep(d: &DistanceMatrix, codes: &mut Matrix, perm: &[usize], lm: &LmOptions) -> Result<()> {
    for &p in perm {
        let start = codes.row(p).to_vec();
        let sol = {
            let prob = AnchorProblem::new(codes, Anchors::AllExcept(p), d.row(p));
            lm_minimize(&prob, &start, lm).context_with(|| format!("adjusting item {p}"))?
        };
        codes.row_mut(p).copy_from_slice(&sol.solution);
    }
    Ok(())
}

/// Fits an `m`-dimensional embedding of `d`.
///
/// The trace records the raw stress after initialization (iteration 0) and
/// after every adjustment sweep.
pub fn ilma_fit(d: &DistanceMatrix, m: usize, opts: &IlmaOptions) -> Result<(Embedding, RunTrace)> {
    ilma_fit_observed(d, m, opts, |_, _| {})
}

/// [`ilma_fit`] with a callback receiving the codes after initialization
/// (sweep 0) and after each sweep.
pub fn ilma_fit_observed(
    d: &DistanceMatrix,
    m: usize,
    opts: &IlmaOptions,
    mut observe: impl FnMut(usize, &Matrix),
) -> Result<(Embedding, RunTrace)> {
    opts.validate()?;
    let clock = Instant::now();
    let mut rng = Rng::new(opts.seed);
    let init = ilma_init(d, m, opts.strategy, &mut rng, &opts.lm)?;
    let mut codes = init.codes;
    let n = d.len();

    let mut trace = RunTrace::default();
    let mut stress = raw_stress(d, &codes)?;
    trace.push(0, stress, clock.elapsed().as_secs_f64());
    observe(0, &codes);

    for sweep in 1..=opts.max_sweeps {
        let perm = random_permutation(n, &mut rng)?;
        adjustment_sweep(d, &mut codes, &perm, &opts.lm)?;
        let next = raw_stress(d, &codes)?;
        trace.push(sweep, next, clock.elapsed().as_secs_f64());
        observe(sweep, &codes);
        let converged = stress == 0.0 || (stress - next) / stress < opts.tolerance;
        stress = next;
        if converged {
            break;
        }
    }

    Ok((Embedding::new(d, codes)?, trace))
}
