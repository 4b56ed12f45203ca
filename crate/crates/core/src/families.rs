//! Deterministic graph family generators, exhaustive enumeration of small
//! labeled simple graphs, and the seeded search driver.
//!
//! Reproducibility contract: instance `i` of a run draws from a ChaCha8
//! stream derived from `(seed, i)` (`seed_from_u64(seed)` + `set_stream(i)`),
//! so the same spec and seed replay byte-for-byte on any platform. Only
//! 64-bit quantities are ever sampled.

use std::collections::{BTreeMap, HashSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::checks::{self, CheckConfig, CheckKind, CheckReport, Verdict};
use crate::error::{Error, Result};
use crate::operators;
use crate::quiver::Quiver;
use crate::spectra;

/// RNG stream for instance `i` of a seeded run.
pub fn instance_rng(seed: u64, instance: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(instance);
    rng
}

/// One vertex with `m` self-loops.
pub fn clover(m: u64) -> Result<Quiver> {
    Quiver::new(1, (0..m).map(|_| (0, 0)).collect())
}

/// Two vertices joined by `m >= 2` parallel edges.
pub fn ribbon(m: u64) -> Result<Quiver> {
    if m < 2 {
        return Err(Error::BadFamilyParams("ribbon needs m >= 2".into()));
    }
    Quiver::new(2, (0..m).map(|_| (0, 1)).collect())
}

/// Cycle on `n >= 3` vertices.
pub fn cycle(n: u64) -> Result<Quiver> {
    if n < 3 {
        return Err(Error::BadFamilyParams("cycle needs n >= 3".into()));
    }
    let n = n as usize;
    Quiver::new(n, (0..n).map(|i| (i, (i + 1) % n)).collect())
}

/// Path on `n >= 1` vertices.
pub fn path(n: u64) -> Result<Quiver> {
    if n < 1 {
        return Err(Error::BadFamilyParams("path needs n >= 1".into()));
    }
    let n = n as usize;
    Quiver::new(n, (0..n.saturating_sub(1)).map(|i| (i, i + 1)).collect())
}

/// Star `K_{1,k}`: center 0 and `k >= 1` leaves.
pub fn star(leaves: u64) -> Result<Quiver> {
    if leaves < 1 {
        return Err(Error::BadFamilyParams("star needs at least one leaf".into()));
    }
    let k = leaves as usize;
    Quiver::new(k + 1, (1..=k).map(|i| (0, i)).collect())
}

/// Complete graph on `n >= 1` vertices, edges in lexicographic order.
pub fn complete(n: u64) -> Result<Quiver> {
    if n < 1 {
        return Err(Error::BadFamilyParams("complete needs n >= 1".into()));
    }
    let n = n as usize;
    let mut edges = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            edges.push((i, j));
        }
    }
    Quiver::new(n, edges)
}

fn pair_from_index(mut p: u64, n: usize) -> (usize, usize) {
    for i in 0..n {
        let row = (n - 1 - i) as u64;
        if p < row {
            return (i, i + 1 + p as usize);
        }
        p -= row;
    }
    unreachable!("pair index out of range")
}

/// Uniform simple graph with exactly `m` edges, sampled by rejection over
/// the `n(n-1)/2` vertex pairs.
pub fn random_simple_graph(n: u64, m: u64, rng: &mut ChaCha8Rng) -> Result<Quiver> {
    if n < 1 {
        return Err(Error::BadFamilyParams("random graph needs n >= 1".into()));
    }
    let total = n * (n.saturating_sub(1)) / 2;
    if m > total {
        return Err(Error::BadFamilyParams(format!(
            "cannot place {m} simple edges on {n} vertices (max {total})"
        )));
    }
    let mut chosen = HashSet::new();
    let mut edges = Vec::with_capacity(m as usize);
    while edges.len() < m as usize {
        let p = rng.gen_range(0..total);
        if chosen.insert(p) {
            edges.push(pair_from_index(p, n as usize));
        }
    }
    Quiver::new(n as usize, edges)
}

/// The paper-style random quiver: a uniform simple graph with `m` edges,
/// then `l` loops at uniform vertices, then `c` duplicates of uniformly
/// chosen base edges. Total edge count is `m + l + c`.
pub fn random_quiver(n: u64, m: u64, l: u64, c: u64, rng: &mut ChaCha8Rng) -> Result<Quiver> {
    if c > 0 && m == 0 {
        return Err(Error::BadFamilyParams(
            "cannot duplicate edges of an edgeless base graph".into(),
        ));
    }
    let base = random_simple_graph(n, m, rng)?;
    let mut edges = base.edges().to_vec();
    for _ in 0..l {
        let v = rng.gen_range(0..n) as usize;
        edges.push((v, v));
    }
    for _ in 0..c {
        let idx = rng.gen_range(0..m) as usize;
        edges.push(base.edges()[idx]);
    }
    Quiver::new(n as usize, edges)
}

/// Uniform labeled tree via a random Pruefer sequence.
pub fn random_tree(n: u64, rng: &mut ChaCha8Rng) -> Result<Quiver> {
    if n < 1 {
        return Err(Error::BadFamilyParams("tree needs n >= 1".into()));
    }
    let n = n as usize;
    if n == 1 {
        return Quiver::new(1, vec![]);
    }
    if n == 2 {
        return Quiver::new(2, vec![(0, 1)]);
    }
    let seq: Vec<usize> = (0..n - 2)
        .map(|_| rng.gen_range(0..n as u64) as usize)
        .collect();
    let mut degree = vec![1u64; n];
    for &s in &seq {
        degree[s] += 1;
    }
    let mut used = vec![false; n];
    let mut edges = Vec::with_capacity(n - 1);
    for &s in &seq {
        let leaf = (0..n)
            .find(|&v| degree[v] == 1 && !used[v])
            .expect("a Pruefer decode always has a leaf");
        edges.push((leaf, s));
        used[leaf] = true;
        degree[leaf] -= 1;
        degree[s] -= 1;
    }
    let remaining: Vec<usize> = (0..n).filter(|&v| !used[v] && degree[v] == 1).collect();
    edges.push((remaining[0], remaining[1]));
    Quiver::new(n, edges)
}

/// Multiplicities of the complete graph on 7 vertices with ribbon
/// connections whose Kirchhoff matrix is the sharp 7x7 showcase
/// (m = 61, r = 40, trace = 122).
const K7_RIBBON_MULT: [[u64; 7]; 7] = [
    [0, 1, 3, 3, 1, 3, 3],
    [0, 0, 3, 2, 5, 5, 3],
    [0, 0, 0, 4, 3, 3, 4],
    [0, 0, 0, 0, 1, 1, 2],
    [0, 0, 0, 0, 0, 3, 4],
    [0, 0, 0, 0, 0, 0, 4],
    [0, 0, 0, 0, 0, 0, 0],
];

/// The fixed multi-edge complete graph on 7 vertices (61 edges, redundancy
/// 40) with a sharp Brouwer bound at k = 6.
pub fn k7_ribbon_fixture() -> Quiver {
    let mut edges = Vec::with_capacity(61);
    for i in 0..7 {
        for j in (i + 1)..7 {
            for _ in 0..K7_RIBBON_MULT[i][j] {
                edges.push((i, j));
            }
        }
    }
    Quiver::new(7, edges).expect("fixture is valid")
}

const ENUMERATION_CAP: u64 = 7;

/// Number of labeled simple graphs on `n` vertices: `2^(n(n-1)/2)`.
pub fn labeled_count(n: u64) -> Result<u64> {
    if n < 1 || n > ENUMERATION_CAP {
        return Err(Error::BadFamilyParams(format!(
            "enumeration supports 1 <= n <= {ENUMERATION_CAP}"
        )));
    }
    Ok(1u64 << (n * (n - 1) / 2))
}

/// The `mask`-th labeled simple graph on `n` vertices: pair `p` (in
/// lexicographic order) is an edge iff bit `p` of `mask` is set.
pub fn labeled_graph(n: u64, mask: u64) -> Result<Quiver> {
    let count = labeled_count(n)?;
    if mask >= count {
        return Err(Error::BadFamilyParams(format!(
            "graph index {mask} out of range (count {count})"
        )));
    }
    let bits = n * (n - 1) / 2;
    let mut edges = Vec::new();
    for p in 0..bits {
        if mask >> p & 1 == 1 {
            edges.push(pair_from_index(p, n as usize));
        }
    }
    Quiver::new(n as usize, edges)
}

/// Iterator over every labeled simple graph on `n` vertices in
/// lexicographic edge-bitmask order.
pub fn enumerate_labeled(n: u64) -> Result<impl Iterator<Item = Quiver>> {
    let count = labeled_count(n)?;
    Ok((0..count).map(move |mask| labeled_graph(n, mask).expect("mask in range")))
}

/// Everything the generators can produce, keyed the way the CLI and batch
/// files spell it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Family {
    Clover { m: u64 },
    Ribbon { m: u64 },
    Cycle { n: u64 },
    Path { n: u64 },
    Star { leaves: u64 },
    Complete { n: u64 },
    RandomTree { n: u64 },
    RandomQuiver { n: u64, m: u64, loops: u64, multi: u64 },
    K7RibbonFixture,
    Enumerate { n: u64 },
}

impl Family {
    pub fn name(&self) -> &'static str {
        match self {
            Family::Clover { .. } => "clover",
            Family::Ribbon { .. } => "ribbon",
            Family::Cycle { .. } => "cycle",
            Family::Path { .. } => "path",
            Family::Star { .. } => "star",
            Family::Complete { .. } => "complete",
            Family::RandomTree { .. } => "random_tree",
            Family::RandomQuiver { .. } => "random_quiver",
            Family::K7RibbonFixture => "k7_ribbon_fixture",
            Family::Enumerate { .. } => "enumerate",
        }
    }

    pub fn params(&self) -> BTreeMap<String, u64> {
        let mut map = BTreeMap::new();
        match *self {
            Family::Clover { m } | Family::Ribbon { m } => {
                map.insert("m".into(), m);
            }
            Family::Cycle { n }
            | Family::Path { n }
            | Family::Complete { n }
            | Family::RandomTree { n }
            | Family::Enumerate { n } => {
                map.insert("n".into(), n);
            }
            Family::Star { leaves } => {
                map.insert("n".into(), leaves);
            }
            Family::RandomQuiver { n, m, loops, multi } => {
                map.insert("n".into(), n);
                map.insert("m".into(), m);
                map.insert("loops".into(), loops);
                map.insert("multi".into(), multi);
            }
            Family::K7RibbonFixture => {}
        }
        map
    }

    /// Parses the `{family, params}` spelling used by the CLI and batch
    /// files. Unknown parameter keys are rejected.
    pub fn from_name_params(name: &str, params: &BTreeMap<String, u64>) -> Result<Family> {
        let need = |key: &str| -> Result<u64> {
            params.get(key).copied().ok_or_else(|| {
                Error::BadFamilyParams(format!("family `{name}` needs parameter `{key}`"))
            })
        };
        let allow = |keys: &[&str]| -> Result<()> {
            for k in params.keys() {
                if !keys.contains(&k.as_str()) {
                    return Err(Error::BadFamilyParams(format!(
                        "family `{name}` does not take parameter `{k}`"
                    )));
                }
            }
            Ok(())
        };
        let family = match name {
            "clover" => {
                allow(&["m"])?;
                Family::Clover { m: need("m")? }
            }
            "ribbon" => {
                allow(&["m"])?;
                Family::Ribbon { m: need("m")? }
            }
            "cycle" => {
                allow(&["n"])?;
                Family::Cycle { n: need("n")? }
            }
            "path" => {
                allow(&["n"])?;
                Family::Path { n: need("n")? }
            }
            "star" => {
                allow(&["n"])?;
                Family::Star { leaves: need("n")? }
            }
            "complete" => {
                allow(&["n"])?;
                Family::Complete { n: need("n")? }
            }
            "random_tree" => {
                allow(&["n"])?;
                Family::RandomTree { n: need("n")? }
            }
            "random_quiver" => {
                allow(&["n", "m", "loops", "multi"])?;
                Family::RandomQuiver {
                    n: need("n")?,
                    m: need("m")?,
                    loops: params.get("loops").copied().unwrap_or(0),
                    multi: params.get("multi").copied().unwrap_or(0),
                }
            }
            "k7_ribbon_fixture" => {
                allow(&[])?;
                Family::K7RibbonFixture
            }
            "enumerate" => {
                allow(&["n"])?;
                Family::Enumerate { n: need("n")? }
            }
            other => {
                return Err(Error::BadFamilyParams(format!("unknown family `{other}`")));
            }
        };
        Ok(family)
    }

    pub fn is_random(&self) -> bool {
        matches!(self, Family::RandomTree { .. } | Family::RandomQuiver { .. })
    }

    /// Generates one quiver, drawing from `rng` only for random families.
    pub fn generate_with_rng(&self, rng: &mut ChaCha8Rng) -> Result<Quiver> {
        match *self {
            Family::Clover { m } => clover(m),
            Family::Ribbon { m } => ribbon(m),
            Family::Cycle { n } => cycle(n),
            Family::Path { n } => path(n),
            Family::Star { leaves } => star(leaves),
            Family::Complete { n } => complete(n),
            Family::RandomTree { n } => random_tree(n, rng),
            Family::RandomQuiver { n, m, loops, multi } => random_quiver(n, m, loops, multi, rng),
            Family::K7RibbonFixture => Ok(k7_ribbon_fixture()),
            Family::Enumerate { .. } => Err(Error::BadFamilyParams(
                "enumerate is a search driver, not a single-quiver family".into(),
            )),
        }
    }
}

/// A family plus the seed that pins its random instances.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FamilySpec {
    pub family: Family,
    pub seed: u64,
}

impl FamilySpec {
    /// Instance `i` of the spec; identical `(spec, i)` replays identically.
    pub fn generate_instance(&self, instance: u64) -> Result<Quiver> {
        let mut rng = instance_rng(self.seed, instance);
        self.family.generate_with_rng(&mut rng)
    }

    /// Instance 0.
    pub fn generate(&self) -> Result<Quiver> {
        self.generate_instance(0)
    }
}

/// A full search run: family, trial count, check list, tolerances.
#[derive(Clone, Debug)]
pub struct SearchSpec {
    pub family: Family,
    pub seed: u64,
    /// For `enumerate`, 0 means every graph.
    pub trials: u64,
    pub checks: Vec<CheckKind>,
    pub config: CheckConfig,
    /// Track the exploratory `max S_3 - (m + 6)` statistic.
    pub s3_stat: bool,
}

/// The batch-file spelling of a [`SearchSpec`]:
/// `{family, params, seed, trials, checks, ...}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BatchSpec {
    pub family: String,
    #[serde(default)]
    pub params: BTreeMap<String, u64>,
    pub seed: u64,
    pub trials: u64,
    pub checks: Vec<String>,
    #[serde(default)]
    pub tol: Option<f64>,
    #[serde(default)]
    pub s3_stat: bool,
    #[serde(default)]
    pub classical_bound: bool,
    #[serde(default)]
    pub threshold_s: Option<f64>,
    #[serde(default)]
    pub loops_l: Option<u64>,
}

impl BatchSpec {
    pub fn to_search_spec(&self) -> Result<SearchSpec> {
        let family = Family::from_name_params(&self.family, &self.params)?;
        let checks = self
            .checks
            .iter()
            .map(|s| CheckKind::parse(s))
            .collect::<Result<Vec<_>>>()?;
        let defaults = CheckConfig::default();
        Ok(SearchSpec {
            family,
            seed: self.seed,
            trials: self.trials,
            checks,
            config: CheckConfig {
                tol: self.tol,
                classical_bound: self.classical_bound,
                threshold_s: self.threshold_s.unwrap_or(defaults.threshold_s),
                loops_l: self.loops_l.unwrap_or(defaults.loops_l),
            },
            s3_stat: self.s3_stat,
        })
    }
}

/// Aggregated outcome of one check over a whole run.
#[derive(Clone, Debug, Serialize)]
pub struct CheckAggregate {
    pub check: String,
    pub runs: u64,
    pub pass: u64,
    pub fail: u64,
    pub inapplicable: u64,
    pub sharp_hits: u64,
    /// Worst margin over all applicable instances.
    pub min_margin: Option<f64>,
    pub first_failure: Option<FailureCase>,
}

/// The first failing instance, with its replayable report.
#[derive(Clone, Debug, Serialize)]
pub struct FailureCase {
    pub instance: u64,
    pub report: CheckReport,
}

/// The exploratory `S_3 - (m + 6)` statistic.
#[derive(Clone, Debug, Serialize)]
pub struct S3Stat {
    pub max_excess: f64,
    pub instance: u64,
}

/// Deterministic summary of a search run.
#[derive(Clone, Debug, Serialize)]
pub struct AggregateReport {
    pub family: String,
    pub params: BTreeMap<String, u64>,
    pub seed: u64,
    pub instances: u64,
    pub failures: u64,
    pub checks: Vec<CheckAggregate>,
    /// Present when requested: the largest observed `S_3 - (m + 6)`.
    pub s3_excess: Option<S3Stat>,
    /// Present when the connection check runs on simple instances: the
    /// largest observed `rho(g) - rho(L)` (experimental; expected <= 0).
    pub green_radius_excess: Option<f64>,
}

fn run_check_random(
    kind: CheckKind,
    q: &Quiver,
    rng: &mut ChaCha8Rng,
    cfg: &CheckConfig,
) -> Result<CheckReport> {
    let tol = cfg
        .tol
        .unwrap_or_else(|| crate::spectra::default_tol(q));
    match kind {
        CheckKind::Interlacing => {
            if q.m() == 0 {
                return Ok(CheckReport::inapplicable("interlacing_edge", tol));
            }
            let e = rng.gen_range(0..q.m() as u64) as usize;
            checks::check_interlacing_edge(q, e, cfg)
        }
        CheckKind::Snap => {
            if q.has_multi_connections() || q.n() < 2 {
                return Ok(CheckReport::inapplicable("snap", tol));
            }
            let v = rng.gen_range(0..q.n() as u64) as usize;
            checks::check_snap(q, v, cfg)
        }
        CheckKind::Hadamard => {
            let pert = random_perturbation(q, rng);
            checks::check_hadamard_monotone(q, pert, cfg)
        }
        other => checks::run_check(other, q, cfg),
    }
}

/// Uniform random rank-one perturbation: a loop at a uniform vertex, or
/// (when possible) an edge between a uniform ordered pair.
pub fn random_perturbation(q: &Quiver, rng: &mut ChaCha8Rng) -> checks::Perturbation {
    let n = q.n() as u64;
    if n >= 2 && rng.gen_range(0..2u64) == 1 {
        let a = rng.gen_range(0..n) as usize;
        let mut b = rng.gen_range(0..n - 1) as usize;
        if b >= a {
            b += 1;
        }
        checks::Perturbation::AddEdge(a, b)
    } else {
        checks::Perturbation::AddLoop(rng.gen_range(0..n) as usize)
    }
}

/// Runs the named checks over every generated instance and aggregates
/// margins, sharp hits and failures in instance order.
pub fn search(spec: &SearchSpec) -> Result<AggregateReport> {
    let instances = match spec.family {
        Family::Enumerate { n } => {
            let total = labeled_count(n)?;
            if spec.trials == 0 {
                total
            } else {
                total.min(spec.trials)
            }
        }
        _ => spec.trials,
    };

    let mut aggregates: Vec<CheckAggregate> = spec
        .checks
        .iter()
        .map(|k| CheckAggregate {
            check: k.name().to_string(),
            runs: 0,
            pass: 0,
            fail: 0,
            inapplicable: 0,
            sharp_hits: 0,
            min_margin: None,
            first_failure: None,
        })
        .collect();
    let mut s3_excess: Option<S3Stat> = None;
    let mut green_radius_excess: Option<f64> = None;
    let want_green = spec.checks.contains(&CheckKind::Connection);
    let mut failures = 0u64;

    for i in 0..instances {
        let mut rng = instance_rng(spec.seed, i);
        let q = match spec.family {
            Family::Enumerate { n } => labeled_graph(n, i)?,
            ref family => family.generate_with_rng(&mut rng)?,
        };

        for (kind, agg) in spec.checks.iter().zip(aggregates.iter_mut()) {
            let report = run_check_random(*kind, &q, &mut rng, &spec.config)?;
            agg.runs += 1;
            match report.verdict {
                Verdict::Pass => agg.pass += 1,
                Verdict::Fail => {
                    agg.fail += 1;
                    failures += 1;
                }
                Verdict::Inapplicable => agg.inapplicable += 1,
            }
            if report.sharp {
                agg.sharp_hits += 1;
            }
            if let Some(m) = report.margin {
                agg.min_margin = Some(agg.min_margin.map_or(m, |cur: f64| cur.min(m)));
            }
            if report.verdict == Verdict::Fail && agg.first_failure.is_none() {
                agg.first_failure = Some(FailureCase {
                    instance: i,
                    report,
                });
            }
        }

        if spec.s3_stat {
            let spectrum = spectra::eigen_desc(&operators::kirchhoff(&q))?;
            let s3: f64 = spectrum.values.iter().take(3).sum();
            let excess = s3 - (q.m() as f64 + 6.0);
            if s3_excess.as_ref().is_none_or(|cur| excess > cur.max_excess) {
                s3_excess = Some(S3Stat {
                    max_excess: excess,
                    instance: i,
                });
            }
        }

        if want_green && q.is_simple() {
            let pack = operators::connection(&q)?;
            let rho_l = spectra::eigen_desc(&pack.l)?
                .values
                .iter()
                .fold(0.0f64, |a, &x| a.max(x.abs()));
            let rho_g = spectra::eigen_desc(&pack.g)?
                .values
                .iter()
                .fold(0.0f64, |a, &x| a.max(x.abs()));
            let excess = rho_g - rho_l;
            green_radius_excess =
                Some(green_radius_excess.map_or(excess, |cur: f64| cur.max(excess)));
        }
    }

    Ok(AggregateReport {
        family: spec.family.name().to_string(),
        params: spec.family.params(),
        seed: spec.seed,
        instances,
        failures,
        checks: aggregates,
        s3_excess,
        green_radius_excess,
    })
}
