//! Every named inequality and identity as a pass/fail check with margins,
//! plus the spanning-tree certificate procedure.
//!
//! A check never asserts; it measures. The margin of an inequality check is
//! `min_k (bound_k - quantity_k)`; an identity check reports minus the
//! largest deviation. A verdict is `fail` exactly when the margin drops
//! below `-tolerance`, and a margin within tolerance of zero is flagged
//! `sharp` (ribbons and complete graphs are exactly sharp).

use ndarray::Array2;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::operators;
use crate::quiver::Quiver;
use crate::spectra::{self, SequenceTable};

/// Configuration shared by all checks.
#[derive(Clone, Debug)]
pub struct CheckConfig {
    /// Overrides the default slack `1e-7 * max(1, trace)`.
    pub tol: Option<f64>,
    /// Forces `r = 0` in the Brouwer bound, the original simple-graph form.
    pub classical_bound: bool,
    /// Brouwer threshold `s`: the `k`-prefix depth known unconditionally.
    pub threshold_s: f64,
    /// Loop count used by the loops-proposition check.
    pub loops_l: u64,
}

impl Default for CheckConfig {
    fn default() -> Self {
        CheckConfig {
            tol: None,
            classical_bound: false,
            threshold_s: 2.0,
            loops_l: 1,
        }
    }
}

impl CheckConfig {
    fn tol_for(&self, q: &Quiver) -> f64 {
        self.tol.unwrap_or_else(|| spectra::default_tol(q))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    Inapplicable,
}

/// Outcome of one named check on one quiver.
#[derive(Clone, Debug, Serialize)]
pub struct CheckReport {
    pub check: String,
    pub verdict: Verdict,
    /// 1-based `k`, or an edge/vertex/step index, of the first violation.
    pub first_violation: Option<usize>,
    /// Worst slack observed; negative beyond tolerance means failure.
    pub margin: Option<f64>,
    pub tolerance: f64,
    /// Margin within tolerance of zero: the bound is attained.
    pub sharp: bool,
    /// Replayable `.qvr` serialization, embedded on failure.
    pub quiver: Option<String>,
    /// Attached on failure for sequence-based checks.
    pub sequences: Option<SequenceTable>,
}

impl CheckReport {
    pub(crate) fn inapplicable(check: &str, tolerance: f64) -> CheckReport {
        CheckReport {
            check: check.to_string(),
            verdict: Verdict::Inapplicable,
            first_violation: None,
            margin: None,
            tolerance,
            sharp: false,
            quiver: None,
            sequences: None,
        }
    }

    pub fn passed(&self) -> bool {
        self.verdict != Verdict::Fail
    }
}

/// Accumulates `(index, slack)` pairs into a margin and first violation.
struct MarginAcc {
    tol: f64,
    min: f64,
    any: bool,
    first_violation: Option<usize>,
}

impl MarginAcc {
    fn new(tol: f64) -> Self {
        MarginAcc {
            tol,
            min: f64::INFINITY,
            any: false,
            first_violation: None,
        }
    }

    fn add(&mut self, index: usize, slack: f64) {
        self.any = true;
        if slack < self.min {
            self.min = slack;
        }
        if self.first_violation.is_none() && slack < -self.tol {
            self.first_violation = Some(index);
        }
    }

    fn finish(self, check: &str, q: &Quiver, sequences_on_fail: bool) -> Result<CheckReport> {
        let margin = if self.any { Some(self.min) } else { None };
        let failed = margin.is_some_and(|m| m < -self.tol);
        let sharp = !failed && margin.is_some_and(|m| m.abs() <= self.tol);
        Ok(CheckReport {
            check: check.to_string(),
            verdict: if failed { Verdict::Fail } else { Verdict::Pass },
            first_violation: if failed { self.first_violation } else { None },
            margin,
            tolerance: self.tol,
            sharp,
            quiver: failed.then(|| q.to_qvr()),
            sequences: if failed && sequences_on_fail {
                Some(spectra::sequence_table(q)?)
            } else {
                None
            },
        })
    }
}

fn kirchhoff_partial_sums(q: &Quiver) -> Result<Vec<f64>> {
    Ok(spectra::eigen_desc(&operators::kirchhoff(q))?.partial_sums())
}

fn brouwer_bound(q: &Quiver, classical: bool, k: usize) -> f64 {
    let m = q.m() as f64;
    let r = if classical { 0.0 } else { q.redundancy() as f64 };
    m + r + (k as f64) * (k as f64 + 1.0) / 2.0
}

/// (BC): `S_k <= m + r + k(k+1)/2` for all k.
pub fn check_brouwer(q: &Quiver, cfg: &CheckConfig) -> Result<CheckReport> {
    let name = if cfg.classical_bound {
        "brouwer_classical"
    } else {
        "brouwer"
    };
    let s = kirchhoff_partial_sums(q)?;
    let mut acc = MarginAcc::new(cfg.tol_for(q));
    for k in 1..=q.n() {
        acc.add(k, brouwer_bound(q, cfg.classical_bound, k) - s[k - 1]);
    }
    acc.finish(name, q, true)
}

/// (BC+): the same bound on the signless Laplacian's eigenvalue sums.
pub fn check_signless(q: &Quiver, cfg: &CheckConfig) -> Result<CheckReport> {
    let name = if cfg.classical_bound {
        "signless_brouwer_classical"
    } else {
        "signless_brouwer"
    };
    let a = spectra::eigen_desc(&operators::signless(q))?.partial_sums();
    let mut acc = MarginAcc::new(cfg.tol_for(q));
    for k in 1..=q.n() {
        acc.add(k, brouwer_bound(q, cfg.classical_bound, k) - a[k - 1]);
    }
    acc.finish(name, q, true)
}

/// `D_k <= S_k <= 2 D_k` for all k.
pub fn check_sandwich(q: &Quiver, cfg: &CheckConfig) -> Result<CheckReport> {
    let s = kirchhoff_partial_sums(q)?;
    let degrees = q.degrees();
    let mut acc = MarginAcc::new(cfg.tol_for(q));
    let mut dk = 0u64;
    for k in 1..=q.n() {
        dk += degrees.get(k);
        acc.add(k, s[k - 1] - dk as f64);
        acc.add(k, 2.0 * dk as f64 - s[k - 1]);
    }
    acc.finish("sandwich", q, true)
}

/// Lew bound: `S_k <= m + r + k^2`.
pub fn check_lew(q: &Quiver, cfg: &CheckConfig) -> Result<CheckReport> {
    let s = kirchhoff_partial_sums(q)?;
    let base = (q.m() as u64 + q.redundancy()) as f64;
    let mut acc = MarginAcc::new(cfg.tol_for(q));
    for k in 1..=q.n() {
        acc.add(k, base + (k as f64) * (k as f64) - s[k - 1]);
    }
    acc.finish("lew", q, true)
}

/// `D_k <= B_{k-1}` with `B_0 = m + r`. Pure integer arithmetic.
pub fn check_deg_vs_brouwer(q: &Quiver, cfg: &CheckConfig) -> Result<CheckReport> {
    let degrees = q.degrees();
    let base = q.m() as u64 + q.redundancy();
    let mut acc = MarginAcc::new(cfg.tol_for(q));
    let mut dk = 0u64;
    for k in 1..=q.n() {
        dk += degrees.get(k);
        let bound = base + (k as u64 - 1) * (k as u64) / 2;
        acc.add(k, bound as f64 - dk as f64);
    }
    acc.finish("deg_vs_brouwer", q, true)
}

/// Pointwise eigenvalue bounds: `lambda_j <= d_j + d_{j+1}` for all quivers
/// and `lambda_j >= d_j - j + 1` for quivers without multiple connections.
pub fn check_pointwise(q: &Quiver, cfg: &CheckConfig) -> Result<CheckReport> {
    let spectrum = spectra::eigen_desc(&operators::kirchhoff(q))?;
    let degrees = q.degrees();
    let lower_applies = !q.has_multi_connections();
    let mut acc = MarginAcc::new(cfg.tol_for(q));
    for j in 1..=q.n() {
        let lam = spectrum.get(j);
        acc.add(j, (degrees.get(j) + degrees.get(j + 1)) as f64 - lam);
        if lower_applies {
            acc.add(j, lam - (degrees.get(j) as f64 - j as f64 + 1.0));
        }
    }
    acc.finish("pointwise", q, true)
}

/// Edge-removal interlacing: with `lambda` (before) and `mu` (after)
/// descending, `lambda_k >= mu_k` and `mu_k >= lambda_{k+1}`.
pub fn check_interlacing_edge(q: &Quiver, e: usize, cfg: &CheckConfig) -> Result<CheckReport> {
    let reduced = q.remove_edge(e)?;
    let lam = spectra::eigen_desc(&operators::kirchhoff(q))?;
    let mu = spectra::eigen_desc(&operators::kirchhoff(&reduced))?;
    let mut acc = MarginAcc::new(cfg.tol_for(q));
    for k in 1..=q.n() {
        acc.add(k, lam.get(k) - mu.get(k));
        if k < q.n() {
            acc.add(k, mu.get(k) - lam.get(k + 1));
        }
    }
    acc.finish("interlacing_edge", q, false)
}

/// Snap-reduction bundle: exact principal-submatrix identity, Cauchy
/// interlacing, monotone Brouwer bound, spectral-radius monotonicity and
/// the snap-lemma inequality `S_k <= B_k + (lambda_1 - k)`.
pub fn check_snap(q: &Quiver, v: usize, cfg: &CheckConfig) -> Result<CheckReport> {
    if v >= q.n() {
        return Err(Error::VertexOutOfRange { vertex: v, n: q.n() });
    }
    let tol = cfg.tol_for(q);
    if q.has_multi_connections() || q.n() < 2 {
        return Ok(CheckReport::inapplicable("snap", tol));
    }
    let snapped = q.snap(v)?;

    // (a) exact: K(snap(q, v)) is K(q) with row/column v deleted
    let k_full = operators::kirchhoff(q);
    let k_snap = operators::kirchhoff(&snapped);
    let expected = delete_row_col(&k_full, v);
    if k_snap != expected {
        let dev = k_snap
            .iter()
            .zip(expected.iter())
            .map(|(a, b)| (a - b).abs())
            .max()
            .unwrap_or(0);
        return Ok(CheckReport {
            check: "snap".to_string(),
            verdict: Verdict::Fail,
            first_violation: Some(v),
            margin: Some(-(dev as f64)),
            tolerance: tol,
            sharp: false,
            quiver: Some(q.to_qvr()),
            sequences: None,
        });
    }

    let lam = spectra::eigen_desc(&k_full)?;
    let mu = spectra::eigen_desc(&k_snap)?;
    let mut acc = MarginAcc::new(tol);
    // (b) Cauchy interlacing of the n-1 reduced eigenvalues
    for k in 1..q.n() {
        acc.add(k, lam.get(k) - mu.get(k));
        acc.add(k, mu.get(k) - lam.get(k + 1));
    }
    // (c) B_k(H) <= B_k(G): only m can differ (loops at v disappear)
    let m_drop = q.m() as f64 - snapped.m() as f64;
    for k in 1..q.n() {
        acc.add(k, m_drop);
    }
    // (d) spectral radius can only shrink
    acc.add(1, lam.get(1) - mu.get(1));
    // (e) snap lemma: S_k(G) <= B_k(G) + (lambda_1 - k)
    let s = lam.partial_sums();
    for k in 1..=q.n() {
        let bound = brouwer_bound(q, false, k) + lam.get(1) - k as f64;
        acc.add(k, bound - s[k - 1]);
    }
    acc.finish("snap", q, false)
}

/// A single Hadamard-type perturbation of the Kirchhoff matrix.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Perturbation {
    /// Append a loop at the vertex.
    AddLoop(usize),
    /// Append an edge between two distinct vertices (a duplicate is fine).
    AddEdge(usize, usize),
}

/// Discrete monotonicity under a rank-one perturbation: every eigenvalue
/// may only grow, and `S_k` grows by at most 1 (loop) or 2 (edge).
pub fn check_hadamard_monotone(
    q: &Quiver,
    perturbation: Perturbation,
    cfg: &CheckConfig,
) -> Result<CheckReport> {
    let (bigger, cap) = match perturbation {
        Perturbation::AddLoop(v) => (q.add_loop(v)?, 1.0),
        Perturbation::AddEdge(a, b) => (q.add_edge(a, b)?, 2.0),
    };
    let before = spectra::eigen_desc(&operators::kirchhoff(q))?;
    let after = spectra::eigen_desc(&operators::kirchhoff(&bigger))?;
    let mut acc = MarginAcc::new(cfg.tol_for(q));
    let s_before = before.partial_sums();
    let s_after = after.partial_sums();
    for k in 1..=q.n() {
        acc.add(k, after.get(k) - before.get(k));
        acc.add(k, cap - (s_after[k - 1] - s_before[k - 1]));
    }
    acc.finish("hadamard_monotone", q, false)
}

/// Attaching `l` loops at every vertex shifts the spectrum by exactly `l`,
/// so `S_k` moves by `l k` while `B_k` moves by `l n`.
pub fn check_loops_proposition(q: &Quiver, l: u64, cfg: &CheckConfig) -> Result<CheckReport> {
    let mut edges = q.edges().to_vec();
    for _ in 0..l {
        for v in 0..q.n() {
            edges.push((v, v));
        }
    }
    let loaded = Quiver::new(q.n(), edges)?;
    let before = spectra::eigen_desc(&operators::kirchhoff(q))?;
    let after = spectra::eigen_desc(&operators::kirchhoff(&loaded))?;
    let mut acc = MarginAcc::new(cfg.tol_for(q));
    let s_before = before.partial_sums();
    let s_after = after.partial_sums();
    for k in 1..=q.n() {
        acc.add(k, -(after.get(k) - before.get(k) - l as f64).abs());
        acc.add(k, -(s_after[k - 1] - s_before[k - 1] - (l * k as u64) as f64).abs());
        // B_k bookkeeping is integer-exact
        let b_before = q.m() as u64 + q.redundancy() + (k as u64) * (k as u64 + 1) / 2;
        let b_after = loaded.m() as u64 + loaded.redundancy() + (k as u64) * (k as u64 + 1) / 2;
        acc.add(k, -((b_after - b_before) as f64 - (l * q.n() as u64) as f64).abs());
    }
    acc.finish("loops_proposition", q, false)
}

/// Complement identity for simple graphs: `lambda_k + comp_{n-k} = n` for
/// `1 <= k <= n-1`, and both smallest eigenvalues vanish.
pub fn check_complement(q: &Quiver, cfg: &CheckConfig) -> Result<CheckReport> {
    let tol = cfg.tol_for(q);
    if !q.is_simple() {
        return Ok(CheckReport::inapplicable("complement", tol));
    }
    let comp = q.complement()?;
    let lam = spectra::eigen_desc(&operators::kirchhoff(q))?;
    let bar = spectra::eigen_desc(&operators::kirchhoff(&comp))?;
    let n = q.n();
    let mut acc = MarginAcc::new(tol);
    for k in 1..n {
        acc.add(k, -(lam.get(k) + bar.get(n - k) - n as f64).abs());
    }
    acc.add(n, -lam.get(n).abs());
    acc.add(n, -bar.get(n).abs());
    acc.finish("complement", q, false)
}

/// Threshold filter: quivers with `lambda_1 <= s` satisfy (BC) whenever the
/// Brouwer threshold is at least `s`; the check is inapplicable above `s`.
pub fn check_threshold(q: &Quiver, cfg: &CheckConfig) -> Result<CheckReport> {
    let tol = cfg.tol_for(q);
    let radius = spectra::spectral_radius(q)?;
    if radius > cfg.threshold_s + tol {
        return Ok(CheckReport::inapplicable("threshold", tol));
    }
    let mut report = check_brouwer(q, cfg)?;
    report.check = "threshold".to_string();
    Ok(report)
}

/// Supersymmetry bundle: heat-kernel supertrace pinned at `n - m` for a few
/// `t`, essential isospectrality of `K` and `K'`, and exact Betti balance.
pub fn check_mckean_singer(q: &Quiver, cfg: &CheckConfig) -> Result<CheckReport> {
    // absolute tolerance; supertraces live on the scale of chi
    let tol = cfg.tol.unwrap_or(1e-8);
    let chi = q.n() as f64 - q.m() as f64;
    let mut acc = MarginAcc::new(tol);
    for (i, &t) in [0.1, 1.0, 10.0].iter().enumerate() {
        acc.add(i + 1, -(spectra::heat_supertrace(q, t)? - chi).abs());
    }
    acc.add(4, -spectra::essential_isospectral_margin(q)?);
    let (b0, b1) = spectra::betti(q)?;
    acc.add(5, -((b0 as f64 - b1 as f64) - chi).abs());
    acc.finish("mckean_singer", q, false)
}

/// Connection-Laplacian identity bundle for simple graphs: unimodularity,
/// exact Green inverse, diagonal Green values, total Green sum, signature,
/// the hydrogen identity and subgraph interlacing of `L`.
pub fn check_connection(q: &Quiver, cfg: &CheckConfig) -> Result<CheckReport> {
    let tol = cfg.tol_for(q);
    if !q.is_simple() {
        return Ok(CheckReport::inapplicable("connection", tol));
    }
    let pack = operators::connection(q)?;
    let n = q.n();
    let m = q.m();
    let size = n + m;
    let chi = n as i64 - m as i64;
    let mut acc = MarginAcc::new(tol);

    // unimodularity
    acc.add(1, -((pack.det_l.abs() - 1) as f64).abs());

    // g L = I exactly
    let product = operators::matmul(&pack.g, &pack.l);
    let mut dev = 0i64;
    for i in 0..size {
        for j in 0..size {
            let expect = i64::from(i == j);
            dev = dev.max((product[[i, j]] - expect).abs());
        }
    }
    acc.add(2, -(dev as f64));

    // g_xx = 1 - deg(x) on vertices
    let deg = q.vertex_degrees();
    for (v, &d) in deg.iter().enumerate() {
        acc.add(3, -((pack.g[[v, v]] - (1 - d as i64)).abs() as f64));
    }

    // sum of all Green entries is the Euler characteristic
    let total: i64 = pack.g.iter().sum();
    acc.add(4, -((total - chi).abs() as f64));

    // signature of L
    let (pos, neg) = pack.signature;
    acc.add(5, -((pos as i64 - neg as i64 - chi).abs() as f64));

    // hydrogen identity: L - g = |K| (+) |K'| exactly
    let signless_hodge = operators::incidence_pack(q).signless_hodge;
    let mut dev = 0i64;
    for i in 0..size {
        for j in 0..size {
            dev = dev.max((pack.l[[i, j]] - pack.g[[i, j]] - signless_hodge[[i, j]]).abs());
        }
    }
    acc.add(6, -(dev as f64));

    // deleting an edge deletes one row/column of L
    for e in 0..m {
        let reduced = operators::connection(&q.remove_edge(e)?)?;
        let expected = delete_row_col(&pack.l, n + e);
        let dev = reduced
            .l
            .iter()
            .zip(expected.iter())
            .map(|(a, b)| (a - b).abs())
            .max()
            .unwrap_or(0);
        acc.add(7, -(dev as f64));
        // interlacing of the connection spectra, checked on the last edge
        if e + 1 == m {
            let lam = spectra::eigen_desc(&pack.l)?;
            let mu = spectra::eigen_desc(&reduced.l)?;
            for k in 1..size {
                acc.add(8, lam.get(k) - mu.get(k));
                acc.add(8, mu.get(k) - lam.get(k + 1));
            }
        }
    }
    acc.finish("connection", q, false)
}

/// One edge-addition step of the certificate chain. Which proof case covers
/// an index `k` is determined by `case_boundary` on the [`Certificate`]:
/// `k >= 2 d_1` uses interlacing plus (BC) on the previous graph, `k < 2 d_1`
/// uses `k lambda_1 <= 4 d_1^2 <= n <= m + 1`.
#[derive(Clone, Debug, Serialize)]
pub struct CertificateStep {
    /// Index of the edge added at this step (into the input's edge list).
    pub edge: usize,
    /// Worst interlacing slack against the previous graph in the chain.
    pub interlacing_margin: f64,
    /// Worst slack over the `k >= 2 d_1` sub-inequalities (absent when no
    /// such `k` exists).
    pub case_i_margin: Option<f64>,
    /// Worst slack over the `k < 2 d_1` sub-inequalities.
    pub case_ii_margin: Option<f64>,
    /// Direct Brouwer margin of the graph after this step.
    pub bc_margin: f64,
}

/// Evidence trail for the spanning-tree certificate: a chain of graphs from
/// a BFS spanning tree to the input, every step justified numerically.
#[derive(Clone, Debug, Serialize)]
pub struct Certificate {
    pub n: usize,
    pub m: usize,
    pub max_degree: u64,
    /// `2 d_1`: indices `k >= case_boundary` fall into the interlacing case.
    pub case_boundary: u64,
    pub tree_edges: Vec<usize>,
    pub added_edges: Vec<usize>,
    /// Direct Brouwer margin of the spanning tree itself.
    pub tree_bc_margin: f64,
    pub steps: Vec<CertificateStep>,
    pub final_bc_margin: f64,
}

/// Runs the certificate procedure on a connected simple graph with
/// `n >= 4 d_1^2`; otherwise the report is inapplicable.
pub fn brouwer_certificate(
    q: &Quiver,
    cfg: &CheckConfig,
) -> Result<(CheckReport, Option<Certificate>)> {
    let tol = cfg.tol_for(q);
    let d1 = q.degrees().max();
    let applicable = q.is_simple() && q.is_connected() && (q.n() as u64) >= 4 * d1 * d1;
    if !applicable {
        return Ok((CheckReport::inapplicable("certificate", tol), None));
    }
    let n = q.n();
    let st = q.spanning_tree()?;
    let boundary = 2 * d1;
    let four_d1_sq = (4 * d1 * d1) as f64;

    let tree_quiver = Quiver::new(n, st.tree.iter().map(|&i| q.edges()[i]).collect())?;
    let mut acc = MarginAcc::new(tol);

    let bc_margin_of = |g: &Quiver| -> Result<f64> {
        let s = kirchhoff_partial_sums(g)?;
        Ok((1..=n)
            .map(|k| brouwer_bound(g, false, k) - s[k - 1])
            .fold(f64::INFINITY, f64::min))
    };

    let tree_bc_margin = bc_margin_of(&tree_quiver)?;
    acc.add(0, tree_bc_margin);

    let mut current = tree_quiver;
    let mut current_spec = spectra::eigen_desc(&operators::kirchhoff(&current))?;
    let mut steps = Vec::with_capacity(st.rest.len());
    let mut final_bc_margin = tree_bc_margin;

    for &edge in &st.rest {
        let (a, b) = q.edges()[edge];
        let next = current.add_edge(a, b)?;
        let next_spec = spectra::eigen_desc(&operators::kirchhoff(&next))?;

        let mut interlacing = f64::INFINITY;
        for k in 1..=n {
            interlacing = interlacing.min(next_spec.get(k) - current_spec.get(k));
            if k < n {
                interlacing = interlacing.min(current_spec.get(k) - next_spec.get(k + 1));
            }
        }
        acc.add(edge, interlacing);

        let lam1 = next_spec.get(1);
        let s_cur = current_spec.partial_sums();
        let s_next = next_spec.partial_sums();
        let m_cur = current.m() as f64;
        let mut case_i: Option<f64> = None;
        let mut case_ii: Option<f64> = None;
        for k in 1..=n {
            let kf = k as f64;
            if k as u64 >= boundary {
                // interlacing route: S_k - lambda_1 <= S_{k-1}(prev),
                // (BC) at k-1 on prev, and lambda_1 <= k
                let prev_sum = if k >= 2 { s_cur[k - 2] } else { 0.0 };
                let slacks = [
                    prev_sum - (s_next[k - 1] - lam1),
                    (m_cur + kf * (kf - 1.0) / 2.0) - prev_sum,
                    kf - lam1,
                ];
                let worst = slacks.into_iter().fold(f64::INFINITY, f64::min);
                case_i = Some(case_i.map_or(worst, |c: f64| c.min(worst)));
                acc.add(edge, worst);
            } else {
                // crude route: S_k <= k lambda_1 <= 4 d_1^2 <= n <= m + 1
                let slacks = [
                    kf * lam1 - s_next[k - 1],
                    four_d1_sq - kf * lam1,
                    n as f64 - four_d1_sq,
                    (next.m() + 1) as f64 - n as f64,
                ];
                let worst = slacks.into_iter().fold(f64::INFINITY, f64::min);
                case_ii = Some(case_ii.map_or(worst, |c: f64| c.min(worst)));
                acc.add(edge, worst);
            }
        }

        let bc_margin = bc_margin_of(&next)?;
        acc.add(edge, bc_margin);
        final_bc_margin = bc_margin;

        steps.push(CertificateStep {
            edge,
            interlacing_margin: interlacing,
            case_i_margin: case_i,
            case_ii_margin: case_ii,
            bc_margin,
        });
        current = next;
        current_spec = next_spec;
    }

    let certificate = Certificate {
        n,
        m: q.m(),
        max_degree: d1,
        case_boundary: boundary,
        tree_edges: st.tree,
        added_edges: st.rest,
        tree_bc_margin,
        steps,
        final_bc_margin,
    };
    let report = acc.finish("certificate", q, false)?;
    Ok((report, Some(certificate)))
}

/// The checks a batch run can select by name.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckKind {
    Brouwer,
    Signless,
    Sandwich,
    Lew,
    DegVsBrouwer,
    Pointwise,
    Interlacing,
    Snap,
    Hadamard,
    Loops,
    Complement,
    Threshold,
    McKeanSinger,
    Connection,
    Certificate,
}

impl CheckKind {
    pub const ALL: [CheckKind; 15] = [
        CheckKind::Brouwer,
        CheckKind::Signless,
        CheckKind::Sandwich,
        CheckKind::Lew,
        CheckKind::DegVsBrouwer,
        CheckKind::Pointwise,
        CheckKind::Interlacing,
        CheckKind::Snap,
        CheckKind::Hadamard,
        CheckKind::Loops,
        CheckKind::Complement,
        CheckKind::Threshold,
        CheckKind::McKeanSinger,
        CheckKind::Connection,
        CheckKind::Certificate,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            CheckKind::Brouwer => "brouwer",
            CheckKind::Signless => "signless",
            CheckKind::Sandwich => "sandwich",
            CheckKind::Lew => "lew",
            CheckKind::DegVsBrouwer => "deg_vs_brouwer",
            CheckKind::Pointwise => "pointwise",
            CheckKind::Interlacing => "interlacing",
            CheckKind::Snap => "snap",
            CheckKind::Hadamard => "hadamard",
            CheckKind::Loops => "loops",
            CheckKind::Complement => "complement",
            CheckKind::Threshold => "threshold",
            CheckKind::McKeanSinger => "mckean_singer",
            CheckKind::Connection => "connection",
            CheckKind::Certificate => "certificate",
        }
    }

    pub fn parse(s: &str) -> Result<CheckKind> {
        let normalized = s.trim().to_ascii_lowercase();
        CheckKind::ALL
            .into_iter()
            .find(|k| k.name() == normalized)
            .ok_or_else(|| {
                Error::BadFamilyParams(format!(
                    "unknown check `{s}`; expected one of: {}",
                    CheckKind::ALL
                        .iter()
                        .map(|k| k.name())
                        .collect::<Vec<_>>()
                        .join(", ")
                ))
            })
    }
}

/// Merges sub-reports for one check over several targets (all edges, all
/// vertices, ...) into a single worst-case report.
fn combine(check: &str, q: &Quiver, tol: f64, reports: Vec<CheckReport>) -> CheckReport {
    let mut margin: Option<f64> = None;
    let mut verdict = Verdict::Inapplicable;
    let mut first_violation = None;
    let mut sharp = false;
    for (target, r) in reports.iter().enumerate() {
        if r.verdict == Verdict::Inapplicable {
            continue;
        }
        if verdict == Verdict::Inapplicable {
            verdict = Verdict::Pass;
        }
        if let Some(m) = r.margin {
            margin = Some(margin.map_or(m, |cur: f64| cur.min(m)));
        }
        sharp |= r.sharp;
        if r.verdict == Verdict::Fail {
            verdict = Verdict::Fail;
            if first_violation.is_none() {
                first_violation = Some(target);
            }
        }
    }
    let failed = verdict == Verdict::Fail;
    CheckReport {
        check: check.to_string(),
        verdict,
        first_violation,
        margin,
        tolerance: tol,
        sharp: sharp && !failed,
        quiver: failed.then(|| q.to_qvr()),
        sequences: None,
    }
}

/// Runs one check on one quiver, sweeping every deterministic target
/// (all edges for interlacing, all vertices for snap, every vertex loop and
/// every duplicated edge for the Hadamard comparison).
pub fn run_check(kind: CheckKind, q: &Quiver, cfg: &CheckConfig) -> Result<CheckReport> {
    let tol = cfg.tol_for(q);
    match kind {
        CheckKind::Brouwer => check_brouwer(q, cfg),
        CheckKind::Signless => check_signless(q, cfg),
        CheckKind::Sandwich => check_sandwich(q, cfg),
        CheckKind::Lew => check_lew(q, cfg),
        CheckKind::DegVsBrouwer => check_deg_vs_brouwer(q, cfg),
        CheckKind::Pointwise => check_pointwise(q, cfg),
        CheckKind::Interlacing => {
            let reports = (0..q.m())
                .map(|e| check_interlacing_edge(q, e, cfg))
                .collect::<Result<Vec<_>>>()?;
            Ok(combine("interlacing_edge", q, tol, reports))
        }
        CheckKind::Snap => {
            let reports = (0..q.n())
                .map(|v| check_snap(q, v, cfg))
                .collect::<Result<Vec<_>>>()?;
            Ok(combine("snap", q, tol, reports))
        }
        CheckKind::Hadamard => {
            let mut reports = Vec::new();
            for v in 0..q.n() {
                reports.push(check_hadamard_monotone(q, Perturbation::AddLoop(v), cfg)?);
            }
            for &(a, b) in q.edges() {
                if a != b {
                    reports.push(check_hadamard_monotone(q, Perturbation::AddEdge(a, b), cfg)?);
                }
            }
            Ok(combine("hadamard_monotone", q, tol, reports))
        }
        CheckKind::Loops => check_loops_proposition(q, cfg.loops_l, cfg),
        CheckKind::Complement => check_complement(q, cfg),
        CheckKind::Threshold => check_threshold(q, cfg),
        CheckKind::McKeanSinger => check_mckean_singer(q, cfg),
        CheckKind::Connection => check_connection(q, cfg),
        CheckKind::Certificate => Ok(brouwer_certificate(q, cfg)?.0),
    }
}

fn delete_row_col(m: &Array2<i64>, idx: usize) -> Array2<i64> {
    let n = m.nrows();
    let keep: Vec<usize> = (0..n).filter(|&i| i != idx).collect();
    let mut out = Array2::zeros((n - 1, n - 1));
    for (i, &oi) in keep.iter().enumerate() {
        for (j, &oj) in keep.iter().enumerate() {
            out[[i, j]] = m[[oi, oj]];
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families;

    fn cfg() -> CheckConfig {
        CheckConfig::default()
    }

    #[test]
    fn brouwer_ribbon_classical_fails_quiver_sharp() {
        for m in 2..8u64 {
            let ribbon = families::ribbon(m).unwrap();
            let classical = CheckConfig {
                classical_bound: true,
                ..cfg()
            };
            let report = check_brouwer(&ribbon, &classical).unwrap();
            assert_eq!(report.verdict, Verdict::Fail);
            assert_eq!(report.first_violation, Some(1));
            let margin = report.margin.unwrap();
            assert!((margin - (1.0 - m as f64)).abs() <= 1e-9);
            assert!(report.quiver.is_some());

            let report = check_brouwer(&ribbon, &cfg()).unwrap();
            assert_eq!(report.verdict, Verdict::Pass);
            assert!(report.sharp, "modified bound is sharp at k=1");
        }
    }

    #[test]
    fn brouwer_complete_sharp_at_n_minus_1() {
        for n in 3..7u64 {
            let report = check_brouwer(&families::complete(n).unwrap(), &cfg()).unwrap();
            assert_eq!(report.verdict, Verdict::Pass);
            assert!(report.sharp);
        }
    }

    #[test]
    fn sandwich_lew_degb_small_cases() {
        let clover = families::clover(5).unwrap();
        assert_eq!(check_sandwich(&clover, &cfg()).unwrap().verdict, Verdict::Pass);
        assert_eq!(check_lew(&clover, &cfg()).unwrap().verdict, Verdict::Pass);

        let e4 = Quiver::new(4, vec![]).unwrap();
        for report in [
            check_sandwich(&e4, &cfg()).unwrap(),
            check_lew(&e4, &cfg()).unwrap(),
            check_deg_vs_brouwer(&e4, &cfg()).unwrap(),
        ] {
            assert_eq!(report.verdict, Verdict::Pass);
        }

        let fixture = families::k7_ribbon_fixture();
        assert_eq!(check_sandwich(&fixture, &cfg()).unwrap().verdict, Verdict::Pass);
        assert_eq!(check_lew(&fixture, &cfg()).unwrap().verdict, Verdict::Pass);
        assert_eq!(
            check_deg_vs_brouwer(&fixture, &cfg()).unwrap().verdict,
            Verdict::Pass
        );
    }

    #[test]
    fn interlacing_cycle4_and_ribbon() {
        let c4 = families::cycle(4).unwrap();
        for e in 0..4 {
            let report = check_interlacing_edge(&c4, e, &cfg()).unwrap();
            assert_eq!(report.verdict, Verdict::Pass);
        }
        // frozen spectra: {4,2,2,0} vs path {2+sqrt2, 2, 2-sqrt2, 0}
        let p4 = c4.remove_edge(0).unwrap();
        let spec = spectra::eigen_desc(&operators::kirchhoff(&p4)).unwrap();
        let expected = [2.0 + 2f64.sqrt(), 2.0, 2.0 - 2f64.sqrt(), 0.0];
        for (a, e) in spec.values.iter().zip(expected) {
            assert!((a - e).abs() <= 1e-9);
        }

        let ribbon = families::ribbon(2).unwrap();
        let report = check_interlacing_edge(&ribbon, 0, &cfg()).unwrap();
        assert_eq!(report.verdict, Verdict::Pass);

        assert!(check_interlacing_edge(&c4, 9, &cfg()).is_err());
    }

    #[test]
    fn snap_check_cases() {
        let k3 = families::complete(3).unwrap();
        for v in 0..3 {
            let report = check_snap(&k3, v, &cfg()).unwrap();
            assert_eq!(report.verdict, Verdict::Pass);
        }

        // star with 5 leaves: snapping the center leaves 5 looped vertices
        let star = families::star(5).unwrap();
        let snapped = star.snap(0).unwrap();
        assert_eq!(
            operators::kirchhoff(&snapped),
            Array2::eye(5).mapv(|x: f64| x as i64)
        );
        assert_eq!(check_snap(&star, 0, &cfg()).unwrap().verdict, Verdict::Pass);

        // snapping an end of the single edge leaves one loop: K = [1]
        let p2 = families::path(2).unwrap();
        let report = check_snap(&p2, 1, &cfg()).unwrap();
        assert_eq!(report.verdict, Verdict::Pass);

        // multi-connections make the check inapplicable
        let ribbon = families::ribbon(3).unwrap();
        assert_eq!(
            check_snap(&ribbon, 0, &cfg()).unwrap().verdict,
            Verdict::Inapplicable
        );
    }

    #[test]
    fn hadamard_examples() {
        let c4 = families::cycle(4).unwrap();
        for v in 0..4 {
            let report =
                check_hadamard_monotone(&c4, Perturbation::AddLoop(v), &cfg()).unwrap();
            assert_eq!(report.verdict, Verdict::Pass);
        }
        // duplicating the single edge doubles the spectrum: {2,0} -> {4,0}
        let k2 = families::path(2).unwrap();
        let report = check_hadamard_monotone(&k2, Perturbation::AddEdge(0, 1), &cfg()).unwrap();
        assert_eq!(report.verdict, Verdict::Pass);
        assert!(report.sharp, "S_1 grows by exactly 2");

        assert!(check_hadamard_monotone(&k2, Perturbation::AddEdge(0, 0), &cfg()).is_err());
    }

    #[test]
    fn loops_proposition_examples() {
        let c3 = families::cycle(3).unwrap();
        let report = check_loops_proposition(&c3, 2, &cfg()).unwrap();
        assert_eq!(report.verdict, Verdict::Pass);
        let shifted = spectra::eigen_desc(&operators::kirchhoff(
            &check_loaded(&c3, 2),
        ))
        .unwrap();
        for (a, e) in shifted.values.iter().zip([5.0, 5.0, 2.0]) {
            assert!((a - e).abs() <= 1e-9);
        }

        let any = families::k7_ribbon_fixture();
        assert_eq!(
            check_loops_proposition(&any, 0, &cfg()).unwrap().verdict,
            Verdict::Pass
        );

        let e4 = Quiver::new(4, vec![]).unwrap();
        let report = check_loops_proposition(&e4, 3, &cfg()).unwrap();
        assert_eq!(report.verdict, Verdict::Pass);
    }

    fn check_loaded(q: &Quiver, l: u64) -> Quiver {
        let mut edges = q.edges().to_vec();
        for _ in 0..l {
            for v in 0..q.n() {
                edges.push((v, v));
            }
        }
        Quiver::new(q.n(), edges).unwrap()
    }

    #[test]
    fn complement_examples() {
        let c4 = families::cycle(4).unwrap();
        assert_eq!(check_complement(&c4, &cfg()).unwrap().verdict, Verdict::Pass);
        for n in 2..7u64 {
            let kn = families::complete(n).unwrap();
            assert_eq!(check_complement(&kn, &cfg()).unwrap().verdict, Verdict::Pass);
        }
        assert_eq!(
            check_complement(&families::ribbon(2).unwrap(), &cfg())
                .unwrap()
                .verdict,
            Verdict::Inapplicable
        );
    }

    #[test]
    fn threshold_examples() {
        // two disjoint edges: lambda_1 = 2 = s
        let disjoint = Quiver::new(4, vec![(0, 1), (2, 3)]).unwrap();
        let report = check_threshold(&disjoint, &cfg()).unwrap();
        assert_eq!(report.verdict, Verdict::Pass);

        let c6 = families::cycle(6).unwrap();
        let report = check_threshold(&c6, &cfg()).unwrap();
        assert_eq!(report.verdict, Verdict::Inapplicable);

        let e3 = Quiver::new(3, vec![]).unwrap();
        assert_eq!(check_threshold(&e3, &cfg()).unwrap().verdict, Verdict::Pass);
    }

    #[test]
    fn mckean_singer_example() {
        let q = Quiver::new(5, vec![(0, 1), (1, 2), (2, 0), (3, 3), (1, 2)]).unwrap();
        let report = check_mckean_singer(&q, &cfg()).unwrap();
        assert_eq!(report.verdict, Verdict::Pass);
    }

    #[test]
    fn connection_examples() {
        let k2 = families::path(2).unwrap();
        let report = check_connection(&k2, &cfg()).unwrap();
        assert_eq!(report.verdict, Verdict::Pass);

        let e3 = Quiver::new(3, vec![]).unwrap();
        assert_eq!(check_connection(&e3, &cfg()).unwrap().verdict, Verdict::Pass);

        assert_eq!(
            check_connection(&families::clover(2).unwrap(), &cfg())
                .unwrap()
                .verdict,
            Verdict::Inapplicable
        );
    }

    #[test]
    fn certificate_cycle16_path20_cycle15() {
        let (report, cert) = brouwer_certificate(&families::cycle(16).unwrap(), &cfg()).unwrap();
        assert_eq!(report.verdict, Verdict::Pass);
        let cert = cert.unwrap();
        assert_eq!(cert.tree_edges.len(), 15);
        assert_eq!(cert.added_edges.len(), 1);
        assert_eq!(cert.case_boundary, 4);
        assert_eq!(cert.steps.len(), 1);

        let (report, cert) = brouwer_certificate(&families::path(20).unwrap(), &cfg()).unwrap();
        assert_eq!(report.verdict, Verdict::Pass);
        assert!(cert.unwrap().steps.is_empty(), "a tree needs no chain");

        let (report, cert) = brouwer_certificate(&families::cycle(15).unwrap(), &cfg()).unwrap();
        assert_eq!(report.verdict, Verdict::Inapplicable);
        assert!(cert.is_none());

        // disconnected input is inapplicable, not an error
        let two = Quiver::new(4, vec![(0, 1), (2, 3)]).unwrap();
        let (report, _) = brouwer_certificate(&two, &cfg()).unwrap();
        assert_eq!(report.verdict, Verdict::Inapplicable);
    }

    #[test]
    fn kirchhoff_minus_edge_is_rank_one_drop() {
        let q = Quiver::new(3, vec![(0, 1), (1, 2), (2, 2)]).unwrap();
        for e in 0..q.m() {
            let reduced = q.remove_edge(e).unwrap();
            let diff = operators::kirchhoff(&q) - operators::kirchhoff(&reduced);
            let (a, b) = q.edges()[e];
            let mut expected = Array2::<i64>::zeros((3, 3));
            expected[[a, a]] += 1;
            if a != b {
                expected[[b, b]] += 1;
                expected[[a, b]] -= 1;
                expected[[b, a]] -= 1;
            }
            assert_eq!(diff, expected);
        }
    }

    #[test]
    fn delete_row_col_helper() {
        let m = ndarray::array![[1, 2, 3], [4, 5, 6], [7, 8, 9]];
        assert_eq!(delete_row_col(&m, 1), ndarray::array![[1, 3], [7, 9]]);
    }

    #[test]
    fn failing_report_replays_to_the_same_margin() {
        let cfg = CheckConfig {
            classical_bound: true,
            ..CheckConfig::default()
        };
        let report = check_brouwer(&families::ribbon(7).unwrap(), &cfg).unwrap();
        assert_eq!(report.verdict, Verdict::Fail);
        let replayed = Quiver::from_qvr(report.quiver.as_deref().unwrap()).unwrap();
        let second = check_brouwer(&replayed, &cfg).unwrap();
        let (a, b) = (report.margin.unwrap(), second.margin.unwrap());
        assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0));
        assert!(report.sequences.is_some(), "table rides along on failure");
    }

    #[test]
    fn check_kind_names_round_trip() {
        for kind in CheckKind::ALL {
            assert_eq!(CheckKind::parse(kind.name()).unwrap(), kind);
        }
        assert!(CheckKind::parse("nope").is_err());
    }

    #[test]
    fn run_check_sweeps_targets() {
        let c4 = families::cycle(4).unwrap();
        for kind in CheckKind::ALL {
            let report = run_check(kind, &c4, &cfg()).unwrap();
            if kind == CheckKind::Threshold || kind == CheckKind::Certificate {
                assert_eq!(report.verdict, Verdict::Inapplicable, "{}", kind.name());
            } else {
                assert_eq!(report.verdict, Verdict::Pass, "{}", kind.name());
            }
        }
    }
}
