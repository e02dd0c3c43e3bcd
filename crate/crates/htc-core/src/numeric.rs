//! Numerical semantics of the model: the covariance parametrization, the
//! trek-rule oracle, witness-driven parameter recovery, and the Jacobian
//! rank test.
//!
//! The model given by a mixed graph consists of the covariance matrices
//! `Sigma = (I - Lambda)^{-T} Omega (I - Lambda)^{-1}` where `Lambda` is
//! supported on the directed edges and `Omega` is positive definite with
//! support on the bidirected edges plus the diagonal. Recovery inverts this
//! map column by column along an identifiability witness; the Jacobian of
//! the off-support zero constraints certifies infinite-to-one graphs through
//! rank deficiency.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::{MixedGraph, NodeId};
use crate::htc::HtcWitness;

/// Condition-number threshold beyond which a per-node linear system is
/// treated as a nongeneric point rather than solved.
pub const CONDITION_LIMIT: f64 = 1e10;

/// Model parameters: `lambda[(v-1, w-1)]` is the coefficient on `v -> w`,
/// `omega` the symmetric error covariance supported on bidirected edges and
/// the diagonal.
#[derive(Clone, Debug)]
pub struct Params {
    pub lambda: DMatrix<f64>,
    pub omega: DMatrix<f64>,
}

impl Params {
    /// Validates support, symmetry, positive definiteness of `omega`, and
    /// invertibility of `I - lambda` against the graph.
    pub fn new(g: &MixedGraph, lambda: DMatrix<f64>, omega: DMatrix<f64>) -> Result<Self> {
        let p = Params { lambda, omega };
        p.validate_support(g).map_err(Error::Contract)?;
        Ok(p)
    }

    /// All structural requirements as a plain string reason, for callers
    /// that map violations to their own error flavor.
    pub fn validate_support(&self, g: &MixedGraph) -> std::result::Result<(), String> {
        let m = g.node_count();
        if self.lambda.shape() != (m, m) || self.omega.shape() != (m, m) {
            return Err(format!("parameter matrices must be {m}x{m}"));
        }
        for v in 0..m {
            for w in 0..m {
                let (vn, wn) = (NodeId::new(v + 1), NodeId::new(w + 1));
                if self.lambda[(v, w)] != 0.0 && !g.has_directed(vn, wn) {
                    return Err(format!(
                        "lambda[{},{}] is nonzero but {vn} -> {wn} is not an edge",
                        v + 1,
                        w + 1
                    ));
                }
                let asym = (self.omega[(v, w)] - self.omega[(w, v)]).abs();
                if asym > 1e-9 * self.omega[(v, w)].abs().max(1.0) {
                    return Err(format!("omega is not symmetric at ({}, {})", v + 1, w + 1));
                }
                if v != w && self.omega[(v, w)] != 0.0 && !g.has_bidirected(vn, wn) {
                    return Err(format!(
                        "omega[{},{}] is nonzero but {vn} <-> {wn} is not an edge",
                        v + 1,
                        w + 1
                    ));
                }
            }
        }
        if nalgebra::Cholesky::new(self.omega.clone()).is_none() {
            return Err("omega is not positive definite".into());
        }
        let i_minus = DMatrix::identity(m, m) - &self.lambda;
        if !i_minus.is_invertible() {
            return Err("I - lambda is singular".into());
        }
        Ok(())
    }

    /// Row-major CSV with 17-significant-digit decimals: `m` lines of
    /// `lambda` followed by `m` lines of `omega`.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for mat in [&self.lambda, &self.omega] {
            for r in 0..mat.nrows() {
                let row: Vec<String> = (0..mat.ncols())
                    .map(|c| format!("{:.16e}", mat[(r, c)]))
                    .collect();
                out.push_str(&row.join(","));
                out.push('\n');
            }
        }
        out
    }

    /// Parses the CSV form written by [`to_csv`] and validates it against
    /// the graph.
    ///
    /// [`to_csv`]: Params::to_csv
    pub fn from_csv(g: &MixedGraph, text: &str) -> Result<Self> {
        let m = g.node_count();
        let mut rows: Vec<(usize, Vec<f64>)> = Vec::new();
        for (ix, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let values: std::result::Result<Vec<f64>, _> =
                line.split(',').map(|tok| tok.trim().parse::<f64>()).collect();
            let values = values.map_err(|e| Error::Parse {
                line: ix + 1,
                msg: format!("invalid number: {e}"),
            })?;
            if values.len() != m {
                return Err(Error::Parse {
                    line: ix + 1,
                    msg: format!("expected {m} comma-separated values, got {}", values.len()),
                });
            }
            rows.push((ix + 1, values));
        }
        if rows.len() != 2 * m {
            return Err(Error::Parse {
                line: 0,
                msg: format!(
                    "expected {} rows ({m} for lambda then {m} for omega), got {}",
                    2 * m,
                    rows.len()
                ),
            });
        }
        let build = |rows: &[(usize, Vec<f64>)]| {
            DMatrix::from_fn(m, m, |r, c| rows[r].1[c])
        };
        let p = Params {
            lambda: build(&rows[..m]),
            omega: build(&rows[m..]),
        };
        p.validate_support(g)
            .map_err(|msg| Error::Parse { line: 0, msg })?;
        Ok(p)
    }
}

/// A symmetric positive definite covariance matrix.
#[derive(Clone, Debug)]
pub struct Covariance {
    pub sigma: DMatrix<f64>,
}

/// Draws generic parameters: coefficients uniform on `[-1, -0.1] ∪ [0.1, 1]`
/// per directed edge, error covariances uniform on `[-0.3, 0.3]` per
/// bidirected edge, and diagonally dominant error variances
/// `omega_vv = 1 + sum_w |omega_vw|`. The coefficient matrix is redrawn
/// until `|det(I - Lambda)| > 1e-6` (immediate for acyclic graphs).
/// Deterministic given the seed.
pub fn sample_params(g: &MixedGraph, seed: u64) -> Result<Params> {
    let m = g.node_count();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut omega: DMatrix<f64> = DMatrix::zeros(m, m);
    for &(u, v) in g.bidirected_edges() {
        let val = rng.random_range(-0.3..=0.3);
        omega[(u.index() - 1, v.index() - 1)] = val;
        omega[(v.index() - 1, u.index() - 1)] = val;
    }
    for v in 0..m {
        omega[(v, v)] = 1.0 + omega.row(v).iter().map(|x| x.abs()).sum::<f64>();
    }
    for _ in 0..100 {
        let mut lambda: DMatrix<f64> = DMatrix::zeros(m, m);
        for &(u, v) in g.directed_edges() {
            let magnitude = rng.random_range(0.1..=1.0);
            let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
            lambda[(u.index() - 1, v.index() - 1)] = sign * magnitude;
        }
        let det = (DMatrix::identity(m, m) - &lambda).determinant();
        if det.abs() > 1e-6 {
            return Ok(Params { lambda, omega });
        }
    }
    Err(Error::Nongeneric(
        "could not sample parameters with invertible I - lambda in 100 attempts".into(),
    ))
}

/// The parametrization: `Sigma = (I - Lambda)^{-T} Omega (I - Lambda)^{-1}`,
/// symmetrized to machine precision.
pub fn phi(g: &MixedGraph, p: &Params) -> Result<Covariance> {
    let m = g.node_count();
    let i_minus = DMatrix::identity(m, m) - &p.lambda;
    let inv = i_minus.try_inverse().ok_or_else(|| {
        Error::Nongeneric("I - lambda is numerically singular".into())
    })?;
    let sigma = inv.transpose() * &p.omega * &inv;
    let sigma = (&sigma + sigma.transpose()) * 0.5;
    Ok(Covariance { sigma })
}

/// One trek: two directed paths hanging off a common top node or off a
/// bidirected edge. `left` runs from the top (or the bidirected edge's
/// source-side endpoint) to the trek's source, `right` to its target.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Trek {
    pub left: Vec<NodeId>,
    pub right: Vec<NodeId>,
    /// When set, `left[0] <-> right[0]` is a bidirected edge; otherwise the
    /// two paths share `left[0] == right[0]` as top node.
    pub has_bidirected: bool,
}

impl Trek {
    /// The trek monomial: the omega entry at the top (or bidirected pair)
    /// times the coefficients of every directed edge on both sides.
    pub fn monomial(&self, p: &Params) -> f64 {
        let mut value = p.omega[(self.left[0].index() - 1, self.right[0].index() - 1)];
        for path in [&self.left, &self.right] {
            for pair in path.windows(2) {
                value *= p.lambda[(pair[0].index() - 1, pair[1].index() - 1)];
            }
        }
        value
    }
}

const TREK_ENUMERATION_MAX_NODES: usize = 6;

/// Enumerates every trek from `v` to `w` in an acyclic graph.
pub fn enumerate_treks(g: &MixedGraph, v: NodeId, w: NodeId) -> Result<Vec<Trek>> {
    if !g.is_acyclic() {
        return Err(Error::Contract(
            "trek enumeration is defined for acyclic graphs".into(),
        ));
    }
    if g.node_count() > TREK_ENUMERATION_MAX_NODES {
        return Err(Error::Capability(format!(
            "trek enumeration requires m <= {TREK_ENUMERATION_MAX_NODES}, got {}",
            g.node_count()
        )));
    }
    let paths: Vec<Vec<Vec<Vec<NodeId>>>> =
        g.nodes().map(|s| directed_paths_from(g, s)).collect();
    let paths_to = |from: NodeId, to: NodeId| &paths[from.index() - 1][to.index() - 1];
    let mut treks = Vec::new();
    for top in g.nodes() {
        for pl in paths_to(top, v) {
            for pr in paths_to(top, w) {
                treks.push(Trek {
                    left: pl.clone(),
                    right: pr.clone(),
                    has_bidirected: false,
                });
            }
        }
    }
    for &(a, b) in g.bidirected_edges() {
        for (x, y) in [(a, b), (b, a)] {
            for pl in paths_to(x, v) {
                for pr in paths_to(y, w) {
                    treks.push(Trek {
                        left: pl.clone(),
                        right: pr.clone(),
                        has_bidirected: true,
                    });
                }
            }
        }
    }
    Ok(treks)
}

/// All directed paths from `start`, grouped by endpoint (0-based). Paths in
/// an acyclic graph are automatically simple, so the recursion terminates.
pub(crate) fn directed_paths_from(g: &MixedGraph, start: NodeId) -> Vec<Vec<Vec<NodeId>>> {
    let mut acc: Vec<Vec<Vec<NodeId>>> = vec![Vec::new(); g.node_count()];
    let mut path = vec![start];
    fn dfs(g: &MixedGraph, path: &mut Vec<NodeId>, acc: &mut Vec<Vec<Vec<NodeId>>>) {
        let cur = *path.last().unwrap();
        acc[cur.index() - 1].push(path.clone());
        for &next in g.children(cur) {
            path.push(next);
            dfs(g, path, acc);
            path.pop();
        }
    }
    dfs(g, &mut path, &mut acc);
    acc
}

/// Evaluates the covariance matrix by the trek rule,
/// `sigma_vw = sum over treks from v to w of the trek monomial`. Serves as
/// an independent oracle for [`phi`] on small acyclic graphs.
pub fn trek_rule_sigma(g: &MixedGraph, p: &Params) -> Result<Covariance> {
    let m = g.node_count();
    let mut sigma = DMatrix::zeros(m, m);
    for v in g.nodes() {
        for w in g.nodes().filter(|w| *w >= v) {
            let value: f64 = enumerate_treks(g, v, w)?
                .iter()
                .map(|t| t.monomial(p))
                .sum();
            sigma[(v.index() - 1, w.index() - 1)] = value;
            sigma[(w.index() - 1, v.index() - 1)] = value;
        }
    }
    Ok(Covariance { sigma })
}

/// Recovers the coefficient matrix from a covariance matrix, visiting nodes
/// in the witness order and solving one linear system per node.
///
/// For node `v` with parents `p_1..p_n` and witness sources `y_1..y_n`, the
/// system matrix has rows `[(I - Lambda)^T Sigma]_{y_i, p_j}` when
/// `y_i ∈ htr(v)` (using the already-recovered columns of `Lambda`) and
/// `Sigma_{y_i, p_j}` otherwise, with the right-hand side built the same way
/// from column `v`. A system whose condition number exceeds
/// [`CONDITION_LIMIT`] aborts with a nongeneric-point error naming the node.
pub fn recover_lambda(
    g: &MixedGraph,
    cov: &Covariance,
    witness: &HtcWitness,
) -> Result<DMatrix<f64>> {
    let m = g.node_count();
    let sigma = &cov.sigma;
    if sigma.shape() != (m, m) {
        return Err(Error::Contract(format!("sigma must be {m}x{m}")));
    }
    if witness.order.len() != m {
        return Err(Error::Contract("witness order must cover all nodes".into()));
    }
    let mut lambda = DMatrix::zeros(m, m);
    let mut recovered = vec![false; m];
    for &v in &witness.order {
        let parents = g.parents(v);
        let n = parents.len();
        if n == 0 {
            recovered[v.index() - 1] = true;
            continue;
        }
        let sources = witness.y_sets.get(&v).ok_or_else(|| {
            Error::Contract(format!("witness is missing the Y set for node {v}"))
        })?;
        if sources.len() != n {
            return Err(Error::Contract(format!(
                "witness Y set for node {v} has {} entries, want {n}",
                sources.len()
            )));
        }
        let htr = g.htr(v);
        let mut a = DMatrix::zeros(n, n);
        let mut b = DVector::zeros(n);
        for (i, &y) in sources.iter().enumerate() {
            let use_partial = htr.contains(&y);
            if use_partial && !recovered[y.index() - 1] {
                return Err(Error::Contract(format!(
                    "witness order visits {v} before its half-trek-reachable source {y}"
                )));
            }
            let entry = |col: NodeId| -> f64 {
                let direct = sigma[(y.index() - 1, col.index() - 1)];
                if use_partial {
                    direct
                        - g.parents(y)
                            .iter()
                            .map(|k| {
                                lambda[(k.index() - 1, y.index() - 1)]
                                    * sigma[(k.index() - 1, col.index() - 1)]
                            })
                            .sum::<f64>()
                } else {
                    direct
                }
            };
            for (j, &p) in parents.iter().enumerate() {
                a[(i, j)] = entry(p);
            }
            b[i] = entry(v);
        }
        let singular_values = a.clone().svd(false, false).singular_values;
        let condition = singular_values.max() / singular_values.min();
        if !condition.is_finite() || condition > CONDITION_LIMIT {
            return Err(Error::Nongeneric(format!(
                "singular equation system at node {v} (condition number {condition:.3e})"
            )));
        }
        let x = a.lu().solve(&b).ok_or_else(|| {
            Error::Nongeneric(format!("singular equation system at node {v}"))
        })?;
        for (j, &p) in parents.iter().enumerate() {
            lambda[(p.index() - 1, v.index() - 1)] = x[j];
        }
        recovered[v.index() - 1] = true;
    }
    Ok(lambda)
}

/// Error-covariance recovery `Omega = (I - Lambda)^T Sigma (I - Lambda)`
/// plus the largest absolute entry found off the allowed support, which
/// vanishes for exact inputs.
#[derive(Clone, Debug)]
pub struct OmegaRecovery {
    pub omega: DMatrix<f64>,
    pub max_off_support_residual: f64,
}

pub fn recover_omega(g: &MixedGraph, cov: &Covariance, lambda: &DMatrix<f64>) -> OmegaRecovery {
    let m = g.node_count();
    let i_minus = DMatrix::identity(m, m) - lambda;
    let omega = i_minus.transpose() * &cov.sigma * &i_minus;
    let mut residual: f64 = 0.0;
    for v in g.nodes() {
        for w in g.nodes().filter(|w| *w > v) {
            if !g.has_bidirected(v, w) {
                residual = residual.max(omega[(v.index() - 1, w.index() - 1)].abs());
            }
        }
    }
    OmegaRecovery {
        omega,
        max_off_support_residual: residual,
    }
}

/// Unordered nonsibling pairs `{v, w}` in lexicographic order; the row index
/// set of the Jacobian.
pub fn nonsibling_pairs(g: &MixedGraph) -> Vec<(NodeId, NodeId)> {
    let mut pairs = Vec::new();
    for v in g.nodes() {
        for w in g.nodes().filter(|w| *w > v) {
            if !g.has_bidirected(v, w) {
                pairs.push((v, w));
            }
        }
    }
    pairs
}

/// Jacobian of the off-support zero constraints
/// `[(I - Lambda)^T Sigma (I - Lambda)]_{v,w} = 0`, `{v, w}` nonsibling,
/// with respect to the directed-edge coefficients, evaluated at `p` with
/// `Sigma = phi(p)` held fixed. The entry for row `{v, w}` and column
/// `(u, v)` is `-[(I - Lambda)^T Sigma]_{w, u}`; all others vanish.
pub fn jacobian(g: &MixedGraph, p: &Params) -> Result<DMatrix<f64>> {
    let cov = phi(g, p)?;
    let m = g.node_count();
    let it = (DMatrix::identity(m, m) - &p.lambda).transpose() * &cov.sigma;
    let pairs = nonsibling_pairs(g);
    let edges = g.directed_edges();
    let mut jac = DMatrix::zeros(pairs.len(), edges.len());
    for (r, &(v, w)) in pairs.iter().enumerate() {
        for (c, &(u, x)) in edges.iter().enumerate() {
            jac[(r, c)] = if x == v {
                -it[(w.index() - 1, u.index() - 1)]
            } else if x == w {
                -it[(v.index() - 1, u.index() - 1)]
            } else {
                0.0
            };
        }
    }
    Ok(jac)
}

/// Numerical rank: the number of singular values above `tol` times the
/// largest one.
pub fn numeric_rank(matrix: &DMatrix<f64>, tol: f64) -> usize {
    assert!(tol > 0.0, "tolerance must be positive");
    if matrix.nrows() == 0 || matrix.ncols() == 0 {
        return 0;
    }
    let singular_values = matrix.clone().svd(false, false).singular_values;
    let s_max = singular_values.max();
    if s_max == 0.0 {
        return 0;
    }
    singular_values.iter().filter(|&&s| s > tol * s_max).count()
}

/// Scale-aware recovery error: the largest absolute entrywise deviation in
/// `(Lambda, Omega)` relative to the largest true parameter magnitude
/// (floored at one).
pub fn relative_param_error(
    truth: &Params,
    lambda: &DMatrix<f64>,
    omega: &DMatrix<f64>,
) -> f64 {
    let scale = truth.lambda.amax().max(truth.omega.amax()).max(1.0);
    let dl = (lambda - &truth.lambda).amax();
    let dw = (omega - &truth.omega).amax();
    dl.max(dw) / scale
}
