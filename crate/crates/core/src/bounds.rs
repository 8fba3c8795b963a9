//! The BFS lower bound on `E[Y]`, the maximum-degree upper bound, closed
//! forms for the standard graph families, and the finite-radius gap bound.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{bfs_distances, tree_like_radius, DistanceMap, Graph, SeedSet};
use crate::oracle::{exact_mean_bruteforce, MEAN_EDGE_CAP};
use crate::sim::{check_beta, estimate_mean, EpidemicParams, Estimate, Method};

/// `sum_v beta^dist(v)` over reachable vertices. Powers come from repeated
/// multiplication, one per BFS level.
pub fn distance_power_sum(dist: &DistanceMap, beta: f64) -> f64 {
    let mut power = 1.0;
    let mut total = 0.0;
    for count in dist.level_counts() {
        total += count as f64 * power;
        power *= beta;
    }
    total
}

/// Expected outbreak size on any BFS spanning forest rooted at the seeds,
/// which is a lower bound on `E[Y]` for every `beta`. It only depends on
/// distances, so the choice of forest is irrelevant.
pub fn lower_bound(g: &Graph, seeds: &SeedSet, beta: f64) -> Result<f64> {
    check_beta(beta)?;
    Ok(distance_power_sum(&bfs_distances(g, seeds), beta))
}

/// `k / (1 - beta * max_degree)`, defined only when `beta * max_degree < 1`.
pub fn upper_bound_degree(g: &Graph, k: usize, beta: f64) -> Result<Option<f64>> {
    check_beta(beta)?;
    Ok(degree_upper_bound(g.max_degree(), k, beta))
}

pub fn degree_upper_bound(max_degree: usize, k: usize, beta: f64) -> Option<f64> {
    let load = beta * max_degree as f64;
    (load < 1.0).then(|| k as f64 / (1.0 - load))
}

/// `E[Y]` on the rooted tree of height `m` with `r - 1` children per
/// internal vertex.
pub fn cf_rary_tree_mu(r: usize, m: usize, beta: f64) -> Result<f64> {
    check_beta(beta)?;
    if r < 2 {
        return Err(Error::InvalidParameter(format!("need r >= 2, got {r}")));
    }
    let x = (r - 1) as f64 * beta;
    if (x - 1.0).abs() < 1e-9 {
        // Removable singularity of the quotient: run the recursion
        // mu_j = 1 + x * mu_{j-1}.
        return Ok((0..m).fold(1.0, |mu, _| 1.0 + x * mu));
    }
    Ok((x.powi(m as i32 + 1) - 1.0) / (x - 1.0))
}

fn require_subcritical(r: usize, beta: f64) -> Result<f64> {
    check_beta(beta)?;
    if r < 2 {
        return Err(Error::InvalidParameter(format!("need r >= 2, got {r}")));
    }
    let x = (r - 1) as f64 * beta;
    if x >= 1.0 {
        return Err(Error::Domain(format!(
            "(r-1)*beta = {x} must be below 1 for a finite limit"
        )));
    }
    Ok(x)
}

/// Limit of [`cf_rary_tree_mu`] as the height grows: the rooted infinite
/// tree whose root has `r - 1` children.
pub fn cf_rooted_reg_tree_limit(r: usize, beta: f64) -> Result<f64> {
    let x = require_subcritical(r, beta)?;
    Ok(1.0 / (1.0 - x))
}

/// `(1 + beta) / (1 - (r - 1) beta)`: the infinite `r`-regular tree from
/// its root, and the large-`n` limit for random `r`-regular graphs.
pub fn cf_reg_tree_root(r: usize, beta: f64) -> Result<f64> {
    let x = require_subcritical(r, beta)?;
    Ok((1.0 + beta) / (1.0 - x))
}

/// Lower bound on the odd cycle `C_n`: `1 + 2 (beta + ... + beta^((n-1)/2))`.
pub fn cf_cycle_lb(n: usize, beta: f64) -> Result<f64> {
    check_beta(beta)?;
    if n < 3 || n.is_multiple_of(2) {
        return Err(Error::InvalidParameter(format!(
            "closed form is stated for odd n >= 3, got {n}"
        )));
    }
    let mut power = 1.0;
    let mut side = 0.0;
    for _ in 0..(n - 1) / 2 {
        power *= beta;
        side += power;
    }
    Ok(1.0 + 2.0 * side)
}

/// `(1 + beta)^d`, the lower bound on the hypercube `Q_d`.
pub fn cf_cube_lb(d: usize, beta: f64) -> Result<f64> {
    check_beta(beta)?;
    if d == 0 {
        return Err(Error::InvalidParameter(
            "dimension must be at least 1".into(),
        ));
    }
    Ok((1.0 + beta).powi(d as i32))
}

/// `1 / (1 - beta c)`: mean total progeny of a Galton–Watson tree with
/// offspring mean `c` thinned by `beta`.
pub fn cf_gw_mean(c: f64, beta: f64) -> Result<f64> {
    check_beta(beta)?;
    if c.is_nan() || c <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "offspring mean must be positive, got {c}"
        )));
    }
    if beta * c >= 1.0 {
        return Err(Error::Domain(format!(
            "beta*c = {} is supercritical; the mean is infinite",
            beta * c
        )));
    }
    Ok(1.0 / (1.0 - beta * c))
}

/// Two-step lower bound on `E[Y]` for `K_n` from one seed: the seed, its
/// `Binomial(n-1, beta)` direct infections, and the expected number infected
/// at the second step. Terms kept as in the original display, including the
/// pair of `(n-1) beta` terms that cancel.
pub fn cf_kn_lower(n: usize, beta: f64) -> Result<f64> {
    check_beta(beta)?;
    if n < 2 {
        return Err(Error::InvalidParameter(format!("need n >= 2, got {n}")));
    }
    let n1 = (n - 1) as f64;
    let q = 1.0 - beta * beta;
    Ok(1.0 + n1 * beta + n1 - n1 * q.powi(n as i32 - 1) - n1 * beta
        + n1 * beta * (1.0 - beta) * q.powi(n as i32 - 2))
}

/// Upper bound on `E[Y] - LB` when the radius-`d` ball around the seed is a
/// tree except on an event of probability `p_fail`:
/// `beta^d / (1 - beta delta)^2 + p_fail / (1 - beta delta)`.
pub fn gap_bound(beta: f64, max_degree: usize, d: usize, p_fail: f64) -> Result<f64> {
    check_beta(beta)?;
    if d == 0 {
        return Err(Error::InvalidParameter("radius must be at least 1".into()));
    }
    if !(0.0..=1.0).contains(&p_fail) {
        return Err(Error::InvalidParameter(format!(
            "p_fail must lie in [0, 1], got {p_fail}"
        )));
    }
    let load = beta * max_degree as f64;
    if load >= 1.0 {
        return Err(Error::Domain(format!(
            "beta*delta = {load} must be below 1"
        )));
    }
    let slack = 1.0 - load;
    Ok(beta.powi(d as i32) / (slack * slack) + p_fail / slack)
}

#[derive(Clone, Debug, Default)]
pub struct ReportOptions {
    /// Run the brute-force oracle when the graph is within its edge cap.
    pub exact: bool,
    /// Attach a Monte Carlo estimate.
    pub monte_carlo: Option<MonteCarloOptions>,
    /// Largest radius probed by the tree-likeness diagnostic.
    pub radius_cap: usize,
}

#[derive(Clone, Copy, Debug)]
pub struct MonteCarloOptions {
    pub trials: usize,
    pub master_seed: u64,
    pub method: Method,
    pub jobs: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct BoundDiagnostics {
    pub max_degree: usize,
    /// Tree-like radius at each seed, in seed order.
    pub tree_like_radius: Vec<usize>,
    pub reachable: usize,
    pub eccentricity: usize,
    /// Why `ub_degree` is absent, if it is.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ub_absent_reason: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct BoundReport {
    pub lb: f64,
    pub ub_degree: Option<f64>,
    pub exact: Option<f64>,
    pub estimate: Option<Estimate>,
    pub beta: f64,
    pub k: usize,
    pub n: usize,
    pub m: usize,
    pub diagnostics: BoundDiagnostics,
}

pub fn make_report(
    g: &Graph,
    seeds: &SeedSet,
    beta: f64,
    options: &ReportOptions,
) -> Result<BoundReport> {
    check_beta(beta)?;
    let dist = bfs_distances(g, seeds);
    let lb = distance_power_sum(&dist, beta);
    let max_degree = g.max_degree();
    let ub_degree = degree_upper_bound(max_degree, seeds.len(), beta);
    let exact = if options.exact && g.m() <= MEAN_EDGE_CAP {
        Some(exact_mean_bruteforce(g, seeds, beta)?)
    } else {
        None
    };
    let estimate = options.monte_carlo.map(|mc| {
        EpidemicParams::new(beta, mc.master_seed, mc.trials)
            .map(|p| estimate_mean(g, seeds, &p, mc.method, mc.jobs))
    });
    let estimate = estimate.transpose()?;
    Ok(BoundReport {
        lb,
        ub_degree,
        exact,
        estimate,
        beta,
        k: seeds.len(),
        n: g.n(),
        m: g.m(),
        diagnostics: BoundDiagnostics {
            max_degree,
            tree_like_radius: seeds
                .iter()
                .map(|s| tree_like_radius(g, s, options.radius_cap))
                .collect(),
            reachable: dist.reachable_count(),
            eccentricity: dist.eccentricity(),
            ub_absent_reason: ub_degree
                .is_none()
                .then(|| format!("beta*max_degree = {} >= 1", beta * max_degree as f64)),
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{gen_complete, gen_cycle, gen_hypercube, gen_path, gen_rary_tree};

    fn root(n: usize) -> SeedSet {
        SeedSet::single(0, n).unwrap()
    }

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn lower_bound_examples() {
        let c5 = gen_cycle(5).unwrap();
        assert!(close(lower_bound(&c5, &root(5), 0.5).unwrap(), 2.5, 1e-15));
        let q3 = gen_hypercube(3).unwrap();
        assert!(close(
            lower_bound(&q3, &root(8), 0.5).unwrap(),
            3.375,
            1e-15
        ));
        let k5 = gen_complete(5);
        assert!(close(lower_bound(&k5, &root(5), 0.2).unwrap(), 1.8, 1e-15));
        assert!(lower_bound(&k5, &root(5), 1.0).is_err());
    }

    #[test]
    fn unreachable_vertices_contribute_nothing() {
        let g = Graph::from_edges(4, &[(0, 1), (2, 3)]).unwrap();
        assert!(close(lower_bound(&g, &root(4), 0.4).unwrap(), 1.4, 1e-15));
    }

    #[test]
    fn degree_bound_examples() {
        assert!(close(degree_upper_bound(3, 1, 0.2).unwrap(), 2.5, 1e-15));
        assert!(close(degree_upper_bound(3, 2, 0.2).unwrap(), 5.0, 1e-15));
        assert_eq!(degree_upper_bound(2, 1, 0.6), None);
        assert_eq!(
            upper_bound_degree(&gen_cycle(7).unwrap(), 1, 0.6).unwrap(),
            None
        );
    }

    #[test]
    fn rary_tree_closed_form() {
        assert!(close(cf_rary_tree_mu(2, 1, 0.3).unwrap(), 1.3, 1e-15));
        assert!(close(cf_rary_tree_mu(3, 2, 0.25).unwrap(), 1.75, 1e-15));
        // (r-1) beta = 1 exactly: mu_m = m + 1.
        assert!(close(cf_rary_tree_mu(3, 6, 0.5).unwrap(), 7.0, 1e-12));
        for (r, m, beta) in [(3, 5, 0.3), (4, 4, 0.2), (2, 9, 0.8), (5, 3, 0.6)] {
            let t = gen_rary_tree(r, m).unwrap();
            let lb = lower_bound(&t, &root(t.n()), beta).unwrap();
            assert!(close(cf_rary_tree_mu(r, m, beta).unwrap(), lb, 1e-12));
        }
    }

    #[test]
    fn tree_limits() {
        assert!(close(
            cf_rooted_reg_tree_limit(3, 0.25).unwrap(),
            2.0,
            1e-15
        ));
        assert!(close(
            cf_rooted_reg_tree_limit(2, 0.4).unwrap(),
            1.0 / 0.6,
            1e-15
        ));
        assert!(matches!(
            cf_rooted_reg_tree_limit(3, 0.5),
            Err(Error::Domain(_))
        ));
        assert!(close(cf_reg_tree_root(3, 0.2).unwrap(), 2.0, 1e-15));
        assert!(close(cf_reg_tree_root(2, 0.5).unwrap(), 3.0, 1e-15));
        assert!(close(cf_reg_tree_root(3, 1e-12).unwrap(), 1.0, 1e-9));
        // The limit equals 1 + r beta times the rooted limit.
        let beta = 0.15;
        let lhs = cf_reg_tree_root(4, beta).unwrap();
        let rhs = 1.0 + 4.0 * beta * cf_rooted_reg_tree_limit(4, beta).unwrap();
        assert!(close(lhs, rhs, 1e-14));
    }

    #[test]
    fn cycle_closed_form() {
        assert!(close(cf_cycle_lb(5, 0.5).unwrap(), 2.5, 1e-15));
        assert!(close(cf_cycle_lb(3, 0.3).unwrap(), 1.6, 1e-15));
        assert!(cf_cycle_lb(6, 0.3).is_err());
        assert!(close(cf_cycle_lb(2001, 0.5).unwrap(), 3.0, 1e-12));
        for n in (3..60).step_by(2) {
            let lb = lower_bound(&gen_cycle(n).unwrap(), &root(n), 0.7).unwrap();
            assert!(close(cf_cycle_lb(n, 0.7).unwrap(), lb, 1e-12));
        }
    }

    #[test]
    fn even_cycle_counts_antipode_once() {
        let beta: f64 = 0.6;
        for n in (4..30).step_by(2) {
            let lb = lower_bound(&gen_cycle(n).unwrap(), &root(n), beta).unwrap();
            let inner: f64 = (1..n / 2).map(|j| beta.powi(j as i32)).sum();
            assert!(close(
                lb,
                1.0 + 2.0 * inner + beta.powi(n as i32 / 2),
                1e-12
            ));
        }
    }

    #[test]
    fn cube_closed_form() {
        assert!(close(cf_cube_lb(3, 0.5).unwrap(), 3.375, 1e-15));
        assert!(close(cf_cube_lb(1, 0.3).unwrap(), 1.3, 1e-15));
        for d in 1..=10 {
            let q = gen_hypercube(d).unwrap();
            let lb = lower_bound(&q, &root(q.n()), 0.35).unwrap();
            assert!(close(cf_cube_lb(d, 0.35).unwrap(), lb, 1e-12));
        }
    }

    #[test]
    fn gw_mean() {
        assert!(close(cf_gw_mean(2.0, 0.25).unwrap(), 2.0, 1e-15));
        assert!(close(cf_gw_mean(2.0, 1e-12).unwrap(), 1.0, 1e-9));
        assert!(matches!(cf_gw_mean(2.0, 0.5), Err(Error::Domain(_))));
    }

    #[test]
    fn complete_graph_two_step_bound() {
        assert!(close(cf_kn_lower(2, 0.5).unwrap(), 1.5, 1e-15));
        assert!(close(cf_kn_lower(10, 1e-9).unwrap(), 1.0, 1e-6));
        // Simplified form: 1 + (n-1)beta + (n-1)(1-beta) - (n-1)q^(n-1)
        //   + (n-1) beta (1-beta) q^(n-2), q = 1 - beta^2.
        for (n, beta) in [(5usize, 0.3f64), (50, 0.5), (7, 0.9)] {
            let n1 = (n - 1) as f64;
            let q: f64 = 1.0 - beta * beta;
            let simple = 1.0 + n1 * beta + n1 * (1.0 - beta) - n1 * q.powi(n as i32 - 1)
                + n1 * beta * (1.0 - beta) * q.powi(n as i32 - 2);
            assert!(close(cf_kn_lower(n, beta).unwrap(), simple, 1e-12));
        }
        // Below the brute-force exact value on small complete graphs.
        for n in 2..=6 {
            let exact = exact_mean_bruteforce(&gen_complete(n), &root(n), 0.4).unwrap();
            assert!(cf_kn_lower(n, 0.4).unwrap() <= exact + 1e-12);
        }
    }

    #[test]
    fn gap_bound_examples() {
        assert!(close(gap_bound(0.2, 3, 5, 0.0).unwrap(), 0.002, 1e-15));
        assert!(close(gap_bound(0.2, 3, 400, 1.0).unwrap(), 2.5, 1e-12));
        assert!(matches!(gap_bound(0.5, 2, 1, 0.0), Err(Error::Domain(_))));
    }

    #[test]
    fn report_examples() {
        let opts = ReportOptions {
            exact: true,
            radius_cap: 10,
            ..Default::default()
        };
        let c5 = gen_cycle(5).unwrap();
        let r = make_report(&c5, &root(5), 0.5, &opts).unwrap();
        assert!(close(r.lb, 2.5, 1e-15));
        assert!(r.lb <= r.exact.unwrap());
        assert_eq!(r.ub_degree, None);
        assert_eq!(r.diagnostics.tree_like_radius, vec![1]);

        let t = gen_path(6);
        let r = make_report(&t, &root(6), 0.3, &opts).unwrap();
        assert!(close(r.lb, r.exact.unwrap(), 1e-12));
        assert!(r.exact.unwrap() <= r.ub_degree.unwrap());

        let r = make_report(&gen_complete(5), &root(5), 0.3, &opts).unwrap();
        assert_eq!(r.ub_degree, None);
        assert!(r.diagnostics.ub_absent_reason.is_some());
    }
}
