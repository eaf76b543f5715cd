//! Classical hidden-variable models over the charts.
//!
//! A hidden-variable state is a probability mixture over the eleven charts.
//! This module computes the observable consequences of a mixture (per-vertex
//! marginals, the five-term Klyachko sum, pentagon-edge joint probabilities),
//! solves for the two class-uniform mixtures whose marginals all equal 1/3,
//! and bounds the pentagon-edge sum over every mixture with those marginals
//! by enumerating the feasible polytope's vertices in exact rational
//! arithmetic. It also models measurement bias, where the chart distribution
//! is allowed to depend on which context is measured.

use num_rational::Ratio;

use crate::charts::{enumerate_charts, ChartClass, CHART_COUNT};
use crate::geometry::{pentagon_edges, pentagram_edges, VertexId};
use crate::{Error, Result};

type Rat = Ratio<i64>;

fn rat_to_f64(r: Rat) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// Probability distribution over the eleven charts in canonical order.
#[derive(Debug, Clone, PartialEq)]
pub struct MixtureWeights {
    weights: [f64; CHART_COUNT],
}

impl MixtureWeights {
    /// Accepts nonnegative weights that already sum to 1.
    pub fn new(weights: [f64; CHART_COUNT]) -> Result<Self> {
        for (index, &value) in weights.iter().enumerate() {
            if !value.is_finite() {
                return Err(Error::NonFinite);
            }
            if value < 0.0 {
                return Err(Error::NegativeWeight { index, value });
            }
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > crate::DEFAULT_TOL {
            return Err(Error::WeightSumNotOne(sum));
        }
        Ok(Self { weights })
    }

    /// Rescales nonnegative raw weights to sum to 1.
    pub fn normalized(raw: [f64; CHART_COUNT]) -> Result<Self> {
        for (index, &value) in raw.iter().enumerate() {
            if !value.is_finite() {
                return Err(Error::NonFinite);
            }
            if value < 0.0 {
                return Err(Error::NegativeWeight { index, value });
            }
        }
        let sum: f64 = raw.iter().sum();
        if sum <= 0.0 {
            return Err(Error::WeightSumNotOne(sum));
        }
        Ok(Self {
            weights: raw.map(|w| w / sum),
        })
    }

    /// All probability on the chart at `index` (canonical order).
    pub fn point_mass(index: usize) -> Result<Self> {
        if index >= CHART_COUNT {
            return Err(Error::ChartIndexOutOfRange { index });
        }
        let mut weights = [0.0; CHART_COUNT];
        weights[index] = 1.0;
        Ok(Self { weights })
    }

    pub fn weights(&self) -> &[f64; CHART_COUNT] {
        &self.weights
    }
}

/// Probability that the mixture assigns 1 to `vertex`.
pub fn mixture_marginal(mixture: &MixtureWeights, vertex: VertexId) -> f64 {
    enumerate_charts()
        .iter()
        .zip(mixture.weights())
        .map(|(chart, w)| w * f64::from(chart.value(vertex)))
        .sum()
}

/// Sum of the five marginals. At most 2 for any mixture, because no chart
/// carries more than two 1s.
pub fn klyachko_sum(mixture: &MixtureWeights) -> f64 {
    VertexId::all()
        .into_iter()
        .map(|v| mixture_marginal(mixture, v))
        .sum()
}

/// A wide-angle vertex pair, in canonical order (1,4), (4,2), (2,5), (5,3), (3,1).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PentagonEdge {
    index: usize,
    a: VertexId,
    b: VertexId,
}

impl PentagonEdge {
    pub fn all() -> [PentagonEdge; 5] {
        let edges = pentagon_edges();
        std::array::from_fn(|index| {
            let (a, b) = edges[index];
            PentagonEdge { index, a, b }
        })
    }

    /// Position in the canonical order, 0..5.
    pub fn index(&self) -> usize {
        self.index
    }

    pub fn endpoints(&self) -> (VertexId, VertexId) {
        (self.a, self.b)
    }
}

impl std::fmt::Display for PentagonEdge {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}{}", self.a.label(), self.b.label())
    }
}

/// Probability that both endpoints of `edge` are assigned 1.
pub fn pentagon_edge_joint(mixture: &MixtureWeights, edge: &PentagonEdge) -> f64 {
    let (a, b) = edge.endpoints();
    enumerate_charts()
        .iter()
        .zip(mixture.weights())
        .map(|(chart, w)| w * f64::from(chart.value(a) * chart.value(b)))
        .sum()
}

/// Sum of the five pentagon-edge joint probabilities.
pub fn pentagon_sum(mixture: &MixtureWeights) -> f64 {
    PentagonEdge::all()
        .iter()
        .map(|edge| pentagon_edge_joint(mixture, edge))
        .sum()
}

/// The two class-uniform mixtures whose per-vertex marginals all equal 1/3.
///
/// `m21` spreads weight over the two-1 and one-1 chart classes, `m20` over
/// the two-1 class and the all-zero chart. Both are solved from the 2x2
/// class-weight systems in exact rational arithmetic, then spread uniformly
/// within each class.
#[derive(Debug, Clone)]
pub struct MarginalMixtures {
    pub m21: MixtureWeights,
    pub m20: MixtureWeights,
}

pub fn solve_marginal_mixtures() -> MarginalMixtures {
    // Per unit of class weight spread uniformly inside the class, a vertex
    // picks up 2/5 from the two-1 class (it sits in two of the five supports)
    // and 1/5 from the one-1 class.
    let third = Rat::new(1, 3);
    let one = Rat::new(1, 1);
    let c2_rate = Rat::new(2, 5);
    let c1_rate = Rat::new(1, 5);
    let zero = Rat::new(0, 1);

    let [c2, c1] = solve_two_by_two([[c2_rate, c1_rate], [one, one]], [third, one]);
    let m21 = spread_classes(c2, c1, zero);
    let [c2, c0] = solve_two_by_two([[c2_rate, zero], [one, one]], [third, one]);
    let m20 = spread_classes(c2, zero, c0);
    MarginalMixtures { m21, m20 }
}

fn solve_two_by_two(a: [[Rat; 2]; 2], b: [Rat; 2]) -> [Rat; 2] {
    let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
    assert!(det != Rat::new(0, 1), "singular class system");
    [
        (b[0] * a[1][1] - b[1] * a[0][1]) / det,
        (a[0][0] * b[1] - a[1][0] * b[0]) / det,
    ]
}

fn spread_classes(c2_total: Rat, c1_total: Rat, c0_total: Rat) -> MixtureWeights {
    let fifth = Rat::new(1, 5);
    let weights: Vec<f64> = enumerate_charts()
        .iter()
        .map(|chart| match chart.class() {
            ChartClass::C0 => rat_to_f64(c0_total),
            ChartClass::C1 => rat_to_f64(c1_total * fifth),
            ChartClass::C2 => rat_to_f64(c2_total * fifth),
        })
        .collect();
    MixtureWeights::new(weights.try_into().expect("eleven charts"))
        .expect("class solution is a distribution")
}

/// Range of the pentagon-edge sum over all mixtures whose five marginals
/// equal 1/3, with witnesses attaining each end.
#[derive(Debug, Clone)]
pub struct PentagonSumBounds {
    pub min: f64,
    pub max: f64,
    pub argmin: MixtureWeights,
    pub argmax: MixtureWeights,
}

/// Bounds the pentagon-edge sum by exact vertex enumeration of the feasible
/// polytope (eleven weights, five marginal constraints plus normalization).
/// Witnesses are the lexicographically smallest vertices attaining each end.
pub fn pentagon_sum_bounds() -> PentagonSumBounds {
    let charts = enumerate_charts();
    // Coefficient of each chart in the pentagon sum: how many wide-angle
    // pairs its support covers (1 for two-1 charts, else 0).
    let coeff: Vec<Rat> = charts
        .iter()
        .map(|chart| {
            let c: i64 = pentagon_edges()
                .into_iter()
                .map(|(a, b)| i64::from(chart.value(a) * chart.value(b)))
                .sum();
            Rat::new(c, 1)
        })
        .collect();

    let vertices = polytope_vertices_exact();
    assert!(!vertices.is_empty(), "marginal polytope is nonempty");
    let value =
        |w: &[Rat; CHART_COUNT]| -> Rat { w.iter().zip(&coeff).map(|(wi, ci)| *wi * *ci).sum() };
    let min = vertices.iter().map(value).min().expect("nonempty");
    let max = vertices.iter().map(value).max().expect("nonempty");
    let argmin = vertices
        .iter()
        .find(|w| value(w) == min)
        .expect("attained at a vertex");
    let argmax = vertices
        .iter()
        .find(|w| value(w) == max)
        .expect("attained at a vertex");
    PentagonSumBounds {
        min: rat_to_f64(min),
        max: rat_to_f64(max),
        argmin: exact_to_mixture(argmin),
        argmax: exact_to_mixture(argmax),
    }
}

/// Vertices of the marginal-constrained mixture polytope, converted to f64,
/// in lexicographic order.
pub fn marginal_polytope_vertices() -> Vec<MixtureWeights> {
    polytope_vertices_exact()
        .iter()
        .map(exact_to_mixture)
        .collect()
}

fn exact_to_mixture(w: &[Rat; CHART_COUNT]) -> MixtureWeights {
    MixtureWeights::new(std::array::from_fn(|i| rat_to_f64(w[i])))
        .expect("polytope vertex is a distribution")
}

/// Equality constraints: five vertex marginals pinned to 1/3, weights sum
/// to 1. Rows are exact, so basic solutions can be classified without
/// tolerance.
fn constraint_rows() -> ([[Rat; CHART_COUNT]; 6], [Rat; 6]) {
    let charts = enumerate_charts();
    let mut rows = [[Rat::new(0, 1); CHART_COUNT]; 6];
    let mut rhs = [Rat::new(0, 1); 6];
    for v in VertexId::all() {
        for (j, chart) in charts.iter().enumerate() {
            rows[v.index()][j] = Rat::new(i64::from(chart.value(v)), 1);
        }
        rhs[v.index()] = Rat::new(1, 3);
    }
    rows[5] = [Rat::new(1, 1); CHART_COUNT];
    rhs[5] = Rat::new(1, 1);
    (rows, rhs)
}

/// Basic feasible solutions of the equality system: every choice of six
/// basic columns whose square system is nonsingular and solves to a
/// nonnegative point. Deduplicated and sorted lexicographically.
fn polytope_vertices_exact() -> Vec<[Rat; CHART_COUNT]> {
    let (rows, rhs) = constraint_rows();
    let mut vertices: Vec<[Rat; CHART_COUNT]> = Vec::new();
    let mut cols = [0usize; 6];
    enumerate_subsets(CHART_COUNT, &mut cols, 0, 0, &mut |cols| {
        let mut square = [[Rat::new(0, 1); 6]; 6];
        for r in 0..6 {
            for (c, &col) in cols.iter().enumerate() {
                square[r][c] = rows[r][col];
            }
        }
        if let Some(solution) = solve_square(square, rhs) {
            if solution.iter().all(|x| *x >= Rat::new(0, 1)) {
                let mut full = [Rat::new(0, 1); CHART_COUNT];
                for (c, &col) in cols.iter().enumerate() {
                    full[col] = solution[c];
                }
                vertices.push(full);
            }
        }
    });
    vertices.sort();
    vertices.dedup();
    vertices
}

fn enumerate_subsets(
    n: usize,
    cols: &mut [usize; 6],
    depth: usize,
    start: usize,
    visit: &mut impl FnMut(&[usize; 6]),
) {
    if depth == 6 {
        visit(cols);
        return;
    }
    for c in start..n {
        cols[depth] = c;
        enumerate_subsets(n, cols, depth + 1, c + 1, visit);
    }
}

/// Gaussian elimination with exact pivoting; `None` when singular.
fn solve_square(mut a: [[Rat; 6]; 6], mut b: [Rat; 6]) -> Option<[Rat; 6]> {
    let zero = Rat::new(0, 1);
    for col in 0..6 {
        let pivot_row = (col..6).find(|&r| a[r][col] != zero)?;
        a.swap(col, pivot_row);
        b.swap(col, pivot_row);
        let pivot = a[col][col];
        for r in 0..6 {
            if r == col || a[r][col] == zero {
                continue;
            }
            let factor = a[r][col] / pivot;
            let pivot_row = a[col];
            for (entry, &p) in a[r].iter_mut().zip(pivot_row.iter()).skip(col) {
                *entry -= factor * p;
            }
            b[r] -= factor * b[col];
        }
    }
    let mut x = [zero; 6];
    for i in 0..6 {
        x[i] = b[i] / a[i][i];
    }
    Some(x)
}

/// Per-context chart distributions: the bias loophole lets the hidden
/// variable distribution depend on which pentagram edge is measured.
#[derive(Debug, Clone)]
pub struct BiasSpec {
    per_context: [MixtureWeights; 5],
}

impl BiasSpec {
    /// One chart distribution per context, in pentagram-edge order
    /// (1,2), (2,3), .., (5,1).
    pub fn new(per_context: [MixtureWeights; 5]) -> Self {
        Self { per_context }
    }

    /// The unbiased special case: the same mixture in every context.
    pub fn context_free(mixture: MixtureWeights) -> Self {
        Self {
            per_context: std::array::from_fn(|_| mixture.clone()),
        }
    }

    /// Splits probability `p_group` onto each of the two endpoint groups of
    /// the measured context (the three charts assigning 1 to that endpoint),
    /// uniformly within the group; the remaining `1 - 2 p_group` spreads
    /// uniformly over the five charts assigning 0 to both endpoints.
    pub fn endpoint_weighted(p_group: f64) -> Result<Self> {
        if !p_group.is_finite() || p_group < 0.0 {
            return Err(Error::BiasOutOfRange(p_group));
        }
        let rest_total = 1.0 - 2.0 * p_group;
        if rest_total < -crate::DEFAULT_TOL {
            return Err(Error::BiasOutOfRange(p_group));
        }
        let rest_total = rest_total.max(0.0);
        let charts = enumerate_charts();
        let per_context = pentagram_edges().map(|(a, b)| {
            let mut weights = [0.0; CHART_COUNT];
            for (j, chart) in charts.iter().enumerate() {
                weights[j] = if chart.value(a) == 1 || chart.value(b) == 1 {
                    p_group / 3.0
                } else {
                    rest_total / 5.0
                };
            }
            MixtureWeights::new(weights).expect("group split is a distribution")
        });
        Ok(Self { per_context })
    }

    /// Even split: each endpoint of the measured context comes up 1 with
    /// probability 1/2, pushing the Klyachko sum to 5/2.
    pub fn half_half() -> Self {
        Self::endpoint_weighted(0.5).expect("0.5 leaves a zero remainder")
    }

    /// Matches the single-particle quantum marginals: each endpoint of the
    /// measured context comes up 1 with probability 1/sqrt(5).
    pub fn quantum_matching() -> Self {
        Self::endpoint_weighted(1.0 / 5f64.sqrt()).expect("remainder is positive")
    }

    /// Chart distribution used when context `context` (pentagram-edge order)
    /// is measured.
    pub fn context_weights(&self, context: usize) -> &MixtureWeights {
        &self.per_context[context]
    }
}

/// Per-vertex probability of outcome 1 under a biased model, averaging the
/// vertex's two contexts (each context is selected with probability 1/2
/// given the vertex).
pub fn biased_marginals(bias: &BiasSpec) -> [f64; 5] {
    let contexts = pentagram_edges();
    std::array::from_fn(|i| {
        let v = VertexId::from_index(i).expect("index in range");
        let mut total = 0.0;
        let mut hits = 0;
        for (ctx, (a, b)) in contexts.iter().enumerate() {
            if *a == v || *b == v {
                total += mixture_marginal(bias.context_weights(ctx), v);
                hits += 1;
            }
        }
        debug_assert_eq!(hits, 2);
        total / f64::from(hits)
    })
}

/// Sum of the five biased marginals.
pub fn biased_klyachko_sum(bias: &BiasSpec) -> f64 {
    biased_marginals(bias).iter().sum()
}
