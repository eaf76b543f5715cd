//! Seeded Monte Carlo simulation of the two-particle experiment.
//!
//! Each trial draws a measurement vertex for each side according to a
//! pairing scheme, samples outcomes from the chosen model (quantum state,
//! chart mixture, or context-biased charts), and tallies marginals,
//! same-vertex agreement, context double-fires, and pentagon-edge joint
//! frequencies. Trials use one counter-addressed ChaCha stream per trial
//! index, so results are byte-identical for a given seed no matter how the
//! work is scheduled across threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::charts::{enumerate_charts, Chart, CHART_COUNT};
use crate::geometry::{build_pentagram, edge_kind, pentagon_edges, EdgeKind, VertexId};
use crate::lhv::{
    biased_klyachko_sum, biased_marginals, mixture_marginal, pentagon_edge_joint, pentagon_sum,
    BiasSpec, MixtureWeights, PentagonEdge,
};
use crate::quantum::{canonical_entangled_state, joint_distribution, pentagon_sum_quantum};
use crate::{Error, Result};

/// Outcome source for a simulation run.
#[derive(Debug, Clone)]
pub enum ModelSpec {
    /// Maximally entangled pair measured per the Born rule.
    Quantum,
    /// Both sides read the same chart drawn from a fixed mixture.
    Lhv(MixtureWeights),
    /// Single particle; the chart distribution depends on the measured
    /// context.
    Biased(Box<BiasSpec>),
}

impl ModelSpec {
    pub fn is_single_particle(&self) -> bool {
        matches!(self, ModelSpec::Biased(_))
    }
}

/// How the second vertex is chosen relative to the first.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PairingScheme {
    /// Same, pentagram, and pentagon cases each with probability 1/3.
    Mixed,
    /// Both sides measure the same vertex.
    Same,
    /// Adjacent labels (a context edge).
    Pentagram,
    /// Labels two apart (a wide-angle edge).
    Pentagon,
}

/// Outcome of one trial. `b_vertex`/`b_outcome` are `None` for
/// single-particle models.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrialRecord {
    pub a_vertex: VertexId,
    pub b_vertex: Option<VertexId>,
    pub a_outcome: u8,
    pub b_outcome: Option<u8>,
}

/// Estimated frequency of a binary event over a subsample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FrequencyStat {
    pub count: u64,
    pub hits: u64,
    pub frequency: f64,
    pub std_error: f64,
}

impl FrequencyStat {
    fn from_counts(hits: u64, count: u64) -> Option<Self> {
        if count == 0 {
            return None;
        }
        let frequency = hits as f64 / count as f64;
        let std_error = (frequency * (1.0 - frequency) / count as f64).sqrt();
        Some(Self {
            count,
            hits,
            frequency,
            std_error,
        })
    }
}

/// Sum of frequencies over disjoint subsamples; the error adds in
/// quadrature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SumStat {
    pub value: f64,
    pub std_error: f64,
}

fn sum_stat<'a, I: Iterator<Item = &'a FrequencyStat>>(parts: I) -> SumStat {
    let mut value = 0.0;
    let mut var = 0.0;
    for p in parts {
        value += p.frequency;
        var += p.std_error * p.std_error;
    }
    SumStat {
        value,
        std_error: var.sqrt(),
    }
}

/// Tallied results of a run. Per-vertex arrays are indexed by label minus
/// one; per-edge arrays follow the canonical pentagon-edge order. Entries
/// are `None` when no trial landed in the subsample.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentStats {
    pub trials: u64,
    pub marginal_a: [Option<FrequencyStat>; 5],
    pub marginal_b: [Option<FrequencyStat>; 5],
    /// Sum of the five first-side marginals.
    pub klyachko_sum: Option<SumStat>,
    /// Fraction of same-vertex trials whose outcomes agree.
    pub same_agreement: Option<FrequencyStat>,
    /// Fraction of context-edge trials where both sides fired.
    pub pentagram_double_fire: Option<FrequencyStat>,
    /// Both-fired frequency per pentagon edge.
    pub pentagon_joint: [Option<FrequencyStat>; 5],
    pub pentagon_sum: Option<SumStat>,
}

#[derive(Clone)]
struct Tally {
    trials: u64,
    a_count: [u64; 5],
    a_ones: [u64; 5],
    b_count: [u64; 5],
    b_ones: [u64; 5],
    same_count: u64,
    same_agree: u64,
    gram_count: u64,
    gram_both: u64,
    gon_count: [u64; 5],
    gon_both: [u64; 5],
}

impl Tally {
    fn zero() -> Self {
        Self {
            trials: 0,
            a_count: [0; 5],
            a_ones: [0; 5],
            b_count: [0; 5],
            b_ones: [0; 5],
            same_count: 0,
            same_agree: 0,
            gram_count: 0,
            gram_both: 0,
            gon_count: [0; 5],
            gon_both: [0; 5],
        }
    }

    fn record(&mut self, trial: &TrialRecord) {
        self.trials += 1;
        let a = trial.a_vertex.index();
        self.a_count[a] += 1;
        self.a_ones[a] += u64::from(trial.a_outcome);
        let (Some(b_vertex), Some(b_outcome)) = (trial.b_vertex, trial.b_outcome) else {
            return;
        };
        let b = b_vertex.index();
        self.b_count[b] += 1;
        self.b_ones[b] += u64::from(b_outcome);
        let both = u64::from(trial.a_outcome == 1 && b_outcome == 1);
        match edge_kind(trial.a_vertex, b_vertex) {
            EdgeKind::Same => {
                self.same_count += 1;
                self.same_agree += u64::from(trial.a_outcome == b_outcome);
            }
            EdgeKind::Pentagram => {
                self.gram_count += 1;
                self.gram_both += both;
            }
            EdgeKind::Pentagon => {
                let e = pentagon_index(trial.a_vertex, b_vertex);
                self.gon_count[e] += 1;
                self.gon_both[e] += both;
            }
        }
    }

    fn merge(mut self, other: Self) -> Self {
        self.trials += other.trials;
        for i in 0..5 {
            self.a_count[i] += other.a_count[i];
            self.a_ones[i] += other.a_ones[i];
            self.b_count[i] += other.b_count[i];
            self.b_ones[i] += other.b_ones[i];
            self.gon_count[i] += other.gon_count[i];
            self.gon_both[i] += other.gon_both[i];
        }
        self.same_count += other.same_count;
        self.same_agree += other.same_agree;
        self.gram_count += other.gram_count;
        self.gram_both += other.gram_both;
        self
    }

    fn into_stats(self) -> ExperimentStats {
        let marginal_a =
            std::array::from_fn(|i| FrequencyStat::from_counts(self.a_ones[i], self.a_count[i]));
        let marginal_b =
            std::array::from_fn(|i| FrequencyStat::from_counts(self.b_ones[i], self.b_count[i]));
        let pentagon_joint: [Option<FrequencyStat>; 5] = std::array::from_fn(|i| {
            FrequencyStat::from_counts(self.gon_both[i], self.gon_count[i])
        });
        let collect_sum = |parts: &[Option<FrequencyStat>; 5]| {
            parts
                .iter()
                .map(|p| p.as_ref())
                .collect::<Option<Vec<_>>>()
                .map(|full| sum_stat(full.into_iter()))
        };
        ExperimentStats {
            trials: self.trials,
            klyachko_sum: collect_sum(&marginal_a),
            pentagon_sum: collect_sum(&pentagon_joint),
            marginal_a,
            marginal_b,
            same_agreement: FrequencyStat::from_counts(self.same_agree, self.same_count),
            pentagram_double_fire: FrequencyStat::from_counts(self.gram_both, self.gram_count),
            pentagon_joint,
        }
    }
}

/// Canonical pentagon-edge position of an unordered wide-angle pair.
fn pentagon_index(a: VertexId, b: VertexId) -> usize {
    pentagon_edges()
        .into_iter()
        .position(|(x, y)| (x == a && y == b) || (x == b && y == a))
        .expect("pair is a pentagon edge")
}

const OUTCOMES: [(u8, u8); 4] = [(1, 1), (1, 0), (0, 1), (0, 0)];

/// Cumulative outcome table for one measured pair. Probabilities below the
/// exactness tolerance are snapped to zero so algebraically impossible
/// outcomes never fire.
#[derive(Clone, Copy)]
struct OutcomeTable {
    cum: [f64; 4],
}

impl OutcomeTable {
    fn from_probs(mut probs: [f64; 4]) -> Self {
        for p in probs.iter_mut() {
            if *p < crate::DEFAULT_TOL {
                *p = 0.0;
            }
        }
        let total: f64 = probs.iter().sum();
        let mut cum = [0.0; 4];
        let mut acc = 0.0;
        for (c, p) in cum.iter_mut().zip(probs.iter()) {
            acc += p / total;
            *c = acc;
        }
        cum[3] = 1.0;
        Self { cum }
    }

    fn sample(&self, u: f64) -> (u8, u8) {
        OUTCOMES[pick(&self.cum, u)]
    }
}

fn pick(cdf: &[f64], u: f64) -> usize {
    cdf.iter().position(|&c| u < c).unwrap_or(cdf.len() - 1)
}

fn cumulative(weights: &[f64; CHART_COUNT]) -> [f64; CHART_COUNT] {
    let mut cum = [0.0; CHART_COUNT];
    let mut acc = 0.0;
    for (c, w) in cum.iter_mut().zip(weights.iter()) {
        acc += w;
        *c = acc;
    }
    cum[CHART_COUNT - 1] = 1.0;
    cum
}

enum Prepared {
    Quantum {
        tables: Box<[[OutcomeTable; 5]; 5]>,
    },
    Mixture {
        cdf: [f64; CHART_COUNT],
        charts: Vec<Chart>,
    },
    Biased {
        cdfs: Box<[[f64; CHART_COUNT]; 5]>,
        charts: Vec<Chart>,
    },
}

impl Prepared {
    fn build(model: &ModelSpec) -> Self {
        match model {
            ModelSpec::Quantum => {
                let frame = build_pentagram();
                let state = canonical_entangled_state();
                let tables = std::array::from_fn(|a| {
                    std::array::from_fn(|b| {
                        let a = VertexId::from_index(a).expect("index in range");
                        let b = VertexId::from_index(b).expect("index in range");
                        let j = joint_distribution(&state, &frame, a, b);
                        OutcomeTable::from_probs([j.p11, j.p10, j.p01, j.p00])
                    })
                });
                Prepared::Quantum {
                    tables: Box::new(tables),
                }
            }
            ModelSpec::Lhv(mixture) => Prepared::Mixture {
                cdf: cumulative(mixture.weights()),
                charts: enumerate_charts(),
            },
            ModelSpec::Biased(bias) => Prepared::Biased {
                cdfs: Box::new(std::array::from_fn(|ctx| {
                    cumulative(bias.context_weights(ctx).weights())
                })),
                charts: enumerate_charts(),
            },
        }
    }

    /// Runs one trial. The RNG is re-seeded per trial with the trial index
    /// as the stream, so sampling commutes with scheduling.
    fn sample(&self, pairing: PairingScheme, seed: u64, trial: u64) -> TrialRecord {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(trial);
        let a = VertexId::from_index(rng.gen_range(0..5usize)).expect("index in range");
        match self {
            Prepared::Biased { cdfs, charts } => {
                // A vertex sits in two contexts: the edge it starts and the
                // edge it ends. Pick one uniformly, then draw that context's
                // chart.
                let ctx = if rng.gen::<bool>() {
                    a.index()
                } else {
                    a.step(-1).index()
                };
                let chart = &charts[pick(&cdfs[ctx], rng.gen::<f64>())];
                TrialRecord {
                    a_vertex: a,
                    b_vertex: None,
                    a_outcome: chart.value(a),
                    b_outcome: None,
                }
            }
            Prepared::Quantum { tables } => {
                let b = pair_vertex(a, pairing, &mut rng);
                let (a_outcome, b_outcome) = tables[a.index()][b.index()].sample(rng.gen::<f64>());
                TrialRecord {
                    a_vertex: a,
                    b_vertex: Some(b),
                    a_outcome,
                    b_outcome: Some(b_outcome),
                }
            }
            Prepared::Mixture { cdf, charts } => {
                let b = pair_vertex(a, pairing, &mut rng);
                let chart = &charts[pick(cdf, rng.gen::<f64>())];
                TrialRecord {
                    a_vertex: a,
                    b_vertex: Some(b),
                    a_outcome: chart.value(a),
                    b_outcome: Some(chart.value(b)),
                }
            }
        }
    }
}

fn pair_vertex(a: VertexId, pairing: PairingScheme, rng: &mut ChaCha8Rng) -> VertexId {
    let case = match pairing {
        PairingScheme::Same => 0,
        PairingScheme::Pentagram => 1,
        PairingScheme::Pentagon => 2,
        PairingScheme::Mixed => rng.gen_range(0..3u8),
    };
    match case {
        0 => a,
        1 => a.step(if rng.gen::<bool>() { 1 } else { -1 }),
        _ => a.step(if rng.gen::<bool>() { 2 } else { -2 }),
    }
}

/// Runs `trials` seeded trials of `model` under `pairing` and tallies the
/// observable frequencies. Deterministic in `(model, pairing, trials, seed)`
/// and independent of thread count.
pub fn run_trials(
    model: &ModelSpec,
    pairing: PairingScheme,
    trials: u64,
    seed: u64,
) -> Result<ExperimentStats> {
    if trials == 0 {
        return Err(Error::ZeroTrials);
    }
    let prepared = Prepared::build(model);
    let tally = (0..trials)
        .into_par_iter()
        .fold(Tally::zero, |mut tally, trial| {
            tally.record(&prepared.sample(pairing, seed, trial));
            tally
        })
        .reduce(Tally::zero, Tally::merge);
    Ok(tally.into_stats())
}

/// Analytic targets for the tallied quantities. `None` marks quantities the
/// run cannot estimate (wrong pairing or single-particle model).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Predictions {
    pub marginal: [f64; 5],
    pub marginal_b: Option<[f64; 5]>,
    pub klyachko_sum: f64,
    pub same_agreement: Option<f64>,
    pub pentagram_double_fire: Option<f64>,
    pub pentagon_joint: Option<[f64; 5]>,
    pub pentagon_sum: Option<f64>,
}

impl Predictions {
    /// Targets computed from the analytic modules for this model, masked to
    /// the quantities the pairing scheme actually exercises.
    pub fn for_model(model: &ModelSpec, pairing: PairingScheme) -> Predictions {
        let mut p = match model {
            ModelSpec::Quantum => {
                let frame = build_pentagram();
                let state = canonical_entangled_state();
                let marginal: [f64; 5] = std::array::from_fn(|i| {
                    let v = VertexId::from_index(i).expect("index in range");
                    joint_distribution(&state, &frame, v, v).a_marginal()
                });
                let agreement = VertexId::all()
                    .into_iter()
                    .map(|v| {
                        let j = joint_distribution(&state, &frame, v, v);
                        j.p11 + j.p00
                    })
                    .sum::<f64>()
                    / 5.0;
                let double_fire = crate::geometry::pentagram_edges()
                    .into_iter()
                    .map(|(a, b)| joint_distribution(&state, &frame, a, b).p11)
                    .sum::<f64>()
                    / 5.0;
                let pentagon_joint: [f64; 5] = std::array::from_fn(|i| {
                    let (a, b) = pentagon_edges()[i];
                    joint_distribution(&state, &frame, a, b).p11
                });
                Predictions {
                    marginal,
                    marginal_b: Some(marginal),
                    klyachko_sum: marginal.iter().sum(),
                    same_agreement: Some(agreement),
                    pentagram_double_fire: Some(double_fire),
                    pentagon_joint: Some(pentagon_joint),
                    pentagon_sum: Some(pentagon_sum_quantum(&state, &frame)),
                }
            }
            ModelSpec::Lhv(mixture) => {
                let marginal: [f64; 5] = std::array::from_fn(|i| {
                    mixture_marginal(mixture, VertexId::from_index(i).expect("index in range"))
                });
                let edges = PentagonEdge::all();
                let pentagon_joint: [f64; 5] =
                    std::array::from_fn(|i| pentagon_edge_joint(mixture, &edges[i]));
                Predictions {
                    marginal,
                    marginal_b: Some(marginal),
                    klyachko_sum: marginal.iter().sum(),
                    same_agreement: Some(1.0),
                    pentagram_double_fire: Some(0.0),
                    pentagon_joint: Some(pentagon_joint),
                    pentagon_sum: Some(pentagon_sum(mixture)),
                }
            }
            ModelSpec::Biased(bias) => Predictions {
                marginal: biased_marginals(bias),
                marginal_b: None,
                klyachko_sum: biased_klyachko_sum(bias),
                same_agreement: None,
                pentagram_double_fire: None,
                pentagon_joint: None,
                pentagon_sum: None,
            },
        };
        if !model.is_single_particle() {
            match pairing {
                PairingScheme::Mixed => {}
                PairingScheme::Same => {
                    p.pentagram_double_fire = None;
                    p.pentagon_joint = None;
                    p.pentagon_sum = None;
                }
                PairingScheme::Pentagram => {
                    p.same_agreement = None;
                    p.pentagon_joint = None;
                    p.pentagon_sum = None;
                }
                PairingScheme::Pentagon => {
                    p.same_agreement = None;
                    p.pentagram_double_fire = None;
                }
            }
        }
        p
    }
}

/// One estimate-versus-target comparison. The pass tolerance is
/// `sigma * std_error`, floored so that exact (zero-variance) estimates
/// still compare cleanly.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuantityCheck {
    pub name: String,
    pub estimate: f64,
    pub std_error: f64,
    pub target: f64,
    pub abs_error: f64,
    pub tolerance: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum VerdictStatus {
    Below,
    Within,
    Above,
}

impl std::fmt::Display for VerdictStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            VerdictStatus::Below => "below",
            VerdictStatus::Within => "within",
            VerdictStatus::Above => "above",
        };
        f.write_str(s)
    }
}

/// Position of an estimated quantity relative to a classical bound or
/// window, judged at `sigma` standard errors.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InequalityVerdict {
    pub name: String,
    pub estimate: f64,
    pub std_error: f64,
    pub lower: Option<f64>,
    pub upper: Option<f64>,
    pub status: VerdictStatus,
}

impl InequalityVerdict {
    fn judge(
        name: &str,
        stat: SumStat,
        lower: Option<f64>,
        upper: Option<f64>,
        sigma: f64,
    ) -> Self {
        let slack = sigma * stat.std_error;
        let status = if upper.is_some_and(|u| stat.value > u + slack) {
            VerdictStatus::Above
        } else if lower.is_some_and(|l| stat.value < l - slack) {
            VerdictStatus::Below
        } else {
            VerdictStatus::Within
        };
        Self {
            name: name.to_string(),
            estimate: stat.value,
            std_error: stat.std_error,
            lower,
            upper,
            status,
        }
    }
}

/// Outcome of checking a run against its targets.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Evaluation {
    pub checks: Vec<QuantityCheck>,
    /// Klyachko sum against the noncontextual ceiling 2.
    pub klyachko_verdict: Option<InequalityVerdict>,
    /// Pentagon-edge sum against the noncontextual window [2/3, 5/6].
    pub pentagon_verdict: Option<InequalityVerdict>,
    pub all_pass: bool,
}

/// Tolerance floor for zero-variance estimates (model predicts the event
/// with probability exactly 0 or 1).
const CHECK_FLOOR: f64 = 1e-9;

/// Compares every predicted quantity against its tallied estimate at
/// `sigma` standard errors and judges the two inequality verdicts.
///
/// Fails with `EmptySubsample` when a predicted quantity has no trials to
/// estimate it from.
pub fn evaluate(
    stats: &ExperimentStats,
    predictions: &Predictions,
    sigma: f64,
) -> Result<Evaluation> {
    if !(sigma.is_finite() && sigma > 0.0) {
        return Err(Error::BadTolerance(sigma));
    }
    if stats.trials == 0 {
        return Err(Error::ZeroTrials);
    }

    let mut checks = Vec::new();
    let mut check_freq = |name: String, stat: &Option<FrequencyStat>, target: f64| -> Result<()> {
        let stat = stat
            .as_ref()
            .ok_or_else(|| Error::EmptySubsample(name.clone()))?;
        checks.push(make_check(
            name,
            stat.frequency,
            stat.std_error,
            target,
            sigma,
        ));
        Ok(())
    };

    for (i, target) in predictions.marginal.iter().enumerate() {
        check_freq(
            format!("marginal_a_v{}", i + 1),
            &stats.marginal_a[i],
            *target,
        )?;
    }
    if let Some(targets) = &predictions.marginal_b {
        for (i, target) in targets.iter().enumerate() {
            check_freq(
                format!("marginal_b_v{}", i + 1),
                &stats.marginal_b[i],
                *target,
            )?;
        }
    }
    if let Some(target) = predictions.same_agreement {
        check_freq("same_agreement".to_string(), &stats.same_agreement, target)?;
    }
    if let Some(target) = predictions.pentagram_double_fire {
        check_freq(
            "pentagram_double_fire".to_string(),
            &stats.pentagram_double_fire,
            target,
        )?;
    }
    if let Some(targets) = &predictions.pentagon_joint {
        let edges = PentagonEdge::all();
        for (i, target) in targets.iter().enumerate() {
            check_freq(
                format!("pentagon_joint_{}", edges[i]),
                &stats.pentagon_joint[i],
                *target,
            )?;
        }
    }

    let klyachko = stats
        .klyachko_sum
        .ok_or_else(|| Error::EmptySubsample("klyachko_sum".to_string()))?;
    checks.push(make_check(
        "klyachko_sum".to_string(),
        klyachko.value,
        klyachko.std_error,
        predictions.klyachko_sum,
        sigma,
    ));
    if let Some(target) = predictions.pentagon_sum {
        let stat = stats
            .pentagon_sum
            .ok_or_else(|| Error::EmptySubsample("pentagon_sum".to_string()))?;
        checks.push(make_check(
            "pentagon_sum".to_string(),
            stat.value,
            stat.std_error,
            target,
            sigma,
        ));
    }

    let klyachko_verdict = Some(InequalityVerdict::judge(
        "klyachko_sum",
        klyachko,
        None,
        Some(2.0),
        sigma,
    ));
    let pentagon_verdict = stats.pentagon_sum.map(|stat| {
        InequalityVerdict::judge(
            "pentagon_sum",
            stat,
            Some(2.0 / 3.0),
            Some(5.0 / 6.0),
            sigma,
        )
    });

    let all_pass = checks.iter().all(|c| c.pass);
    Ok(Evaluation {
        checks,
        klyachko_verdict,
        pentagon_verdict,
        all_pass,
    })
}

fn make_check(
    name: String,
    estimate: f64,
    std_error: f64,
    target: f64,
    sigma: f64,
) -> QuantityCheck {
    let tolerance = (sigma * std_error).max(CHECK_FLOOR);
    let abs_error = (estimate - target).abs();
    QuantityCheck {
        name,
        estimate,
        std_error,
        target,
        abs_error,
        tolerance,
        pass: abs_error <= tolerance,
    }
}
