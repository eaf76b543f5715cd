//! Quantum predictions for single qutrits and the entangled pair.
//!
//! States and measurement directions are real 3-vectors; the probability of
//! outcome 1 when measuring direction v on state psi is the squared overlap
//! (v . psi)^2. The two-particle state is the maximally entangled one built
//! from any orthonormal basis; its amplitude matrix is the identity over
//! sqrt(3) regardless of the basis, which makes the basis-independence of
//! the construction directly testable.

use crate::geometry::{pentagon_edges, PentagramFrame, UnitVector3, VertexId};
use crate::{Error, Result};

/// Real qutrit state vector with unit norm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QutritState {
    amplitudes: [f64; 3],
}

impl QutritState {
    pub fn new(amplitudes: [f64; 3]) -> Result<Self> {
        if !amplitudes.iter().all(|a| a.is_finite()) {
            return Err(Error::NonFinite);
        }
        let norm = amplitudes.iter().map(|a| a * a).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > crate::DEFAULT_TOL {
            return Err(Error::NotUnit(norm));
        }
        Ok(Self { amplitudes })
    }

    /// State pointing along a measurement direction.
    pub fn from_direction(direction: UnitVector3) -> Self {
        Self {
            amplitudes: direction.components(),
        }
    }

    pub fn amplitudes(&self) -> [f64; 3] {
        self.amplitudes
    }
}

/// Probability of outcome 1 when measuring `direction` on `state`.
pub fn born_probability(state: &QutritState, direction: UnitVector3) -> f64 {
    let overlap: f64 = state
        .amplitudes
        .iter()
        .zip(direction.components())
        .map(|(a, d)| a * d)
        .sum();
    overlap * overlap
}

/// Sum of the five single-particle outcome-1 probabilities.
pub fn single_particle_klyachko_sum(frame: &PentagramFrame, state: &QutritState) -> f64 {
    VertexId::all()
        .into_iter()
        .map(|v| born_probability(state, frame.vertex(v)))
        .sum()
}

/// Maximally entangled two-qutrit state, stored as the 3x3 real amplitude
/// matrix `amplitudes[a][b]` over the computational product basis.
#[derive(Debug, Clone, PartialEq)]
pub struct EntangledState {
    amplitudes: [[f64; 3]; 3],
}

impl EntangledState {
    pub fn amplitudes(&self) -> &[[f64; 3]; 3] {
        &self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes
            .iter()
            .flatten()
            .map(|a| a * a)
            .sum::<f64>()
            .sqrt()
    }
}

/// Builds the equal-weight entangled state summing `basis[i] x basis[i]`
/// over an orthonormal basis. The amplitude matrix is basis independent.
pub fn make_entangled_state(basis: &[UnitVector3; 3]) -> Result<EntangledState> {
    let mut worst = 0.0f64;
    for i in 0..3 {
        for j in 0..3 {
            let expected = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((basis[i].dot(basis[j]) - expected).abs());
        }
    }
    if worst > crate::DEFAULT_TOL {
        return Err(Error::NonOrthonormalBasis(worst));
    }
    let scale = 1.0 / 3f64.sqrt();
    let mut amplitudes = [[0.0; 3]; 3];
    for vec in basis {
        let c = vec.components();
        for (a, row) in amplitudes.iter_mut().enumerate() {
            for (b, amp) in row.iter_mut().enumerate() {
                *amp += scale * c[a] * c[b];
            }
        }
    }
    Ok(EntangledState { amplitudes })
}

/// The entangled state over the computational basis.
pub fn canonical_entangled_state() -> EntangledState {
    let e = |x: f64, y: f64, z: f64| {
        UnitVector3::new(crate::geometry::Vector3::new(x, y, z)).expect("unit basis vector")
    };
    make_entangled_state(&[e(1.0, 0.0, 0.0), e(0.0, 1.0, 0.0), e(0.0, 0.0, 1.0)])
        .expect("computational basis is orthonormal")
}

/// Two-party outcome distribution for one pair of measured directions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JointDistribution {
    pub p11: f64,
    pub p10: f64,
    pub p01: f64,
    pub p00: f64,
}

impl JointDistribution {
    pub fn a_marginal(&self) -> f64 {
        self.p11 + self.p10
    }

    pub fn b_marginal(&self) -> f64 {
        self.p11 + self.p01
    }

    pub fn total(&self) -> f64 {
        self.p11 + self.p10 + self.p01 + self.p00
    }

    /// Expectation of the product of the +/-1 relabelled outcomes.
    pub fn correlator(&self) -> f64 {
        self.p11 - self.p10 - self.p01 + self.p00
    }
}

/// Born probabilities for measuring vertex `a` on the first particle and
/// vertex `b` on the second, computed from the projector algebra
/// p11 = <M, Pa M Pb> on the amplitude matrix M.
pub fn joint_distribution(
    state: &EntangledState,
    frame: &PentagramFrame,
    a: VertexId,
    b: VertexId,
) -> JointDistribution {
    let pa = outer(frame.vertex(a).components());
    let pb = outer(frame.vertex(b).components());
    let m = state.amplitudes;

    let p11 = frobenius(&m, &mat_mul(&mat_mul(&pa, &m), &pb));
    let a_marginal = frobenius(&m, &mat_mul(&pa, &m));
    let b_marginal = frobenius(&m, &mat_mul(&m, &pb));
    let total = frobenius(&m, &m);

    let clamp = |p: f64| {
        debug_assert!(p > -1e-9, "probability fell below zero: {p}");
        p.max(0.0)
    };
    JointDistribution {
        p11: clamp(p11),
        p10: clamp(a_marginal - p11),
        p01: clamp(b_marginal - p11),
        p00: clamp(total - a_marginal - b_marginal + p11),
    }
}

fn outer(u: [f64; 3]) -> [[f64; 3]; 3] {
    let mut out = [[0.0; 3]; 3];
    for (i, row) in out.iter_mut().enumerate() {
        for (j, entry) in row.iter_mut().enumerate() {
            *entry = u[i] * u[j];
        }
    }
    out
}

fn mat_mul(a: &[[f64; 3]; 3], b: &[[f64; 3]; 3]) -> [[f64; 3]; 3] {
    let mut out = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] = (0..3).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    out
}

fn frobenius(a: &[[f64; 3]; 3], b: &[[f64; 3]; 3]) -> f64 {
    a.iter()
        .flatten()
        .zip(b.iter().flatten())
        .map(|(x, y)| x * y)
        .sum()
}

/// Sum of the five both-1 probabilities over the pentagon edges.
pub fn pentagon_sum_quantum(state: &EntangledState, frame: &PentagramFrame) -> f64 {
    pentagon_edges()
        .into_iter()
        .map(|(a, b)| joint_distribution(state, frame, a, b).p11)
        .sum()
}

/// Correlator E(a,b) of the +/-1 relabelled outcomes for one vertex pair.
pub fn pair_correlator(
    state: &EntangledState,
    frame: &PentagramFrame,
    a: VertexId,
    b: VertexId,
) -> f64 {
    joint_distribution(state, frame, a, b).correlator()
}

/// Best CHSH combination available from the five directions.
#[derive(Debug, Clone, Copy)]
pub struct ChshMax {
    /// Largest |E(a1,b1) + E(a1,b2) + E(a2,b1) - E(a2,b2)|.
    pub value: f64,
    /// First quadruple (a1, a2, b1, b2) attaining it, in scan order.
    pub vertices: (VertexId, VertexId, VertexId, VertexId),
}

/// Scans all 625 vertex quadruples. Repeated vertices are allowed; the
/// classical bound 2 is reached only through them.
pub fn max_chsh(state: &EntangledState, frame: &PentagramFrame) -> ChshMax {
    let mut table = [[0.0f64; 5]; 5];
    for a in VertexId::all() {
        for b in VertexId::all() {
            table[a.index()][b.index()] = pair_correlator(state, frame, a, b);
        }
    }
    let mut best: Option<ChshMax> = None;
    for a1 in VertexId::all() {
        for a2 in VertexId::all() {
            for b1 in VertexId::all() {
                for b2 in VertexId::all() {
                    let s = table[a1.index()][b1.index()]
                        + table[a1.index()][b2.index()]
                        + table[a2.index()][b1.index()]
                        - table[a2.index()][b2.index()];
                    let value = s.abs();
                    if best.as_ref().is_none_or(|b| value > b.value) {
                        best = Some(ChshMax {
                            value,
                            vertices: (a1, a2, b1, b2),
                        });
                    }
                }
            }
        }
    }
    best.expect("nonempty scan")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_pentagram, pentagram_edges, EdgeKind};

    const TOL: f64 = 1e-12;

    fn v(label: u8) -> VertexId {
        VertexId::new(label).unwrap()
    }

    #[test]
    fn born_probability_basics() {
        let frame = build_pentagram();
        let axis_state = QutritState::from_direction(frame.axis());
        let v1 = frame.vertex(v(1));
        assert!((born_probability(&axis_state, v1) - 1.0 / 5f64.sqrt()).abs() < TOL);
        let along = QutritState::from_direction(v1);
        assert!((born_probability(&along, v1) - 1.0).abs() < TOL);
        let v2 = frame.vertex(v(2));
        assert!(born_probability(&along, v2).abs() < TOL);
    }

    #[test]
    fn single_particle_sum_is_root_five() {
        let frame = build_pentagram();
        let state = QutritState::from_direction(frame.axis());
        let sum = single_particle_klyachko_sum(&frame, &state);
        assert!((sum - 5f64.sqrt()).abs() < TOL);
        assert!((sum - 2.23606797749979).abs() < TOL);
        assert!(sum > 2.0);
    }

    #[test]
    fn qutrit_state_validation() {
        assert!(matches!(
            QutritState::new([1.0, 1.0, 0.0]),
            Err(Error::NotUnit(_))
        ));
        assert!(matches!(
            QutritState::new([f64::INFINITY, 0.0, 0.0]),
            Err(Error::NonFinite)
        ));
        assert!(QutritState::new([0.0, 1.0, 0.0]).is_ok());
    }

    #[test]
    fn canonical_state_is_identity_over_root_three() {
        let state = canonical_entangled_state();
        let scale = 1.0 / 3f64.sqrt();
        for (i, row) in state.amplitudes().iter().enumerate() {
            for (j, amp) in row.iter().enumerate() {
                let expected = if i == j { scale } else { 0.0 };
                assert!((amp - expected).abs() < TOL);
            }
        }
        assert!((state.norm() - 1.0).abs() < TOL);
    }

    #[test]
    fn entangled_state_is_basis_independent() {
        let e1 = UnitVector3::new(crate::geometry::Vector3::new(1.0, 0.0, 0.0)).unwrap();
        let e2 = UnitVector3::new(crate::geometry::Vector3::new(0.0, 1.0, 0.0)).unwrap();
        let e3 = UnitVector3::new(crate::geometry::Vector3::new(0.0, 0.0, 1.0)).unwrap();
        let rotate = |u: UnitVector3| u.rotated_z(0.4).rotated_x(1.1).rotated_z(-2.3);
        let rotated = [rotate(e1), rotate(e2), rotate(e3)];
        let state = make_entangled_state(&rotated).unwrap();
        let canonical = canonical_entangled_state();
        for (row_a, row_b) in state.amplitudes().iter().zip(canonical.amplitudes()) {
            for (a, b) in row_a.iter().zip(row_b) {
                assert!((a - b).abs() < TOL);
            }
        }
    }

    #[test]
    fn non_orthonormal_basis_is_rejected() {
        let e1 = UnitVector3::new(crate::geometry::Vector3::new(1.0, 0.0, 0.0)).unwrap();
        let e3 = UnitVector3::new(crate::geometry::Vector3::new(0.0, 0.0, 1.0)).unwrap();
        assert!(matches!(
            make_entangled_state(&[e1, e1, e3]),
            Err(Error::NonOrthonormalBasis(_))
        ));
    }

    #[test]
    fn same_vertex_outcomes_agree_perfectly() {
        let frame = build_pentagram();
        let state = canonical_entangled_state();
        for vertex in VertexId::all() {
            let joint = joint_distribution(&state, &frame, vertex, vertex);
            assert!((joint.p11 - 1.0 / 3.0).abs() < TOL);
            assert!(joint.p10.abs() < TOL);
            assert!(joint.p01.abs() < TOL);
            assert!((joint.p00 - 2.0 / 3.0).abs() < TOL);
            assert!((joint.correlator() - 1.0).abs() < TOL);
        }
    }

    #[test]
    fn orthogonal_pairs_never_both_fire() {
        let frame = build_pentagram();
        let state = canonical_entangled_state();
        for (a, b) in pentagram_edges() {
            let joint = joint_distribution(&state, &frame, a, b);
            assert!(joint.p11.abs() < TOL, "edge ({a},{b})");
            let joint = joint_distribution(&state, &frame, b, a);
            assert!(joint.p11.abs() < TOL, "edge ({b},{a})");
        }
    }

    #[test]
    fn pentagon_pair_probability_matches_closed_form() {
        let frame = build_pentagram();
        let state = canonical_entangled_state();
        let expected = (3.0 - 5f64.sqrt()) / 6.0;
        for (a, b) in pentagon_edges() {
            let joint = joint_distribution(&state, &frame, a, b);
            assert!((joint.p11 - expected).abs() < TOL, "edge ({a},{b})");
            assert!((joint.p11 - 0.12732200375003502).abs() < TOL);
        }
    }

    #[test]
    fn joint_matches_squared_overlap_rule_on_all_pairs() {
        // Independent route: for the equal-weight entangled state the both-1
        // probability collapses to (va . vb)^2 / 3.
        let frame = build_pentagram();
        let state = canonical_entangled_state();
        for a in VertexId::all() {
            for b in VertexId::all() {
                let joint = joint_distribution(&state, &frame, a, b);
                let dot = frame.vertex(a).dot(frame.vertex(b));
                assert!((joint.p11 - dot * dot / 3.0).abs() < TOL, "pair ({a},{b})");
            }
        }
    }

    #[test]
    fn marginals_are_flat_thirds_for_every_pair() {
        let frame = build_pentagram();
        let state = canonical_entangled_state();
        for a in VertexId::all() {
            for b in VertexId::all() {
                let joint = joint_distribution(&state, &frame, a, b);
                assert!((joint.a_marginal() - 1.0 / 3.0).abs() < TOL);
                assert!((joint.b_marginal() - 1.0 / 3.0).abs() < TOL);
                assert!((joint.total() - 1.0).abs() < TOL);
                assert!(joint.p11 >= 0.0 && joint.p00 >= 0.0);
                assert!(joint.p10 >= 0.0 && joint.p01 >= 0.0);
            }
        }
    }

    #[test]
    fn pentagon_sum_sits_below_the_classical_floor() {
        let frame = build_pentagram();
        let state = canonical_entangled_state();
        let sum = pentagon_sum_quantum(&state, &frame);
        assert!((sum - 0.6366100187501752).abs() < TOL);
        assert!((sum - 5.0 * (3.0 - 5f64.sqrt()) / 6.0).abs() < TOL);
        assert!(sum < 2.0 / 3.0 - 0.03);
    }

    #[test]
    fn correlators_by_edge_kind() {
        let frame = build_pentagram();
        let state = canonical_entangled_state();
        for a in VertexId::all() {
            for b in VertexId::all() {
                let e = pair_correlator(&state, &frame, a, b);
                match crate::geometry::edge_kind(a, b) {
                    EdgeKind::Same => assert!((e - 1.0).abs() < TOL),
                    EdgeKind::Pentagram => assert!((e + 1.0 / 3.0).abs() < TOL),
                    EdgeKind::Pentagon => {
                        assert!((e - (5.0 - 2.0 * 5f64.sqrt()) / 3.0).abs() < TOL);
                        assert!((e - 0.1759546816668068).abs() < TOL);
                    }
                }
            }
        }
    }

    #[test]
    fn chsh_never_exceeds_the_classical_bound() {
        let frame = build_pentagram();
        let state = canonical_entangled_state();
        let best = max_chsh(&state, &frame);
        assert!((best.value - 2.0).abs() < TOL);
        // A degenerate quadruple with all four slots equal already attains 2.
        let (a1, a2, b1, b2) = best.vertices;
        let s = pair_correlator(&state, &frame, a1, b1)
            + pair_correlator(&state, &frame, a1, b2)
            + pair_correlator(&state, &frame, a2, b1)
            - pair_correlator(&state, &frame, a2, b2);
        assert!((s.abs() - best.value).abs() < TOL);
        let w = v(1);
        let degenerate = 2.0 * pair_correlator(&state, &frame, w, w);
        assert!((degenerate - 2.0).abs() < TOL);
    }
}
