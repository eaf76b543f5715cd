//! Noncontextual value charts.
//!
//! A chart assigns 0 or 1 to each of the five directions, subject to the
//! exclusivity rule that the two directions of a context (a pentagram edge)
//! never both get 1. Equivalently, the 1-set is an independent set of the
//! five-cycle in label space, so a chart carries at most two 1s and exactly
//! eleven charts exist: one all-zero, five with a single 1, and five whose
//! two 1s sit on a pentagon edge.

use crate::geometry::{pentagon_edges, pentagram_edges, VertexId};
use crate::{Error, Result};

/// Number of valid charts.
pub const CHART_COUNT: usize = 11;

/// Chart class by number of 1s.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ChartClass {
    /// All five directions get 0.
    C0,
    /// Exactly one direction gets 1.
    C1,
    /// Two non-adjacent directions (a pentagon edge) get 1.
    C2,
}

impl ChartClass {
    pub const fn ones(self) -> u32 {
        match self {
            ChartClass::C0 => 0,
            ChartClass::C1 => 1,
            ChartClass::C2 => 2,
        }
    }
}

/// A validated 0/1 assignment over the five directions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Chart {
    values: [u8; 5],
}

impl Chart {
    /// Validates the exclusivity rule on every context.
    pub fn new(values: [u8; 5]) -> Result<Self> {
        for &v in &values {
            if v > 1 {
                return Err(Error::ChartValueOutOfRange(v));
            }
        }
        for (a, b) in pentagram_edges() {
            if values[a.index()] == 1 && values[b.index()] == 1 {
                return Err(Error::AdjacentOnes(a.label(), b.label()));
            }
        }
        Ok(Self { values })
    }

    pub fn value(&self, v: VertexId) -> u8 {
        self.values[v.index()]
    }

    pub fn values(&self) -> [u8; 5] {
        self.values
    }

    pub fn ones(&self) -> u32 {
        self.values.iter().map(|&v| v as u32).sum()
    }

    pub fn class(&self) -> ChartClass {
        match self.ones() {
            0 => ChartClass::C0,
            1 => ChartClass::C1,
            _ => ChartClass::C2,
        }
    }

    /// Vertices assigned 1.
    pub fn support(&self) -> Vec<VertexId> {
        VertexId::all()
            .into_iter()
            .filter(|v| self.value(*v) == 1)
            .collect()
    }

    /// For a two-1 chart, its support as a pentagon edge in canonical
    /// orientation; `None` otherwise.
    pub fn pentagon_pair(&self) -> Option<(VertexId, VertexId)> {
        if self.class() != ChartClass::C2 {
            return None;
        }
        pentagon_edges()
            .into_iter()
            .find(|(a, b)| self.value(*a) == 1 && self.value(*b) == 1)
    }
}

/// True when `values` is 0/1 everywhere and no context has two 1s.
pub fn is_valid_chart(values: [u8; 5]) -> bool {
    values.iter().all(|&v| v <= 1)
        && pentagram_edges()
            .into_iter()
            .all(|(a, b)| values[a.index()] + values[b.index()] < 2)
}

/// All eleven charts in canonical order: the all-zero chart, the single-1
/// charts by vertex label, then the two-1 charts in pentagon-edge order.
///
/// The order is produced by scanning all 32 assignments so nothing is
/// hand-listed; downstream mixture weights index charts by this order.
pub fn enumerate_charts() -> Vec<Chart> {
    let mut charts: Vec<Chart> = (0u8..32)
        .map(|bits| std::array::from_fn(|i| (bits >> i) & 1))
        .filter(|&values| is_valid_chart(values))
        .map(|values| Chart::new(values).expect("filtered to valid"))
        .collect();
    charts.sort_by_key(canonical_key);
    charts
}

fn canonical_key(chart: &Chart) -> (u32, usize) {
    match chart.class() {
        ChartClass::C0 => (0, 0),
        ChartClass::C1 => (1, chart.support()[0].index()),
        ChartClass::C2 => {
            let pair = chart.pentagon_pair().expect("two-1 chart");
            let pos = pentagon_edges()
                .into_iter()
                .position(|e| e == pair)
                .expect("pair is a pentagon edge");
            (2, pos)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn census_is_one_five_five() {
        let charts = enumerate_charts();
        assert_eq!(charts.len(), CHART_COUNT);
        let count = |class| charts.iter().filter(|c| c.class() == class).count();
        assert_eq!(count(ChartClass::C0), 1);
        assert_eq!(count(ChartClass::C1), 5);
        assert_eq!(count(ChartClass::C2), 5);
    }

    #[test]
    fn canonical_order_is_frozen() {
        let expected: [[u8; 5]; 11] = [
            [0, 0, 0, 0, 0],
            [1, 0, 0, 0, 0],
            [0, 1, 0, 0, 0],
            [0, 0, 1, 0, 0],
            [0, 0, 0, 1, 0],
            [0, 0, 0, 0, 1],
            [1, 0, 0, 1, 0],
            [0, 1, 0, 1, 0],
            [0, 1, 0, 0, 1],
            [0, 0, 1, 0, 1],
            [1, 0, 1, 0, 0],
        ];
        let charts = enumerate_charts();
        for (chart, want) in charts.iter().zip(expected.iter()) {
            assert_eq!(chart.values(), *want);
        }
    }

    #[test]
    fn enumeration_equals_brute_force_filter() {
        let brute: Vec<[u8; 5]> = (0u8..32)
            .map(|bits| std::array::from_fn(|i| (bits >> i) & 1))
            .filter(|&v| is_valid_chart(v))
            .collect();
        assert_eq!(brute.len(), CHART_COUNT);
        let mut canonical: Vec<[u8; 5]> = enumerate_charts().iter().map(|c| c.values()).collect();
        let mut brute = brute;
        brute.sort();
        canonical.sort();
        assert_eq!(brute, canonical);
    }

    #[test]
    fn no_chart_has_three_ones() {
        for chart in enumerate_charts() {
            assert!(chart.ones() <= 2);
        }
    }

    #[test]
    fn validity_examples() {
        assert!(is_valid_chart([0, 0, 0, 0, 0]));
        assert!(is_valid_chart([1, 0, 1, 0, 0]));
        assert!(!is_valid_chart([1, 1, 0, 0, 0]));
        assert!(!is_valid_chart([1, 0, 0, 0, 1])); // the (5,1) context wraps around
        assert!(!is_valid_chart([1, 0, 1, 0, 1]));
        assert!(!is_valid_chart([2, 0, 0, 0, 0]));
    }

    #[test]
    fn construction_errors() {
        assert!(matches!(
            Chart::new([2, 0, 0, 0, 0]),
            Err(Error::ChartValueOutOfRange(2))
        ));
        assert!(matches!(
            Chart::new([0, 1, 1, 0, 0]),
            Err(Error::AdjacentOnes(2, 3))
        ));
        assert!(matches!(
            Chart::new([1, 0, 0, 0, 1]),
            Err(Error::AdjacentOnes(5, 1))
        ));
    }

    #[test]
    fn values_and_support_round_trip() {
        let chart = Chart::new([0, 1, 0, 1, 0]).unwrap();
        let v2 = VertexId::new(2).unwrap();
        let v3 = VertexId::new(3).unwrap();
        assert_eq!(chart.value(v2), 1);
        assert_eq!(chart.value(v3), 0);
        assert_eq!(
            chart
                .support()
                .iter()
                .map(|v| v.label())
                .collect::<Vec<_>>(),
            vec![2, 4]
        );
        let (a, b) = chart.pentagon_pair().unwrap();
        assert_eq!((a.label(), b.label()), (4, 2));
        assert_eq!(chart.class(), ChartClass::C2);
        assert_eq!(chart.class().ones(), 2);
    }

    #[test]
    fn single_one_charts_have_no_pentagon_pair() {
        let chart = Chart::new([0, 0, 1, 0, 0]).unwrap();
        assert_eq!(chart.class(), ChartClass::C1);
        assert!(chart.pentagon_pair().is_none());
    }
}
