//! Turning sensed MCS observations into normalized inequality pairs on `g̃`.
//!
//! With `MCS_ref = MCS_k` and `c_j = γ_j / γ_ref` (linear), an observation of
//! `MCS_j`, `j < k`, after probing with `p` gives
//! `g̃ᵀ(c_{j+1} p) > 1` and `g̃ᵀ(c_j p) ≤ 1`.

use thiserror::Error;

use crate::pu_link::{AcmProtocol, Mcs};
use crate::units::{db_to_linear, dot};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ConstraintError {
    #[error("observed {observed} above the reference {reference}")]
    ObservedAboveReference { observed: Mcs, reference: Mcs },
}

#[derive(Clone, Debug, PartialEq)]
pub struct GammaRatios {
    pub reference: usize,
    /// `c_j` per ladder index, linear power ratio.
    pub c: Vec<f64>,
}

pub fn gamma_ratios(protocol: &AcmProtocol, reference: usize) -> GammaRatios {
    let gamma_ref = protocol.gamma_db(reference);
    let c = protocol
        .entries()
        .iter()
        .map(|e| db_to_linear(e.gamma_db - gamma_ref))
        .collect();
    GammaRatios { reference, c }
}

/// What one probing flop teaches about `g̃`.
#[derive(Clone, Debug, PartialEq)]
pub struct InequalityPair {
    pub flop: usize,
    /// `g̃ᵀp_upper > 1` (the probe's scaled violating vector).
    pub upper: Option<Vec<f64>>,
    /// `g̃ᵀp_lower ≤ 1`.
    pub lower: Option<Vec<f64>>,
}

impl InequalityPair {
    /// True when `g` satisfies both inequalities. `slack` loosens them by a
    /// relative amount to absorb rounding.
    pub fn holds_for(&self, g: &[f64], slack: f64) -> bool {
        let upper_ok = self.upper.as_ref().map_or(true, |u| dot(g, u) > 1.0 - slack);
        let lower_ok = self.lower.as_ref().map_or(true, |l| dot(g, l) <= 1.0 + slack);
        upper_ok && lower_ok
    }
}

fn scaled(p: &[f64], s: f64) -> Vec<f64> {
    p.iter().map(|v| v * s).collect()
}

pub fn feedback_to_pair(
    p: &[f64],
    observed: Mcs,
    ratios: &GammaRatios,
    flop: usize,
) -> Result<InequalityPair, ConstraintError> {
    let k = ratios.reference;
    let (upper, lower) = match observed {
        Mcs::Outage => (Some(scaled(p, ratios.c[0])), None),
        Mcs::Level(j) if j == k => (None, Some(p.to_vec())),
        Mcs::Level(j) if j < k => {
            (Some(scaled(p, ratios.c[j + 1])), Some(scaled(p, ratios.c[j])))
        }
        Mcs::Level(_) => {
            return Err(ConstraintError::ObservedAboveReference {
                observed,
                reference: Mcs::Level(k),
            })
        }
    };
    Ok(InequalityPair { flop, upper, lower })
}

/// ACK/NACK-equivalent single cut.
pub fn binary_to_pair(p: &[f64], degraded: bool, flop: usize) -> InequalityPair {
    if degraded {
        InequalityPair { flop, upper: Some(p.to_vec()), lower: None }
    } else {
        InequalityPair { flop, upper: None, lower: Some(p.to_vec()) }
    }
}

/// Accumulated pairs, ordered by flop.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ConstraintSet {
    pairs: Vec<InequalityPair>,
}

impl ConstraintSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn pairs(&self) -> &[InequalityPair] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Appends a pair. Panics if its flop does not exceed the last one.
    pub fn push(&mut self, pair: InequalityPair) {
        if let Some(last) = self.pairs.last() {
            assert!(pair.flop > last.flop, "flop indices must increase");
        }
        self.pairs.push(pair);
    }

    pub fn pop(&mut self) -> Option<InequalityPair> {
        self.pairs.pop()
    }

    pub fn clear(&mut self) {
        self.pairs.clear();
    }

    /// Removes the `k` oldest pairs.
    pub fn drop_oldest(&mut self, k: usize) {
        self.pairs.drain(..k.min(self.pairs.len()));
    }

    /// Drops pairs older than the window start.
    pub fn retain_window(&mut self, t: usize, t_w: usize) {
        let start = t.saturating_sub(t_w);
        self.pairs.retain(|p| p.flop >= start);
    }

    /// Number of stored inequalities `g` violates.
    pub fn violations(&self, g: &[f64], slack: f64) -> usize {
        self.pairs.iter().filter(|p| !p.holds_for(g, slack)).count()
    }
}

/// Pairs with flop in `[t − t_w, t]`; everything while `t < t_w`.
pub fn window_filter(set: &ConstraintSet, t: usize, t_w: usize) -> ConstraintSet {
    assert!(t_w >= 1, "window must hold at least one pair");
    let mut out = set.clone();
    out.retain_window(t, t_w);
    out
}
