//! Cooperative MCS classification: each SU votes, the base station fuses the
//! votes by plurality.

use rand::Rng;
use thiserror::Error;

use crate::pu_link::Mcs;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SensingError {
    #[error("plurality fusion needs at least one vote")]
    EmptyVoteSet,
}

/// Per-SU classifier: correct with probability `p_correct`, otherwise an
/// adjacent ladder entry chosen uniformly (clamped at the ends).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SensingModel {
    pub p_correct: f64,
    pub n_levels: usize,
}

impl SensingModel {
    pub fn perfect(n_levels: usize) -> Self {
        Self { p_correct: 1.0, n_levels }
    }
}

pub fn su_classify<R: Rng + ?Sized>(true_mcs: Mcs, model: &SensingModel, rng: &mut R) -> Mcs {
    let j = match true_mcs {
        Mcs::Outage => return Mcs::Outage,
        Mcs::Level(j) => j,
    };
    if model.p_correct >= 1.0 || rng.gen::<f64>() < model.p_correct {
        return true_mcs;
    }
    let last = model.n_levels.saturating_sub(1);
    let neighbour = match (j == 0, j >= last) {
        (true, true) => j,
        (true, false) => j + 1,
        (false, true) => j - 1,
        (false, false) => {
            if rng.gen::<bool>() {
                j + 1
            } else {
                j - 1
            }
        }
    };
    Mcs::Level(neighbour)
}

/// Most frequent vote; ties go to the lower-γ (more robust) MCS.
pub fn fuse_plurality(votes: &[Mcs]) -> Result<Mcs, SensingError> {
    let mut sorted = votes.to_vec();
    sorted.sort_unstable();
    let mut best: Option<(Mcs, usize)> = None;
    for chunk in sorted.chunk_by(|a, b| a == b) {
        // ascending order: a later chunk only wins with strictly more votes
        if best.map_or(true, |(_, n)| chunk.len() > n) {
            best = Some((chunk[0], chunk.len()));
        }
    }
    best.map(|(m, _)| m).ok_or(SensingError::EmptyVoteSet)
}

/// One sensing period: every SU classifies, the CBS fuses.
pub fn sense<R: Rng + ?Sized>(true_mcs: Mcs, n_su: usize, model: &SensingModel, rng: &mut R) -> Mcs {
    if model.p_correct >= 1.0 || true_mcs == Mcs::Outage {
        return true_mcs;
    }
    let votes: Vec<Mcs> = (0..n_su.max(1)).map(|_| su_classify(true_mcs, model, rng)).collect();
    fuse_plurality(&votes).expect("at least one vote")
}
