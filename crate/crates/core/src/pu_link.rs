//! Primary-user link: SINR under aggregate SU interference, memoryless ACM
//! adaptation over a γ ladder, and the interference thresholds implied by it.

use std::fmt;

use thiserror::Error;

use crate::scenario::Topology;
use crate::units::{db_to_linear, dbm_to_mw, dot, mw_to_dbm};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PuLinkError {
    #[error("protocol needs at least 2 MCS entries, got {0}")]
    TooFewEntries(usize),
    #[error("protocol gamma values must be strictly ascending (entry `{label}` at {gamma_db} dB)")]
    NotAscending { label: String, gamma_db: f64 },
    #[error("non-positive interference threshold for `{label}`: noise exceeds the I+N budget")]
    NonPositiveThreshold { label: String },
}

/// Observed/operating modulation and coding scheme of the PU.
///
/// `Level(j)` is a 0-based index into the protocol ladder (ascending γ).
/// `Outage` sorts below every level.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Mcs {
    Outage,
    Level(usize),
}

impl Mcs {
    /// 1-based ladder index, 0 for outage. This is the trace-file encoding.
    pub fn code(self) -> usize {
        match self {
            Mcs::Outage => 0,
            Mcs::Level(j) => j + 1,
        }
    }

    pub fn from_code(code: usize) -> Self {
        match code {
            0 => Mcs::Outage,
            j => Mcs::Level(j - 1),
        }
    }
}

impl fmt::Display for Mcs {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Mcs::Outage => write!(f, "outage"),
            Mcs::Level(j) => write!(f, "MCS{}", j + 1),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct McsEntry {
    pub label: String,
    pub gamma_db: f64,
}

/// Ordered ACM ladder. γ strictly ascending, at least two entries.
#[derive(Clone, Debug, PartialEq)]
pub struct AcmProtocol {
    entries: Vec<McsEntry>,
}

impl AcmProtocol {
    pub fn new(entries: Vec<McsEntry>) -> Result<Self, PuLinkError> {
        if entries.len() < 2 {
            return Err(PuLinkError::TooFewEntries(entries.len()));
        }
        for w in entries.windows(2) {
            if !(w[1].gamma_db > w[0].gamma_db) || !w[1].gamma_db.is_finite() {
                return Err(PuLinkError::NotAscending {
                    label: w[1].label.clone(),
                    gamma_db: w[1].gamma_db,
                });
            }
        }
        Ok(Self { entries })
    }

    /// The 802.11a/g-like LDPC ladder used in the convergence experiments.
    pub fn default_ladder() -> Self {
        let rows = [
            ("BPSK 1/2", 5.0),
            ("BPSK 3/4", 6.0),
            ("QPSK 1/2", 7.0),
            ("QPSK 3/4", 9.0),
            ("16QAM 1/2", 13.0),
        ];
        Self::new(
            rows.iter()
                .map(|&(label, gamma_db)| McsEntry { label: label.to_string(), gamma_db })
                .collect(),
        )
        .expect("table is ascending")
    }

    pub fn entries(&self) -> &[McsEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn gamma_db(&self, j: usize) -> f64 {
        self.entries[j].gamma_db
    }

    pub fn label(&self, mcs: Mcs) -> &str {
        match mcs {
            Mcs::Outage => "Outage",
            Mcs::Level(j) => &self.entries[j].label,
        }
    }

    pub fn find(&self, label: &str) -> Option<Mcs> {
        self.entries.iter().position(|e| e.label == label).map(Mcs::Level)
    }
}

/// Bookkeeping of the PU receiver as seen by the simulator.
#[derive(Clone, Debug, PartialEq)]
pub struct PuState {
    pub received_power_dbm: f64,
    pub noise_dbm: f64,
    pub current_mcs: Mcs,
}

impl PuState {
    pub fn new(received_power_dbm: f64, noise_dbm: f64, protocol: &AcmProtocol) -> Self {
        let sinr = received_power_dbm - noise_dbm;
        Self { received_power_dbm, noise_dbm, current_mcs: select_mcs(sinr, protocol) }
    }

    /// Applies the interference `i_pu_mw` and returns the adapted MCS.
    pub fn apply(&mut self, i_pu_mw: f64, protocol: &AcmProtocol) -> Mcs {
        let sinr = sinr_db(self.received_power_dbm, self.noise_dbm, i_pu_mw);
        self.current_mcs = select_mcs(sinr, protocol);
        self.current_mcs
    }
}

/// Aggregate interference gᵀp at the PU receiver, mW.
pub fn aggregate_interference(topo: &Topology, p: &[f64]) -> f64 {
    dot(&topo.g, p)
}

fn sinr_db(received_power_dbm: f64, noise_dbm: f64, i_pu_mw: f64) -> f64 {
    let rx = dbm_to_mw(received_power_dbm);
    let n = dbm_to_mw(noise_dbm);
    10.0 * (rx / (i_pu_mw + n)).log10()
}

/// PU SINR in dB for SU powers `p` (mW).
pub fn pu_sinr(topo: &Topology, p: &[f64]) -> f64 {
    sinr_db(topo.received_pu_power_dbm, topo.pu_noise_dbm, aggregate_interference(topo, p))
}

/// Highest ladder entry whose γ the SINR meets; `Outage` below γ₁.
pub fn select_mcs(sinr_db: f64, protocol: &AcmProtocol) -> Mcs {
    protocol
        .entries
        .iter()
        .rposition(|e| e.gamma_db <= sinr_db)
        .map_or(Mcs::Outage, Mcs::Level)
}

/// Maximum interference (dBm) each MCS tolerates before the PU adapts down.
///
/// `I_th_j = rx/γ_j − N`, strictly decreasing in `j`.
pub fn interference_thresholds(
    protocol: &AcmProtocol,
    received_power_dbm: f64,
    noise_dbm: f64,
) -> Result<Vec<f64>, PuLinkError> {
    let rx = dbm_to_mw(received_power_dbm);
    let n = dbm_to_mw(noise_dbm);
    protocol
        .entries
        .iter()
        .map(|e| {
            let budget = rx / db_to_linear(e.gamma_db) - n;
            if budget > 0.0 {
                Ok(mw_to_dbm(budget))
            } else {
                Err(PuLinkError::NonPositiveThreshold { label: e.label.clone() })
            }
        })
        .collect()
}
