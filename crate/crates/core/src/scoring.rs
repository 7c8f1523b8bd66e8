//! Ranking quality relative to the agent's preferred ranking.
//!
//! `distance` is the Spearman footrule with the pool rank taken literally.
//! `concordant_pairs` counts object pairs ordered the same way in both
//! rankings; pairs tied in either ranking (both pooled) count as neither
//! concordant nor discordant.

use serde::{Deserialize, Serialize};

use crate::facework::Decorum;
use crate::model::{ModelError, Ranking};

/// The components of a candidate's evaluation. `total` is
/// `(concordant - distance) * facework`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Score {
    pub concordant: u32,
    pub distance: u32,
    pub facework: Decorum,
    pub total: i64,
}

impl Score {
    /// `concordant - distance`, before the face-work factor.
    pub fn merit(&self) -> i64 {
        i64::from(self.concordant) - i64::from(self.distance)
    }
}

fn check_universe(ranking: &Ranking, preferred: &Ranking) -> Result<(), ModelError> {
    if ranking.same_universe(preferred) {
        Ok(())
    } else {
        Err(ModelError::UniverseMismatch)
    }
}

pub fn distance(ranking: &Ranking, preferred: &Ranking) -> Result<u32, ModelError> {
    check_universe(ranking, preferred)?;
    Ok(ranking
        .ranks()
        .iter()
        .zip(preferred.ranks())
        .map(|(a, b)| u32::from(a.get().abs_diff(b.get())))
        .sum())
}

pub fn concordant_pairs(ranking: &Ranking, preferred: &Ranking) -> Result<u32, ModelError> {
    check_universe(ranking, preferred)?;
    let a = ranking.ranks();
    let b = preferred.ranks();
    // A pair is concordant iff exactly one of its two orientations has the
    // second object strictly behind the first in both rankings.
    let mut count = 0;
    for i in 0..a.len() {
        count += (0..a.len()).filter(|&j| a[j] > a[i] && b[j] > b[i]).count();
    }
    Ok(count as u32)
}

/// `C - D` of a ranking, the status-quo value the agent must beat.
pub fn merit(ranking: &Ranking, preferred: &Ranking) -> Result<i64, ModelError> {
    Ok(i64::from(concordant_pairs(ranking, preferred)?) - i64::from(distance(ranking, preferred)?))
}

pub fn objective(
    next: &Ranking,
    facework: Decorum,
    preferred: &Ranking,
) -> Result<Score, ModelError> {
    let concordant = concordant_pairs(next, preferred)?;
    let distance = distance(next, preferred)?;
    let total = (i64::from(concordant) - i64::from(distance)) * facework.factor();
    Ok(Score {
        concordant,
        distance,
        facework,
        total,
    })
}
