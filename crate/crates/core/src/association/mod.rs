//! MT-to-BS association: best-RSRP single connectivity, three dual
//! connectivity heuristics, and all-connectivity.
//!
//! Every algorithm works on an [`RsrpMatrix`] and breaks ties toward the
//! lowest id.

mod bigu;
mod sm;
mod uigo;

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::channel::RsrpMatrix;
use crate::error::{Error, Result};

pub use bigu::associate_bigu;
pub use sm::{associate_sm, gale_shapley, seats_per_bs};
pub use uigo::associate_uigo;

/// A (BS, MT) connection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Link {
    pub bs: usize,
    pub mt: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Connectivity {
    Single,
    Dual,
    All,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AssociationAlgorithm {
    Best,
    Uigo,
    Bigu,
    Sm,
    All,
}

impl AssociationAlgorithm {
    pub fn name(self) -> &'static str {
        match self {
            AssociationAlgorithm::Best => "best",
            AssociationAlgorithm::Uigo => "uigo",
            AssociationAlgorithm::Bigu => "bigu",
            AssociationAlgorithm::Sm => "sm",
            AssociationAlgorithm::All => "all",
        }
    }
}

impl fmt::Display for AssociationAlgorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for AssociationAlgorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "best" => Ok(AssociationAlgorithm::Best),
            "uigo" => Ok(AssociationAlgorithm::Uigo),
            "bigu" => Ok(AssociationAlgorithm::Bigu),
            "sm" => Ok(AssociationAlgorithm::Sm),
            "all" => Ok(AssociationAlgorithm::All),
            other => Err(Error::Config(format!(
                "unknown association '{other}' (expected best, uigo, bigu, sm, all)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AssociationParams {
    /// UIGO offload threshold in dB.
    pub h1: f64,
    /// BIGU acceptance threshold in dB.
    pub h2: f64,
    /// Extra seats per BS in stable matching.
    pub sm_c: usize,
    /// BIGU round cap; `None` means 10 * M.
    pub bigu_max_rounds: Option<usize>,
}

impl Default for AssociationParams {
    fn default() -> Self {
        Self {
            h1: 10.0,
            h2: 10.0,
            sm_c: 1,
            bigu_max_rounds: None,
        }
    }
}

impl AssociationParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.h1 >= 0.0) || !(self.h2 >= 0.0) {
            return Err(Error::Config("h1 and h2 must be >= 0".into()));
        }
        Ok(())
    }
}

/// Bookkeeping produced while associating.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct AssociationStats {
    /// RSRP comparisons performed (tracked by UIGO).
    pub comparisons: u64,
    /// MTs that needed the fallback assignment (BIGU round cap, SM overflow).
    pub fallback_mts: Vec<usize>,
    /// Rounds executed (BIGU).
    pub rounds: usize,
}

/// Per-MT ordered serving set.
#[derive(Debug, Clone, PartialEq)]
pub struct AssociationMap {
    pub connectivity: Connectivity,
    pub num_bs: usize,
    serving: Vec<Vec<usize>>,
    pub stats: AssociationStats,
}

impl AssociationMap {
    pub fn new(connectivity: Connectivity, num_bs: usize, serving: Vec<Vec<usize>>) -> Self {
        Self {
            connectivity,
            num_bs,
            serving,
            stats: AssociationStats::default(),
        }
    }

    /// Dual map from `(A1, A2)` pairs.
    pub fn dual(num_bs: usize, pairs: &[(usize, usize)]) -> Self {
        Self::new(
            Connectivity::Dual,
            num_bs,
            pairs.iter().map(|&(a, b)| vec![a, b]).collect(),
        )
    }

    pub fn num_mts(&self) -> usize {
        self.serving.len()
    }

    pub fn serving(&self, mt: usize) -> &[usize] {
        &self.serving[mt]
    }

    pub fn primary(&self, mt: usize) -> Option<usize> {
        self.serving[mt].first().copied()
    }

    pub fn secondary(&self, mt: usize) -> Option<usize> {
        self.serving[mt].get(1).copied()
    }

    /// All links ordered by BS, then MT.
    pub fn links(&self) -> Vec<Link> {
        let mut links: Vec<Link> = self
            .serving
            .iter()
            .enumerate()
            .flat_map(|(mt, set)| set.iter().map(move |&bs| Link { bs, mt }))
            .collect();
        links.sort();
        links
    }

    pub fn connection_count(&self) -> usize {
        self.serving.iter().map(Vec::len).sum()
    }

    /// Checks the size and distinctness rules for the map's connectivity.
    pub fn validate(&self) -> Result<()> {
        for (mt, set) in self.serving.iter().enumerate() {
            let want = match self.connectivity {
                Connectivity::Single => 1,
                Connectivity::Dual => 2,
                Connectivity::All => self.num_bs,
            };
            if set.len() != want {
                return Err(Error::Association(format!(
                    "MT {mt} has {} serving BSs, expected {want}",
                    set.len()
                )));
            }
            if set.iter().any(|&b| b >= self.num_bs) {
                return Err(Error::Association(format!("MT {mt} has an invalid BS id")));
            }
            for (i, b) in set.iter().enumerate() {
                if set[i + 1..].contains(b) {
                    return Err(Error::Association(format!(
                        "MT {mt} lists BS {b} twice"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Writes `mt_id,a1,a2`; `a2` is empty for single connectivity.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["mt_id", "a1", "a2"])?;
        for mt in 0..self.num_mts() {
            let a1 = self.primary(mt).map(|b| b.to_string()).unwrap_or_default();
            let a2 = self.secondary(mt).map(|b| b.to_string()).unwrap_or_default();
            out.write_record([mt.to_string(), a1, a2])?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Index of the largest value among `candidates`, lowest index on ties.
/// Adds the number of comparisons made to `comparisons`.
pub(crate) fn argmax_by<I, F>(candidates: I, mut value: F, comparisons: &mut u64) -> Option<usize>
where
    I: IntoIterator<Item = usize>,
    F: FnMut(usize) -> f64,
{
    let mut best: Option<(usize, f64)> = None;
    for c in candidates {
        let v = value(c);
        match best {
            None => best = Some((c, v)),
            Some((_, bv)) => {
                *comparisons += 1;
                if v > bv {
                    best = Some((c, v));
                }
            }
        }
    }
    best.map(|(c, _)| c)
}

/// Single association to the strongest RSRP.
pub fn associate_best_rsrp(rsrp: &RsrpMatrix) -> Result<AssociationMap> {
    if rsrp.num_bs() == 0 {
        return Err(Error::Association("no base stations".into()));
    }
    let mut stats = AssociationStats::default();
    let serving = (0..rsrp.num_mts())
        .map(|u| {
            let b = argmax_by(0..rsrp.num_bs(), |b| rsrp.get(b, u), &mut stats.comparisons)
                .expect("at least one BS");
            vec![b]
        })
        .collect();
    let mut map = AssociationMap::new(Connectivity::Single, rsrp.num_bs(), serving);
    map.stats = stats;
    Ok(map)
}

/// Every MT connected to every BS, in id order.
pub fn associate_all(num_bs: usize, num_mts: usize) -> AssociationMap {
    AssociationMap::new(
        Connectivity::All,
        num_bs,
        (0..num_mts).map(|_| (0..num_bs).collect()).collect(),
    )
}

pub fn associate(
    algorithm: AssociationAlgorithm,
    rsrp: &RsrpMatrix,
    params: &AssociationParams,
) -> Result<AssociationMap> {
    match algorithm {
        AssociationAlgorithm::Best => associate_best_rsrp(rsrp),
        AssociationAlgorithm::Uigo => associate_uigo(rsrp, params),
        AssociationAlgorithm::Bigu => associate_bigu(rsrp, params),
        AssociationAlgorithm::Sm => associate_sm(rsrp, params),
        AssociationAlgorithm::All => Ok(associate_all(rsrp.num_bs(), rsrp.num_mts())),
    }
}

#[cfg(test)]
pub(crate) mod test_util {
    use crate::channel::RsrpMatrix;
    use crate::topology::Tier;

    /// `rows[b][u]`; first `macros` BSs are macro, the rest pico.
    pub fn matrix(rows: &[&[f64]], macros: usize) -> RsrpMatrix {
        let tiers = (0..rows.len())
            .map(|b| if b < macros { Tier::Macro } else { Tier::Pico })
            .collect();
        RsrpMatrix::from_rows(rows.iter().map(|r| r.to_vec()).collect(), tiers)
    }
}
