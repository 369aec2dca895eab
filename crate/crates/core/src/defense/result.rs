use std::io::Write;

use crate::{Error, Label, Result};

/// Which rule produced a row's corrected label.
#[derive(Debug, Clone, PartialEq)]
pub enum Provenance {
    /// Majority of four voters; a 2-2 tie goes to the CNN.
    Vote {
        ls: Label,
        lp: Label,
        cnn: Label,
        poisoned: Label,
        /// Both propagation runs converged before their iteration cap.
        converged: bool,
    },
    /// CNN prediction, with the agreement shift `s` the row caused.
    Csd {
        s: f64,
        accepted: bool,
    },
    /// Neighbourhood majority applied.
    Neighbor {
        majority: Label,
        fraction: f64,
    },
    /// Refit generator-augmented model.
    Generator,
    Unchanged,
}

impl Provenance {
    pub fn tag(&self) -> &'static str {
        match self {
            Provenance::Vote { converged: false, .. } => "vote-unconverged",
            Provenance::Vote { .. } => "vote",
            Provenance::Csd { accepted: true, .. } => "csd-accepted",
            Provenance::Csd { .. } => "csd-rejected",
            Provenance::Neighbor { .. } => "neighbor",
            Provenance::Generator => "generator",
            Provenance::Unchanged => "unchanged",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DefenseResult {
    pub corrected_labels: Vec<Label>,
    pub changed_mask: Vec<bool>,
    pub provenance: Vec<Provenance>,
    /// Row ids accepted by CSD; empty for the other defenses.
    pub accepted_pool: Vec<usize>,
    pub warnings: Vec<String>,
}

impl DefenseResult {
    pub fn new(poisoned: &[Label], corrected: Vec<Label>, provenance: Vec<Provenance>) -> Result<Self> {
        if corrected.len() != poisoned.len() || provenance.len() != poisoned.len() {
            return Err(Error::Dimension {
                expected: poisoned.len(),
                actual: corrected.len().min(provenance.len()),
            });
        }
        let changed_mask = poisoned.iter().zip(&corrected).map(|(a, b)| a != b).collect();
        Ok(Self {
            corrected_labels: corrected,
            changed_mask,
            provenance,
            accepted_pool: Vec::new(),
            warnings: Vec::new(),
        })
    }

    pub fn n_changed(&self) -> usize {
        self.changed_mask.iter().filter(|&&c| c).count()
    }

    /// Flipped rows (clean differs from poisoned) whose corrected label is
    /// back to the clean one.
    pub fn restored(&self, clean: &[Label], poisoned: &[Label]) -> usize {
        clean
            .iter()
            .zip(poisoned)
            .zip(&self.corrected_labels)
            .filter(|((c, p), r)| c != p && c == r)
            .count()
    }
}

/// CSV with columns `row_id,poisoned,corrected,changed,provenance`.
pub fn write_defense_csv(
    result: &DefenseResult,
    row_ids: &[usize],
    poisoned: &[Label],
    out: &mut impl Write,
) -> Result<()> {
    let n = result.corrected_labels.len();
    if row_ids.len() != n || poisoned.len() != n {
        return Err(Error::Dimension {
            expected: n,
            actual: row_ids.len().min(poisoned.len()),
        });
    }
    writeln!(out, "row_id,poisoned,corrected,changed,provenance")?;
    for i in 0..n {
        writeln!(
            out,
            "{},{},{},{},{}",
            row_ids[i],
            poisoned[i],
            result.corrected_labels[i],
            u8::from(result.changed_mask[i]),
            result.provenance[i].tag()
        )?;
    }
    Ok(())
}
