//! Sessions, items and the views served to reviewers.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use woodmask_core::{ClassId, Subset};

use crate::error::CurationError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    /// Choose between casting RotMaybe to Rot or to Crosscut.
    RotMaybeCast,
    /// Choose between the ground truth and a model prediction without
    /// knowing which is which.
    BlindGtVsPred,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::RotMaybeCast => "rot-maybe-cast",
            Mode::BlindGtVsPred => "blind-gt-vs-pred",
        })
    }
}

impl FromStr for Mode {
    type Err = CurationError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "rot-maybe-cast" => Ok(Mode::RotMaybeCast),
            "blind-gt-vs-pred" => Ok(Mode::BlindGtVsPred),
            other => Err(CurationError::Invalid(format!("unknown mode {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    A,
    B,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Choice {
    A,
    B,
    Skip,
}

impl Choice {
    pub fn side(self) -> Option<Side> {
        match self {
            Choice::A => Some(Side::A),
            Choice::B => Some(Side::B),
            Choice::Skip => None,
        }
    }
}

impl FromStr for Side {
    type Err = CurationError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "a" => Ok(Side::A),
            "b" => Ok(Side::B),
            other => Err(CurationError::NotFound(format!("no option {other:?}"))),
        }
    }
}

/// Where an option's mask comes from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum OptionSource {
    /// A stored mask variant with RotMaybe replaced by `target`.
    Casting { variant: String, target: ClassId },
    /// A stored mask variant as is.
    Variant { variant: String },
    /// Imported predictions of a model.
    Prediction { model: String },
}

impl OptionSource {
    /// Short tag revealed to the reviewer once the item is decided.
    pub fn tag(&self) -> String {
        match self {
            OptionSource::Casting { target, .. } => format!("cast-to-{}", target.name().to_lowercase()),
            OptionSource::Variant { variant } => format!("ground-truth:{variant}"),
            OptionSource::Prediction { model } => format!("model:{model}"),
        }
    }
}

/// Pair of values for the two sides.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sides<T> {
    pub a: T,
    pub b: T,
}

impl<T> Sides<T> {
    pub fn get(&self, side: Side) -> &T {
        match side {
            Side::A => &self.a,
            Side::B => &self.b,
        }
    }

    pub fn map<U>(&self, f: impl Fn(&T) -> U) -> Sides<U> {
        Sides {
            a: f(&self.a),
            b: f(&self.b),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Decision {
    pub choice: Choice,
    pub reviewer: String,
    pub decided_at: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Item {
    pub item_id: String,
    pub session_id: String,
    /// 1-based position in the session.
    pub index: usize,
    pub sample_id: String,
    pub side_seed: u64,
    pub options: Sides<OptionSource>,
    pub decision: Option<Decision>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Open,
    Closed,
}

/// Which samples a session covers. Empty `sample_ids` means all samples of
/// the subset (or of the whole manifest when no subset is given).
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct SampleFilter {
    pub subset: Option<Subset>,
    pub sample_ids: Vec<String>,
    /// Stored mask variant the options derive from; `original` if unset.
    pub variant: Option<String>,
    /// Model whose predictions compete with the ground truth (blind mode).
    pub model: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Session {
    pub session_id: String,
    pub mode: Mode,
    pub seed: u64,
    pub filter: SampleFilter,
    pub created_at: String,
    pub status: Status,
    /// Variant produced when the session was applied.
    pub applied_variant: Option<String>,
    pub items: Vec<Item>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Progress {
    pub decided: usize,
    pub total: usize,
}

impl Session {
    pub fn progress(&self) -> Progress {
        Progress {
            decided: self.items.iter().filter(|i| i.decision.is_some()).count(),
            total: self.items.len(),
        }
    }

    pub fn next_pending(&self) -> Option<&Item> {
        self.items.iter().find(|i| i.decision.is_none())
    }

    pub fn view(&self) -> SessionView {
        let count = |c: Choice| {
            self.items
                .iter()
                .filter(|i| i.decision.as_ref().map(|d| d.choice) == Some(c))
                .count()
        };
        SessionView {
            session_id: self.session_id.clone(),
            mode: self.mode,
            status: self.status,
            seed: self.seed,
            created_at: self.created_at.clone(),
            progress: self.progress(),
            chosen_a: count(Choice::A),
            chosen_b: count(Choice::B),
            skipped: count(Choice::Skip),
            applied_variant: self.applied_variant.clone(),
            item_ids: self.items.iter().map(|i| i.item_id.clone()).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionView {
    pub session_id: String,
    pub mode: Mode,
    pub status: Status,
    pub seed: u64,
    pub created_at: String,
    pub progress: Progress,
    pub chosen_a: usize,
    pub chosen_b: usize,
    pub skipped: usize,
    pub applied_variant: Option<String>,
    pub item_ids: Vec<String>,
}

/// An undecided item. Deliberately carries nothing that tells the options
/// apart.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PendingItemView {
    pub item_id: String,
    pub session_id: String,
    pub mode: Mode,
    pub index: usize,
    pub sample_id: String,
    pub image_url: String,
    pub overlay_a_url: String,
    pub overlay_b_url: String,
    pub progress: Progress,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecidedItemView {
    #[serde(flatten)]
    pub item: PendingItemView,
    pub decision: Decision,
    pub provenance: Sides<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "lowercase")]
pub enum ItemView {
    Pending(PendingItemView),
    Decided(DecidedItemView),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "lowercase")]
pub enum NextItem {
    Pending(PendingItemView),
    Complete { session_id: String, progress: Progress },
}

impl Item {
    pub fn view(&self, session: &Session) -> ItemView {
        let pending = PendingItemView {
            item_id: self.item_id.clone(),
            session_id: self.session_id.clone(),
            mode: session.mode,
            index: self.index,
            sample_id: self.sample_id.clone(),
            image_url: format!("/items/{}/image.png", self.item_id),
            overlay_a_url: format!("/items/{}/overlay/a.png", self.item_id),
            overlay_b_url: format!("/items/{}/overlay/b.png", self.item_id),
            progress: session.progress(),
        };
        match &self.decision {
            None => ItemView::Pending(pending),
            Some(decision) => ItemView::Decided(DecidedItemView {
                item: pending,
                decision: decision.clone(),
                provenance: self.options.map(OptionSource::tag),
            }),
        }
    }
}
