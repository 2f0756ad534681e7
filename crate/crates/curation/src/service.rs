//! Review operations over a manifest, independent of the HTTP layer.

use std::io::Cursor;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use image::{ImageFormat, RgbImage};
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use woodmask_core::manifest::load_manifest;
use woodmask_core::overlay::render_overlay;
use woodmask_core::{ClassId, DatasetManifest, LabelMask, SampleRecord};

use crate::apply::{base_variant, option_mask, plan_variant, write_variant, ApplySummary};
use crate::clock::Clock;
use crate::error::{CurationError, Result};
use crate::model::{
    Choice, Item, ItemView, Mode, NextItem, OptionSource, SampleFilter, Session, SessionView, Side,
    Sides, Status,
};
use crate::state::{write_snapshot, DecisionLog, Event, State};

#[derive(Debug, Clone)]
pub struct ServiceConfig {
    pub manifest: PathBuf,
    /// Root for photograph lookup; defaults to the manifest's directory.
    pub image_root: Option<PathBuf>,
    /// Directory holding `decisions.jsonl` and `snapshot.json`.
    pub state_dir: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CreateSession {
    pub mode: Mode,
    #[serde(default)]
    pub filter: SampleFilter,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecisionRequest {
    pub choice: Choice,
    pub reviewer: String,
    #[serde(default, rename = "override")]
    pub override_: bool,
}

pub const LOG_FILE: &str = "decisions.jsonl";
pub const SNAPSHOT_FILE: &str = "snapshot.json";

/// Per-item seed for side placement, derived from the session seed and the
/// item's position.
pub fn side_seed(session_seed: u64, index: usize) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(session_seed);
    rng.set_stream(index as u64);
    rng.next_u64()
}

/// Whether the first candidate goes to side B.
pub fn swapped(side_seed: u64) -> bool {
    ChaCha8Rng::seed_from_u64(side_seed).random_bool(0.5)
}

pub struct Service {
    manifest_path: PathBuf,
    manifest: DatasetManifest,
    image_root: PathBuf,
    state: State,
    log: DecisionLog,
    snapshot_path: PathBuf,
    clock: Arc<dyn Clock>,
}

impl Service {
    /// Loads the manifest and rebuilds state by replaying the decision log.
    pub fn open(config: &ServiceConfig, clock: Arc<dyn Clock>) -> Result<Self> {
        let manifest = load_manifest(&config.manifest)?;
        let log_path = config.state_dir.join(LOG_FILE);
        let events = DecisionLog::read(&log_path)?;
        let state = State::replay(&events)?;
        let log = DecisionLog::open(&log_path)?;
        let snapshot_path = config.state_dir.join(SNAPSHOT_FILE);
        write_snapshot(&snapshot_path, &state)?;
        tracing::info!(events = events.len(), sessions = state.sessions.len(), "state restored");
        Ok(Self {
            manifest_path: config.manifest.clone(),
            image_root: config
                .image_root
                .clone()
                .unwrap_or_else(|| manifest.base_dir.clone()),
            manifest,
            state,
            log,
            snapshot_path,
            clock,
        })
    }

    pub fn state(&self) -> &State {
        &self.state
    }

    pub fn manifest(&self) -> &DatasetManifest {
        &self.manifest
    }

    pub fn log_path(&self) -> &Path {
        self.log.path()
    }

    /// Validates, logs, then applies; repeats that change nothing are not
    /// logged.
    fn record(&mut self, event: Event) -> Result<()> {
        if !self.state.check(&event)? {
            return Ok(());
        }
        self.log.append(&event)?;
        self.state.apply(&event)?;
        write_snapshot(&self.snapshot_path, &self.state)
    }

    fn candidates(&self, filter: &SampleFilter) -> Result<Vec<&SampleRecord>> {
        for id in &filter.sample_ids {
            if self.manifest.sample(id).is_none() {
                return Err(CurationError::Invalid(format!("unknown sample {id:?}")));
            }
        }
        Ok(self
            .manifest
            .samples
            .iter()
            .filter(|s| filter.subset.is_none_or(|subset| s.subset == subset))
            .filter(|s| filter.sample_ids.is_empty() || filter.sample_ids.contains(&s.sample_id))
            .collect())
    }

    pub fn create_session(&mut self, request: CreateSession) -> Result<SessionView> {
        let session_id = self.state.next_session_id();
        let mut probe = Session {
            session_id: session_id.clone(),
            mode: request.mode,
            seed: request.seed,
            filter: request.filter.clone(),
            created_at: String::new(),
            status: Status::Open,
            applied_variant: None,
            items: Vec::new(),
        };
        let base = base_variant(&probe).to_string();
        let candidates = self.candidates(&request.filter)?;
        let considered = candidates.len();
        let mut missing = 0;
        let mut unqualified = 0;
        let mut pairs: Vec<(&SampleRecord, [OptionSource; 2])> = Vec::new();
        for sample in candidates {
            if !sample.masks.contains_key(&base) {
                missing += 1;
                continue;
            }
            match request.mode {
                Mode::RotMaybeCast => {
                    if !self.manifest.load_mask(sample, &base)?.contains(ClassId::RotMaybe) {
                        unqualified += 1;
                        continue;
                    }
                    let cast = |target| OptionSource::Casting {
                        variant: base.clone(),
                        target,
                    };
                    pairs.push((sample, [cast(ClassId::Rot), cast(ClassId::Crosscut)]));
                }
                Mode::BlindGtVsPred => {
                    let model = request.filter.model.clone().ok_or_else(|| {
                        CurationError::Invalid("blind-gt-vs-pred sessions need filter.model".into())
                    })?;
                    if !sample.predictions.contains_key(&model) {
                        unqualified += 1;
                        continue;
                    }
                    pairs.push((
                        sample,
                        [
                            OptionSource::Variant { variant: base.clone() },
                            OptionSource::Prediction { model },
                        ],
                    ));
                }
            }
        }
        if pairs.is_empty() {
            let reason = match request.mode {
                Mode::RotMaybeCast => "without RotMaybe pixels",
                Mode::BlindGtVsPred => "without a prediction",
            };
            return Err(CurationError::Invalid(format!(
                "no qualifying samples: {considered} considered, {missing} without a {base:?} mask, {unqualified} {reason}"
            )));
        }
        probe.items = pairs
            .into_iter()
            .enumerate()
            .map(|(k, (sample, [first, second]))| {
                let index = k + 1;
                let seed = side_seed(request.seed, index);
                let options = if swapped(seed) {
                    Sides { a: second, b: first }
                } else {
                    Sides { a: first, b: second }
                };
                Item {
                    item_id: format!("{session_id}-{index}"),
                    session_id: session_id.clone(),
                    index,
                    sample_id: sample.sample_id.clone(),
                    side_seed: seed,
                    options,
                    decision: None,
                }
            })
            .collect();
        let at = self.clock.timestamp();
        probe.created_at = at.clone();
        self.record(Event::SessionCreated { at, session: probe })?;
        Ok(self.state.session(&session_id)?.view())
    }

    pub fn sessions(&self) -> Vec<SessionView> {
        self.state.sessions.iter().map(Session::view).collect()
    }

    pub fn session(&self, id: &str) -> Result<SessionView> {
        Ok(self.state.session(id)?.view())
    }

    pub fn next_item(&self, session_id: &str) -> Result<NextItem> {
        let session = self.state.session(session_id)?;
        Ok(match session.next_pending() {
            Some(item) => match item.view(session) {
                ItemView::Pending(view) => NextItem::Pending(view),
                ItemView::Decided(_) => unreachable!("next_pending returns undecided items"),
            },
            None => NextItem::Complete {
                session_id: session.session_id.clone(),
                progress: session.progress(),
            },
        })
    }

    pub fn item(&self, item_id: &str) -> Result<ItemView> {
        let (session, item) = self.state.item(item_id)?;
        Ok(item.view(session))
    }

    pub fn submit_decision(&mut self, item_id: &str, request: DecisionRequest) -> Result<ItemView> {
        if request.reviewer.trim().is_empty() {
            return Err(CurationError::Invalid("reviewer must not be empty".into()));
        }
        let event = Event::Decision {
            at: self.clock.timestamp(),
            item_id: item_id.to_string(),
            choice: request.choice,
            reviewer: request.reviewer,
            override_: request.override_,
        };
        self.record(event)?;
        self.item(item_id)
    }

    /// Writes the session's variant next to the served manifest and adds it
    /// to the manifest. Partial sessions are allowed.
    pub fn apply(&mut self, session_id: &str, variant: &str) -> Result<ApplySummary> {
        let session = self.state.session(session_id)?.clone();
        if let Some(existing) = &session.applied_variant {
            return Err(CurationError::Conflict(format!(
                "session {session_id} was already applied as {existing:?}"
            )));
        }
        let plan = plan_variant(&self.manifest, &session)?;
        let summary = write_variant(&self.manifest, &session, variant, &plan, &self.manifest_path)?;
        self.manifest = load_manifest(&self.manifest_path)?;
        self.record(Event::SessionClosed {
            at: self.clock.timestamp(),
            session_id: session_id.to_string(),
            variant: variant.to_string(),
        })?;
        Ok(summary)
    }

    pub fn option_mask(&self, item_id: &str, side: Side) -> Result<LabelMask> {
        let (_, item) = self.state.item(item_id)?;
        let sample = self.sample(&item.sample_id)?;
        option_mask(&self.manifest, sample, item.options.get(side))
    }

    fn sample(&self, id: &str) -> Result<&SampleRecord> {
        self.manifest
            .sample(id)
            .ok_or_else(|| CurationError::NotFound(format!("sample {id:?}")))
    }

    pub fn photo(&self, item_id: &str) -> Result<RgbImage> {
        let (_, item) = self.state.item(item_id)?;
        let sample = self.sample(&item.sample_id)?;
        let path = self.manifest.image_path(sample, &self.image_root);
        let photo = image::open(&path)
            .map_err(|e| CurationError::NotFound(format!("photo {}: {e}", path.display())))?
            .to_rgb8();
        Ok(photo)
    }

    pub fn overlay(&self, item_id: &str, side: Side, alpha: f32) -> Result<RgbImage> {
        let mask = self.option_mask(item_id, side)?;
        let photo = self.photo(item_id)?;
        Ok(render_overlay(&photo, &mask, alpha)?)
    }
}

pub fn encode_png(image: &RgbImage) -> Vec<u8> {
    let mut out = Cursor::new(Vec::new());
    image
        .write_to(&mut out, ImageFormat::Png)
        .expect("in-memory png encoding");
    out.into_inner()
}
