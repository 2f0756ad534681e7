mod common;

use std::collections::BTreeSet;
use std::fs;
use std::sync::Arc;

use woodmask_core::manifest::load_manifest;
use woodmask_core::{cast_rot_maybe, ClassId};
use woodmask_curation::model::{Choice, ItemView, Mode, NextItem, OptionSource, SampleFilter, Side};
use woodmask_curation::service::{side_seed, swapped, LOG_FILE, SNAPSHOT_FILE};
use woodmask_curation::{
    CreateSession, CurationError, DecisionLog, DecisionRequest, Service, ServiceConfig, State,
    SteppingClock,
};

fn open(dir: &std::path::Path, manifest: std::path::PathBuf) -> Service {
    let config = ServiceConfig {
        manifest,
        image_root: None,
        state_dir: dir.join("state"),
    };
    Service::open(&config, Arc::new(SteppingClock::new(1_700_000_000))).unwrap()
}

fn rot_maybe_session(seed: u64) -> CreateSession {
    CreateSession {
        mode: Mode::RotMaybeCast,
        filter: SampleFilter::default(),
        seed,
    }
}

fn decide(choice: Choice) -> DecisionRequest {
    DecisionRequest {
        choice,
        reviewer: "expert".into(),
        override_: false,
    }
}

#[test]
fn session_covers_rot_maybe_samples_only() {
    let dir = tempfile::tempdir().unwrap();
    let mut svc = open(dir.path(), common::fixture(dir.path(), 3, 2));
    let view = svc.create_session(rot_maybe_session(1)).unwrap();
    assert_eq!(view.session_id, "s1");
    assert_eq!(view.progress.total, 3);
    assert_eq!(view.item_ids, vec!["s1-1", "s1-2", "s1-3"]);
}

#[test]
fn rot_maybe_free_manifest_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let mut svc = open(dir.path(), common::fixture(dir.path(), 0, 3));
    match svc.create_session(rot_maybe_session(1)) {
        Err(CurationError::Invalid(msg)) => assert!(msg.contains("3 considered"), "{msg}"),
        other => panic!("expected rejection, got {other:?}"),
    }
}

#[test]
fn next_item_progresses_and_completes() {
    let dir = tempfile::tempdir().unwrap();
    let mut svc = open(dir.path(), common::fixture(dir.path(), 3, 0));
    svc.create_session(rot_maybe_session(2)).unwrap();
    let NextItem::Pending(first) = svc.next_item("s1").unwrap() else {
        panic!("expected a pending item");
    };
    assert_eq!(first.index, 1);
    svc.submit_decision(&first.item_id, decide(Choice::A)).unwrap();
    let NextItem::Pending(second) = svc.next_item("s1").unwrap() else {
        panic!("expected a pending item");
    };
    assert_eq!(second.index, 2);
    svc.submit_decision("s1-2", decide(Choice::Skip)).unwrap();
    svc.submit_decision("s1-3", decide(Choice::B)).unwrap();
    match svc.next_item("s1").unwrap() {
        NextItem::Complete { progress, .. } => assert_eq!((progress.decided, progress.total), (3, 3)),
        other => panic!("expected completion, got {other:?}"),
    }
}

#[test]
fn decisions_are_idempotent_and_conflicts_need_override() {
    let dir = tempfile::tempdir().unwrap();
    let mut svc = open(dir.path(), common::fixture(dir.path(), 2, 0));
    svc.create_session(rot_maybe_session(3)).unwrap();
    let first = svc.submit_decision("s1-1", decide(Choice::A)).unwrap();
    let log = dir.path().join("state").join(LOG_FILE);
    let lines = || DecisionLog::read(&log).unwrap().len();
    assert_eq!(lines(), 2);
    assert!(matches!(first, ItemView::Decided(ref d) if d.decision.choice == Choice::A));

    let again = svc.submit_decision("s1-1", decide(Choice::A)).unwrap();
    assert_eq!(again, first);
    assert_eq!(lines(), 2);

    assert!(matches!(
        svc.submit_decision("s1-1", decide(Choice::B)),
        Err(CurationError::Conflict(_))
    ));
    let changed = svc
        .submit_decision(
            "s1-1",
            DecisionRequest {
                override_: true,
                ..decide(Choice::B)
            },
        )
        .unwrap();
    assert!(matches!(changed, ItemView::Decided(ref d) if d.decision.choice == Choice::B));
    assert!(matches!(
        svc.submit_decision("s9-9", decide(Choice::A)),
        Err(CurationError::NotFound(_))
    ));
}

#[test]
fn pending_views_reveal_no_provenance() {
    let dir = tempfile::tempdir().unwrap();
    let mut svc = open(dir.path(), common::fixture(dir.path(), 2, 0));
    svc.create_session(rot_maybe_session(4)).unwrap();
    let pending = serde_json::to_value(svc.item("s1-1").unwrap()).unwrap();
    let keys: BTreeSet<&str> = pending.as_object().unwrap().keys().map(String::as_str).collect();
    let allowed: BTreeSet<&str> = [
        "status", "item_id", "session_id", "mode", "index", "sample_id", "image_url",
        "overlay_a_url", "overlay_b_url", "progress",
    ]
    .into();
    assert_eq!(keys, allowed);
    let text = pending.to_string();
    for leak in ["cast-to", "provenance", "Rot\"", "Crosscut", "model:", "ground-truth"] {
        assert!(!text.contains(leak), "{leak} in {text}");
    }

    let decided = serde_json::to_value(svc.submit_decision("s1-1", decide(Choice::A)).unwrap()).unwrap();
    assert!(decided["provenance"]["a"].as_str().unwrap().starts_with("cast-to-"));
}

#[test]
fn apply_writes_chosen_castings_and_replay_matches() {
    let dir = tempfile::tempdir().unwrap();
    let manifest_path = common::fixture(dir.path(), 4, 1);
    let original_bytes: Vec<Vec<u8>> = (0..5)
        .map(|k| fs::read(dir.path().join(format!("masks/original/log-{k:02}.png"))).unwrap())
        .collect();
    let mut svc = open(dir.path(), manifest_path.clone());
    svc.create_session(rot_maybe_session(5)).unwrap();
    let choices = [Choice::A, Choice::B, Choice::B, Choice::A];
    for (k, &c) in choices.iter().enumerate() {
        svc.submit_decision(&format!("s1-{}", k + 1), decide(c)).unwrap();
    }
    let summary = svc.apply("s1", "no_rm").unwrap();
    assert_eq!((summary.samples_written, summary.replaced, summary.kept), (5, 4, 1));

    let manifest = load_manifest(&manifest_path).unwrap();
    let session = svc.state().session("s1").unwrap().clone();
    for item in &session.items {
        let sample = manifest.sample(&item.sample_id).unwrap();
        let got = manifest.load_mask(sample, "no_rm").unwrap();
        assert!(!got.contains(ClassId::RotMaybe));
        let side = item.decision.as_ref().unwrap().choice.side().unwrap();
        let OptionSource::Casting { target, .. } = item.options.get(side) else {
            panic!("rot-maybe items hold castings");
        };
        let original = manifest.load_mask(sample, "original").unwrap();
        assert_eq!(got, cast_rot_maybe(&original, *target).unwrap());
    }
    for (k, bytes) in original_bytes.iter().enumerate() {
        let now = fs::read(dir.path().join(format!("masks/original/log-{k:02}.png"))).unwrap();
        assert_eq!(&now, bytes, "original mask {k} rewritten");
    }

    assert!(matches!(svc.apply("s1", "other"), Err(CurationError::Conflict(_))));
    svc.create_session(rot_maybe_session(6)).unwrap();
    assert!(matches!(svc.apply("s2", "no_rm"), Err(CurationError::Conflict(_))));

    let events = DecisionLog::read(&dir.path().join("state").join(LOG_FILE)).unwrap();
    let replayed = State::replay(&events).unwrap();
    assert_eq!(replayed.to_json(), svc.state().to_json());
    let snapshot = fs::read_to_string(dir.path().join("state").join(SNAPSHOT_FILE)).unwrap();
    assert_eq!(snapshot, svc.state().to_json());

    drop(svc);
    let reopened = open(dir.path(), manifest_path);
    assert_eq!(reopened.state().to_json(), replayed.to_json());
}

#[test]
fn skipped_items_keep_the_original() {
    let dir = tempfile::tempdir().unwrap();
    let manifest_path = common::fixture(dir.path(), 2, 0);
    let mut svc = open(dir.path(), manifest_path.clone());
    svc.create_session(rot_maybe_session(7)).unwrap();
    svc.submit_decision("s1-1", decide(Choice::Skip)).unwrap();
    svc.apply("s1", "partial").unwrap();
    let manifest = load_manifest(&manifest_path).unwrap();
    for sample in &manifest.samples {
        assert_eq!(
            manifest.load_mask(sample, "partial").unwrap(),
            manifest.load_mask(sample, "original").unwrap()
        );
    }
}

#[test]
fn blind_gt_choice_reproduces_ground_truth() {
    let dir = tempfile::tempdir().unwrap();
    let manifest_path = common::fixture(dir.path(), 2, 2);
    let mut svc = open(dir.path(), manifest_path.clone());
    let request = CreateSession {
        mode: Mode::BlindGtVsPred,
        filter: SampleFilter {
            model: Some("m1".into()),
            ..Default::default()
        },
        seed: 11,
    };
    let view = svc.create_session(request).unwrap();
    for id in &view.item_ids {
        let (_, item) = svc.state().item(id).unwrap();
        let gt_side = if matches!(item.options.a, OptionSource::Variant { .. }) { Choice::A } else { Choice::B };
        svc.submit_decision(id, decide(gt_side)).unwrap();
    }
    svc.apply("s1", "augmented").unwrap();
    let manifest = load_manifest(&manifest_path).unwrap();
    for sample in &manifest.samples {
        assert_eq!(
            manifest.load_mask(sample, "augmented").unwrap(),
            manifest.load_mask(sample, "original").unwrap()
        );
    }
}

#[test]
fn blind_placement_follows_the_seeded_generator() {
    let dir = tempfile::tempdir().unwrap();
    let manifest_path = common::fixture(dir.path(), 0, 100);
    let mut svc = open(dir.path(), manifest_path);
    let request = CreateSession {
        mode: Mode::BlindGtVsPred,
        filter: SampleFilter {
            model: Some("m1".into()),
            ..Default::default()
        },
        seed: 2023,
    };
    svc.create_session(request).unwrap();
    let session = svc.state().session("s1").unwrap();
    let gt_on_a = session
        .items
        .iter()
        .filter(|i| matches!(i.options.a, OptionSource::Variant { .. }))
        .count();
    let expect = (1..=100).filter(|&i| !swapped(side_seed(2023, i))).count();
    assert_eq!(gt_on_a, expect);
    assert!((35..=65).contains(&gt_on_a), "{gt_on_a}");
}

#[test]
fn overlays_render_at_requested_opacity() {
    let dir = tempfile::tempdir().unwrap();
    let mut svc = open(dir.path(), common::fixture(dir.path(), 1, 0));
    svc.create_session(rot_maybe_session(8)).unwrap();
    let photo = svc.photo("s1-1").unwrap();
    assert_eq!(svc.overlay("s1-1", Side::A, 0.0).unwrap(), photo);
    let opaque = svc.overlay("s1-1", Side::B, 1.0).unwrap();
    let mask = svc.option_mask("s1-1", Side::B).unwrap();
    for (x, y, p) in opaque.enumerate_pixels() {
        let class = mask.get(x, y);
        assert_eq!(p.0, woodmask_core::overlay::PALETTE[class.index()], "({x},{y})");
    }
}
