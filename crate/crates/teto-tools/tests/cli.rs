//! End-to-end tests of the `teto` binary: exit codes, stderr
//! diagnostics, output files and cross-run determinism.

use std::path::{Path, PathBuf};
use std::process::Command;

use tempfile::TempDir;
use teto_core::{BinaryMask, Event, EventStream, FlowField, Image, TrajectorySet};
use teto_tools::formats::events::{write_events, write_events_csv};
use teto_tools::formats::flo::write_flo;
use teto_tools::formats::masks::write_manifest;
use teto_tools::formats::pgm::write_pgm;
use teto_tools::formats::tensor::write_tensor;
use teto_tools::formats::tracks::write_tracks;

fn teto() -> Command {
    Command::new(env!("CARGO_BIN_EXE_teto"))
}

struct Run {
    code: i32,
    stdout: String,
    stderr: String,
}

fn run(dir: &Path, args: &[&str]) -> Run {
    let output = teto().current_dir(dir).args(args).output().expect("binary runs");
    Run {
        code: output.status.code().expect("no signal"),
        stdout: String::from_utf8(output.stdout).expect("utf-8 stdout"),
        stderr: String::from_utf8(output.stderr).expect("utf-8 stderr"),
    }
}

fn stderr_json(r: &Run) -> serde_json::Value {
    serde_json::from_str(r.stderr.lines().last().expect("diagnostic line")).expect("json stderr")
}

fn stdout_json(r: &Run) -> serde_json::Value {
    serde_json::from_str(r.stdout.lines().last().expect("summary line")).expect("json stdout")
}

/// Deterministic event stream with activity spread over the frame.
fn fixture_stream(width: u32, height: u32, count: usize) -> EventStream {
    let mut events = Vec::with_capacity(count);
    let mut state = 0x1234_5678_9abc_def0u64;
    for i in 0..count {
        state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        let x = ((state >> 33) % u64::from(width)) as u16;
        let y = ((state >> 17) % u64::from(height)) as u16;
        let p = if state & 1 == 0 { 1 } else { -1 };
        events.push(Event { x, y, t_us: (i as i64) * 37, p });
    }
    EventStream::new(width, height, events).expect("fixture in bounds")
}

#[test]
fn missing_input_exits_2_and_names_the_path() {
    let dir = TempDir::new().unwrap();
    let r = run(dir.path(), &["stack", "--events", "absent.bin", "--t", "5", "--out-dir", "o"]);
    assert_eq!(r.code, 2, "stderr: {}", r.stderr);
    let diag = stderr_json(&r);
    assert_eq!(diag["error"], "io");
    assert_eq!(diag["exit"], 2);
    assert!(diag["message"].as_str().unwrap().contains("absent.bin"));
}

#[test]
fn invalid_stack_config_exits_2() {
    let dir = TempDir::new().unwrap();
    let events = dir.path().join("ev.bin");
    write_events(&events, &fixture_stream(16, 12, 50)).unwrap();
    let r = run(dir.path(), &["stack", "--events", "ev.bin", "--t", "5", "--bins", "0", "--out-dir", "o"]);
    assert_eq!(r.code, 2);
    assert_eq!(stderr_json(&r)["error"], "invalid-config");
}

#[test]
fn stack_writes_one_pair_per_timestamp() {
    let dir = TempDir::new().unwrap();
    write_events(&dir.path().join("ev.bin"), &fixture_stream(16, 12, 400)).unwrap();
    let r = run(
        dir.path(),
        &["stack", "--events", "ev.bin", "--t", "1000,2000,3000", "--num-events", "64", "--bins", "4", "--out-dir", "stacks"],
    );
    assert_eq!(r.code, 0, "stderr: {}", r.stderr);
    assert_eq!(stdout_json(&r)["stacks"], 3);
    for t in [1000, 2000, 3000] {
        assert!(dir.path().join(format!("stacks/stack_{t}.bin")).is_file());
        assert!(dir.path().join(format!("stacks/stack_{t}.json")).is_file());
    }
}

#[test]
fn iei_on_stream_without_intervals_exits_2() {
    let dir = TempDir::new().unwrap();
    // Every pixel fires exactly once, so no pixel has a second event.
    let events: Vec<Event> =
        (0..10).map(|i| Event { x: i, y: 0, t_us: i64::from(i) * 10, p: 1 }).collect();
    write_events(&dir.path().join("ev.bin"), &EventStream::new(16, 4, events).unwrap()).unwrap();
    let r = run(dir.path(), &["iei", "--events", "ev.bin", "--out-csv", "h.csv"]);
    assert_eq!(r.code, 2);
    assert_eq!(stderr_json(&r)["error"], "no-intervals");
}

#[test]
fn iei_defaults_to_200_bins_and_writes_csv() {
    let dir = TempDir::new().unwrap();
    write_events(&dir.path().join("ev.bin"), &fixture_stream(8, 8, 500)).unwrap();
    let r = run(dir.path(), &["iei", "--events", "ev.bin", "--out-csv", "h.csv", "--out-json", "h.json"]);
    assert_eq!(r.code, 0, "stderr: {}", r.stderr);
    let summary = stdout_json(&r);
    assert_eq!(summary["bins"], 200);
    let csv = std::fs::read_to_string(dir.path().join("h.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("bin_left_us,density"));
    assert_eq!(lines.count(), 200);
    let from_file: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("h.json")).unwrap()).unwrap();
    assert_eq!(from_file["bins"], summary["bins"]);
    assert_eq!(from_file["samples"], summary["samples"]);
}

#[test]
fn compare_of_identical_streams_reports_unit_ratio() {
    let dir = TempDir::new().unwrap();
    let stream = fixture_stream(12, 12, 800);
    write_events(&dir.path().join("a.bin"), &stream).unwrap();
    write_events_csv(&dir.path().join("b.csv"), &stream).unwrap();
    let r = run(
        dir.path(),
        &["compare", "--real", "a.bin", "--synth", "b.csv", "--out-json", "cmp.json"],
    );
    assert_eq!(r.code, 0, "stderr: {}", r.stderr);
    let summary = stdout_json(&r);
    assert_eq!(summary["mean_ratio"], 1.0);
    assert_eq!(summary["bins"], 200);
}

#[test]
fn config_file_fills_gaps_and_flags_override_it() {
    let dir = TempDir::new().unwrap();
    write_events(&dir.path().join("ev.bin"), &fixture_stream(8, 8, 500)).unwrap();
    std::fs::write(dir.path().join("cfg.json"), r#"{ "bins": 16 }"#).unwrap();

    let from_file = run(
        dir.path(),
        &["iei", "--events", "ev.bin", "--out-csv", "a.csv", "--config", "cfg.json"],
    );
    assert_eq!(from_file.code, 0);
    assert_eq!(stdout_json(&from_file)["bins"], 16);

    let overridden = run(
        dir.path(),
        &["iei", "--events", "ev.bin", "--out-csv", "b.csv", "--config", "cfg.json", "--bins", "32"],
    );
    assert_eq!(overridden.code, 0);
    assert_eq!(stdout_json(&overridden)["bins"], 32);
}

#[test]
fn unknown_config_key_exits_2() {
    let dir = TempDir::new().unwrap();
    write_events(&dir.path().join("ev.bin"), &fixture_stream(8, 8, 500)).unwrap();
    std::fs::write(dir.path().join("cfg.json"), r#"{ "bin": 16 }"#).unwrap();
    let r = run(
        dir.path(),
        &["iei", "--events", "ev.bin", "--out-csv", "a.csv", "--config", "cfg.json"],
    );
    assert_eq!(r.code, 2);
    assert_eq!(stderr_json(&r)["error"], "parse");
}

#[test]
fn unknown_flag_exits_2() {
    let dir = TempDir::new().unwrap();
    let r = run(dir.path(), &["iei", "--events", "ev.bin", "--out-csv", "a.csv", "--frobnicate"]);
    assert_eq!(r.code, 2);
}

#[test]
fn help_shows_the_documented_defaults() {
    let dir = TempDir::new().unwrap();
    for (sub, needles) in [
        ("stack", vec!["default: 300000", "default: 10"]),
        ("iei", vec!["default: 200", "99.9th percentile"]),
        ("decompose", vec!["default: 2", "default: 500", "default: 0.2", "default: 0.5", "default: 0.3", "default: 20000", "default: 4", "default: 3", "default: 7", "default: 200"]),
        ("sample", vec!["default: 0.9"]),
        ("evmask", vec!["default: 10000", "default: 1000", "default: count"]),
        ("loss", vec!["default: 0.8", "default: 1", "default: 0.01", "default: 0.5", "default: 0.3"]),
    ] {
        let r = run(dir.path(), &[sub, "--help"]);
        assert_eq!(r.code, 0);
        for needle in needles {
            assert!(r.stdout.contains(needle), "{sub} --help misses {needle:?}:\n{}", r.stdout);
        }
    }
}

/// Translation field with light deterministic noise and a block of
/// outliers, enough signal for an exact-translation recovery check.
fn translation_flow(dir: &Path) -> PathBuf {
    let (w, h) = (48u32, 36u32);
    let cells = (w * h) as usize;
    let mut u = vec![0.0f32; cells];
    let mut v = vec![0.0f32; cells];
    for y in 0..h {
        for x in 0..w {
            let i = (y * w + x) as usize;
            let n = ((i as u64).wrapping_mul(0x9E3779B97F4A7C15) >> 40) % 16;
            let noise = (n as f32 - 8.0) / 64.0;
            u[i] = 3.0 + noise;
            v[i] = -2.0 - noise;
        }
    }
    for y in 5..12 {
        for x in 30..44 {
            let i = (y * w + x) as usize;
            u[i] = 25.0;
            v[i] = 14.0;
        }
    }
    let field = FlowField::new(w, h, u, v, None, None).unwrap();
    let path = dir.join("flow.flo");
    write_flo(&path, &field).unwrap();
    path
}

#[test]
fn decompose_recovers_a_translation_and_flags_the_outlier_block() {
    let dir = TempDir::new().unwrap();
    translation_flow(dir.path());
    let r = run(
        dir.path(),
        &["decompose", "--flow", "flow.flo", "--seed", "9", "--min-component", "20", "--out-affine", "a.json", "--out-mask", "m.pgm", "--out-raw-mask", "raw.pgm"],
    );
    assert_eq!(r.code, 0, "stderr: {}", r.stderr);
    let affine: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("a.json")).unwrap()).unwrap();
    let a = &affine["a"];
    assert!((a[0][2].as_f64().unwrap() - 3.0).abs() < 0.1);
    assert!((a[1][2].as_f64().unwrap() + 2.0).abs() < 0.1);
    for (r_, c) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
        assert!(a[r_][c].as_f64().unwrap().abs() < 0.01);
    }
    let mask = teto_tools::formats::pgm::read_pgm(&dir.path().join("m.pgm")).unwrap();
    // The outlier block must dominate the detected region.
    let mut hits = 0;
    for y in 5..12 {
        for x in 30..44 {
            if mask.get(x, y) {
                hits += 1;
            }
        }
    }
    assert!(hits > 49, "only {hits} of 98 outlier pixels kept");
}

#[test]
fn decompose_is_byte_deterministic_for_a_fixed_seed() {
    let dir = TempDir::new().unwrap();
    translation_flow(dir.path());
    for pass in ["one", "two"] {
        let r = run(
            dir.path(),
            &["decompose", "--flow", "flow.flo", "--seed", "42", "--out-affine", &format!("a_{pass}.json"), "--out-mask", &format!("m_{pass}.pgm"), "--out-residual", &format!("r_{pass}.bin")],
        );
        assert_eq!(r.code, 0, "stderr: {}", r.stderr);
    }
    for (a, b) in [("a_one.json", "a_two.json"), ("m_one.pgm", "m_two.pgm"), ("r_one.bin", "r_two.bin")] {
        assert_eq!(
            std::fs::read(dir.path().join(a)).unwrap(),
            std::fs::read(dir.path().join(b)).unwrap(),
            "{a} differs from {b}",
        );
    }
}

#[test]
fn decompose_on_collinear_samples_exits_3() {
    let dir = TempDir::new().unwrap();
    // One-row field: every sample position is collinear, no affine
    // model is determined.
    let w = 24u32;
    let u: Vec<f32> = (0..w).map(|x| 1.0 + x as f32).collect();
    let v = vec![2.0f32; w as usize];
    write_flo(&dir.path().join("row.flo"), &FlowField::new(w, 1, u, v, None, None).unwrap())
        .unwrap();
    let r = run(
        dir.path(),
        &["decompose", "--flow", "row.flo", "--seed", "1", "--out-affine", "a.json", "--out-mask", "m.pgm"],
    );
    assert_eq!(r.code, 3, "stderr: {}", r.stderr);
    assert_eq!(stderr_json(&r)["error"], "degenerate-geometry");
}

#[test]
fn sample_splits_queries_nine_to_one_and_is_deterministic() {
    let dir = TempDir::new().unwrap();
    let mut mask = BinaryMask::new(32, 24);
    for y in 4..12 {
        for x in 6..20 {
            mask.set(x, y, true);
        }
    }
    write_pgm(&dir.path().join("m.pgm"), &mask).unwrap();
    let args = ["sample", "--mask", "m.pgm", "--crop-x", "100", "--crop-y", "50", "--n-q", "100", "--t-query", "7000", "--seed", "5", "--out", "q.json"];
    let r = run(dir.path(), &args);
    assert_eq!(r.code, 0, "stderr: {}", r.stderr);
    let summary = stdout_json(&r);
    assert_eq!(summary["object"], 90);
    assert_eq!(summary["uniform"], 10);
    assert_eq!(summary["fallback_uniform"], false);

    let first = std::fs::read(dir.path().join("q.json")).unwrap();
    let parsed: serde_json::Value = serde_json::from_slice(&first).unwrap();
    let points = parsed["points"].as_array().unwrap();
    assert_eq!(points.len(), 100);
    for p in points {
        let (x, y) = (p["x"].as_u64().unwrap(), p["y"].as_u64().unwrap());
        assert!((100..132).contains(&x) && (50..74).contains(&y), "({x}, {y}) outside crop");
        assert_eq!(p["t_us"], 7000);
        if p["provenance"] == "object" {
            assert!((106..120).contains(&x) && (54..62).contains(&y), "({x}, {y}) off mask");
        }
    }

    let again = run(dir.path(), &args);
    assert_eq!(again.code, 0);
    assert_eq!(std::fs::read(dir.path().join("q.json")).unwrap(), first);
}

#[test]
fn evmask_count_mode_writes_a_mask_per_frame() {
    let dir = TempDir::new().unwrap();
    write_events(&dir.path().join("ev.bin"), &fixture_stream(24, 18, 3000)).unwrap();
    std::fs::write(dir.path().join("frames.csv"), "20000\n40000\n60000\n").unwrap();
    let r = run(
        dir.path(),
        &["evmask", "--events", "ev.bin", "--frames", "frames.csv", "--n-wide", "400", "--n-narrow", "60", "--out-dir", "masks"],
    );
    assert_eq!(r.code, 0, "stderr: {}", r.stderr);
    assert_eq!(stdout_json(&r)["masks"], 3);
    for t in [20000, 40000, 60000] {
        let mask =
            teto_tools::formats::pgm::read_pgm(&dir.path().join(format!("masks/mask_{t}.pgm")))
                .unwrap();
        assert_eq!((mask.width(), mask.height()), (24, 18));
        assert!(mask.count_ones() > 0, "mask_{t} is empty");
    }
}

#[test]
fn evmask_time_mode_requires_both_deltas() {
    let dir = TempDir::new().unwrap();
    write_events(&dir.path().join("ev.bin"), &fixture_stream(24, 18, 500)).unwrap();
    std::fs::write(dir.path().join("frames.csv"), "9000\n").unwrap();
    let missing = run(
        dir.path(),
        &["evmask", "--events", "ev.bin", "--frames", "frames.csv", "--mode", "time", "--delta-wide-us", "4000", "--out-dir", "masks"],
    );
    assert_eq!(missing.code, 2);
    assert_eq!(stderr_json(&missing)["error"], "config");

    let ok = run(
        dir.path(),
        &["evmask", "--events", "ev.bin", "--frames", "frames.csv", "--mode", "time", "--delta-wide-us", "4000", "--delta-narrow-us", "500", "--out-dir", "masks"],
    );
    assert_eq!(ok.code, 0, "stderr: {}", ok.stderr);
    assert!(dir.path().join("masks/mask_9000.pgm").is_file());
}

#[test]
fn curate_propose_places_crops_inside_the_frame() {
    let dir = TempDir::new().unwrap();
    // All activity in the bottom-right corner patch.
    let events: Vec<Event> =
        (0..300).map(|i| Event { x: 60 + (i % 4), y: 44 + (i % 4), t_us: i64::from(i), p: 1 }).collect();
    write_events(&dir.path().join("ev.bin"), &EventStream::new(64, 48, events).unwrap()).unwrap();
    let r = run(
        dir.path(),
        &["curate", "propose", "--events", "ev.bin", "--patch", "16", "--k", "2", "--frame-width", "640", "--frame-height", "480", "--crop-width", "200", "--crop-height", "150", "--out", "cand.jsonl"],
    );
    assert_eq!(r.code, 0, "stderr: {}", r.stderr);
    let lines: Vec<serde_json::Value> =
        std::fs::read_to_string(dir.path().join("cand.jsonl"))
            .unwrap()
            .lines()
            .map(|l| serde_json::from_str(l).unwrap())
            .collect();
    assert_eq!(lines.len(), 1, "only one patch holds events");
    assert_eq!(lines[0]["sequence"], "ev", "defaults to the events file stem");
    assert_eq!(lines[0]["start_frame"], 0);
    assert_eq!(lines[0]["mask_path"], serde_json::Value::Null);
    let crop = &lines[0]["crop"];
    // The dense patch center (56, 40) maps to (560, 400); centering
    // would put x at 460, clamped to 440 so the crop stays inside.
    assert_eq!(crop["x"], 440);
    assert_eq!(crop["y"], 325);
    assert_eq!(crop["width"], 200);
    assert_eq!(crop["height"], 150);
}

#[test]
fn curate_propose_output_feeds_curate_build() {
    let dir = TempDir::new().unwrap();
    let events: Vec<Event> =
        (0..300).map(|i| Event { x: 60 + (i % 4), y: 44 + (i % 4), t_us: i64::from(i), p: 1 }).collect();
    write_events(&dir.path().join("ev.bin"), &EventStream::new(64, 48, events).unwrap()).unwrap();
    let proposed = run(
        dir.path(),
        &["curate", "propose", "--events", "ev.bin", "--patch", "16", "--frame-width", "640", "--frame-height", "480", "--crop-width", "20", "--crop-height", "10", "--sequence", "walk", "--out", "cand.jsonl"],
    );
    assert_eq!(proposed.code, 0, "stderr: {}", proposed.stderr);

    // Building straight away names the record that still lacks a mask.
    let unfilled = run(
        dir.path(),
        &["curate", "build", "--candidates", "cand.jsonl", "--seed", "1", "--out-pool", "pool.jsonl", "--out-stats", "stats.json"],
    );
    assert_eq!(unfilled.code, 2);
    assert!(stderr_json(&unfilled)["message"].as_str().unwrap().contains("walk"));

    let mut mask = BinaryMask::new(20, 10);
    for y in 0..10 {
        for x in 0..10 {
            mask.set(x, y, true);
        }
    }
    write_pgm(&dir.path().join("m.pgm"), &mask).unwrap();
    let filled: String = std::fs::read_to_string(dir.path().join("cand.jsonl"))
        .unwrap()
        .lines()
        .map(|l| {
            let mut v: serde_json::Value = serde_json::from_str(l).unwrap();
            v["mask_path"] = "m.pgm".into();
            v.to_string() + "\n"
        })
        .collect();
    std::fs::write(dir.path().join("cand.jsonl"), filled).unwrap();

    let built = run(
        dir.path(),
        &["curate", "build", "--candidates", "cand.jsonl", "--seed", "1", "--out-pool", "pool.jsonl", "--out-stats", "stats.json"],
    );
    assert_eq!(built.code, 0, "stderr: {}", built.stderr);
    assert_eq!(stdout_json(&built)["accepted"], 1);
    let pool = std::fs::read_to_string(dir.path().join("pool.jsonl")).unwrap();
    let entry: serde_json::Value = serde_json::from_str(pool.lines().next().unwrap()).unwrap();
    assert_eq!(entry["sequence"], "walk");
    assert_eq!(entry["area_ratio"], 0.5);
}

fn write_candidate_masks(dir: &Path) {
    let mut dense = BinaryMask::new(20, 10);
    for y in 0..10 {
        for x in 0..10 {
            dense.set(x, y, true);
        }
    }
    let mut sparse = BinaryMask::new(20, 10);
    sparse.set(0, 0, true);
    write_pgm(&dir.join("dense.pgm"), &dense).unwrap();
    write_pgm(&dir.join("sparse.pgm"), &sparse).unwrap();
}

#[test]
fn curate_build_filters_by_area_and_draws_deterministically() {
    let dir = TempDir::new().unwrap();
    write_candidate_masks(dir.path());
    let lines = [
        r#"{"sequence":"a","start_frame":0,"crop":{"x":0,"y":0,"width":20,"height":10},"mask_path":"dense.pgm"}"#,
        r#"{"sequence":"a","start_frame":1,"crop":{"x":4,"y":0,"width":20,"height":10},"mask_path":"sparse.pgm"}"#,
        r#"{"sequence":"b","start_frame":0,"crop":{"x":0,"y":2,"width":20,"height":10},"mask_path":"dense.pgm"}"#,
        r#"{"sequence":"b","start_frame":1,"crop":{"x":0,"y":4,"width":20,"height":10},"mask_path":"dense.pgm"}"#,
    ];
    std::fs::write(dir.path().join("cand.jsonl"), lines.join("\n") + "\n").unwrap();
    let args = ["curate", "build", "--candidates", "cand.jsonl", "--seed", "13", "--draw", "8", "--out-pool", "pool.jsonl", "--out-stats", "stats.json", "--out-draw", "draw.jsonl"];
    let r = run(dir.path(), &args);
    assert_eq!(r.code, 0, "stderr: {}", r.stderr);
    let summary = stdout_json(&r);
    assert_eq!(summary["accepted"], 3);
    assert_eq!(summary["rejected"], 1);

    let stats: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("stats.json")).unwrap())
            .unwrap();
    let sequences = stats["sequences"].as_array().unwrap();
    assert_eq!(sequences[0]["sequence"], "a");
    assert_eq!(sequences[0]["motion_ratio"], 0.5);
    assert_eq!(sequences[1]["sequence"], "b");
    assert_eq!(sequences[1]["motion_ratio"], 1.0);
    let wa = sequences[0]["weight"].as_f64().unwrap();
    let wb = sequences[1]["weight"].as_f64().unwrap();
    assert!((wa + wb - 1.0).abs() < 1e-12);
    assert!(wb > wa, "higher motion ratio must weigh more");

    let draw_once = std::fs::read(dir.path().join("draw.jsonl")).unwrap();
    assert_eq!(String::from_utf8_lossy(&draw_once).lines().count(), 8);
    let again = run(dir.path(), &args);
    assert_eq!(again.code, 0);
    assert_eq!(std::fs::read(dir.path().join("draw.jsonl")).unwrap(), draw_once);
}

#[test]
fn curate_build_rejects_mask_crop_size_mismatch() {
    let dir = TempDir::new().unwrap();
    write_candidate_masks(dir.path());
    std::fs::write(
        dir.path().join("cand.jsonl"),
        r#"{"sequence":"a","start_frame":0,"crop":{"x":0,"y":0,"width":64,"height":64},"mask_path":"dense.pgm"}"#,
    )
    .unwrap();
    let r = run(
        dir.path(),
        &["curate", "build", "--candidates", "cand.jsonl", "--seed", "1", "--out-pool", "p.jsonl", "--out-stats", "s.json"],
    );
    assert_eq!(r.code, 2);
    assert_eq!(stderr_json(&r)["error"], "config");
}

#[test]
fn oats_scores_an_adherent_track_and_writes_the_csv_row() {
    let dir = TempDir::new().unwrap();
    let mut object = BinaryMask::new(40, 20);
    for y in 2..8 {
        for x in 2..8 {
            object.set(x, y, true);
        }
    }
    for t in 0..3 {
        write_pgm(&dir.path().join(format!("obj_{t}.pgm")), &object).unwrap();
    }
    write_pgm(&dir.path().join("evmask.pgm"), &BinaryMask::filled(40, 20, true)).unwrap();
    let manifest: std::collections::BTreeMap<u32, std::collections::BTreeMap<u32, String>> =
        (0..3).map(|t| (t, [(1u32, format!("obj_{t}.pgm"))].into_iter().collect())).collect();
    write_manifest(&dir.path().join("manifest.json"), &manifest).unwrap();

    // Query 0 stays on the object; query 1 drifts to (20, 10) after
    // frame 0, about 13.3 pixels from the object's nearest pixel (7, 7),
    // adherent only at the widest threshold.
    let positions = vec![
        [4.0f32, 4.0],
        [4.0, 4.0],
        [4.0, 4.0],
        [4.0, 4.0],
        [20.0, 10.0],
        [20.0, 10.0],
    ];
    let visibility = vec![1.0f32; 6];
    let set = TrajectorySet::new(2, 3, positions, visibility, vec![0, 0], None).unwrap();
    write_tracks(&dir.path().join("t.trk"), &set).unwrap();

    let r = run(
        dir.path(),
        &["oats", "--tracks", "t.trk", "--masks", "manifest.json", "--event-mask", "evmask.pgm", "--scene", "unit", "--out-json", "o.json", "--out-csv", "o.csv"],
    );
    assert_eq!(r.code, 0, "stderr: {}", r.stderr);
    let summary = stdout_json(&r);
    assert_eq!(summary["total_queries"], 2);
    assert_eq!(summary["evaluated_queries"], 2);
    // Query 0 adheres everywhere; query 1 adheres only once the
    // dilation radius swallows its drift.
    let per_delta = summary["per_delta"].as_array().unwrap();
    assert_eq!(per_delta[0]["score"], 0.5);
    assert_eq!(per_delta.last().unwrap()["score"], 1.0);

    let csv = std::fs::read_to_string(dir.path().join("o.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("scene,oats_0,oats_1,oats_2,oats_4,oats_8,oats_16,oats_avg"));
    let row = lines.next().unwrap();
    assert!(row.starts_with("unit,0.5,"), "row: {row}");
}

fn write_track_fixture(dir: &Path) {
    // Two queries over three frames; the second iteration is offset by
    // 0.25 in x only.
    let pseudo = [1.0f32, 1.0, 2.0, 1.0, 3.0, 1.0, 5.0, 5.0, 5.0, 6.0, 5.0, 7.0];
    let mut pred2 = pseudo;
    for i in (0..pred2.len()).step_by(2) {
        pred2[i] += 0.25;
    }
    write_tensor(&dir.join("pseudo.bin"), &[2, 3, 2], &pseudo).unwrap();
    write_tensor(&dir.join("pred1.bin"), &[2, 3, 2], &pseudo).unwrap();
    write_tensor(&dir.join("pred2.bin"), &[2, 3, 2], &pred2).unwrap();
    write_tensor(&dir.join("vis.bin"), &[2, 3], &[1.0f32; 6]).unwrap();
    write_tensor(&dir.join("conf.bin"), &[2, 3], &[1.0f32; 6]).unwrap();
}

#[test]
fn loss_reports_track_and_total_without_flow_terms() {
    let dir = TempDir::new().unwrap();
    write_track_fixture(dir.path());
    let r = run(
        dir.path(),
        &["loss", "--pred-tracks", "pred1.bin,pred2.bin", "--pseudo-tracks", "pseudo.bin", "--visibility", "vis.bin", "--confidence", "conf.bin"],
    );
    assert_eq!(r.code, 0, "stderr: {}", r.stderr);
    let summary = stdout_json(&r);
    // Last iteration carries weight 1 and a constant 0.25 pixel error.
    assert!((summary["track"].as_f64().unwrap() - 0.25).abs() < 1e-6);
    assert_eq!(summary["flow"], serde_json::Value::Null);
    assert_eq!(summary["attn"], serde_json::Value::Null);
    assert_eq!(summary["total"], summary["track"]);
}

#[test]
fn loss_adds_the_weighted_flow_term() {
    let dir = TempDir::new().unwrap();
    write_track_fixture(dir.path());
    let cells = 6usize;
    let zero = vec![0.0f32; cells * 2];
    let mut off = zero.clone();
    for i in (0..off.len()).step_by(2) {
        off[i] = 1.0;
    }
    write_tensor(&dir.path().join("pf.bin"), &[2, 3, 2], &zero).unwrap();
    write_tensor(&dir.path().join("f1.bin"), &[2, 3, 2], &zero).unwrap();
    write_tensor(&dir.path().join("f2.bin"), &[2, 3, 2], &off).unwrap();
    let r = run(
        dir.path(),
        &["loss", "--pred-tracks", "pred1.bin,pred2.bin", "--pseudo-tracks", "pseudo.bin", "--visibility", "vis.bin", "--confidence", "conf.bin", "--pred-flows", "f1.bin,f2.bin", "--pseudo-flow", "pf.bin", "--out", "loss.json"],
    );
    assert_eq!(r.code, 0, "stderr: {}", r.stderr);
    let summary = stdout_json(&r);
    let track = summary["track"].as_f64().unwrap();
    let flow = summary["flow"].as_f64().unwrap();
    assert!((flow - 1.0).abs() < 1e-6, "flow: {flow}");
    assert!((summary["total"].as_f64().unwrap() - (track + 0.01 * flow)).abs() < 1e-12);
    let on_disk: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("loss.json")).unwrap())
            .unwrap();
    assert_eq!(on_disk, summary);
}

#[test]
fn loss_rejects_mismatched_iteration_counts() {
    let dir = TempDir::new().unwrap();
    write_track_fixture(dir.path());
    write_tensor(&dir.path().join("pf.bin"), &[2, 3, 2], &vec![0.0f32; 12]).unwrap();
    write_tensor(&dir.path().join("f1.bin"), &[2, 3, 2], &vec![0.0f32; 12]).unwrap();
    let r = run(
        dir.path(),
        &["loss", "--pred-tracks", "pred1.bin,pred2.bin", "--pseudo-tracks", "pseudo.bin", "--visibility", "vis.bin", "--confidence", "conf.bin", "--pred-flows", "f1.bin", "--pseudo-flow", "pf.bin"],
    );
    assert_eq!(r.code, 2);
    assert_eq!(stderr_json(&r)["error"], "config");
}

#[test]
fn warp_with_zero_flow_copies_the_payload() {
    let dir = TempDir::new().unwrap();
    let (w, h, c) = (9u32, 7u32, 3u32);
    let data: Vec<f32> = (0..w * h * c).map(|i| i as f32 * 0.37 - 20.0).collect();
    write_tensor(&dir.path().join("img.bin"), &[h, w, c], &data).unwrap();
    let zero = FlowField::uniform(w, h, 0.0, 0.0);
    write_flo(&dir.path().join("zero.flo"), &zero).unwrap();
    let r = run(
        dir.path(),
        &["warp", "--image", "img.bin", "--flow", "zero.flo", "--out", "warped.bin"],
    );
    assert_eq!(r.code, 0, "stderr: {}", r.stderr);
    assert_eq!(
        std::fs::read(dir.path().join("img.bin")).unwrap(),
        std::fs::read(dir.path().join("warped.bin")).unwrap(),
    );
}

#[test]
fn warp_blends_endpoints_exactly() {
    let dir = TempDir::new().unwrap();
    let a: Vec<f32> = (0..12).map(|i| i as f32).collect();
    let b: Vec<f32> = (0..12).map(|i| 100.0 - i as f32).collect();
    write_tensor(&dir.path().join("a.bin"), &[2, 3, 2], &a).unwrap();
    write_tensor(&dir.path().join("b.bin"), &[2, 3, 2], &b).unwrap();
    let r = run(
        dir.path(),
        &["warp", "--image", "a.bin", "--blend-with", "b.bin", "--t-norm", "1", "--out", "o.bin"],
    );
    assert_eq!(r.code, 0, "stderr: {}", r.stderr);
    assert_eq!(
        std::fs::read(dir.path().join("o.bin")).unwrap(),
        std::fs::read(dir.path().join("b.bin")).unwrap(),
    );
    let conflicted = run(
        dir.path(),
        &["warp", "--image", "a.bin", "--flow", "zero.flo", "--blend-with", "b.bin", "--t-norm", "1", "--out", "o.bin"],
    );
    assert_eq!(conflicted.code, 2);
}

#[test]
fn logging_stays_on_stderr_and_off_by_default() {
    let dir = TempDir::new().unwrap();
    write_events(&dir.path().join("ev.bin"), &fixture_stream(8, 8, 200)).unwrap();
    let quiet = run(dir.path(), &["iei", "--events", "ev.bin", "--out-csv", "h.csv"]);
    assert_eq!(quiet.code, 0);
    assert!(quiet.stderr.is_empty(), "unexpected stderr: {}", quiet.stderr);

    let output = teto()
        .current_dir(dir.path())
        .env("TETO_LOG", "info")
        .args(["iei", "--events", "ev.bin", "--out-csv", "h.csv"])
        .output()
        .unwrap();
    assert!(output.status.success());
    let stderr = String::from_utf8(output.stderr).unwrap();
    assert!(stderr.contains("iei:"), "expected a progress line, got: {stderr}");
    // stdout still carries exactly the one summary line.
    let stdout = String::from_utf8(output.stdout).unwrap();
    assert_eq!(stdout.lines().count(), 1);
}

#[test]
fn image_shape_errors_exit_2() {
    let dir = TempDir::new().unwrap();
    write_tensor(&dir.path().join("img.bin"), &[4, 5], &vec![0.0f32; 20]).unwrap();
    let zero = FlowField::uniform(5, 4, 0.0, 0.0);
    write_flo(&dir.path().join("zero.flo"), &zero).unwrap();
    let r = run(
        dir.path(),
        &["warp", "--image", "img.bin", "--flow", "zero.flo", "--out", "o.bin"],
    );
    assert_eq!(r.code, 2);
    assert_eq!(stderr_json(&r)["error"], "config");
}

#[test]
fn shape_mismatch_between_image_and_flow_exits_2() {
    let dir = TempDir::new().unwrap();
    write_tensor(&dir.path().join("img.bin"), &[4, 5, 1], &vec![0.0f32; 20]).unwrap();
    let zero = FlowField::uniform(6, 4, 0.0, 0.0);
    write_flo(&dir.path().join("zero.flo"), &zero).unwrap();
    let r = run(
        dir.path(),
        &["warp", "--image", "img.bin", "--flow", "zero.flo", "--out", "o.bin"],
    );
    assert_eq!(r.code, 2);
    assert_eq!(stderr_json(&r)["error"], "shape-mismatch");
}

#[test]
fn non_finite_image_exits_3() {
    let dir = TempDir::new().unwrap();
    let mut data = vec![0.0f32; 20];
    data[7] = f32::NAN;
    write_tensor(&dir.path().join("img.bin"), &[4, 5, 1], &data).unwrap();
    let zero = FlowField::uniform(5, 4, 0.0, 0.0);
    write_flo(&dir.path().join("zero.flo"), &zero).unwrap();
    let r = run(
        dir.path(),
        &["warp", "--image", "img.bin", "--flow", "zero.flo", "--out", "o.bin"],
    );
    assert_eq!(r.code, 3);
    assert_eq!(stderr_json(&r)["error"], "non-finite");
}

/// An image built from an `Image` value instead of raw numbers, to keep
/// the fixture honest about channel layout.
#[test]
fn warp_applies_a_half_pixel_shift() {
    let dir = TempDir::new().unwrap();
    let (w, h) = (6u32, 1u32);
    let data: Vec<f32> = (0..w).map(|x| x as f32 * 10.0).collect();
    let image = Image::new(w, h, 1, data).unwrap();
    write_tensor(&dir.path().join("img.bin"), &[h, w, 1], image.data()).unwrap();
    write_flo(&dir.path().join("half.flo"), &FlowField::uniform(w, h, 0.5, 0.0)).unwrap();
    let r = run(
        dir.path(),
        &["warp", "--image", "img.bin", "--flow", "half.flo", "--out", "o.bin"],
    );
    assert_eq!(r.code, 0, "stderr: {}", r.stderr);
    let (_, warped) = teto_tools::formats::tensor::read_tensor(&dir.path().join("o.bin")).unwrap();
    for x in 0..5 {
        assert!((warped[x] - (x as f32 * 10.0 + 5.0)).abs() < 1e-5, "x={x}: {}", warped[x]);
    }
    assert_eq!(warped[5], 50.0, "clamped edge sample");
}
