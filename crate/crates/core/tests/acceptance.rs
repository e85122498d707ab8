//! Acceptance suite. Runs as a plain binary (no libtest harness) and
//! prints one PASS/FAIL/SKIP line per criterion, then exits nonzero if
//! anything failed.
//!
//! Optional: `SUPERCHAT_SIMSIMI_CORPUS=/path/to/corpus` (and
//! `SUPERCHAT_SIMSIMI_FORMAT=conv|tsv`, default `conv`) enables the
//! full-corpus count oracle.

use std::collections::BTreeMap;
use std::process::Command;
use std::sync::Arc;
use std::time::{Duration, Instant};

use axum::body::Body;
use axum::http::{Request, StatusCode};
use http_body_util::BodyExt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};
use tower::ServiceExt;

use superchat::corpus::{
    build_vocabulary, expand_pair, filter_pairs, ingest, normalize_pairs, split_examples, ClassIndex, CorpusFormat,
    CorpusStats, DialoguePair, Manifest, Split, EOS_INDEX,
};
use superchat::decoder::{decode_beam, decode_greedy, BeamOptions, DecodeError, NextCharModel};
use superchat::model::{
    evaluate, forward, init_model, load_checkpoint, save_checkpoint, softmax, train, Hyperparams, ModelCheckpoint,
    Network,
};
use superchat::service::{router, AppState, Engine};
use superchat::toy::{memorization_manifest, TOY_PAIRS};
use superchat::{compute_layout, CnnPredictor, GlyphSource, LayoutConfig, ModelConfig, Renderer};

const CHILD_ENV: &str = "SUPERCHAT_ACCEPTANCE_CHILD";
const RENDER_SEED: u64 = 20190701;
const RENDER_PAIRS: usize = 100;
const GRADCHECK_STEP: f64 = 1e-3;
const GRADCHECK_TOLERANCE: f64 = 1e-3;
// Denominator floor for the relative error, so coordinates whose true
// gradient is (near) zero are compared absolutely.
const GRADCHECK_FLOOR: f64 = 1e-6;
const SOFTMAX_TOLERANCE: f64 = 1e-6;
const OVERFIT_MAX_ITERATIONS: u64 = 5000;

type Outcome = Result<String, String>;

enum Verdict {
    Pass(String),
    Fail(String),
    Skip(String),
}

struct Suite {
    failures: usize,
}

impl Suite {
    fn report(&mut self, name: &str, budget: Duration, run: impl FnOnce() -> Verdict) {
        let start = Instant::now();
        let verdict = run();
        let took = start.elapsed();
        let verdict = match verdict {
            Verdict::Pass(_) if took > budget => {
                Verdict::Fail(format!("took {took:.1?}, budget {budget:.0?}"))
            }
            v => v,
        };
        let (tag, detail) = match verdict {
            Verdict::Pass(d) => ("PASS", d),
            Verdict::Fail(d) => {
                self.failures += 1;
                ("FAIL", d)
            }
            Verdict::Skip(d) => ("SKIP", d),
        };
        println!("{tag} {name} [{:.2}s] {detail}", took.as_secs_f64());
    }

    fn check(&mut self, name: &str, budget: Duration, run: impl FnOnce() -> Outcome) {
        self.report(name, budget, || match run() {
            Ok(d) => Verdict::Pass(d),
            Err(d) => Verdict::Fail(d),
        });
    }
}

macro_rules! ensure {
    ($cond:expr, $($msg:tt)*) => {
        let ok: bool = $cond;
        if !ok {
            return Err(format!($($msg)*));
        }
    };
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

fn layout_geometry() -> Outcome {
    let l = compute_layout(224, 16, 6, 6, 3, 3).map_err(|e| e.to_string())?;
    ensure!(l.cell_px() == 32, "cell_px {}", l.cell_px());
    ensure!(l.cell_origin(0, 0) == Ok((16, 16)), "origin {:?}", l.cell_origin(0, 0));
    ensure!(l.input_capacity() == 18, "input capacity {}", l.input_capacity());
    ensure!(l.response_capacity() == 18, "response capacity {}", l.response_capacity());
    ensure!(l == LayoutConfig::standard(), "standard profile differs from the computed layout");
    Ok("cell 32, origin (16,16), capacities 18/18".into())
}

fn random_text(rng: &mut ChaCha8Rng, max: usize) -> Vec<char> {
    let len = rng.random_range(0..=max);
    (0..len)
        .map(|_| {
            if rng.random_bool(0.8) {
                char::from_u32(rng.random_range(0x4E00..0x9FA5)).unwrap()
            } else {
                rng.random_range(b'!'..=b'~') as char
            }
        })
        .collect()
}

fn render_corpus() -> Vec<(Vec<char>, Vec<char>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(RENDER_SEED);
    (0..RENDER_PAIRS)
        .map(|_| (random_text(&mut rng, 18), random_text(&mut rng, 18)))
        .collect()
}

fn standard_renderer() -> Renderer {
    Renderer::new(LayoutConfig::standard(), GlyphSource::procedural(RENDER_SEED))
}

fn render_hashes() -> Vec<String> {
    let r = standard_renderer();
    render_corpus()
        .iter()
        .map(|(i, p)| hex(&Sha256::digest(r.render(i, p).unwrap().pixels())))
        .collect()
}

fn render_determinism_and_locality() -> Outcome {
    let ours = render_hashes();
    let exe = std::env::current_exe().map_err(|e| e.to_string())?;
    let child = Command::new(exe)
        .env(CHILD_ENV, "render")
        .output()
        .map_err(|e| format!("spawning child: {e}"))?;
    ensure!(child.status.success(), "child process failed: {}", String::from_utf8_lossy(&child.stderr));
    let theirs: Vec<String> = String::from_utf8_lossy(&child.stdout).lines().map(str::to_string).collect();
    ensure!(theirs == ours, "child process hashes differ from this process");

    let r = standard_renderer();
    let layout = *r.layout();
    let cell = layout.cell_px();
    let mut rng = ChaCha8Rng::seed_from_u64(RENDER_SEED + 1);
    let mut perturbed = 0;
    for (input, partial) in render_corpus() {
        if input.is_empty() && partial.is_empty() {
            continue;
        }
        let base = r.render(&input, &partial).unwrap();
        let mut input2 = input.clone();
        let mut partial2 = partial.clone();
        let use_input = partial.is_empty() || (!input.is_empty() && rng.random_bool(0.5));
        let (portion, text) = if use_input {
            (superchat::layout::Portion::Input, &mut input2)
        } else {
            (superchat::layout::Portion::Response, &mut partial2)
        };
        let k = rng.random_range(0..text.len());
        let old = text[k];
        while text[k] == old {
            text[k] = char::from_u32(rng.random_range(0x4E00..0x9FA5)).unwrap();
        }
        let changed = r.render(&input2, &partial2).unwrap();
        let (row, col) = layout.cell_of(portion, k).unwrap();
        let (x0, y0) = layout.cell_origin(row, col).unwrap();
        let mut diffs = 0;
        for y in 0..layout.image_px() {
            for x in 0..layout.image_px() {
                if base.get(x, y) != changed.get(x, y) {
                    diffs += 1;
                    ensure!(
                        (x0..x0 + cell).contains(&x) && (y0..y0 + cell).contains(&y),
                        "pixel ({x},{y}) changed outside cell ({row},{col}) of the {portion} portion"
                    );
                }
            }
        }
        ensure!(diffs > 0, "perturbing {portion} position {k} changed nothing");
        perturbed += 1;
    }
    Ok(format!("{} pairs identical across processes, {perturbed} perturbations local", ours.len()))
}

fn synthetic_pairs(n: usize, seed: u64) -> Vec<DialoguePair> {
    let alphabet: Vec<char> = "你我他好在哪里吗是的了不".chars().collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|i| {
            let mut text = |lo: usize| -> String {
                let len = rng.random_range(lo..=12);
                (0..len).map(|_| alphabet[rng.random_range(0..alphabet.len())]).collect()
            };
            let input = text(1);
            let response = text(1);
            DialoguePair::new(i as u64 * 7 + 3, &input, &response)
        })
        .collect()
}

fn expansion_oracle() -> Outcome {
    let pairs = synthetic_pairs(50, 11);
    let vocab = build_vocabulary(&pairs, 1).map_err(|e| e.to_string())?;

    // Brute force: count response characters, order by (-freq, codepoint).
    let mut counts: BTreeMap<char, u64> = BTreeMap::new();
    for p in &pairs {
        for &c in &p.response {
            *counts.entry(c).or_default() += 1;
        }
    }
    let mut order: Vec<(char, u64)> = counts.into_iter().collect();
    order.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
    let class = |c: char| 1 + order.iter().position(|&(x, _)| x == c).unwrap();

    let mut expected = Vec::new();
    for p in &pairs {
        for k in 0..=p.response.len() {
            let label = if k < p.response.len() { class(p.response[k]) } else { EOS_INDEX };
            expected.push((p.pair_id, k, label));
        }
    }
    let mut actual = Vec::new();
    for p in &pairs {
        for e in expand_pair(p, &vocab).map_err(|e| e.to_string())? {
            actual.push((e.pair_id, e.prefix_len, e.label));
        }
    }
    let total: usize = pairs.iter().map(|p| p.response.len() + 1).sum();
    ensure!(actual.len() == total, "{} examples, expected {total}", actual.len());
    for p in &pairs {
        let eos = actual.iter().filter(|e| e.0 == p.pair_id && e.2 == EOS_INDEX).count();
        ensure!(eos == 1, "pair {} has {eos} EOS labels", p.pair_id);
    }
    ensure!(actual == expected, "expansion differs from the brute-force enumeration");
    Ok(format!("{total} examples from 50 pairs"))
}

fn simsimi_oracle() -> Verdict {
    let Ok(path) = std::env::var("SUPERCHAT_SIMSIMI_CORPUS") else {
        return Verdict::Skip("SUPERCHAT_SIMSIMI_CORPUS not set".into());
    };
    let format: CorpusFormat = match std::env::var("SUPERCHAT_SIMSIMI_FORMAT").as_deref().unwrap_or("conv").parse() {
        Ok(f) => f,
        Err(e) => return Verdict::Fail(e.to_string()),
    };
    let run = || -> Result<(CorpusStats, usize), String> {
        let raw = ingest(&path, format).map_err(|e| e.to_string())?;
        let total = raw.len();
        let pairs = normalize_pairs(raw);
        let vocab = build_vocabulary(&pairs, 1000).map_err(|e| e.to_string())?;
        let filtered = filter_pairs(&pairs, &vocab, 18, 18);
        let mut examples = Vec::new();
        for p in &filtered {
            examples.extend(expand_pair(p, &vocab).map_err(|e| e.to_string())?);
        }
        let examples = split_examples(&examples, 0.75, 0).map_err(|e| e.to_string())?;
        let arithmetic: usize = filtered.iter().map(|p| p.response.len() + 1).sum();
        Ok((CorpusStats::compute(total, &pairs, &vocab, &filtered, &examples), arithmetic))
    };
    let (stats, arithmetic) = match run() {
        Ok(s) => s,
        Err(e) => return Verdict::Fail(e),
    };
    let expected = [
        ("distinct_response_chars", 5523u64),
        ("chars_below_min_freq", 4996),
        ("vocab_size", 528),
        ("filtered_pairs", 178_192),
        ("total_examples", 989_087),
        ("train_examples", 739_289),
        ("test_examples", 249_798),
    ];
    let fields: BTreeMap<&str, u64> = stats.fields().into_iter().collect();
    let mut report = Vec::new();
    let mut exact = true;
    for (k, want) in expected {
        let got = fields[k];
        exact &= got == want;
        report.push(format!("{k}={got} (expected {want})"));
    }
    let f = |k: &str| fields[k];
    if f("train_examples") + f("test_examples") != f("total_examples") || f("total_examples") != arithmetic as u64 {
        return Verdict::Fail(format!("example arithmetic broken: {}", report.join(", ")));
    }
    let status = if exact { "all counts exact" } else { "counts differ, per-stage diagnosis" };
    Verdict::Pass(format!("{status}: {}", report.join(", ")))
}

/// Central differences are only an oracle where the loss is smooth over
/// the whole stencil, so a draw is retried until no ReLU or pooling
/// decision flips within +-h of any coordinate.
fn gradient_check() -> Outcome {
    let mut worst = 0f64;
    let mut checked = 0;
    let mut draws = 0;
    for seed in 0..5u64 {
        let config = ModelConfig::tiny(seed);
        let net = Network::new(&config).map_err(|e| e.to_string())?;
        let init: Vec<f64> = init_model(&config)
            .map_err(|e| e.to_string())?
            .parameters
            .iter()
            .map(|&p| p as f64)
            .collect();
        let label = (seed as usize) % config.num_classes;
        let mut rng = ChaCha8Rng::seed_from_u64(100 + seed);
        let numeric = 'draw: loop {
            draws += 1;
            ensure!(draws <= 5000, "no smooth evaluation point found");
            // Biases start at zero; perturb everything so every term is exercised.
            let params: Vec<f64> = init.iter().map(|p| p + rng.random_range(-0.05..0.05)).collect();
            let input: Vec<f64> = (0..config.input_px * config.input_px * config.input_channels)
                .map(|_| rng.random_range(-1.0..1.0))
                .collect();
            let pattern = net.activation_pattern(&params, &input);
            let mut probe = params.clone();
            let mut numeric = Vec::with_capacity(params.len());
            for i in 0..params.len() {
                let mut side = |x: f64| {
                    probe[i] = x;
                    let smooth = net.activation_pattern(&probe, &input) == pattern;
                    (net.loss(&probe, &input, label).unwrap(), smooth)
                };
                let (up, smooth_up) = side(params[i] + GRADCHECK_STEP);
                let (down, smooth_down) = side(params[i] - GRADCHECK_STEP);
                probe[i] = params[i];
                if !(smooth_up && smooth_down) {
                    continue 'draw;
                }
                numeric.push((up - down) / (2.0 * GRADCHECK_STEP));
            }
            break (params, input, numeric);
        };
        let (params, input, numeric) = numeric;
        let (_, analytic) = net.loss_and_gradient(&params, &input, label).map_err(|e| e.to_string())?;
        ensure!(analytic.len() == params.len(), "gradient length {} vs {}", analytic.len(), params.len());
        for (i, (&a, &n)) in analytic.iter().zip(&numeric).enumerate() {
            let rel = (a - n).abs() / a.abs().max(n.abs()).max(GRADCHECK_FLOOR);
            ensure!(
                rel <= GRADCHECK_TOLERANCE,
                "seed {seed} parameter {i}: analytic {a:e}, numeric {n:e}, relative error {rel:e}"
            );
            worst = worst.max(rel);
            checked += 1;
        }
    }
    Ok(format!(
        "{checked} coordinates over 5 seeds ({draws} draws), worst relative error {worst:.2e}"
    ))
}

fn softmax_normalization() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst = 0f64;
    for i in 0..1000 {
        let n = rng.random_range(2..=600);
        let scale = [1.0, 30.0, 1e3, 1e4][i % 4];
        let mut logits: Vec<f64> = (0..n).map(|_| rng.random_range(-scale..=scale)).collect();
        if i % 3 == 0 {
            let k = rng.random_range(0..n);
            logits[k] = 1e4;
            logits[(k + 1) % n] = -1e4;
        }
        let p = softmax(&logits);
        let sum: f64 = p.iter().sum();
        ensure!((sum - 1.0).abs() <= SOFTMAX_TOLERANCE, "vector {i}: sum {sum}");
        ensure!(p.iter().all(|&x| x > 0.0 && x <= 1.0), "vector {i}: component outside (0, 1]");
        worst = worst.max((sum - 1.0).abs());
    }
    Ok(format!("1000 vectors, worst |sum - 1| = {worst:.1e}"))
}

struct Toy {
    manifest: Manifest,
    renderer: Renderer,
    checkpoint: ModelCheckpoint,
    iterations: u64,
}

fn toy_renderer() -> Renderer {
    Renderer::new(LayoutConfig::desk(), GlyphSource::procedural(0))
}

fn train_toy() -> Result<Toy, String> {
    let manifest = memorization_manifest();
    let renderer = toy_renderer();
    let init = init_model(&ModelConfig::reference_desk(manifest.vocab.len())).map_err(|e| e.to_string())?;
    let hp = Hyperparams {
        batch_size: 5,
        epochs: usize::MAX,
        max_iterations: Some(OVERFIT_MAX_ITERATIONS),
        stop_at_train_accuracy: Some(1.0),
        accuracy_check_interval: 10,
        eval_interval: 500,
        ..Hyperparams::default()
    };
    let (checkpoint, curve) = train(&init, &manifest, &renderer, &hp).map_err(|e| e.to_string())?;
    Ok(Toy {
        manifest,
        renderer,
        checkpoint,
        iterations: curve.iterations,
    })
}

fn toy_predictor(toy: &Toy) -> CnnPredictor {
    CnnPredictor::new(toy.checkpoint.clone(), toy.manifest.vocab.clone(), toy.renderer.clone()).unwrap()
}

fn overfit_round_trip(toy: &Result<Toy, String>) -> Outcome {
    let toy = toy.as_ref().map_err(Clone::clone)?;
    let acc = evaluate(&toy.checkpoint, &toy.manifest, &toy.renderer, Split::Train).map_err(|e| e.to_string())?;
    ensure!(acc == 1.0, "train accuracy {acc} after {} iterations", toy.iterations);
    let predictor = toy_predictor(toy);
    for (input, expected) in TOY_PAIRS {
        let d = decode_greedy(&predictor, &input.chars().collect::<Vec<_>>()).map_err(|e| e.to_string())?;
        ensure!(d.text == expected, "{input} -> {} (expected {expected})", d.text);
        let last = d.steps.last().map(|s| s.chosen_class);
        ensure!(
            d.steps.len() == expected.chars().count() + 1 && last == Some(EOS_INDEX),
            "{input}: decoding did not end on EOS"
        );
    }
    Ok(format!("train accuracy 1.0 after {} iterations; 10/10 responses exact", toy.iterations))
}

/// Four classes with fixed pseudo-random next-class distributions keyed
/// by the partial sequence. Class 0 is EOS.
struct TableModel {
    seed: u64,
}

impl NextCharModel for TableModel {
    fn num_classes(&self) -> usize {
        4
    }
    fn input_capacity(&self) -> usize {
        8
    }
    fn response_capacity(&self) -> usize {
        3
    }
    fn class_char(&self, class: ClassIndex) -> Option<char> {
        (class > 0).then(|| (b'a' + class as u8 - 1) as char)
    }
    fn predict(&self, _input: &[char], partial: &[ClassIndex]) -> Result<Vec<f64>, DecodeError> {
        let key = partial.iter().fold(self.seed, |h, &c| h.wrapping_mul(31).wrapping_add(c as u64 + 1));
        let mut rng = ChaCha8Rng::seed_from_u64(key);
        let raw: Vec<f64> = (0..4).map(|_| rng.random_range(0.05..1.0)).collect();
        let total: f64 = raw.iter().sum();
        Ok(raw.iter().map(|r| r / total).collect())
    }
}

fn exhaustive(model: &TableModel) -> (Vec<ClassIndex>, f64) {
    fn walk(model: &TableModel, partial: &mut Vec<ClassIndex>, score: f64, best: &mut (Vec<ClassIndex>, f64)) {
        if partial.len() == model.response_capacity() {
            if score > best.1 {
                *best = (partial.clone(), score);
            }
            return;
        }
        let probs = model.predict(&[], partial).unwrap();
        for (c, p) in probs.iter().enumerate() {
            partial.push(c);
            if c == EOS_INDEX {
                if score + p.ln() > best.1 {
                    *best = (partial.clone(), score + p.ln());
                }
            } else {
                walk(model, partial, score + p.ln(), best);
            }
            partial.pop();
        }
    }
    let mut best = (Vec::new(), f64::NEG_INFINITY);
    walk(model, &mut Vec::new(), 0.0, &mut best);
    best
}

fn beam_equivalences(toy: &Result<Toy, String>) -> Outcome {
    let toy = toy.as_ref().map_err(Clone::clone)?;
    let predictor = toy_predictor(toy);
    let pool: Vec<char> = TOY_PAIRS.iter().flat_map(|(i, _)| i.chars()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(50);
    for n in 0..50 {
        let len = rng.random_range(1..=6);
        let input: Vec<char> = (0..len).map(|_| pool[rng.random_range(0..pool.len())]).collect();
        let g = decode_greedy(&predictor, &input).map_err(|e| e.to_string())?;
        let b = decode_beam(&predictor, &input, 1, BeamOptions::default()).map_err(|e| e.to_string())?;
        ensure!(g.text == b.text, "input {n} {:?}: greedy {:?}, beam-1 {:?}", input, g.text, b.text);
    }
    for seed in 0..20 {
        let model = TableModel { seed };
        let (best, score) = exhaustive(&model);
        for width in [64, 100] {
            let b = decode_beam(&model, &['x'], width, BeamOptions::default()).map_err(|e| e.to_string())?;
            ensure!(
                b.best.partial == best && (b.best.log_score - score).abs() < 1e-12,
                "table {seed} width {width}: beam {:?} ({}), exhaustive {best:?} ({score})",
                b.best.partial,
                b.best.log_score
            );
        }
    }
    Ok("beam-1 = greedy on 50 inputs; beam-64/100 = exhaustive on 20 tables".into())
}

fn checkpoint_round_trip(toy: &Result<Toy, String>) -> Outcome {
    let toy = toy.as_ref().map_err(Clone::clone)?;
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let path = dir.path().join("toy.ckpt");
    save_checkpoint(&toy.checkpoint, &path).map_err(|e| e.to_string())?;
    let loaded = load_checkpoint(&path).map_err(|e| e.to_string())?;
    ensure!(loaded == toy.checkpoint, "loaded checkpoint differs");
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let pool: Vec<char> = TOY_PAIRS.iter().flat_map(|(i, r)| i.chars().chain(r.chars())).collect();
    for n in 0..10 {
        let mut text = |max: usize| -> Vec<char> {
            let len = rng.random_range(0..=max);
            (0..len).map(|_| pool[rng.random_range(0..pool.len())]).collect()
        };
        let (input, partial) = (text(18), text(18));
        let img = toy.renderer.render(&input, &partial).map_err(|e| e.to_string())?;
        let a = forward(&toy.checkpoint, &img).map_err(|e| e.to_string())?;
        let b = forward(&loaded, &img).map_err(|e| e.to_string())?;
        let same = a.iter().zip(&b).all(|(x, y)| x.to_bits() == y.to_bits());
        ensure!(same && a.len() == b.len(), "probe {n}: logits differ after reload");
    }
    Ok("10 probe images bit-identical".into())
}

async fn call(app: &axum::Router, req: Request<Body>) -> (StatusCode, Vec<u8>) {
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    (status, resp.into_body().collect().await.unwrap().to_bytes().to_vec())
}

fn post(body: &str) -> Request<Body> {
    Request::post("/chat")
        .header("content-type", "application/json")
        .body(Body::from(body.to_string()))
        .unwrap()
}

fn get(uri: &str) -> Request<Body> {
    Request::get(uri).body(Body::empty()).unwrap()
}

async fn service_checks(app: axum::Router, model_id: String) -> Outcome {
    let (status, body) = call(&app, post(r#"{"text":"你好","trace":true}"#)).await;
    ensure!(status == StatusCode::OK, "/chat status {status}");
    let v: serde_json::Value = serde_json::from_slice(&body).map_err(|e| e.to_string())?;
    ensure!(v["response"] == "你也好", "/chat response {}", v["response"]);
    let steps = v["steps"].as_array().ok_or("no steps array")?;
    ensure!(steps.len() == 4, "{} trace steps, expected 4", steps.len());
    ensure!(steps[3]["char"] == "<EOS>", "last step is {}", steps[3]["char"]);
    ensure!(v["model_id"] == model_id.as_str(), "model_id {}", v["model_id"]);

    let uri = "/render?input=%E4%BD%A0%E5%A5%BD&partial=%E4%BD%A0";
    let (s1, b1) = call(&app, get(uri)).await;
    let (s2, b2) = call(&app, get(uri)).await;
    ensure!(s1 == StatusCode::OK && s2 == StatusCode::OK, "/render status {s1} {s2}");
    ensure!(b1 == b2 && b1.starts_with(b"\x89PNG"), "/render bodies differ or are not PNG");

    let long = "好".repeat(19);
    let bad = [
        post("{not json"),
        post(r#"{"trace":true}"#),
        post(r#"{"text":42}"#),
        post(r#"{"text":""}"#),
        post(&format!(r#"{{"text":"{long}"}}"#)),
        post(r#"{"text":"你好","beam_width":0}"#),
        get(&format!("/render?partial={}", "%E5%A5%BD".repeat(19))),
    ];
    let n = bad.len();
    for (i, req) in bad.into_iter().enumerate() {
        let (status, body) = call(&app, req).await;
        ensure!(status == StatusCode::BAD_REQUEST, "malformed request {i}: status {status}");
        let v: serde_json::Value = serde_json::from_slice(&body).map_err(|e| format!("request {i}: {e}"))?;
        ensure!(v["error"].is_string(), "malformed request {i}: no error field");
    }
    Ok(format!("memorized reply with 4 steps, stable PNG, {n} malformed requests -> 400"))
}

fn service_contract(toy: &Result<Toy, String>) -> Outcome {
    let toy = toy.as_ref().map_err(Clone::clone)?;
    let engine = Engine::new(toy_predictor(toy));
    let model_id = engine.model_id().to_string();
    ensure!(model_id == toy.checkpoint.fingerprint(), "model_id is not the checkpoint fingerprint");
    let state: Arc<AppState> = AppState::new(toy.renderer.clone(), Some(engine));
    let rt = tokio::runtime::Runtime::new().map_err(|e| e.to_string())?;
    rt.block_on(service_checks(router(state), model_id))
}

fn main() {
    if std::env::var(CHILD_ENV).as_deref() == Ok("render") {
        for h in render_hashes() {
            println!("{h}");
        }
        return;
    }
    let s = Duration::from_secs;
    let mut suite = Suite { failures: 0 };
    suite.check("layout-geometry", s(1), layout_geometry);
    suite.check("render-determinism-locality", s(10), render_determinism_and_locality);
    suite.check("expansion-oracle", s(5), expansion_oracle);
    suite.report("simsimi-count-oracle", s(3600), simsimi_oracle);
    suite.check("gradient-check", s(60), gradient_check);
    suite.check("softmax-normalization", s(5), softmax_normalization);

    let start = Instant::now();
    let toy = train_toy();
    let trained_in = start.elapsed();
    suite.check("overfit-round-trip", s(600), || {
        ensure!(trained_in <= s(600), "training took {trained_in:.1?}");
        overfit_round_trip(&toy).map(|d| format!("{d} ({:.1}s training)", trained_in.as_secs_f64()))
    });
    suite.check("beam-equivalences", s(30), || beam_equivalences(&toy));
    suite.check("checkpoint-round-trip", s(10), || checkpoint_round_trip(&toy));
    suite.check("service-contract", s(30), || service_contract(&toy));

    if suite.failures > 0 {
        println!("{} acceptance criteria failed", suite.failures);
        std::process::exit(1);
    }
    println!("all acceptance criteria passed");
}
