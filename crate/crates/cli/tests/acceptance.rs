//! Acceptance suite. Prints one line per criterion and exits non-zero when any fails.
//!
//! Criterion 9 needs the published human responses converted into a run directory; point
//! `GRAPHSIM_STUDY_CONFIG` at that run's config to enable it.

#[path = "../../measures/tests/support/mod.rs"]
mod oracles;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::io::Cursor;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::sync::Arc;
use std::time::{Duration, Instant};

use graphsim_analysis::{
    bootstrap_diff, kappa_from_table, mann_whitney_u, one_sample_ttest, spearman, wilcoxon_signed_rank, JudgeView, Metric, Observation,
    TestResult,
};
use graphsim_core::bins::sample_spec_instance;
use graphsim_core::catalog::{real_entry, synthetic_stimulus};
use graphsim_core::graph::{component_labels, linear_density};
use graphsim_core::{seed, Choice, DensityBin, GeneratorKind, Graph, LayoutKind, SizeBin, SourceKind};
use graphsim_harness::{build_session, make_triplet, Cell, ClusteredStimulus, Condition, InGroup, SourceType};
use graphsim_judge::prompt::{sha256_hex, PROMPT};
use graphsim_judge::{
    build_prompt, parse_response, run_benchmark, MockProvider, MockReply, ModelConfig, ParseError, SharedImages, PROMPT_SHA256,
};
use graphsim_measures::kernels::{sp_kernel, wl_kernel};
use graphsim_measures::spectral::laplacian_spectrum;
use graphsim_measures::{
    normalize_to_similarity, orbits, pairwise_similarity, portrait, raw_value, score, GraphContext, MeasureConfig, MeasureId,
    NormalizationKind,
};
use graphsim_render::align::{best_rotation, binarize, default_radii, iou_auc, radii_for_canvas, rotate_image};
use graphsim_render::raster::RasterImage;
use graphsim_render::render_stimulus;
use rand::seq::{IndexedRandom, SliceRandom};
use rand::Rng;
use serde_json::Value;

/// Contract tolerance for symmetry, relabelling and self-similarity.
const CONTRACT_TOL: f64 = 1e-6;
const CONTRACT_PAIRS: usize = 200;
const CONTRACT_BUDGET: Duration = Duration::from_secs(600);
const SPECTRUM_TOL: f64 = 1e-6;
const SP_TOL: f64 = 1e-9;
const KAPPA_TOL: f64 = 1e-12;
const STAT_TOL: f64 = 1e-6;
const P_TOL: f64 = 1e-4;
const STIMULI: usize = 1000;
const ALIGN_STIMULI: usize = 100;
const ALIGN_CANVAS: u32 = 512;
const ALIGN_SPOT_CHECKS: usize = 4;
const ALIGN_RATE: f64 = 0.95;
const ALIGN_TOL_DEG: f64 = 10.0;
const TRIPLETS: usize = 1000;
const SESSIONS: usize = 32;
const TRIALS_PER_SESSION: usize = 69;
const ATTRIBUTE_KAPPA_TOL: f64 = 0.05;
const KAPPA_RANK_MIN: f64 = 0.7;

enum Verdict {
    Pass(String),
    Fail(String),
    NotRun(String),
}

type Check = fn() -> Verdict;

fn verdict(ok: bool, detail: String) -> Verdict {
    if ok {
        Verdict::Pass(detail)
    } else {
        Verdict::Fail(detail)
    }
}

fn shuffled(g: &Graph, rng: &mut seed::Rng) -> Graph {
    let mut perm: Vec<usize> = (0..g.node_count()).collect();
    perm.shuffle(rng);
    g.permuted(&perm)
}

fn connected(g: &Graph) -> bool {
    let adj: Vec<Vec<usize>> = (0..g.node_count()).map(|u| g.neighbors(u).to_vec()).collect();
    component_labels(&adj).1 == 1
}

fn random_cell(rng: &mut seed::Rng) -> (GeneratorKind, SizeBin, DensityBin) {
    (*GeneratorKind::ALL.choose(rng).unwrap(), *SizeBin::ALL.choose(rng).unwrap(), *DensityBin::ALL.choose(rng).unwrap())
}

fn measure_contract() -> Verdict {
    let start = Instant::now();
    let mut rng = seed::rng(1);
    let mut violations = Vec::new();
    let mut checked = 0usize;
    let stimulus = |rng: &mut seed::Rng, i: usize| {
        let (g, s, d) = random_cell(rng);
        synthetic_stimulus(g, s, d, LayoutKind::ForceDirected, i, 101).expect("stimulus").1
    };
    for pair in 0..CONTRACT_PAIRS {
        let g1 = stimulus(&mut rng, 2 * pair);
        let g2 = stimulus(&mut rng, 2 * pair + 1);
        let g1p = shuffled(&g1, &mut rng);
        let cfg = MeasureConfig::with_seed(pair as u64);
        let (c1, c2, c1p) = (GraphContext::new(g1), GraphContext::new(g2), GraphContext::new(g1p));
        for m in MeasureId::ALL {
            let s = |a: &GraphContext, b: &GraphContext| score(m, a, b, &cfg).map(|x| x.similarity);
            let (ab, ba, pb, aa, bb) = match (s(&c1, &c2), s(&c2, &c1), s(&c1p, &c2), s(&c1, &c1), s(&c2, &c2)) {
                (Ok(ab), Ok(ba), Ok(pb), Ok(aa), Ok(bb)) => (ab, ba, pb, aa, bb),
                other => {
                    violations.push(format!("pair {pair} {m}: {other:?}"));
                    continue;
                }
            };
            checked += 1;
            let fails = [
                (!(0.0..=1.0).contains(&ab), "range"),
                ((ab - ba).abs() > CONTRACT_TOL, "symmetry"),
                ((ab - pb).abs() > CONTRACT_TOL, "relabelling"),
                ((aa - 1.0).abs() > CONTRACT_TOL || (bb - 1.0).abs() > CONTRACT_TOL, "self-similarity"),
            ];
            for (_, what) in fails.iter().filter(|(bad, _)| *bad) {
                violations.push(format!("pair {pair} {m} {what}: ab={ab} ba={ba} pb={pb} aa={aa} bb={bb}"));
            }
        }
    }
    let elapsed = start.elapsed();
    let mut detail = format!("{checked} pair-measure checks, {} violations, {:.0}s", violations.len(), elapsed.as_secs_f64());
    if let Some(first) = violations.first() {
        detail.push_str(&format!("; first: {first}"));
    }
    verdict(violations.is_empty() && checked == CONTRACT_PAIRS * 16 && elapsed < CONTRACT_BUDGET, detail)
}

fn oracle_equivalence() -> Verdict {
    let mut rng = seed::rng(2);
    let mut problems = Vec::new();
    for i in 0..50 {
        let n = rng.random_range(1..=7);
        let g = oracles::random_connected(n, rng.random_range(0.0..0.8), &mut rng);
        if orbits::orbit_counts(&g).counts != oracles::orbit_oracle(&g) {
            problems.push(format!("orbits #{i}"));
        }
    }
    for i in 0..50 {
        let n = rng.random_range(1..=12);
        let g = oracles::random_connected(n, rng.random_range(0.0..0.6), &mut rng);
        let p = portrait::node_portrait(&g);
        let oracle = oracles::portrait_oracle(&g);
        let rows = p.b.len();
        let fast: HashMap<(usize, usize), usize> = (0..rows)
            .flat_map(|l| (0..=n).map(move |k| (l, k)))
            .filter(|&(l, k)| p.get(l, k) > 0)
            .map(|(l, k)| ((l, k), p.get(l, k)))
            .collect();
        if fast != oracle {
            problems.push(format!("portrait #{i}"));
        }
    }
    for i in 0..30 {
        let g1 = oracles::random_connected(rng.random_range(1..=8), rng.random_range(0.0..0.7), &mut rng);
        let g2 = oracles::random_connected(rng.random_range(1..=8), rng.random_range(0.0..0.7), &mut rng);
        let h = rng.random_range(0..=3);
        let (fast, slow) = (wl_kernel(&g1, &g2, h), oracles::wl_oracle(&g1, &g2, h));
        if (fast - slow).abs() > 1e-12 {
            problems.push(format!("wl #{i}: {fast} vs {slow}"));
        }
    }
    let close = |got: &[f64], want: &[f64]| got.len() == want.len() && got.iter().zip(want).all(|(a, b)| (a - b).abs() < SPECTRUM_TOL);
    let (p3, k3) = (Graph::path(3), Graph::complete(3));
    if !close(&laplacian_spectrum(&p3), &[3.0, 1.0, 0.0]) {
        problems.push(format!("P3 spectrum {:?}", laplacian_spectrum(&p3)));
    }
    if !close(&laplacian_spectrum(&k3), &[3.0, 3.0, 0.0]) {
        problems.push(format!("K3 spectrum {:?}", laplacian_spectrum(&k3)));
    }
    let sp = sp_kernel(&p3, &k3);
    if (sp - 2.0 / 5f64.sqrt()).abs() > SP_TOL {
        problems.push(format!("sp kernel {sp}"));
    }
    let detail = if problems.is_empty() {
        "50 orbit, 50 portrait, 30 WL oracle graphs; P3/K3 spectra; SP kernel 2/sqrt(5)".to_string()
    } else {
        problems.join(", ")
    };
    verdict(problems.is_empty(), detail)
}

fn normalization_rules() -> Verdict {
    let mut problems = Vec::new();
    let mut rng = seed::rng(3);
    let pairs: Vec<(Graph, Graph)> =
        (0..5).map(|_| (oracles::random_connected(9, 0.3, &mut rng), oracles::random_connected(11, 0.25, &mut rng))).collect();
    let mut kinds = BTreeMap::new();
    for m in MeasureId::ALL {
        *kinds.entry(format!("{:?}", m.kind())).or_insert(0) += 1;
        for (i, (g1, g2)) in pairs.iter().enumerate() {
            let cfg = MeasureConfig::with_seed(4);
            let (c1, c2) = (GraphContext::new(g1.clone()), GraphContext::new(g2.clone()));
            let raw = raw_value(m, &c1, &c2, &cfg).expect("raw");
            let s = score(m, &c1, &c2, &cfg).expect("score");
            let expected = match m.kind() {
                NormalizationKind::BoundedDistance => 1.0 - raw,
                NormalizationKind::UnboundedDistance => 1.0 / (1.0 + raw),
                NormalizationKind::AlreadySimilarity => raw,
            };
            if s.raw != raw || (s.similarity - expected).abs() > 1e-15 {
                problems.push(format!("{m} pair {i}: raw {raw} similarity {}", s.similarity));
            }
        }
    }
    let rule_examples = [
        (normalize_to_similarity(0.25, NormalizationKind::BoundedDistance), 0.75),
        (normalize_to_similarity(3.0, NormalizationKind::UnboundedDistance), 0.25),
        (normalize_to_similarity(0.0, NormalizationKind::BoundedDistance), 1.0),
        (normalize_to_similarity(0.0, NormalizationKind::UnboundedDistance), 1.0),
    ];
    for (got, want) in rule_examples {
        if got.as_ref().ok() != Some(&want) {
            problems.push(format!("rule example {got:?} != {want}"));
        }
    }
    if normalize_to_similarity(1.5, NormalizationKind::BoundedDistance).is_ok() {
        problems.push("bounded raw 1.5 accepted".into());
    }
    let g = oracles::random_connected(12, 0.2, &mut rng);
    let portrait_self = pairwise_similarity(MeasureId::PortraitDivergence, &g, &g, 0).expect("portrait").similarity;
    if portrait_self != 1.0 {
        problems.push(format!("portrait(g, g) = {portrait_self}"));
    }
    let lap = pairwise_similarity(MeasureId::LaplacianSpectral, &Graph::path(3), &Graph::complete(3), 0).expect("laplacian").similarity;
    if (lap - 1.0 / 3.0).abs() > SPECTRUM_TOL {
        problems.push(format!("laplacian P3/K3 = {lap}"));
    }
    let (f1, f2) = (Graph::cycle(8), oracles::random_connected(9, 0.3, &mut rng));
    let out_of_range: Vec<String> = MeasureId::ALL
        .iter()
        .filter_map(|&m| {
            let s = pairwise_similarity(m, &f1, &f2, 1).expect("fixed pair").similarity;
            (!(0.0..=1.0).contains(&s)).then(|| format!("{m}={s}"))
        })
        .collect();
    problems.extend(out_of_range);
    let detail = if problems.is_empty() {
        format!("kinds {kinds:?}; portrait(g,g)=1, laplacian P3/K3={lap:.6}, 16 scores in [0,1]")
    } else {
        problems.join(", ")
    };
    verdict(problems.is_empty(), detail)
}

fn stimulus_compliance() -> Verdict {
    let mut rng = seed::rng(4);
    let mut problems = Vec::new();
    let mut reference: Option<Graph> = None;
    let specs: Vec<(GeneratorKind, SizeBin, DensityBin, u64)> = (0..STIMULI)
        .map(|_| {
            let (g, s, d) = random_cell(&mut rng);
            (g, s, d, rng.random())
        })
        .collect();
    let mut generated = Vec::with_capacity(STIMULI);
    for (i, &(g, s, d, catalog_seed)) in specs.iter().enumerate() {
        match synthetic_stimulus(g, s, d, LayoutKind::ForceDirected, i, catalog_seed) {
            Ok((entry, graph)) => {
                let density = linear_density(&graph);
                if !s.contains(graph.node_count()) || !d.contains(density) {
                    problems.push(format!("{} out of bins: n={} d={density:.3}", entry.stimulus_id, graph.node_count()));
                }
                if !connected(&graph) {
                    problems.push(format!("{} disconnected", entry.stimulus_id));
                }
                if (entry.node_count, entry.edge_count) != (graph.node_count(), graph.edge_count()) {
                    problems.push(format!("{} entry counts", entry.stimulus_id));
                }
                if s == SizeBin::VeryLarge && d == DensityBin::VeryDense && reference.is_none() {
                    reference = Some(graph.clone());
                }
                generated.push(graph);
            }
            Err(e) => problems.push(format!("stimulus {i}: {e}")),
        }
    }
    let mut replayed = 0;
    for (i, &(g, s, d, catalog_seed)) in specs.iter().enumerate().step_by(10) {
        let again = synthetic_stimulus(g, s, d, LayoutKind::ForceDirected, i, catalog_seed).map(|(_, graph)| graph);
        if generated.get(i) != again.as_ref().ok() {
            problems.push(format!("stimulus {i} differs on replay"));
        }
        replayed += 1;
    }
    let real = SourceKind::Real { dataset_id: "any".into(), window: "weekly".into() };
    if sample_spec_instance(SizeBin::VeryLarge, DensityBin::VeryDense, &real, 0).is_ok() {
        problems.push("real very_large/very_dense sampled".into());
    }
    match &reference {
        Some(g) if real_entry("r", "any", "weekly", LayoutKind::Circular, g, 0, None).is_some() => {
            problems.push("real very_large/very_dense snapshot catalogued".into())
        }
        Some(_) => {}
        None => problems.push("no very_large/very_dense stimulus drawn to test real rejection".into()),
    }
    let detail = format!("{} generated, {replayed} replayed, {} problems{}", generated.len(), problems.len(), first(&problems));
    verdict(problems.is_empty() && generated.len() == STIMULI, detail)
}

fn first(problems: &[String]) -> String {
    problems.first().map(|p| format!("; first: {p}")).unwrap_or_default()
}

fn angle_error(found: u32, planted: f64) -> f64 {
    let diff = (f64::from(found) - planted).rem_euclid(360.0);
    diff.min(360.0 - diff)
}

struct AlignTally {
    grid_exact: usize,
    grid: usize,
    off_within: usize,
    off: usize,
    identical_ok: usize,
    misses: Vec<String>,
}

fn align_round(tally: &mut AlignTally, img: &RasterImage, radii: &[u32], grid_deg: u32, off_deg: f64, tag: &str) {
    let mask = binarize(&img.pixels);
    if iou_auc(&mask, &mask, radii).ok() == Some(1.0) && best_rotation(img, img, radii).map(|r| r.auc).ok() == Some(1.0) {
        tally.identical_ok += 1;
    } else {
        tally.misses.push(format!("{tag} identical"));
    }
    let found = best_rotation(img, &rotate_image(img, f64::from(grid_deg)), radii).expect("grid").rotation_degrees;
    tally.grid += 1;
    if found == grid_deg {
        tally.grid_exact += 1;
    } else {
        tally.misses.push(format!("{tag} grid {grid_deg} -> {found}"));
    }
    let found = best_rotation(img, &rotate_image(img, off_deg), radii).expect("off-grid").rotation_degrees;
    tally.off += 1;
    if angle_error(found, off_deg) <= ALIGN_TOL_DEG {
        tally.off_within += 1;
    } else {
        tally.misses.push(format!("{tag} off-grid {off_deg:.1} -> {found}"));
    }
}

fn alignment_recovery() -> Verdict {
    let mut rng = seed::rng(5);
    let mut tally = AlignTally { grid_exact: 0, grid: 0, off_within: 0, off: 0, identical_ok: 0, misses: Vec::new() };
    let stimulus = |rng: &mut seed::Rng, i: usize, canvas: u32| {
        let g = GeneratorKind::ALL[i % 4];
        let d = DensityBin::ALL[(i / 4) % 3];
        let (entry, graph) = synthetic_stimulus(g, SizeBin::Medium, d, LayoutKind::ForceDirected, i, rng.random()).expect("stimulus");
        render_stimulus(&entry.stimulus_id, &graph, LayoutKind::ForceDirected, entry.seed, canvas).expect("render").1
    };
    let draw_angles = |rng: &mut seed::Rng| {
        let grid = 10 * rng.random_range(1..36u32);
        let off = f64::from(10 * rng.random_range(0..36u32)) + rng.random_range(1.0..9.0);
        (grid, off)
    };
    let radii = radii_for_canvas(ALIGN_CANVAS);
    for i in 0..ALIGN_STIMULI {
        let img = stimulus(&mut rng, i, ALIGN_CANVAS);
        let (grid, off) = draw_angles(&mut rng);
        align_round(&mut tally, &img, &radii, grid, off, &format!("#{i}"));
    }
    let full = default_radii();
    for i in 0..ALIGN_SPOT_CHECKS {
        let img = stimulus(&mut rng, ALIGN_STIMULI + i, 1024);
        let (grid, off) = draw_angles(&mut rng);
        align_round(&mut tally, &img, &full, grid, off, &format!("1024 #{i}"));
    }
    let rate = |hit: usize, n: usize| hit as f64 / n as f64;
    let ok = tally.identical_ok == tally.grid
        && rate(tally.grid_exact, tally.grid) >= ALIGN_RATE
        && rate(tally.off_within, tally.off) >= ALIGN_RATE;
    let detail = format!(
        "grid exact {}/{}, off-grid within {ALIGN_TOL_DEG} deg {}/{}, identical AUC=1 {}/{}{}",
        tally.grid_exact,
        tally.grid,
        tally.off_within,
        tally.off,
        tally.identical_ok,
        tally.grid,
        first(&tally.misses)
    );
    verdict(ok, detail)
}

/// Synthetic cells are clustered by generator; real cells by a few mock dataset labels.
fn clustered_pool() -> Vec<ClusteredStimulus> {
    let mut out = Vec::new();
    for cell in Cell::reachable() {
        let labels: Vec<String> = match cell.source {
            SourceType::Synthetic => GeneratorKind::ALL.iter().map(|g| g.as_str().to_string()).collect(),
            SourceType::Real => ["email", "transit", "forum"].iter().map(|s| s.to_string()).collect(),
        };
        for (li, label) in labels.iter().enumerate() {
            for rep in 0..(3 + li % 2) {
                out.push(ClusteredStimulus { stimulus_id: format!("{label}-{}-{rep}", cell.slug()), cluster_label: label.clone(), cell });
            }
        }
    }
    out
}

fn triplet_constraints() -> Verdict {
    let pool = clustered_pool();
    let label: HashMap<&str, &str> = pool.iter().map(|s| (s.stimulus_id.as_str(), s.cluster_label.as_str())).collect();
    let mut by_cell: BTreeMap<Cell, Vec<ClusteredStimulus>> = BTreeMap::new();
    for s in &pool {
        by_cell.entry(s.cell).or_default().push(s.clone());
    }
    let cells = Cell::reachable();
    let mut rng = seed::rng(6);
    let mut problems = Vec::new();
    let (mut same, mut distinct) = (0, 0);
    for i in 0..TRIPLETS {
        let cell = cells[i % cells.len()];
        let condition = if rng.random::<bool>() { Condition::SameGroup } else { Condition::DistinctGroup };
        let t = match make_triplet(&format!("t{i}"), &by_cell[&cell], condition, rng.random()) {
            Ok(t) => t,
            Err(e) => {
                problems.push(format!("t{i}: {e}"));
                continue;
            }
        };
        let q = label[t.query_id.as_str()];
        let in_a = label[t.target_a_id.as_str()] == q;
        let in_b = label[t.target_b_id.as_str()] == q;
        let expected = match (in_a, in_b) {
            (true, true) => Some(InGroup::Both),
            (true, false) => Some(InGroup::A),
            (false, true) => Some(InGroup::B),
            (false, false) => None,
        };
        match (t.condition, expected) {
            (Condition::SameGroup, Some(InGroup::Both)) => same += 1,
            (Condition::DistinctGroup, Some(InGroup::A | InGroup::B)) => distinct += 1,
            _ => problems.push(format!("t{i}: {:?} with in-group {expected:?}", t.condition)),
        }
        if expected != Some(t.in_group_target) || t.cell != cell {
            problems.push(format!("t{i}: declared {:?}", t.in_group_target));
        }
        if t.verify(|id| label.get(id).map(|l| l.to_string())).is_err() {
            problems.push(format!("t{i}: verify"));
        }
    }
    let reachable: BTreeSet<Cell> = cells.iter().copied().collect();
    for p in 0..SESSIONS {
        let id = format!("p{:02}", p + 1);
        match build_session(&pool, &id, seed::derive(7, &id), p) {
            Ok(s) => {
                if s.trials.len() != TRIALS_PER_SESSION || s.cells() != reachable || s.validate().is_err() {
                    problems.push(format!("{id}: {} trials over {} cells", s.trials.len(), s.cells().len()));
                }
            }
            Err(e) => problems.push(format!("{id}: {e}")),
        }
    }
    let detail = format!(
        "{TRIPLETS} triplets ({same} same-group, {distinct} distinct-group), {SESSIONS} sessions of {} cells, {} problems{}",
        reachable.len(),
        problems.len(),
        first(&problems)
    );
    verdict(problems.is_empty() && same + distinct == TRIPLETS && reachable.len() == TRIALS_PER_SESSION, detail)
}

fn floats(v: &Value) -> Vec<f64> {
    v.as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect()
}

fn view(name: &str, choices: &[Choice], ordinals: &[f64]) -> JudgeView {
    let trials = choices
        .iter()
        .zip(ordinals)
        .enumerate()
        .map(|(i, (&choice, &o))| (format!("t{i:04}"), Observation { choice, ordinal: Some(o) }))
        .collect();
    JudgeView { name: name.into(), trials }
}

fn statistics_oracles() -> Verdict {
    let mut problems = Vec::new();
    let kappa = kappa_from_table(&[vec![40.0, 10.0], vec![10.0, 40.0]]).unwrap();
    if (kappa - 0.6).abs() > KAPPA_TOL {
        problems.push(format!("kappa {kappa}"));
    }
    let x: Vec<f64> = (0..25).map(f64::from).collect();
    let up: Vec<f64> = x.iter().map(|v| v.powi(3) + 2.0).collect();
    let down: Vec<f64> = x.iter().map(|v| (-v / 3.0).exp()).collect();
    let (rho_up, rho_down) = (spearman(&x, &up).unwrap(), spearman(&x, &down).unwrap());
    if rho_up != 1.0 || rho_down != -1.0 {
        problems.push(format!("spearman {rho_up} {rho_down}"));
    }
    let mut rng = seed::rng(8);
    let coin = |rng: &mut seed::Rng| if rng.random::<bool>() { Choice::TargetA } else { Choice::TargetB };
    let human_c: Vec<Choice> = (0..200).map(|_| coin(&mut rng)).collect();
    let judge_c: Vec<Choice> = human_c.iter().map(|&c| if rng.random::<f64>() < 0.7 { c } else { coin(&mut rng) }).collect();
    let ords = |rng: &mut seed::Rng| (0..200).map(|_| f64::from(rng.random_range(1u8..=5))).collect::<Vec<_>>();
    let human = view("human", &human_c, &ords(&mut rng));
    let a = view("a", &judge_c, &ords(&mut rng));
    let b = JudgeView { name: "b".into(), ..a.clone() };
    let mut boot_p = Vec::new();
    for metric in [Metric::Kappa, Metric::Spearman] {
        let r = bootstrap_diff(metric, &a, &b, &human, 2000, 9).unwrap();
        if r.p < 0.95 {
            problems.push(format!("bootstrap {metric:?} p={}", r.p));
        }
        boot_p.push(r.p);
    }
    let fixtures: Value = serde_json::from_str(include_str!("../../analysis/tests/data/reference.json")).unwrap();
    let mut compared = 0;
    let mut check = |name: String, got: TestResult, case: &Value| {
        compared += 1;
        let (stat, p) = (case["statistic"].as_f64().unwrap(), case["p"].as_f64().unwrap());
        if (got.statistic - stat).abs() > STAT_TOL || (got.p - p).abs() > P_TOL {
            problems.push(format!("{name}: {} / {} vs {stat} / {p}", got.statistic, got.p));
        }
    };
    let cases = |key: &str| fixtures[key].as_array().unwrap().clone();
    for (i, c) in cases("ttest").iter().enumerate() {
        check(format!("t-test {i}"), one_sample_ttest(&floats(&c["values"]), c["mu0"].as_f64().unwrap()).unwrap(), c);
    }
    for (i, c) in cases("mannwhitney").iter().enumerate() {
        check(format!("mann-whitney {i}"), mann_whitney_u(&floats(&c["x"]), &floats(&c["y"])).unwrap(), c);
    }
    for (i, c) in cases("wilcoxon").iter().enumerate() {
        check(format!("wilcoxon {i}"), wilcoxon_signed_rank(&floats(&c["diffs"])).unwrap(), c);
    }
    let sizes = ["ttest", "mannwhitney", "wilcoxon"].map(|k| cases(k).len());
    let ok = problems.is_empty() && sizes == [20, 20, 20] && compared == 60;
    let detail = format!(
        "kappa={kappa}, rho=+{rho_up}/{rho_down}, bootstrap p={:.3}/{:.3}, {compared} reference fixtures {sizes:?}{}",
        boot_p[0],
        boot_p[1],
        first(&problems)
    );
    verdict(ok, detail)
}

fn png(side: u32, shade: u8) -> Vec<u8> {
    let img = image::RgbImage::from_pixel(side, side, image::Rgb([shade, 255 - shade, 128]));
    let mut buf = Cursor::new(Vec::new());
    img.write_to(&mut buf, image::ImageFormat::Png).unwrap();
    buf.into_inner()
}

fn parse_kind(e: &ParseError) -> &'static str {
    match e {
        ParseError::NoObject => "no_object",
        ParseError::MissingField(_) => "missing_field",
        ParseError::Constraint { .. } => "constraint",
        ParseError::UnknownSelection(_) => "unknown_selection",
    }
}

fn mllm_harness() -> Verdict {
    let session = build_session(&clustered_pool(), "m01", 12, 0).expect("session");
    let mut images = HashMap::new();
    for (i, t) in session.trials.iter().enumerate() {
        for (j, id) in t.triplet.ids().into_iter().enumerate() {
            images.entry(id.to_string()).or_insert_with(|| png(32, (i * 3 + j) as u8));
        }
    }
    let images: SharedImages = Arc::new(images);
    let latency = Duration::from_millis(5);
    let mut provider = MockProvider::new(latency);
    let mut slots = HashMap::new();
    for (i, t) in session.trials.iter().enumerate() {
        let slot = if i % 3 == 0 { "T2" } else { "T1" };
        let reply = format!(r#"{{"selected": "{slot}", "rationale": "r", "confidence": {}, "features": [1, 0, -1, 0, 0, 1]}}"#, 1 + i % 5);
        provider = provider.with_script(&t.trial_id, MockReply::Text(reply));
        slots.insert(t.trial_id.clone(), slot);
    }
    let cfg = ModelConfig::mock("mock-vision");
    let runtime = tokio::runtime::Runtime::new().unwrap();
    let run = runtime.block_on(run_benchmark(Arc::new(provider), &cfg, session.trials.clone(), images.clone(), |_| Ok(()))).expect("run");
    let mut problems = Vec::new();
    if sha256_hex(PROMPT.as_bytes()) != PROMPT_SHA256 {
        problems.push("prompt text hash".to_string());
    }
    let valid = run.records.iter().filter(|r| r.is_ok() && r.validate().is_ok()).count();
    let by_trial: HashMap<&str, _> = run.records.iter().map(|r| (r.trial_id.as_str(), r)).collect();
    let (mut mapped, mut timed, mut hashed) = (0, 0, 0);
    for t in &session.trials {
        let Some(r) = by_trial.get(t.trial_id.as_str()) else {
            problems.push(format!("{} missing", t.trial_id));
            continue;
        };
        let shown = if slots[&t.trial_id] == "T1" { &t.placement.left_id } else { &t.placement.right_id };
        let expected = if *shown == t.triplet.target_a_id { Choice::TargetA } else { Choice::TargetB };
        if r.choice == expected {
            mapped += 1;
        }
        if r.latency_ms.is_some_and(|ms| ms >= latency.as_millis() as u64) {
            timed += 1;
        }
        let bundle = build_prompt(t, images.as_ref()).expect("bundle");
        if r.provenance.as_ref().is_some_and(|p| p.prompt_sha256 == PROMPT_SHA256) && bundle.prompt_sha256() == PROMPT_SHA256 {
            hashed += 1;
        }
    }
    let corpus: Vec<Value> = serde_json::from_str(include_str!("../../judge/tests/data/payloads.json")).unwrap();
    let (mut malformed, mut typed) = (0, 0);
    for case in &corpus {
        let Some(kind) = case["expect"]["error"].as_str() else { continue };
        malformed += 1;
        match parse_response(case["raw"].as_str().unwrap()) {
            Err(e) if parse_kind(&e) == kind => typed += 1,
            other => problems.push(format!("{}: {other:?}", case["name"])),
        }
    }
    let n = session.trials.len();
    let ok = problems.is_empty()
        && n == TRIALS_PER_SESSION
        && [run.records.len(), valid, mapped, timed, hashed] == [n; 5]
        && malformed > 0
        && typed == malformed;
    let detail = format!(
        "{valid}/{n} valid, prompt hash {hashed}/{n}, back-mapping {mapped}/{n}, latency {timed}/{n}, typed errors {typed}/{malformed}{}",
        first(&problems)
    );
    verdict(ok, detail)
}

/// Table values for the kappa comparison, in `MeasureId::ALL` naming.
const PUBLISHED_KAPPA: [(&str, f64); 16] = [
    ("portrait_divergence", 0.4247),
    ("ipsen_mikhailov", 0.4111),
    ("netdis", 0.4012),
    ("netsimile", 0.3966),
    ("feather", 0.3576),
    ("sp_kernel", 0.3352),
    ("degree_divergence", 0.3196),
    ("regal", 0.3151),
    ("gcd11", 0.3134),
    ("laplacian_spectral", 0.2862),
    ("density_balance", 0.2727),
    ("community_divergence", 0.2401),
    ("size_balance", 0.2138),
    ("netlsd", 0.1749),
    ("wl_kernel", 0.1732),
    ("grasp", 0.1477),
];

fn published_data() -> Verdict {
    let Ok(config) = std::env::var("GRAPHSIM_STUDY_CONFIG") else {
        return Verdict::NotRun("needs the published human responses (set GRAPHSIM_STUDY_CONFIG)".into());
    };
    let cfg = match graphsim_cli::RunConfig::load(config.as_ref(), &graphsim_cli::Overrides::default()) {
        Ok(c) => c,
        Err(e) => return Verdict::Fail(format!("config: {e}")),
    };
    let pipeline = graphsim_cli::Pipeline::new(cfg, true);
    if let Err(e) = pipeline.measure(&[]).and_then(|_| pipeline.analyze()) {
        return Verdict::Fail(format!("pipeline: {e}"));
    }
    let text = std::fs::read_to_string(pipeline.layout.report_dir().join("report.json")).expect("report");
    let report: Value = serde_json::from_str(&text).expect("report json");
    let ours: HashMap<String, f64> = report["judges"]
        .as_array()
        .unwrap()
        .iter()
        .filter_map(|j| Some((j["judge"].as_str()?.to_string(), j["kappa"]["kappa"].as_f64()?)))
        .collect();
    let mut problems = Vec::new();
    for m in MeasureId::ATTRIBUTES {
        let published = PUBLISHED_KAPPA.iter().find(|(name, _)| *name == m.as_str()).unwrap().1;
        match ours.get(m.as_str()) {
            Some(k) if (k - published).abs() <= ATTRIBUTE_KAPPA_TOL => {}
            other => problems.push(format!("{m}: {other:?} vs {published}")),
        }
    }
    let paired: Vec<(f64, f64)> = PUBLISHED_KAPPA.iter().filter_map(|(name, k)| ours.get(*name).map(|o| (*o, *k))).collect();
    let (a, b): (Vec<f64>, Vec<f64>) = paired.iter().copied().unzip();
    let rho = spearman(&a, &b).unwrap_or(f64::NAN);
    if paired.len() != 16 || rho.is_nan() || rho < KAPPA_RANK_MIN {
        problems.push(format!("rank correlation {rho:.3} over {} measures", paired.len()));
    }
    verdict(problems.is_empty(), format!("kappa rank correlation {rho:.3}{}", first(&problems)))
}

fn main() -> ExitCode {
    let checks: [(&str, Check); 9] = [
        ("measure contract", measure_contract),
        ("oracle equivalence", oracle_equivalence),
        ("normalization rules", normalization_rules),
        ("stimulus compliance", stimulus_compliance),
        ("alignment recovery", alignment_recovery),
        ("triplet constraints", triplet_constraints),
        ("statistics oracles", statistics_oracles),
        ("model harness", mllm_harness),
        ("published data (conditional)", published_data),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (i, (name, check)) in checks.iter().enumerate() {
        if !filter.is_empty() && !filter.iter().any(|f| name.contains(f.as_str())) {
            continue;
        }
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|e| {
            let msg = e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()));
            Verdict::Fail(format!("panicked: {}", msg.unwrap_or_default()))
        });
        let secs = start.elapsed().as_secs_f64();
        let (tag, detail) = match outcome {
            Verdict::Pass(d) => ("PASS", d),
            Verdict::Fail(d) => {
                failed += 1;
                ("FAIL", d)
            }
            Verdict::NotRun(d) => ("NOT RUN", d),
        };
        println!("{tag:<7} {}. {name}: {detail} [{secs:.1}s]", i + 1);
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} acceptance criteria failed");
        ExitCode::FAILURE
    }
}
