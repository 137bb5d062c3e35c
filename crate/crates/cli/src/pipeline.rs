//! The batch stages. Each one reads what earlier stages wrote, skips outputs that
//! already exist unless forced, and writes files through atomic renames.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;
use std::path::Path;
use std::sync::Arc;
use std::time::Duration;

use graphsim_analysis::{build_report, measure_judgment, truth_from_sessions, write_tidy_tsv, JudgeInput, ReportOptions, SelectionRule};
use graphsim_core::catalog::{real_entry, synthetic_cells, synthetic_stimulus, AlignmentRecord, Catalog, CatalogEntry};
use graphsim_core::dynamic::{slice_dynamic, EdgeEventLog};
use graphsim_core::io::{format_edge_list, read_edge_list};
use graphsim_core::store::{load_records, JsonlStore};
use graphsim_core::{seed, Graph, JudgmentRecord, LayoutKind};
use graphsim_harness::{assign_clusters, build_session_over, pools, Cell, ClusteredStimulus, LabelManifest, Session, Trial};
use graphsim_judge::{run_benchmark, HttpProvider, ImageSource, MockProvider, ModelConfig, ProviderKind, SharedImages};
use graphsim_measures::{read_scores_tsv, score_pairs, write_scores_tsv, GraphContext, MeasureId, MeasureScore};
use graphsim_render::{
    apply_alignment, best_rotation, preprocess_for_model, radii_for_canvas, render_stimulus, write_sidecar, Provenance, RasterImage,
};
use image::imageops::{self, FilterType};
use rayon::prelude::*;

use crate::config::{Coverage, RealSource, RunConfig};
use crate::layout::{load_catalog, slug, temp_sibling, write_atomic, OutputLayout};
use crate::CliError;

/// Counts of files a stage produced and of outputs it found already in place.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StageReport {
    pub stage: &'static str,
    pub written: usize,
    pub skipped: usize,
}

impl StageReport {
    fn new(stage: &'static str) -> Self {
        StageReport { stage, written: 0, skipped: 0 }
    }

    fn tally(stage: &'static str, wrote: impl IntoIterator<Item = bool>) -> Self {
        let mut r = Self::new(stage);
        for w in wrote {
            if w {
                r.written += 1;
            } else {
                r.skipped += 1;
            }
        }
        r
    }
}

impl fmt::Display for StageReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {} written, {} already present", self.stage, self.written, self.skipped)
    }
}

pub fn participant_id(index: usize) -> String {
    format!("p{:02}", index + 1)
}

pub struct Pipeline {
    pub cfg: RunConfig,
    pub layout: OutputLayout,
    pub force: bool,
}

fn read_graph(layout: &OutputLayout, id: &str) -> Result<Graph, CliError> {
    let path = layout.graph(id);
    read_edge_list(&path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => CliError::MissingInput { path: path.clone(), stage: "generate" },
        _ => CliError::io(&path, e),
    })
}

fn save_png(img: &RasterImage, path: &Path) -> Result<(), CliError> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    let tmp = temp_sibling(path);
    img.save_png(&tmp)?;
    std::fs::rename(&tmp, path).map_err(|e| CliError::io(path, e))
}

fn downscale(img: &RasterImage, side: u32) -> RasterImage {
    if img.width() == side && img.height() == side {
        return img.clone();
    }
    RasterImage { pixels: imageops::resize(&img.pixels, side, side, FilterType::Triangle), provenance: img.provenance.clone() }
}

/// Snapshots of one real dataset, one catalog entry per layout. Snapshots outside the
/// reachable bins are dropped.
pub fn real_stimuli(src: &RealSource, catalog_seed: u64, labels: &LabelManifest) -> Result<Vec<(CatalogEntry, Graph)>, CliError> {
    let text = std::fs::read_to_string(&src.path).map_err(|e| CliError::io(&src.path, e))?;
    let log = EdgeEventLog::parse(&text, src.window).map_err(|e| CliError::parse(&src.path, e))?;
    let mut out = Vec::new();
    for snap in slice_dynamic(&log)? {
        for layout in LayoutKind::ALL {
            let id = slug(&format!("{}-{}-{}-{}", src.dataset_id, src.window.as_str(), snap.window_label, layout.as_str()));
            let label = labels.get(&id).cloned().or_else(|| src.label.clone());
            match real_entry(&id, &src.dataset_id, &snap.window_label, layout, &snap.graph, catalog_seed, label) {
                Some(entry) => out.push((entry, snap.graph.clone())),
                None => tracing::debug!(%id, "snapshot outside the reachable cells"),
            }
        }
    }
    Ok(out)
}

/// One measure judge per measure present in `scores`, over the trials `keep` admits.
/// The ordinal of each decision is |S(Q,T_A) - S(Q,T_B)|.
pub fn measure_judges<'a>(
    scores: &[MeasureScore],
    trials: impl IntoIterator<Item = &'a Trial> + Clone,
    keep: impl Fn(&str) -> bool,
) -> Vec<JudgeInput> {
    let mut sim: HashMap<(MeasureId, &str, &str), f64> = HashMap::new();
    for s in scores {
        sim.insert((s.measure, &s.pair.0, &s.pair.1), s.similarity);
        sim.insert((s.measure, &s.pair.1, &s.pair.0), s.similarity);
    }
    let present: BTreeSet<MeasureId> = scores.iter().map(|s| s.measure).collect();
    MeasureId::ALL
        .into_iter()
        .filter(|m| present.contains(m))
        .map(|m| {
            let mut records = Vec::new();
            let mut deltas = BTreeMap::new();
            for trial in trials.clone().into_iter().filter(|t| keep(&t.trial_id)) {
                let t = &trial.triplet;
                let sa = sim.get(&(m, t.query_id.as_str(), t.target_a_id.as_str()));
                let sb = sim.get(&(m, t.query_id.as_str(), t.target_b_id.as_str()));
                if let (Some(&sa), Some(&sb)) = (sa, sb) {
                    records.push(measure_judgment(m.as_str(), &trial.trial_id, &t.triplet_id, sa, sb));
                    deltas.insert(trial.trial_id.clone(), (sa - sb).abs());
                }
            }
            JudgeInput::measure(m.as_str(), records, deltas)
        })
        .collect()
}

/// Model-ready images under `model/{triplet}/{stimulus}.png`.
struct ModelImages(OutputLayout);

impl ImageSource for ModelImages {
    fn image(&self, triplet_id: &str, stimulus_id: &str) -> Option<Vec<u8>> {
        std::fs::read(self.0.model_image(triplet_id, stimulus_id)).ok()
    }
}

impl Pipeline {
    pub fn new(cfg: RunConfig, force: bool) -> Self {
        let layout = OutputLayout::new(cfg.output_dir.clone());
        Pipeline { cfg, layout, force }
    }

    fn label_manifest(&self) -> Result<LabelManifest, CliError> {
        let Some(path) = &self.cfg.labels else { return Ok(LabelManifest::new()) };
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| CliError::parse(path, e))
    }

    /// Catalog manifest plus one edge list per stimulus.
    pub fn generate(&self) -> Result<StageReport, CliError> {
        let path = &self.cfg.catalog_path;
        if path.exists() && !self.force {
            return Ok(StageReport { stage: "generate", written: 0, skipped: 1 });
        }
        let built = synthetic_cells(self.cfg.replicates)
            .into_par_iter()
            .map(|(g, s, d, l, r)| synthetic_stimulus(g, s, d, l, r, self.cfg.seed))
            .collect::<Result<Vec<_>, _>>()?;
        let labels = self.label_manifest()?;
        let mut all = built;
        for src in &self.cfg.real {
            all.extend(real_stimuli(src, self.cfg.seed, &labels)?);
        }
        let mut seen = HashSet::new();
        if let Some((e, _)) = all.iter().find(|(e, _)| !seen.insert(e.stimulus_id.as_str())) {
            return Err(CliError::Config(format!("stimulus id {} produced twice", e.stimulus_id)));
        }
        all.par_iter()
            .map(|(e, g)| write_atomic(&self.layout.graph(&e.stimulus_id), format_edge_list(g).as_bytes()))
            .collect::<Result<(), _>>()?;
        let catalog = Catalog { seed: self.cfg.seed, stimuli: all.iter().map(|(e, _)| e.clone()).collect(), alignments: Vec::new() };
        write_atomic(path, catalog.to_json().as_bytes())?;
        tracing::info!(stimuli = all.len(), "catalog written");
        Ok(StageReport { stage: "generate", written: all.len() + 1, skipped: 0 })
    }

    /// A PNG and a layout sidecar for every catalog stimulus.
    pub fn render(&self) -> Result<StageReport, CliError> {
        let catalog = load_catalog(&self.cfg.catalog_path)?;
        let wrote = catalog.stimuli.par_iter().map(|e| self.render_one(e)).collect::<Result<Vec<_>, _>>()?;
        Ok(StageReport::tally("render", wrote))
    }

    fn render_one(&self, e: &CatalogEntry) -> Result<bool, CliError> {
        let (png, sidecar) = (self.layout.stimulus_png(&e.stimulus_id), self.layout.stimulus_sidecar(&e.stimulus_id));
        if !self.force && png.exists() && sidecar.exists() {
            return Ok(false);
        }
        let g = read_graph(&self.layout, &e.stimulus_id)?;
        let (drawing, img) = render_stimulus(&e.stimulus_id, &g, e.layout, seed::derive(e.seed, "layout"), self.cfg.stimulus_canvas)?;
        save_png(&img, &png)?;
        let tmp = temp_sibling(&sidecar);
        write_sidecar(&drawing, &tmp)?;
        std::fs::rename(&tmp, &sidecar).map_err(|e| CliError::io(&sidecar, e))?;
        Ok(true)
    }

    /// Cluster labels for real stimuli: the manifest file first, then the label the
    /// catalog recorded at generation time.
    fn cluster_labels(&self, catalog: &Catalog) -> Result<LabelManifest, CliError> {
        let mut labels = self.label_manifest()?;
        for e in catalog.stimuli.iter().filter(|e| e.source.is_real()) {
            if let Some(l) = &e.cluster_label {
                labels.entry(e.stimulus_id.clone()).or_insert_with(|| l.clone());
            }
        }
        Ok(labels)
    }

    pub fn session_cells(&self, stimuli: &[ClusteredStimulus]) -> Vec<Cell> {
        match self.cfg.coverage {
            Coverage::Full => Cell::reachable(),
            Coverage::Available => {
                let by_cell = pools(stimuli);
                Cell::reachable().into_iter().filter(|c| by_cell.contains_key(c)).collect()
            }
        }
    }

    /// One Latin-square session per participant.
    pub fn triplets(&self) -> Result<StageReport, CliError> {
        let catalog = load_catalog(&self.cfg.catalog_path)?;
        let stimuli = assign_clusters(&catalog, &self.cluster_labels(&catalog)?)?;
        let cells = self.session_cells(&stimuli);
        if cells.is_empty() {
            return Err(CliError::Config("the catalog populates no condition cell".into()));
        }
        let mut wrote = Vec::new();
        for i in 0..self.cfg.participants {
            let id = participant_id(i);
            let path = self.layout.session(&id);
            if path.exists() && !self.force {
                wrote.push(false);
                continue;
            }
            let session = build_session_over(&stimuli, &cells, &id, seed::derive(self.cfg.seed, &id), i)?;
            session.validate_over(&cells)?;
            write_atomic(&path, session.to_json().as_bytes())?;
            wrote.push(true);
        }
        Ok(StageReport::tally("triplets", wrote))
    }

    fn load_stimulus(&self, id: &str, layouts: &HashMap<&str, LayoutKind>) -> Result<RasterImage, CliError> {
        let path = self.layout.stimulus_png(id);
        if !path.exists() {
            return Err(CliError::MissingInput { path, stage: "render" });
        }
        let provenance = Provenance { graph_id: id.to_string(), layout: layouts.get(id).copied(), rotation_degrees: 0.0 };
        Ok(RasterImage::load_png(&path, provenance)?)
    }

    /// Rotates every target toward its query, records the choice in the catalog, and
    /// writes the model-ready copies of all three images.
    pub fn align(&self) -> Result<StageReport, CliError> {
        let mut catalog = load_catalog(&self.cfg.catalog_path)?;
        let sessions = self.layout.load_sessions()?;
        let layouts: HashMap<&str, LayoutKind> = catalog.stimuli.iter().map(|e| (e.stimulus_id.as_str(), e.layout)).collect();
        let mut jobs: BTreeMap<(&str, &str), &str> = BTreeMap::new();
        let mut queries: BTreeSet<(&str, &str)> = BTreeSet::new();
        for t in sessions.iter().flat_map(|s| &s.trials).map(|t| &t.triplet) {
            jobs.insert((&t.triplet_id, &t.target_a_id), &t.query_id);
            jobs.insert((&t.triplet_id, &t.target_b_id), &t.query_id);
            queries.insert((&t.triplet_id, &t.query_id));
        }
        let previous: HashMap<(&str, &str), &AlignmentRecord> =
            catalog.alignments.iter().map(|a| ((a.triplet_id.as_str(), a.target_id.as_str()), a)).collect();
        let radii = radii_for_canvas(self.cfg.align_canvas);

        let results = jobs
            .par_iter()
            .map(|(&(triplet_id, target_id), &query_id)| -> Result<(AlignmentRecord, bool), CliError> {
                let aligned_path = self.layout.aligned(triplet_id, target_id);
                let model_path = self.layout.model_image(triplet_id, target_id);
                if let Some(&rec) = previous.get(&(triplet_id, target_id)) {
                    if !self.force && aligned_path.exists() && model_path.exists() {
                        return Ok((rec.clone(), false));
                    }
                }
                let query = self.load_stimulus(query_id, &layouts)?;
                let target = self.load_stimulus(target_id, &layouts)?;
                let side = self.cfg.align_canvas;
                let result = best_rotation(&downscale(&query, side), &downscale(&target, side), &radii)?;
                let aligned = apply_alignment(&target, &result);
                save_png(&aligned, &aligned_path)?;
                save_png(&preprocess_for_model(&aligned)?, &model_path)?;
                let rec = AlignmentRecord {
                    triplet_id: triplet_id.to_string(),
                    target_id: target_id.to_string(),
                    rotation_degrees: result.rotation_degrees,
                    auc: result.auc,
                };
                Ok((rec, true))
            })
            .collect::<Result<Vec<_>, _>>()?;
        queries
            .par_iter()
            .map(|&(triplet_id, query_id)| {
                let path = self.layout.model_image(triplet_id, query_id);
                if path.exists() && !self.force {
                    return Ok(());
                }
                save_png(&preprocess_for_model(&self.load_stimulus(query_id, &layouts)?)?, &path)
            })
            .collect::<Result<(), CliError>>()?;

        let report = StageReport::tally("align", results.iter().map(|(_, w)| *w));
        let alignments: Vec<AlignmentRecord> = results.into_iter().map(|(r, _)| r).collect();
        if alignments != catalog.alignments {
            catalog.alignments = alignments;
            write_atomic(&self.cfg.catalog_path, catalog.to_json().as_bytes())?;
        }
        Ok(report)
    }

    /// Similarity of every (query, target) pair shown in a session, for `only` or all
    /// 16 measures.
    pub fn measure(&self, only: &[MeasureId]) -> Result<StageReport, CliError> {
        let out = self.layout.scores();
        if out.exists() && !self.force {
            return Ok(StageReport { stage: "measure", written: 0, skipped: 1 });
        }
        let sessions = self.layout.load_sessions()?;
        let pairs: BTreeSet<(String, String)> = sessions
            .iter()
            .flat_map(|s| &s.trials)
            .flat_map(|t| {
                let t = &t.triplet;
                [(t.query_id.clone(), t.target_a_id.clone()), (t.query_id.clone(), t.target_b_id.clone())]
            })
            .collect();
        let ids: BTreeSet<&str> = pairs.iter().flat_map(|(a, b)| [a.as_str(), b.as_str()]).collect();
        let contexts = ids
            .par_iter()
            .map(|&id| Ok((id.to_string(), GraphContext::with_id(id, read_graph(&self.layout, id)?))))
            .collect::<Result<HashMap<String, GraphContext>, CliError>>()?;
        let measures = if only.is_empty() { MeasureId::ALL.to_vec() } else { only.to_vec() };
        let pairs: Vec<(String, String)> = pairs.into_iter().collect();
        let scores = score_pairs(&contexts, &pairs, &measures, &self.cfg.measures)?;
        let mut buf = Vec::new();
        write_scores_tsv(&mut buf, &scores).map_err(|e| CliError::io(&out, e))?;
        write_atomic(&out, &buf)?;
        Ok(StageReport { stage: "measure", written: scores.len(), skipped: 0 })
    }

    /// Runs every configured model, or only `provider`, over all session trials.
    /// Trials already in a model's judgment file are not asked again.
    pub async fn judge(&self, provider: Option<&str>) -> Result<StageReport, CliError> {
        let chosen: Vec<&ModelConfig> = match provider {
            Some(name) => {
                vec![self.cfg.providers.iter().find(|p| p.model_name == name).ok_or_else(|| CliError::UnknownProvider(name.to_string()))?]
            }
            None => self.cfg.providers.iter().collect(),
        };
        if chosen.is_empty() {
            return Err(CliError::Config("no [[providers]] configured".into()));
        }
        let trials: Vec<Trial> = self.layout.load_sessions()?.into_iter().flat_map(|s| s.trials).collect();
        if !self.layout.model_dir().exists() {
            return Err(CliError::MissingInput { path: self.layout.model_dir(), stage: "align" });
        }
        let images: SharedImages = Arc::new(ModelImages(self.layout.clone()));
        let mut report = StageReport::new("judge");
        for cfg in chosen {
            let path = self.layout.model_judgments(&cfg.model_name);
            if self.force && path.exists() {
                std::fs::remove_file(&path).map_err(|e| CliError::io(&path, e))?;
            }
            let mut store = JsonlStore::open(&path)?;
            if let Some(tail) = store.recovered_tail() {
                tracing::warn!(path = %path.display(), tail, "dropped an incomplete final record");
            }
            let done: HashSet<String> = store.read_all()?.into_iter().map(|r| r.trial_id).collect();
            let pending: Vec<Trial> = trials.iter().filter(|t| !done.contains(&t.trial_id)).cloned().collect();
            report.skipped += trials.len() - pending.len();
            report.written += pending.len();
            let sink = |r: &JudgmentRecord| store.append(r).map_err(Into::into);
            let summary = match cfg.provider {
                ProviderKind::Mock => {
                    run_benchmark(Arc::new(MockProvider::new(Duration::ZERO)), cfg, pending, images.clone(), sink).await?
                }
                _ => run_benchmark(Arc::new(HttpProvider::new()?), cfg, pending, images.clone(), sink).await?,
            };
            tracing::info!(model = %cfg.model_name, ok = summary.ok, failed = summary.failed, "judgments stored");
        }
        Ok(report)
    }

    /// Agreement report over the human judgments, model judgments and measure scores
    /// found in the output directory.
    pub fn analyze(&self) -> Result<StageReport, CliError> {
        let dir = self.layout.report_dir();
        if dir.join("report.json").exists() && !self.force {
            return Ok(StageReport { stage: "analyze", written: 0, skipped: 1 });
        }
        let human_path = self.layout.human();
        if !human_path.exists() {
            return Err(CliError::MissingJudgments(human_path));
        }
        let loaded = load_records(&human_path)?;
        if let Some(tail) = &loaded.partial_tail {
            tracing::warn!(path = %human_path.display(), tail, "ignoring an incomplete final record");
        }
        let human = loaded.records;
        if human.is_empty() {
            return Err(CliError::MissingJudgments(human_path));
        }
        let sessions = self.layout.load_sessions()?;
        let truth = truth_from_sessions(&sessions);
        let answered: HashSet<&str> = human.iter().map(|r| r.trial_id.as_str()).collect();

        let mut judges = Vec::new();
        let scores_path = self.layout.scores();
        if scores_path.exists() {
            let text = std::fs::read_to_string(&scores_path).map_err(|e| CliError::io(&scores_path, e))?;
            let scores = read_scores_tsv(&text)?;
            let trials: Vec<&Trial> = sessions.iter().flat_map(|s| &s.trials).collect();
            judges.extend(measure_judges(&scores, trials.iter().copied(), |id| answered.contains(id)));
        }
        judges.extend(self.model_judges(&answered)?);

        let options =
            ReportOptions { n_resamples: self.cfg.resamples, seed: seed::derive(self.cfg.seed, "analysis"), rule: SelectionRule::Positive };
        let report = build_report(&human, &judges, &truth, &options)?;
        let mut tidy = Vec::new();
        write_tidy_tsv(&mut tidy, &human, &judges, &truth).map_err(|e| CliError::io(&dir, e))?;
        let files: [(&str, Vec<u8>); 6] = [
            ("report.txt", report.to_text().into_bytes()),
            ("table3.tsv", report.table3_tsv().into_bytes()),
            ("table4.tsv", report.table4_tsv().into_bytes()),
            ("pairwise.tsv", report.pairwise_tsv().into_bytes()),
            ("tidy.tsv", tidy),
            ("report.json", report.to_json().into_bytes()),
        ];
        for (name, bytes) in &files {
            write_atomic(&dir.join(name), bytes)?;
        }
        Ok(StageReport { stage: "analyze", written: files.len(), skipped: 0 })
    }

    fn model_judges(&self, answered: &HashSet<&str>) -> Result<Vec<JudgeInput>, CliError> {
        let dir = self.layout.judgments_dir();
        let mut paths: Vec<_> = std::fs::read_dir(&dir)
            .map_err(|e| CliError::io(&dir, e))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| {
                let name = p.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
                name.starts_with("model-") && name.ends_with(".jsonl")
            })
            .collect();
        paths.sort();
        let mut out = Vec::new();
        for path in paths {
            let records: Vec<JudgmentRecord> =
                load_records(&path)?.records.into_iter().filter(|r| answered.contains(r.trial_id.as_str())).collect();
            let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
            let name = records.first().map_or_else(|| stem["model-".len()..].to_string(), |r| r.respondent.clone());
            out.push(JudgeInput::model(name, records));
        }
        Ok(out)
    }

    /// Every stage in order. Judging runs only with providers configured and analysis
    /// only once human judgments exist.
    pub async fn all(&self) -> Result<Vec<StageReport>, CliError> {
        let mut out = vec![self.generate()?, self.render()?, self.triplets()?, self.align()?, self.measure(&[])?];
        if !self.cfg.providers.is_empty() {
            out.push(self.judge(None).await?);
        }
        if self.layout.human().exists() {
            out.push(self.analyze()?);
        } else {
            tracing::info!("no human judgments yet; skipping analyze");
        }
        Ok(out)
    }
}

/// All sessions keyed by id.
pub fn sessions_by_id(sessions: Vec<Session>) -> BTreeMap<String, Session> {
    sessions.into_iter().map(|s| (s.session_id.clone(), s)).collect()
}
