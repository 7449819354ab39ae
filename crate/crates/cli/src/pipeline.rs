//! Stage orchestration and artifact writing.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::time::Instant;

use nbse::ablation::{select_features, SelectionResult};
use nbse::eval::{retention_sweep, target_count, LabeledDataset, RetentionCurve, SweepConfig};
use nbse::graph::{build_qc_backbone, girth, local_scales, weight_graph_on_backbone, Protograph};
use nbse::nbse::{
    feature_axis_embedding, feature_axis_embedding_from_fingerprint, fingerprint, fingerprint_at,
    FeatureEmbedding, FeatureParams, FingerprintMode, FingerprintParams, SpectralFingerprint,
};
use nbse::nishimori::{find_beta_n, NishimoriResult};
use nbse::noise::{beta_shift_sweep, ShiftParams, ShiftTable};
use nbse::{fmt_f64, DataMatrix, NbseError, SimilarityGraph};

use crate::config::{Backbone, FeatureSource, RunConfig};
use crate::error::{CliError, CliResult};
use crate::io::{ingest_matrix, read_labels, MatrixFormat};
use crate::report::{RunReport, StageRecord};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Stage {
    Ingest,
    Graph,
    Beta,
    Fingerprint,
    FeatureEmbedding,
    Selection,
    Evaluation,
    NoiseSweep,
}

impl Stage {
    pub const ALL: [Stage; 8] = [
        Stage::Ingest,
        Stage::Graph,
        Stage::Beta,
        Stage::Fingerprint,
        Stage::FeatureEmbedding,
        Stage::Selection,
        Stage::Evaluation,
        Stage::NoiseSweep,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Stage::Ingest => "ingest",
            Stage::Graph => "graph",
            Stage::Beta => "beta",
            Stage::Fingerprint => "fingerprint",
            Stage::FeatureEmbedding => "feature_embedding",
            Stage::Selection => "selection",
            Stage::Evaluation => "evaluation",
            Stage::NoiseSweep => "noise_sweep",
        }
    }

    /// Stages needed to reach `self` through the main chain.
    pub fn prefix(self) -> Vec<Stage> {
        if self == Stage::NoiseSweep {
            return vec![Stage::Ingest, Stage::NoiseSweep];
        }
        Stage::ALL.into_iter().filter(|&s| s <= self).collect()
    }
}

/// Outputs of one pipeline run, kept for callers that want more than the
/// report.
#[derive(Debug, Default)]
pub struct RunOutputs {
    pub report: RunReport,
    pub data: Option<DataMatrix>,
    pub graph: Option<SimilarityGraph>,
    pub root: Option<NishimoriResult>,
    pub fingerprint: Option<SpectralFingerprint>,
    pub embedding: Option<FeatureEmbedding>,
    pub selections: Vec<(f64, SelectionResult)>,
    pub curve: Option<RetentionCurve>,
    pub shifts: Option<ShiftTable>,
}

fn create(dir: &Path, name: &str) -> CliResult<BufWriter<File>> {
    let path = dir.join(name);
    File::create(&path).map(BufWriter::new).map_err(CliError::io(path))
}

fn write_artifact(
    dir: &Path,
    name: &str,
    stage: &'static str,
    f: impl FnOnce(&mut BufWriter<File>) -> nbse::Result<()>,
) -> CliResult<()> {
    let mut out = create(dir, name)?;
    f(&mut out).map_err(CliError::stage(stage))?;
    out.flush().map_err(CliError::io(dir.join(name)))
}

fn write_text(dir: &Path, name: &str, text: &str) -> CliResult<()> {
    let path = dir.join(name);
    std::fs::write(&path, text).map_err(CliError::io(path))
}

fn root_entries(st: &mut StageRecord, r: &NishimoriResult) {
    st.put_f64("beta_n", r.beta_n);
    st.put_f64("residual", r.residual);
    st.put_f64("g", r.g);
    st.put_f64("bracket_low", r.bracket.0);
    st.put_f64("bracket_high", r.bracket.1);
    st.put("iterations", r.iterations);
}

fn join<T: ToString>(v: &[T]) -> String {
    v.iter().map(T::to_string).collect::<Vec<_>>().join(";")
}

fn object_graph(cfg: &RunConfig, x: &DataMatrix) -> nbse::Result<(SimilarityGraph, Option<usize>, usize)> {
    match cfg.backbone {
        Backbone::Knn => {
            let (g, _) = cfg.graph.build(x)?;
            let gi = girth(&g);
            Ok((g, gi, 1))
        }
        Backbone::QcLdpc => {
            let proto = Protograph {
                base: cfg.qc.base.clone(),
                lift: cfg.qc.lift,
                shifts: None,
                seed: cfg.qc.seed,
                degree_bounds: cfg.qc.degree_bounds,
            };
            let qc = build_qc_backbone(&proto, cfg.qc.girth_min, cfg.qc.max_retries)?;
            if qc.graph.n_nodes() != x.rows() {
                return Err(NbseError::DimensionMismatch {
                    expected: x.rows(),
                    actual: qc.graph.n_nodes(),
                });
            }
            let scales = local_scales(x, cfg.graph.clamped(x.rows()).k_scale)?;
            let g = weight_graph_on_backbone(x, &qc.graph, &scales)?;
            Ok((g, qc.girth, qc.attempts))
        }
    }
}

/// Run `stages` in pipeline order, writing artifacts under the output
/// directory. Stages outside the set are reported as skipped.
pub fn run_stages(cfg: &RunConfig, stages: &[Stage]) -> CliResult<RunOutputs> {
    cfg.validate()?;
    let dir = cfg.output_dir.as_path();
    std::fs::create_dir_all(dir).map_err(CliError::io(dir))?;

    let mut out = RunOutputs::default();
    out.report.config = cfg
        .entries()
        .filter(|(k, _)| *k != "output_dir")
        .map(|(k, v)| (k.to_string(), v.to_string()))
        .collect();

    let labels = match &cfg.labels {
        Some(p) => Some(read_labels(p).map_err(CliError::stage("ingest"))?),
        None => None,
    };

    for stage in Stage::ALL {
        let name = stage.name();
        if !stages.contains(&stage) {
            out.report.stages.push(StageRecord::skipped(name, "not requested"));
            continue;
        }
        let t0 = Instant::now();
        let mut st = StageRecord::executed(name);
        let skip = run_one(cfg, stage, dir, labels.as_deref(), &mut out, &mut st)?;
        if let Some(reason) = skip {
            out.report.stages.push(StageRecord::skipped(name, reason));
            continue;
        }
        st.seconds = t0.elapsed().as_secs_f64();
        log::info!("stage {name} done in {:.3} s", st.seconds);
        out.report.stages.push(st);
    }

    write_text(dir, "report.txt", &out.report.render())?;
    write_text(dir, "timings.txt", &out.report.render_timings())?;
    Ok(out)
}

/// Execute one stage; `Ok(Some(reason))` means it was skipped.
fn run_one(
    cfg: &RunConfig,
    stage: Stage,
    dir: &Path,
    labels: Option<&[usize]>,
    out: &mut RunOutputs,
    st: &mut StageRecord,
) -> CliResult<Option<String>> {
    let err = CliError::stage;
    match stage {
        Stage::Ingest => {
            let input = cfg.input.as_deref().expect("validated");
            let fmt = cfg.input_format().unwrap_or(MatrixFormat::Csv);
            let x = ingest_matrix(input, fmt).map_err(err("ingest"))?;
            if let Some(y) = labels {
                if y.len() != x.rows() {
                    return Err(CliError::Stage {
                        stage: "ingest",
                        source: NbseError::DimensionMismatch {
                            expected: x.rows(),
                            actual: y.len(),
                        },
                    });
                }
            }
            st.put("n_objects", x.rows());
            st.put("n_features", x.cols());
            out.data = Some(x);
        }
        Stage::Graph => {
            let x = out.data.as_ref().expect("ingest ran");
            let (g, gi, attempts) = object_graph(cfg, x).map_err(err("graph"))?;
            let s = g.stats();
            st.put(
                "backbone",
                match cfg.backbone {
                    Backbone::Knn => "knn",
                    Backbone::QcLdpc => "qc_ldpc",
                },
            );
            st.put("n_nodes", s.n_nodes);
            st.put("n_edges", s.n_edges);
            st.put_f64("avg_degree", s.avg_degree);
            st.put("n_components", s.n_components);
            st.put_f64("min_weight", s.min_weight);
            st.put_f64("max_weight", s.max_weight);
            st.put("girth", gi.map_or("infinite".to_string(), |v| v.to_string()));
            if cfg.backbone == Backbone::QcLdpc {
                st.put("qc_attempts", attempts);
            }
            write_artifact(dir, "graph.txt", "graph", |w| nbse::graph::write_edge_list(&g, w))?;
            out.graph = Some(g);
        }
        Stage::Beta => {
            let g = out.graph.as_ref().expect("graph ran");
            let r = find_beta_n(g, &cfg.search).map_err(err("beta"))?;
            root_entries(st, &r);
            let mut text = String::new();
            for (k, v) in &st.entries {
                text.push_str(&format!("{k}={v}\n"));
            }
            write_text(dir, "beta.txt", &text)?;
            out.root = Some(r);
        }
        Stage::Fingerprint => {
            let Some(mode) = cfg.fingerprint else {
                return Ok(Some("fingerprint = none".into()));
            };
            let x = out.data.as_ref().expect("ingest ran");
            let params = FingerprintParams {
                graph: cfg.graph,
                search: cfg.search,
            };
            let fp = match (mode, &out.root) {
                (FingerprintMode::Global, Some(r)) => fingerprint_at(x, r.clone(), &params),
                _ => fingerprint(x, mode, &params).map_err(err("fingerprint"))?,
            };
            st.put(
                "mode",
                match mode {
                    FingerprintMode::Global => "global",
                    FingerprintMode::PerFeature => "per_feature",
                },
            );
            st.put("n_features", fp.n_features());
            st.put("n_flagged", fp.n_flagged());
            if let Some(r) = &fp.global {
                st.put_f64("beta_n", r.beta_n);
            }
            for (l, flag) in fp.flags.iter().enumerate() {
                if let Some(f) = flag {
                    st.put(format!("flag[{l}]"), f);
                }
            }
            write_artifact(dir, "fingerprint.csv", "fingerprint", |w| fp.write_csv(w))?;
            out.fingerprint = Some(fp);
        }
        Stage::FeatureEmbedding => {
            let params = FeatureParams {
                k_feat: cfg.k_feat,
                standardize: cfg.standardize,
                search: cfg.search,
            };
            let emb = match cfg.feature_source {
                FeatureSource::Data => {
                    feature_axis_embedding(out.data.as_ref().expect("ingest ran"), &params)
                }
                FeatureSource::Fingerprint => match &out.fingerprint {
                    Some(fp) => feature_axis_embedding_from_fingerprint(fp, &params),
                    None => {
                        return Err(CliError::Config(
                            "feature_source = fingerprint needs a fingerprint".into(),
                        ))
                    }
                },
            }
            .map_err(err("feature_embedding"))?;
            st.put(
                "source",
                match cfg.feature_source {
                    FeatureSource::Data => "data",
                    FeatureSource::Fingerprint => "fingerprint",
                },
            );
            root_entries(st, &emb.root);
            st.put_f64("eigen_residual", emb.residual);
            st.put("feature_edges", emb.affinity_stats.n_edges);
            st.put_f64("feature_avg_degree", emb.affinity_stats.avg_degree);
            write_artifact(dir, "phi.csv", "feature_embedding", |w| emb.write_csv(w))?;
            out.embedding = Some(emb);
        }
        Stage::Selection => {
            let phi = &out.embedding.as_ref().expect("embedding ran").phi;
            let d = phi.len();
            let mut text = String::from("p,n,selected\n");
            for &p in &cfg.proportions {
                let n = target_count(p, d);
                let sel = select_features(phi, n).map_err(err("selection"))?;
                st.put(format!("n[{p}]"), n);
                st.put(format!("selected[{p}]"), join(&sel.indices));
                if !sel.fallback_events.is_empty() {
                    st.put(format!("fallbacks[{p}]"), sel.fallback_events.len());
                }
                text.push_str(&format!("{},{},{}\n", fmt_f64(p), n, join(&sel.indices)));
                out.selections.push((p, sel));
            }
            write_text(dir, "selection.csv", &text)?;
        }
        Stage::Evaluation => {
            let Some(y) = labels else {
                return Ok(Some("no labels configured".into()));
            };
            let x = out.data.clone().expect("ingest ran");
            let data = LabeledDataset::from_labels(x, y.to_vec()).map_err(err("evaluation"))?;
            let sweep = SweepConfig {
                methods: cfg.methods.clone(),
                proportions: cfg.proportions.clone(),
                seeds: cfg.seeds.clone(),
                test_fraction: cfg.test_fraction,
                classifier: cfg.classifier,
                phi: out.embedding.as_ref().map(|e| e.phi.clone()),
            };
            let curve = retention_sweep(&data, &sweep).map_err(err("evaluation"))?;
            for c in &curve.points {
                let key = format!("{}[{}]", c.method.name(), c.p);
                st.put(format!("mean_{key}"), fmt_f64(c.mean));
                st.put(format!("std_{key}"), fmt_f64(c.std));
            }
            write_artifact(dir, "retention_records.csv", "evaluation", |w| {
                curve.write_records_csv(w)
            })?;
            write_artifact(dir, "retention_summary.csv", "evaluation", |w| {
                curve.write_summary_csv(w)
            })?;
            out.curve = Some(curve);
        }
        Stage::NoiseSweep => {
            let factors = if cfg.noise_factors.is_empty() {
                if !cfg.noise_forced {
                    return Ok(Some("noise_factors = none".into()));
                }
                ShiftParams::default().factors
            } else {
                cfg.noise_factors.clone()
            };
            let x = out.data.as_ref().expect("ingest ran");
            let params = ShiftParams {
                factors,
                trials: cfg.noise_trials,
                graph: cfg.graph,
                search: cfg.search,
                seed: cfg.noise_seed,
                ..ShiftParams::default()
            };
            let table = beta_shift_sweep(x, &params).map_err(err("noise_sweep"))?;
            let f = &table.fit;
            st.put_f64("beta_n", table.beta_n);
            st.put_f64("slope", f.slope);
            st.put_f64("slope_ci_low", f.slope_ci.0);
            st.put_f64("slope_ci_high", f.slope_ci.1);
            st.put("n_failed", f.n_failed);
            st.put_f64("c1", f.c1);
            st.put("bound_violations", f.bound_violations);
            write_artifact(dir, "noise_shifts.csv", "noise_sweep", |w| table.write_csv(w))?;
            write_artifact(dir, "noise_fit.txt", "noise_sweep", |w| table.write_fit(w))?;
            out.shifts = Some(table);
        }
    }
    Ok(None)
}

/// Every stage; evaluation and the noise sweep still skip themselves when
/// unconfigured.
pub fn run_pipeline(cfg: &RunConfig) -> CliResult<RunOutputs> {
    run_stages(cfg, &Stage::ALL)
}
