//! Command-line front end for the analysis pipeline.
//!
//! Every subcommand reads file-based inputs and emits canonical JSON (sorted
//! keys, 6-decimal reals, LF), so identical invocations produce byte-identical
//! outputs. Reports are written atomically (temp file + rename). The NEO_SEED
//! environment variable overrides the configured seed.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use neoplastic_core::canon::to_canonical_json;
use neoplastic_core::corpus::{
    load_corpus, parse_composition, render_svg, serialize_composition, serialize_manifest,
    CorpusManifest,
};
use neoplastic_core::cues::rank_cues;
use neoplastic_core::pipeline::{analyze_corpus, run_pipeline, score_candidate_set, stats_value};
use neoplastic_core::scene::{corpus_feature_stats, validate_composition, Violation};
use neoplastic_core::synth::{
    gen_neoplastic, gen_offstyle, perturb, sample_ops, Defect, GenParams,
};
use neoplastic_core::PipelineConfig;

#[derive(Parser)]
#[command(
    name = "neoplastic",
    version,
    about = "Symbolic analysis and attribution of neo-plastic compositions"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum DefectArg {
    DiagonalLine,
    OffpaletteColor,
    Both,
}

impl From<DefectArg> for Defect {
    fn from(d: DefectArg) -> Defect {
        match d {
            DefectArg::DiagonalLine => Defect::DiagonalLine,
            DefectArg::OffpaletteColor => Defect::OffpaletteColor,
            DefectArg::Both => Defect::Both,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Validate a composition file or every composition in a manifest.
    Validate {
        path: PathBuf,
        /// Also check the strict style constraints (axis-aligned lines,
        /// palette colors only).
        #[arg(long)]
        strict: bool,
    },
    /// Generate a seeded corpus of compositions plus a manifest.
    Gen {
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value_t = 10)]
        count: u32,
        /// Inject a style defect into every generated composition.
        #[arg(long)]
        defect: Option<DefectArg>,
        /// Derive each composition from the previous one by seeded
        /// perturbation instead of generating independently.
        #[arg(long)]
        chain: bool,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Cue profiles for every composition in a manifest.
    Cues {
        manifest: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Step 1 difference metrics, each painting against its prefix.
    Diff {
        manifest: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also export occurrence frequencies as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Mine the invariant profile of a corpus.
    Mine {
        manifest: PathBuf,
        /// Print a human-readable summary instead of JSON.
        #[arg(long)]
        summary: bool,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Mine a corpus and score a candidate set against it.
    Score {
        manifest: PathBuf,
        #[arg(long)]
        candidates: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also export one CSV row per candidate.
        #[arg(long)]
        csv: Option<PathBuf>,
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Run the full pipeline and write a single report file.
    Run {
        manifest: PathBuf,
        #[arg(long)]
        candidates: Option<PathBuf>,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Render a composition file to SVG.
    Render {
        file: PathBuf,
        #[arg(long)]
        svg: PathBuf,
    },
}

fn main() {
    let cli = Cli::parse();
    if let Err(err) = dispatch(cli.command) {
        eprintln!("error: {err:#}");
        std::process::exit(1);
    }
}

fn load_config(path: Option<&Path>) -> Result<PipelineConfig> {
    let mut cfg = match path {
        Some(p) => {
            let text =
                fs::read_to_string(p).with_context(|| format!("reading config {}", p.display()))?;
            PipelineConfig::from_json(&text)?
        }
        None => PipelineConfig::default(),
    };
    if let Ok(seed) = std::env::var("NEO_SEED") {
        cfg.seed = seed
            .parse()
            .context("NEO_SEED must be an unsigned 64-bit integer")?;
    }
    Ok(cfg)
}

/// Write bytes atomically: all-or-nothing, never a partial file.
fn write_atomic(path: &Path, bytes: &str) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent)
            .with_context(|| format!("creating directory {}", parent.display()))?;
    }
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, bytes).with_context(|| format!("writing {}", tmp.display()))?;
    fs::rename(&tmp, path).with_context(|| format!("renaming into {}", path.display()))?;
    Ok(())
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => write_atomic(path, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn violations_value(id: &str, ordinal: u32, violations: &[Violation]) -> Value {
    json!({
        "id": id,
        "ordinal": ordinal,
        "violations": violations
            .iter()
            .map(|v| json!({
                "element": v.element.map(|i| json!(i)).unwrap_or(Value::Null),
                "kind": v.kind.as_str(),
            }))
            .collect::<Vec<_>>(),
    })
}

fn dispatch(command: Command) -> Result<()> {
    match command {
        Command::Validate { path, strict } => {
            let cfg = load_config(None)?;
            let text =
                fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
            let looks_like_manifest = serde_json::from_str::<Value>(&text)
                .ok()
                .and_then(|v| v.as_object().map(|m| m.contains_key("artist")))
                .unwrap_or(false);
            let mut entries = Vec::new();
            if looks_like_manifest {
                let corpus = load_corpus(&path)?;
                for c in &corpus.compositions {
                    let violations = validate_composition(c, strict, cfg.palette_tol);
                    entries.push(violations_value(&c.id, c.ordinal, &violations));
                }
            } else {
                let c =
                    parse_composition(&text).map_err(|e| e.in_file(path.display().to_string()))?;
                let violations = validate_composition(&c, strict, cfg.palette_tol);
                entries.push(violations_value(&c.id, c.ordinal, &violations));
            }
            emit(None, &to_canonical_json(&Value::Array(entries)))
        }

        Command::Gen {
            seed,
            count,
            defect,
            chain,
            out,
            config,
        } => {
            let cfg = load_config(config.as_deref())?;
            let seed = seed.unwrap_or(cfg.seed);
            generate(seed, count, defect.map(Defect::from), chain, &out, &cfg)
        }

        Command::Cues {
            manifest,
            out,
            config,
        } => {
            let cfg = load_config(config.as_deref())?;
            let corpus = load_corpus(&manifest)?;
            let analysis = analyze_corpus(&corpus.compositions, &cfg)?;
            let entries: Vec<Value> = corpus
                .compositions
                .iter()
                .zip(&analysis.cues)
                .map(|(c, profile)| {
                    json!({
                        "id": c.id,
                        "ordinal": c.ordinal,
                        "cues": profile.to_value(),
                        "ranked": rank_cues(profile, &cfg.cue_norms),
                    })
                })
                .collect();
            emit(out.as_deref(), &to_canonical_json(&Value::Array(entries)))
        }

        Command::Diff {
            manifest,
            out,
            csv,
            config,
        } => {
            let cfg = load_config(config.as_deref())?;
            let corpus = load_corpus(&manifest)?;
            let analysis = analyze_corpus(&corpus.compositions, &cfg)?;
            let entries: Vec<Value> = corpus
                .compositions
                .iter()
                .zip(&analysis.step1)
                .map(|(c, report)| {
                    json!({"id": c.id, "ordinal": c.ordinal, "report": report.to_value()})
                })
                .collect();
            if let Some(csv_path) = csv {
                let mut text = String::from("ordinal,id,signature,frequency\n");
                for (c, report) in corpus.compositions.iter().zip(&analysis.step1) {
                    for (sig, freq) in &report.occurrence_freqs {
                        text.push_str(&format!(
                            "{},{},{},{freq:.6}\n",
                            c.ordinal,
                            c.id,
                            sig.token()
                        ));
                    }
                }
                write_atomic(&csv_path, &text)?;
            }
            let doc = json!({
                "feature_stats": stats_value(&analysis.stats),
                "step1": entries,
            });
            emit(out.as_deref(), &to_canonical_json(&doc))
        }

        Command::Mine {
            manifest,
            summary,
            out,
            config,
        } => {
            let cfg = load_config(config.as_deref())?;
            let corpus = load_corpus(&manifest)?;
            let analysis = analyze_corpus(&corpus.compositions, &cfg)?;
            if summary {
                emit(out.as_deref(), &analysis.profile.summary())
            } else {
                let doc = json!({
                    "feature_stats": stats_value(&analysis.stats),
                    "step3": analysis.profile.to_value(),
                });
                emit(out.as_deref(), &to_canonical_json(&doc))
            }
        }

        Command::Score {
            manifest,
            candidates,
            out,
            csv,
            config,
        } => {
            let cfg = load_config(config.as_deref())?;
            let corpus = load_corpus(&manifest)?;
            let analysis = analyze_corpus(&corpus.compositions, &cfg)?;
            let candidate_corpus = load_corpus(&candidates)?;
            let scored = score_candidate_set(
                &candidate_corpus.compositions,
                &corpus.compositions,
                &analysis,
                &cfg,
            )?;
            if let Some(csv_path) = csv {
                let mut text = String::from(
                    "candidate_id,score,verdict,satisfied,violated,nearest_similarity,new_concepts\n",
                );
                for report in &scored.reports {
                    text.push_str(&report.csv_row());
                }
                write_atomic(&csv_path, &text)?;
            }
            let doc = json!({
                "reports": scored
                    .reports
                    .iter()
                    .map(|r| r.to_value())
                    .collect::<Vec<_>>(),
                "summary": scored
                    .summary
                    .as_ref()
                    .map(|s| s.to_value())
                    .unwrap_or(Value::Null),
            });
            emit(out.as_deref(), &to_canonical_json(&doc))
        }

        Command::Run {
            manifest,
            candidates,
            config,
            out,
        } => {
            let cfg = load_config(config.as_deref())?;
            let report = run_pipeline(&manifest, candidates.as_deref(), &cfg)?;
            write_atomic(&out, &to_canonical_json(&report))
        }

        Command::Render { file, svg } => {
            let text =
                fs::read_to_string(&file).with_context(|| format!("reading {}", file.display()))?;
            let c = parse_composition(&text).map_err(|e| e.in_file(file.display().to_string()))?;
            write_atomic(&svg, &render_svg(&c))
        }
    }
}

fn generate(
    seed: u64,
    count: u32,
    defect: Option<Defect>,
    chain: bool,
    out: &Path,
    cfg: &PipelineConfig,
) -> Result<()> {
    if chain && defect.is_some() {
        bail!("--chain generates in-style sequences; combine with --defect is not supported");
    }
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;

    let mut compositions = Vec::new();
    if chain {
        let mut current = gen_neoplastic(&GenParams::new(seed))?;
        compositions.push(current.clone());
        for step in 1..count {
            let stats = corpus_feature_stats(std::slice::from_ref(&current));
            let ops = sample_ops(&current, 2, seed.wrapping_add(step as u64));
            let (next, _) = perturb(&current, &ops, &stats, cfg.epsilon, cfg.palette_tol)?;
            compositions.push(next.clone());
            current = next;
        }
    } else {
        for i in 0..count {
            let params = GenParams::new(seed.wrapping_add(i as u64));
            let c = match defect {
                Some(d) => gen_offstyle(&params, d)?,
                None => gen_neoplastic(&params)?,
            };
            compositions.push(c);
        }
    }

    let mut paths = Vec::new();
    for (i, c) in compositions.iter_mut().enumerate() {
        c.ordinal = i as u32;
        c.id = format!("{}-{i:03}", if defect.is_some() { "off" } else { "neo" });
        let name = format!("comp_{i:03}.json");
        write_atomic(&out.join(&name), &serialize_composition(c))?;
        paths.push(name);
    }
    let manifest = CorpusManifest {
        artist: "synthetic".into(),
        compositions: paths,
    };
    write_atomic(&out.join("manifest.json"), &serialize_manifest(&manifest))?;
    println!(
        "wrote {} compositions and manifest.json to {}",
        compositions.len(),
        out.display()
    );
    Ok(())
}
