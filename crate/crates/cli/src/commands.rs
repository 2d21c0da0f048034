use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use hyperevent::design::{build_designs, DesignConfig, DesignDiagnostics, DesignMatrix};
use hyperevent::estimation::{self, format_sig, AicLedger, ChoiceData, FitResult};
use hyperevent::simulation::{recovery_experiment, simulate_stream};
use hyperevent::statistics::{StatKind, TransformSpec};
use hyperevent::stream::{parse_event_stream, validate_stream, write_actors, write_events, EventStream};
use hyperevent::Error;
use log::{info, warn};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::{Cli, Command, DataArgs, SamplingArgs, Which};

pub const EXIT_DATA: u8 = 1;
pub const EXIT_NUMERICAL: u8 = 2;

/// Numerical failures exit with 2; everything else with 1.
pub fn exit_status(e: &anyhow::Error) -> u8 {
    match e.downcast_ref::<Error>() {
        Some(Error::NonFinite { .. } | Error::NoInformativeStrata | Error::EnumerationBound { .. }) => EXIT_NUMERICAL,
        _ => EXIT_DATA,
    }
}

/// Full-precision companion of a model fit.
#[derive(Debug, Serialize, Deserialize)]
pub struct FitArtifact {
    pub model: String,
    pub fit: FitResult,
    pub transform: TransformSpec,
    pub design: DesignDiagnostics,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ledger: Option<AicLedger>,
}

fn apply_data(cfg: &mut RunConfig, data: &DataArgs) {
    if let Some(p) = &data.events {
        cfg.paths.events = Some(p.clone());
    }
    if let Some(p) = &data.actors {
        cfg.paths.actors = Some(p.clone());
    }
    if let Some(p) = data.citation_policy {
        cfg.ingest.citation_policy = p;
    }
}

fn apply_sampling(cfg: &mut RunConfig, s: &SamplingArgs) {
    if let Some(seed) = s.seed {
        cfg.sampling.seed = Some(seed);
    }
    if let Some(m) = s.author_controls {
        cfg.sampling.author_controls = m;
    }
    if let Some(m) = s.citation_controls {
        cfg.sampling.citation_controls = m;
    }
}

fn apply_output(cfg: &mut RunConfig, output: &Option<PathBuf>) {
    if let Some(p) = output {
        cfg.paths.output = Some(p.clone());
    }
}

fn load_stream(cfg: &RunConfig) -> Result<EventStream> {
    let events_path = cfg.events_path()?;
    let actors_path = cfg.actors_path()?;
    let events = BufReader::new(File::open(events_path).with_context(|| format!("opening {}", events_path.display()))?);
    let actors = File::open(actors_path).with_context(|| format!("opening {}", actors_path.display()))?;
    match parse_event_stream(events, actors, &cfg.ingest.options()) {
        Ok((stream, summary)) => {
            if summary.dropped_citations > 0 {
                warn!("dropped {} citation(s) of works outside the corpus", summary.dropped_citations);
            }
            if summary.renumbered {
                warn!("{} record(s) share a sequence key; stream renumbered in file order", summary.tied_records);
            }
            info!("{} publications, {} actors", stream.len(), stream.registry().len());
            Ok(stream)
        }
        Err(Error::Invalid(report)) => {
            eprint!("{report}");
            Err(Error::Invalid(report).into())
        }
        Err(e) => Err(e.into()),
    }
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>> {
    let path = dir.join(name);
    Ok(BufWriter::new(File::create(&path).with_context(|| format!("creating {}", path.display()))?))
}

fn write_text(dir: &Path, name: &str, text: &str) -> Result<()> {
    let mut w = create(dir, name)?;
    w.write_all(text.as_bytes())?;
    w.flush()?;
    Ok(())
}

fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> Result<()> {
    let mut w = create(dir, name)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

fn designs(cfg: &RunConfig, stream: &EventStream, which: Which, keep: bool) -> Result<Vec<(String, DesignMatrix)>> {
    let a_kinds = cfg.model.author();
    let c_kinds = cfg.model.citation();
    let want_a = which != Which::Citation && !a_kinds.is_empty();
    let want_c = which != Which::Author && !c_kinds.is_empty();
    if !want_a && !want_c {
        bail!("no model selected: both kind lists are empty for the requested model");
    }
    let design_cfg = DesignConfig { controls: cfg.sampling.controls()?, keep_candidates: keep };
    let (a, c) = build_designs(
        stream,
        want_a.then_some(&a_kinds[..]),
        want_c.then_some(&c_kinds[..]),
        &design_cfg,
    )?;
    let mut out = Vec::new();
    if let Some(a) = a {
        out.push(("author".to_string(), a));
    }
    if let Some(c) = c {
        out.push(("citation".to_string(), c));
    }
    for (name, d) in &out {
        info!(
            "{name} design: {} strata, {} rows, {} non-informative, {} fully enumerated, {} skipped",
            d.diagnostics.strata,
            d.diagnostics.rows,
            d.diagnostics.non_informative,
            d.diagnostics.full_enumeration,
            d.diagnostics.skipped_empty
        );
    }
    Ok(out)
}

fn fitted_transform(cfg: &RunConfig, design: &DesignMatrix) -> Result<TransformSpec> {
    let spec = cfg.transform.spec(&design.columns).fit(design)?;
    for k in spec.degenerate_columns() {
        warn!("column `{k}` is constant across the design and maps to zero");
    }
    Ok(spec)
}

fn fit_models(cfg: &RunConfig, which: Which, ledger: bool, full_outputs: bool) -> Result<u8> {
    let dir = cfg.output_dir()?.to_path_buf();
    std::fs::create_dir_all(&dir)?;
    cfg.echo(&dir)?;
    let stream = load_stream(cfg)?;
    let mut status = 0;
    for (name, mut design) in designs(cfg, &stream, which, false)? {
        let spec = fitted_transform(cfg, &design)?;
        spec.apply_in_place(&mut design)?;
        let diagnostics = design.diagnostics.clone();
        let kinds: Vec<StatKind> = design.columns.clone();
        let data = ChoiceData::from_design_owned(design)?;
        let fit = estimation::fit(&data, &cfg.estimation)?;
        if !fit.converged {
            eprintln!("{name} model did not converge after {} iterations", fit.iterations);
            status = EXIT_NUMERICAL;
        }
        if fit.separation {
            eprintln!("{name} model: coefficient divergence (separation) detected");
        }
        if fit.singular {
            eprintln!("{name} model: singular information matrix; pseudo-inverse used");
        }
        for k in &fit.degenerate {
            warn!("{name} model: `{k}` is constant within every stratum; coefficient undefined");
        }
        let ledger = if ledger {
            let l = estimation::aic_ledger_table(&data, &kinds, &cfg.estimation)?;
            write_text(&dir, &format!("ledger_{name}.tsv"), &l.table())?;
            Some(l)
        } else {
            None
        };
        if full_outputs {
            write_text(&dir, &format!("coefficients_{name}.tsv"), &fit.table())?;
            write_text(&dir, &format!("fit_{name}.tsv"), &fit.metadata())?;
        }
        let artifact = FitArtifact { model: name.clone(), fit, transform: spec, design: diagnostics, ledger };
        write_json(&dir, &format!("fit_{name}.json"), &artifact)?;
    }
    Ok(status)
}

pub fn run(cli: &Cli) -> Result<u8> {
    let mut cfg = RunConfig::load(cli.config.as_deref())?;
    match &cli.command {
        Command::Validate { data, output } => {
            apply_data(&mut cfg, data);
            apply_output(&mut cfg, output);
            validate(&cfg)
        }
        Command::Stats { data, sampling, output, model, transformed } => {
            apply_data(&mut cfg, data);
            apply_sampling(&mut cfg, sampling);
            apply_output(&mut cfg, output);
            stats(&cfg, *model, *transformed)
        }
        Command::Fit { data, sampling, output, model, ledger } => {
            apply_data(&mut cfg, data);
            apply_sampling(&mut cfg, sampling);
            apply_output(&mut cfg, output);
            fit_models(&cfg, *model, *ledger, true)
        }
        Command::Aic { data, sampling, output, model } => {
            apply_data(&mut cfg, data);
            apply_sampling(&mut cfg, sampling);
            apply_output(&mut cfg, output);
            fit_models(&cfg, *model, true, false)
        }
        Command::Simulate { output, seed, n_actors, n_events } => {
            apply_output(&mut cfg, output);
            if let Some(s) = seed {
                cfg.sampling.seed = Some(*s);
            }
            if let Some(n) = n_actors {
                cfg.simulation.n_actors = *n;
            }
            if let Some(n) = n_events {
                cfg.simulation.n_events = *n;
            }
            simulate(&mut cfg)
        }
        Command::Recover { output, seed, replicates } => {
            apply_output(&mut cfg, output);
            if let Some(s) = seed {
                cfg.sampling.seed = Some(*s);
            }
            if let Some(r) = replicates {
                cfg.recovery.replicates = *r;
            }
            recover(&mut cfg)
        }
        Command::Interpret { fit, kind, beta, se, delta } => interpret(fit.as_deref(), kind.as_deref(), *beta, *se, *delta),
    }
}

fn validate(cfg: &RunConfig) -> Result<u8> {
    let events_path = cfg.events_path()?;
    let actors_path = cfg.actors_path()?;
    let events = BufReader::new(File::open(events_path).with_context(|| format!("opening {}", events_path.display()))?);
    let actors = File::open(actors_path).with_context(|| format!("opening {}", actors_path.display()))?;
    let (report, summary) = match parse_event_stream(events, actors, &cfg.ingest.options()) {
        Ok((stream, summary)) => (validate_stream(&stream), Some(summary)),
        Err(Error::Invalid(report)) => (report, None),
        Err(e) => return Err(e.into()),
    };
    let mut text = format!("violations\t{}\n", report.violations.len());
    if let Some(s) = &summary {
        text.push_str(&format!(
            "records\t{}\ndropped_citations\t{}\ntied_records\t{}\n",
            s.records, s.dropped_citations, s.tied_records
        ));
    }
    text.push_str(&report.to_string());
    print!("{text}");
    if let Some(dir) = &cfg.paths.output {
        std::fs::create_dir_all(dir)?;
        cfg.echo(dir)?;
        write_text(dir, "validation.txt", &text)?;
    }
    if report.is_valid() {
        Ok(0)
    } else {
        eprint!("{report}");
        Ok(EXIT_DATA)
    }
}

fn stats(cfg: &RunConfig, which: Which, transformed: bool) -> Result<u8> {
    let dir = cfg.output_dir()?.to_path_buf();
    std::fs::create_dir_all(&dir)?;
    cfg.echo(&dir)?;
    let stream = load_stream(cfg)?;
    let registry = stream.registry().clone();
    for (name, mut design) in designs(cfg, &stream, which, true)? {
        if transformed {
            let spec = fitted_transform(cfg, &design)?;
            spec.apply_in_place(&mut design)?;
            write_json(&dir, &format!("transform_{name}.json"), &spec)?;
        }
        let file = format!("design_{name}.csv");
        if name == "author" {
            design.write_csv(create(&dir, &file)?, |m| registry.id(m).0.clone())?;
        } else {
            let works = stream.publications();
            design.write_csv(create(&dir, &file)?, |m| works[m as usize].work.0.clone())?;
        }
        write_json(&dir, &format!("design_{name}.json"), &design.diagnostics)?;
    }
    Ok(0)
}

fn simulate(cfg: &mut RunConfig) -> Result<u8> {
    let Some(seed) = cfg.sampling.seed else {
        bail!("a seed is required (set [sampling] seed or pass --seed)");
    };
    cfg.simulation.seed = seed;
    let dir = cfg.output_dir()?.to_path_buf();
    std::fs::create_dir_all(&dir)?;
    cfg.echo(&dir)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sim = simulate_stream(&cfg.simulation, &mut rng)?;
    let mut w = create(&dir, "events.jsonl")?;
    write_events(&sim.stream, &mut w)?;
    w.flush()?;
    let mut w = create(&dir, "actors.csv")?;
    write_actors(sim.stream.registry(), &mut w)?;
    w.flush()?;
    #[derive(Serialize)]
    struct Probabilities<'a> {
        author: &'a [Option<f64>],
        citation: &'a [Option<f64>],
    }
    write_json(&dir, "probabilities.json", &Probabilities { author: &sim.author_probs, citation: &sim.citation_probs })?;
    eprintln!("wrote {} events to {}", sim.events.len(), dir.display());
    Ok(0)
}

fn recover(cfg: &mut RunConfig) -> Result<u8> {
    let Some(seed) = cfg.sampling.seed else {
        bail!("a seed is required (set [sampling] seed or pass --seed)");
    };
    cfg.simulation.seed = seed;
    let dir = cfg.output_dir()?.to_path_buf();
    std::fs::create_dir_all(&dir)?;
    cfg.echo(&dir)?;
    let report = recovery_experiment(&cfg.recovery()?)?;
    write_text(&dir, "recovery.tsv", &report.table())?;
    write_json(&dir, "recovery.json", &report)?;
    print!("{}", report.table());
    Ok(0)
}

fn interpret(fit: Option<&Path>, kind: Option<&str>, beta: Option<f64>, se: f64, delta: f64) -> Result<u8> {
    let rr = match (fit, beta) {
        (Some(path), _) => {
            let kind: StatKind = kind.context("--kind is required with --fit")?.parse()?;
            let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            let artifact: FitArtifact = serde_json::from_str(&text).context("parsing fit artifact")?;
            estimation::interpret_fit(&artifact.fit, kind, delta)?
        }
        (None, Some(b)) => estimation::interpret(b, se, delta),
        (None, None) => bail!("pass either --fit with --kind, or --beta"),
    };
    println!("rate_ratio\tlower_95\tupper_95");
    println!("{}\t{}\t{}", format_sig(rr.ratio), format_sig(rr.lower), format_sig(rr.upper));
    Ok(0)
}
