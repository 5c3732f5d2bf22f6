//! Implementations of the five subcommands.

use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use sha2::{Digest, Sha256};

use bkf_core::aggregate::{
    bilateral_overall, bilateral_per_sc, bkf_overall, country_summary, field_rows,
    macro_area_rollup, top_bottom_fields, ScFlowCube,
};
use bkf_core::attribution::{attribute_corpus, Attribution};
use bkf_core::corpus::{build_corpus, AnalysisConfig, Corpus, CountryCode, IsoDate, Threshold};
use bkf_core::flow::compute_flow_matrix;
use bkf_core::ingest::{
    parse_citations, parse_config, parse_journal_categories, parse_publications,
};
use bkf_core::output::{
    area_csv, bilateral_csv, bkf_csv, config_echo, field_csv, flow_matrix_csv, index1,
    specialization_csv, summary_csv, tables_json, write_gains_csv,
};
use bkf_core::specialization::{kisi_table, kosi_table, top_specializations};
use bkf_core::synth::generate_corpus;
use bkf_core::synth::parse_generator_params;
use bkf_core::ValidationReport;

use crate::manifest::{file_digest, FileDigest, RunManifest, StageClock};
use crate::{
    log_level, CliError, CliResult, ComputeArgs, GenerateArgs, InputArgs, LogLevel, OverrideArgs,
    PairArgs, TableKind, TopArgs, ValidateArgs,
};

fn log(level: LogLevel, message: impl AsRef<str>) {
    if log_level() >= level {
        eprintln!("bkf: {}", message.as_ref());
    }
}

fn read_input(path: &Path) -> CliResult<String> {
    fs::read_to_string(path)
        .map_err(|err| CliError::Env(format!("cannot read {}: {err}", path.display())))
}

fn ensure_dir(path: &Path) -> CliResult<()> {
    fs::create_dir_all(path)
        .map_err(|err| CliError::Env(format!("cannot create {}: {err}", path.display())))
}

fn write_output(
    dir: &Path,
    name: &str,
    contents: &str,
    outputs: &mut Vec<FileDigest>,
) -> CliResult<()> {
    let path = dir.join(name);
    fs::write(&path, contents)
        .map_err(|err| CliError::Env(format!("cannot write {}: {err}", path.display())))?;
    outputs.push(file_digest(&path, contents.as_bytes()));
    Ok(())
}

fn apply_overrides(config: &mut AnalysisConfig, overrides: &OverrideArgs) -> CliResult<()> {
    if let Some(countries) = &overrides.countries {
        config.countries = countries
            .split(',')
            .filter(|p| !p.trim().is_empty())
            .map(CountryCode::new)
            .collect::<Result<Vec<_>, _>>()?;
    }
    if let Some(cutoff) = &overrides.cutoff {
        config.cutoff = IsoDate::parse(cutoff)?;
    }
    if let Some(threshold) = &overrides.threshold {
        config.threshold = Threshold::parse(threshold)?;
    }
    config.validate()?;
    Ok(())
}

struct LoadedInputs {
    publications_text: String,
    citations_text: String,
    journals_text: String,
    areas_text: String,
    config: AnalysisConfig,
    input_digests: Vec<FileDigest>,
}

fn load_inputs(inputs: &InputArgs, overrides: &OverrideArgs) -> CliResult<LoadedInputs> {
    let paths = [
        inputs.publications_path(),
        inputs.citations_path(),
        inputs.journals_path(),
        inputs.areas_path(),
        inputs.config_path(),
    ];
    let mut texts = Vec::with_capacity(paths.len());
    let mut input_digests = Vec::with_capacity(paths.len());
    for path in &paths {
        let text = read_input(path)?;
        input_digests.push(file_digest(path, text.as_bytes()));
        texts.push(text);
    }
    let mut texts = texts.into_iter();
    let publications_text = texts.next().expect("five inputs");
    let citations_text = texts.next().expect("five inputs");
    let journals_text = texts.next().expect("five inputs");
    let areas_text = texts.next().expect("five inputs");
    let config_text = texts.next().expect("five inputs");

    let mut config = parse_config(&config_text)?;
    apply_overrides(&mut config, overrides)?;
    Ok(LoadedInputs {
        publications_text,
        citations_text,
        journals_text,
        areas_text,
        config,
        input_digests,
    })
}

struct BuiltPipeline {
    corpus: Corpus,
    attribution: Attribution,
    config: AnalysisConfig,
    report: ValidationReport,
    input_digests: Vec<FileDigest>,
}

fn build_pipeline(loaded: LoadedInputs, clock: &mut StageClock) -> CliResult<BuiltPipeline> {
    let config = loaded.config;
    let cap = config.example_cap;
    let mut report = ValidationReport::new(cap);

    let parsed_pubs = parse_publications(&loaded.publications_text, cap);
    report.merge(&parsed_pubs.report);
    let parsed_links = parse_citations(&loaded.citations_text, cap);
    report.merge(&parsed_links.report);
    let (categories, journal_report) =
        parse_journal_categories(&loaded.journals_text, &loaded.areas_text, cap)?;
    report.merge(&journal_report);
    log(
        LogLevel::Info,
        format!(
            "parsed {} publications, {} citation links",
            parsed_pubs.records.len(),
            parsed_links.links.len()
        ),
    );
    clock.lap("parse");

    let corpus = build_corpus(parsed_pubs.records, parsed_links.links, categories, &config)?;
    report.merge(corpus.diagnostics());
    clock.lap("build");

    let attribution = attribute_corpus(&corpus, &config);
    attribution.report_into(&mut report);
    log(
        LogLevel::Info,
        format!(
            "corpus of {} publications, {} deduplicated links, {} production candidates",
            corpus.len(),
            corpus.link_count(),
            attribution.candidate_count(&config)
        ),
    );
    clock.lap("attribute");

    Ok(BuiltPipeline {
        corpus,
        attribution,
        config,
        report,
        input_digests: loaded.input_digests,
    })
}

pub fn run_validate(args: ValidateArgs) -> CliResult<()> {
    let mut clock = StageClock::start();
    let loaded = load_inputs(&args.inputs, &args.overrides)?;
    clock.lap("read");
    let pipeline = build_pipeline(loaded, &mut clock)?;

    print!("{}", pipeline.report.render_text());
    println!("ok: no hard errors");

    ensure_dir(&args.out)?;
    let json = serde_json::to_string_pretty(&pipeline.report).expect("serialize report");
    let path = args.out.join("validation.json");
    fs::write(&path, json.as_bytes())
        .map_err(|err| CliError::Env(format!("cannot write {}: {err}", path.display())))?;
    log(LogLevel::Info, format!("wrote {}", path.display()));
    Ok(())
}

/// Sha256-updating writer; lets large dumps be digested while streaming.
struct DigestWriter<W: Write> {
    inner: W,
    hasher: Sha256,
}

impl<W: Write> Write for DigestWriter<W> {
    fn write(&mut self, buf: &[u8]) -> io::Result<usize> {
        let written = self.inner.write(buf)?;
        self.hasher.update(&buf[..written]);
        Ok(written)
    }

    fn flush(&mut self) -> io::Result<()> {
        self.inner.flush()
    }
}

pub fn run_compute(args: ComputeArgs) -> CliResult<()> {
    if args.jobs == 0 {
        return Err(CliError::Data("--jobs must be at least 1".to_string()));
    }
    let mut clock = StageClock::start();
    let loaded = load_inputs(&args.inputs, &args.overrides)?;
    clock.lap("read");
    let pipeline = build_pipeline(loaded, &mut clock)?;
    let (corpus, attribution, config) = (&pipeline.corpus, &pipeline.attribution, &pipeline.config);

    let matrix = compute_flow_matrix(corpus, attribution, config);
    let mut cube = ScFlowCube::from_corpus(corpus, attribution, config);
    cube.ensure_universe(corpus.categories());
    let summaries = country_summary(corpus, attribution, &matrix, config);
    let bkf_rows = bkf_overall(&matrix);
    let mut per_country_fields = Vec::new();
    let mut per_country_areas = Vec::new();
    for country in &config.countries {
        let rows = field_rows(&cube, corpus.categories(), country)?;
        per_country_areas.push((
            country.clone(),
            macro_area_rollup(&rows, corpus.categories()),
        ));
        per_country_fields.push((country.clone(), rows));
    }
    log(
        LogLevel::Info,
        format!("accumulated {} gains", matrix.total()),
    );
    clock.lap("flows");

    let kosi = kosi_table(&cube, config)?;
    let kisi = kisi_table(&cube, config)?;
    clock.lap("specialization");

    ensure_dir(&args.out)?;
    let mut outputs = Vec::new();
    write_output(
        &args.out,
        "summary.csv",
        &summary_csv(&summaries),
        &mut outputs,
    )?;
    write_output(&args.out, "bkf.csv", &bkf_csv(&bkf_rows), &mut outputs)?;
    write_output(
        &args.out,
        "flow_matrix.csv",
        &flow_matrix_csv(&matrix),
        &mut outputs,
    )?;
    write_output(
        &args.out,
        "bkf_by_sc.csv",
        &field_csv(&per_country_fields),
        &mut outputs,
    )?;
    write_output(
        &args.out,
        "bkf_by_area.csv",
        &area_csv(&per_country_areas),
        &mut outputs,
    )?;
    write_output(
        &args.out,
        "kosi.csv",
        &specialization_csv(&kosi, config),
        &mut outputs,
    )?;
    write_output(
        &args.out,
        "kisi.csv",
        &specialization_csv(&kisi, config),
        &mut outputs,
    )?;
    let bundle = tables_json(
        config,
        &summaries,
        &bkf_rows,
        &matrix,
        &per_country_fields,
        &per_country_areas,
        &kosi,
        &kisi,
    );
    write_output(&args.out, "tables.json", &bundle, &mut outputs)?;

    if args.dump_gains {
        let path = args.out.join("gains.csv");
        let file = fs::File::create(&path)
            .map_err(|err| CliError::Env(format!("cannot write {}: {err}", path.display())))?;
        let mut writer = DigestWriter {
            inner: BufWriter::new(file),
            hasher: Sha256::new(),
        };
        write_gains_csv(&mut writer, corpus, attribution, config)
            .and_then(|()| writer.flush())
            .map_err(|err| CliError::Env(format!("cannot write {}: {err}", path.display())))?;
        outputs.push(FileDigest {
            path: path.display().to_string(),
            sha256: format!("{:x}", writer.hasher.finalize()),
        });
    }
    clock.lap("write");

    let manifest = RunManifest {
        config: config_echo(config),
        inputs: pipeline.input_digests,
        diagnostics: pipeline.report.clone(),
        outputs,
        stages: clock.into_stages(),
    };
    let manifest_json = serde_json::to_string_pretty(&manifest).expect("serialize manifest");
    let path = args.out.join("manifest.json");
    fs::write(&path, manifest_json.as_bytes())
        .map_err(|err| CliError::Env(format!("cannot write {}: {err}", path.display())))?;

    for stage in &manifest.stages {
        log(
            LogLevel::Debug,
            format!("stage {} took {} ms", stage.stage, stage.millis),
        );
    }
    log(
        LogLevel::Info,
        format!(
            "wrote {} output files to {}",
            manifest.outputs.len() + 1,
            args.out.display()
        ),
    );
    Ok(())
}

pub fn run_pair(args: PairArgs) -> CliResult<()> {
    let mut clock = StageClock::start();
    let loaded = load_inputs(&args.inputs, &args.overrides)?;
    clock.lap("read");
    let pipeline = build_pipeline(loaded, &mut clock)?;
    let (corpus, attribution, config) = (&pipeline.corpus, &pipeline.attribution, &pipeline.config);

    let k = CountryCode::new(&args.k)?;
    let l = CountryCode::new(&args.l)?;
    let matrix = compute_flow_matrix(corpus, attribution, config);
    let mut cube = ScFlowCube::from_corpus(corpus, attribution, config);
    cube.ensure_universe(corpus.categories());
    let overall = bilateral_overall(&matrix, &k, &l)?;
    let sc_rows = bilateral_per_sc(&cube, &k, &l)?;

    ensure_dir(&args.out)?;
    let mut outputs = Vec::new();
    let name = format!("bilateral_{}_{}.csv", k.as_str(), l.as_str());
    write_output(
        &args.out,
        &name,
        &bilateral_csv(&sc_rows, &overall),
        &mut outputs,
    )?;
    log(
        LogLevel::Info,
        format!("wrote {}", args.out.join(&name).display()),
    );
    Ok(())
}

pub fn run_generate(args: GenerateArgs) -> CliResult<()> {
    let params_text = read_input(&args.params)?;
    let params = parse_generator_params(&params_text)?;
    let generated = generate_corpus(&params)?;
    let files = generated.to_files();

    ensure_dir(&args.out)?;
    let mut outputs = Vec::new();
    write_output(
        &args.out,
        "publications.jsonl",
        &files.publications_jsonl,
        &mut outputs,
    )?;
    write_output(
        &args.out,
        "citations.csv",
        &files.citations_csv,
        &mut outputs,
    )?;
    write_output(&args.out, "journals.csv", &files.journals_csv, &mut outputs)?;
    write_output(&args.out, "sc_areas.csv", &files.sc_areas_csv, &mut outputs)?;
    write_output(&args.out, "config.txt", &files.config_txt, &mut outputs)?;
    log(
        LogLevel::Info,
        format!(
            "generated {} publications and {} citation links (seed {}) into {}",
            generated.publications.len(),
            generated.citations.len(),
            params.seed,
            args.out.display()
        ),
    );
    // Digest echo at debug level; handy when comparing two runs by eye.
    for output in &outputs {
        log(
            LogLevel::Debug,
            format!("{} {}", output.sha256, output.path),
        );
    }
    Ok(())
}

pub fn run_top(args: TopArgs) -> CliResult<()> {
    let mut clock = StageClock::start();
    let loaded = load_inputs(&args.inputs, &args.overrides)?;
    clock.lap("read");
    let pipeline = build_pipeline(loaded, &mut clock)?;
    let (corpus, attribution, config) = (&pipeline.corpus, &pipeline.attribution, &pipeline.config);

    let country = CountryCode::new(&args.country)?;
    if config.country_index(&country).is_none() {
        return Err(CliError::Data(format!(
            "country `{country}` is not in the configured analysis set"
        )));
    }
    let mut cube = ScFlowCube::from_corpus(corpus, attribution, config);
    cube.ensure_universe(corpus.categories());

    match args.table {
        TableKind::Bkf => {
            let rows = field_rows(&cube, corpus.categories(), &country)?;
            let (bottom, top) = top_bottom_fields(&rows, args.count);
            println!("top {} field deficits for {country}", bottom.len());
            println!(
                "{:<20} {:<16} {:>10} {:>10} {:>8}",
                "sc_code", "macro_area", "generated", "earned", "bkf"
            );
            for row in &bottom {
                println!(
                    "{:<20} {:<16} {:>10} {:>10} {:>8}",
                    row.sc_code.as_str(),
                    row.macro_area,
                    row.foreign_gains_generated,
                    row.earned_gains,
                    row.balance
                );
            }
            println!();
            println!("top {} field surpluses for {country}", top.len());
            println!(
                "{:<20} {:<16} {:>10} {:>10} {:>8}",
                "sc_code", "macro_area", "generated", "earned", "bkf"
            );
            for row in &top {
                println!(
                    "{:<20} {:<16} {:>10} {:>10} {:>8}",
                    row.sc_code.as_str(),
                    row.macro_area,
                    row.foreign_gains_generated,
                    row.earned_gains,
                    row.balance
                );
            }
        }
        TableKind::Kosi | TableKind::Kisi => {
            let table = if args.table == TableKind::Kosi {
                kosi_table(&cube, config)?
            } else {
                kisi_table(&cube, config)?
            };
            let label = if args.table == TableKind::Kosi {
                "outflow"
            } else {
                "inflow"
            };
            let ranked = top_specializations(&table, &country, args.count);
            println!("top {} {label} specializations for {country}", ranked.len());
            println!("{:<20} {:>8}", "sc_code", "index");
            for (sc, value) in &ranked {
                println!("{:<20} {:>8}", sc.as_str(), index1(*value));
            }
        }
    }
    Ok(())
}
