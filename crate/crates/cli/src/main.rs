use std::io::Write;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Duration;

use anyhow::Context;
use chrono::{NaiveDate, NaiveTime, Utc, Weekday};
use chrono_tz::Tz;
use clap::{Args, Parser, Subcommand};
use feedgram_core::ingest::{Harvester, SourceConfig, DEFAULT_FETCH_TIMEOUT};
use feedgram_core::metrics::{generate_report, ReportOptions, DEFAULT_MSTTR_SEGMENT};
use feedgram_core::normalize::ExclusionList;
use feedgram_core::pipeline::{rebuild, BuildOptions};
use feedgram_core::query::{
    find_bigrams, run_query, to_csv, BigramMode, MatchMode, QueryError, QuerySpec,
    DEFAULT_BIGRAM_LIMIT, DEFAULT_PATTERN_LIMIT, MAX_WINDOW, MIN_WINDOW,
};
use feedgram_core::store::{load_corpus, load_index, SnapshotStore};
use feedgram_server::{Cors, Jobs, Limits, ServerConfig, WeeklySchedule};
use tracing_subscriber::EnvFilter;

/// Harvest newsfeeds into a daily n-gram corpus and explore word frequencies.
#[derive(Debug, Parser)]
#[command(name = "feedgram", version)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Global {
    /// Corpus data directory (archive, snapshots, lock file).
    #[arg(long, global = true, env = "FEEDGRAM_DATA_DIR", default_value = "data")]
    data_dir: PathBuf,
    /// Feed source list.
    #[arg(long, global = true, env = "FEEDGRAM_SOURCES", default_value = "config/sources.toml")]
    sources: PathBuf,
    /// Exclusion list; the built-in list is used when omitted.
    #[arg(long, global = true, env = "FEEDGRAM_EXCLUSIONS")]
    exclusions: Option<PathBuf>,
    /// Zone used to assign items to calendar days.
    #[arg(long, global = true, env = "FEEDGRAM_TIMEZONE", default_value = "Europe/Berlin")]
    timezone: Tz,
    /// Segment length for MSTTR.
    #[arg(long, global = true, default_value_t = DEFAULT_MSTTR_SEGMENT as u32,
          value_parser = clap::value_parser!(u32).range(2..))]
    msttr_segment: u32,
    /// More log output (-v debug, -vv trace).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    /// Only log warnings and errors.
    #[arg(short, long, global = true)]
    quiet: bool,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Fetch all sources once, or repeatedly with --loop.
    Harvest {
        #[arg(long = "loop")]
        repeat: bool,
        /// Hours between cycles with --loop.
        #[arg(long, default_value_t = 3.0)]
        interval_hours: f64,
        /// Per-source fetch timeout in seconds.
        #[arg(long, default_value_t = DEFAULT_FETCH_TIMEOUT.as_secs())]
        timeout_secs: u64,
    },
    /// Rebuild all daily tables from the archive and publish a snapshot.
    Build,
    /// Write the metrics CSV, HTML report and weekly lists up to a date.
    Metrics {
        /// Last day included.
        #[arg(long)]
        as_of: NaiveDate,
        /// Output directory; defaults to <data-dir>/reports/<as-of>.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Day 1 of week 1; defaults to the first corpus day.
        #[arg(long)]
        corpus_start: Option<NaiveDate>,
    },
    /// Frequency series for comma-separated patterns, as CSV on stdout.
    Query(QueryArgs),
    /// Bigrams containing a word, as CSV on stdout.
    Bigrams {
        #[arg(long)]
        pattern: String,
        #[arg(long, default_value = "anywhere")]
        bmode: BigramMode,
        #[arg(long)]
        from: Option<NaiveDate>,
        #[arg(long)]
        to: Option<NaiveDate>,
        #[arg(long, default_value_t = DEFAULT_BIGRAM_LIMIT)]
        limit: usize,
    },
    /// Run the HTTP API with the scheduled harvest and weekly rebuild.
    Serve(ServeArgs),
}

#[derive(Debug, Args)]
struct QueryArgs {
    #[arg(long)]
    patterns: String,
    #[arg(long, default_value = "exact")]
    mode: MatchMode,
    #[arg(long)]
    from: Option<NaiveDate>,
    #[arg(long)]
    to: Option<NaiveDate>,
    /// Rolling-mean window in days.
    #[arg(long, default_value_t = 1,
          value_parser = clap::value_parser!(u32).range(MIN_WINDOW as i64..=MAX_WINDOW as i64))]
    window: u32,
    #[arg(long, default_value_t = DEFAULT_PATTERN_LIMIT)]
    max_patterns: usize,
}

#[derive(Debug, Args)]
struct ServeArgs {
    #[arg(long, env = "FEEDGRAM_LISTEN", default_value = "127.0.0.1:8080")]
    listen: SocketAddr,
    /// Hours between harvest cycles; 0 disables harvesting.
    #[arg(long, default_value_t = 3.0)]
    harvest_interval_hours: f64,
    /// Weekday of the weekly rebuild.
    #[arg(long, default_value = "mon", value_parser = parse_weekday)]
    rebuild_day: Weekday,
    /// Local time of the weekly rebuild (HH:MM).
    #[arg(long, default_value = "03:00", value_parser = parse_time)]
    rebuild_time: NaiveTime,
    #[arg(long)]
    no_rebuild: bool,
    /// Allowed browser origin; repeat for several. Any origin when omitted.
    #[arg(long)]
    cors_origin: Vec<String>,
    #[arg(long, default_value_t = DEFAULT_PATTERN_LIMIT)]
    max_patterns: usize,
    #[arg(long, default_value_t = DEFAULT_BIGRAM_LIMIT)]
    bigram_limit: usize,
}

fn parse_weekday(s: &str) -> Result<Weekday, String> {
    s.parse::<Weekday>().map_err(|_| format!("not a weekday: {s:?}"))
}

fn parse_time(s: &str) -> Result<NaiveTime, String> {
    NaiveTime::parse_from_str(s, "%H:%M").map_err(|e| e.to_string())
}

/// Failures split by exit status.
#[derive(Debug)]
enum Failure {
    Usage(String),
    Runtime(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Self::Runtime(e)
    }
}

impl From<QueryError> for Failure {
    fn from(e: QueryError) -> Self {
        Self::Usage(e.to_string())
    }
}

type Outcome = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    init_logging(&cli.global);
    let result = tokio::runtime::Runtime::new()
        .context("starting the async runtime")
        .map_err(Failure::Runtime)
        .and_then(|rt| rt.block_on(run(cli)));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn init_logging(g: &Global) {
    let level = match (g.quiet, g.verbose) {
        (true, _) => "warn",
        (false, 0) => "info",
        (false, 1) => "debug",
        _ => "trace",
    };
    let filter = EnvFilter::try_from_default_env().unwrap_or_else(|_| EnvFilter::new(level));
    tracing_subscriber::fmt()
        .with_env_filter(filter)
        .with_writer(std::io::stderr)
        .init();
}

fn exclusions(g: &Global) -> Result<ExclusionList, Failure> {
    match &g.exclusions {
        None => Ok(ExclusionList::default()),
        Some(p) if !p.exists() => Err(Failure::Usage(format!("exclusion list {} not found", p.display()))),
        Some(p) => Ok(ExclusionList::load(p).context("reading the exclusion list")?),
    }
}

fn sources(path: &Path) -> Result<SourceConfig, Failure> {
    if !path.exists() {
        return Err(Failure::Usage(format!("source list {} not found", path.display())));
    }
    SourceConfig::load(path).map_err(|e| Failure::Usage(e.to_string()))
}

fn hours(h: f64) -> Result<Option<Duration>, Failure> {
    if !h.is_finite() || h < 0.0 {
        return Err(Failure::Usage(format!("invalid interval: {h} hours")));
    }
    Ok((h > 0.0).then(|| Duration::from_secs_f64(h * 3600.0)))
}

async fn run(cli: Cli) -> Outcome {
    let g = &cli.global;
    let build = BuildOptions {
        report: ReportOptions {
            msttr_segment: g.msttr_segment as usize,
            corpus_start: None,
        },
    };
    match cli.command {
        Command::Harvest {
            repeat,
            interval_hours,
            timeout_secs,
        } => {
            let cfg = sources(&g.sources)?;
            let interval = hours(interval_hours)?;
            let mut harvester = Harvester::new(
                &g.data_dir,
                cfg.sources,
                g.timezone,
                Duration::from_secs(timeout_secs),
            )
            .context("setting up the harvester")?;
            loop {
                let report = harvester.run_cycle(Utc::now()).await.context("harvest cycle")?;
                let mut out = std::io::stdout().lock();
                for o in &report.outcomes {
                    let status = o.error.as_deref().unwrap_or("ok");
                    writeln!(
                        out,
                        "{}\taccepted={}\tduplicates={}\t{}",
                        o.source_id, o.accepted, o.duplicates, status
                    )
                    .context("writing to stdout")?;
                }
                drop(out);
                if report.all_failed() {
                    return Err(anyhow::anyhow!("all {} sources failed", report.outcomes.len()).into());
                }
                match (repeat, interval) {
                    (true, Some(every)) => tokio::time::sleep(every).await,
                    _ => return Ok(()),
                }
            }
        }
        Command::Build => {
            let ex = exclusions(g)?;
            let data_dir = g.data_dir.clone();
            let meta = tokio::task::spawn_blocking(move || {
                rebuild(&data_dir, &ex, build, Utc::now(), &mut |_| Ok(()))
            })
            .await
            .context("build task")?
            .context("rebuilding the corpus")?;
            println!(
                "published generation {} ({} to {}, {} tokens, {} types)",
                meta.generation, meta.first_date, meta.last_date, meta.token_total, meta.type_total
            );
            Ok(())
        }
        Command::Metrics {
            as_of,
            out,
            corpus_start,
        } => {
            let store = SnapshotStore::new(&g.data_dir);
            let dir = store.current_dir().context("no snapshot; run `feedgram build` first")?;
            let (_, corpus) = load_corpus(&dir).context("loading the snapshot")?;
            let options = ReportOptions {
                corpus_start,
                ..build.report
            };
            let bundle = generate_report(&corpus, as_of, options).context("computing metrics")?;
            let out = out.unwrap_or_else(|| g.data_dir.join("reports").join(as_of.to_string()));
            bundle.write_to(&out).with_context(|| format!("writing {}", out.display()))?;
            println!("wrote {} day(s) of metrics to {}", bundle.records.len(), out.display());
            Ok(())
        }
        Command::Query(q) => {
            let store = SnapshotStore::new(&g.data_dir);
            let dir = store.current_dir().context("no snapshot; run `feedgram build` first")?;
            let (_, index) = load_index(&dir).context("loading the snapshot")?;
            let spec =
                QuerySpec::parse_for(&index, &q.patterns, q.mode, q.from, q.to, q.window, q.max_patterns)?;
            for notice in &spec.notices {
                tracing::warn!("{notice}");
            }
            let csv = to_csv(&run_query(&index, &spec)?);
            std::io::stdout()
                .write_all(csv.as_bytes())
                .context("writing to stdout")?;
            Ok(())
        }
        Command::Bigrams {
            pattern,
            bmode,
            from,
            to,
            limit,
        } => {
            let store = SnapshotStore::new(&g.data_dir);
            let dir = store.current_dir().context("no snapshot; run `feedgram build` first")?;
            let (meta, index) = load_index(&dir).context("loading the snapshot")?;
            let from = from.unwrap_or(meta.first_date);
            let to = to.unwrap_or(meta.last_date);
            let hits = find_bigrams(&index, &pattern, bmode, from, to, limit)?;
            let mut out = std::io::stdout().lock();
            let mut body = String::from("first,second,count\n");
            for h in hits {
                body.push_str(&format!("{},{},{}\n", h.first, h.second, h.count));
            }
            out.write_all(body.as_bytes()).context("writing to stdout")?;
            Ok(())
        }
        Command::Serve(s) => {
            let ex = exclusions(g)?;
            let harvest_interval = hours(s.harvest_interval_hours)?;
            let source_cfg = match harvest_interval {
                Some(_) => Some(sources(&g.sources)?),
                None => None,
            };
            let cors = if s.cors_origin.is_empty() {
                Cors::Any
            } else {
                let origins = s
                    .cors_origin
                    .iter()
                    .map(|o| o.parse().map_err(|_| Failure::Usage(format!("invalid origin {o:?}"))))
                    .collect::<Result<_, _>>()?;
                Cors::Origins(origins)
            };
            let config = ServerConfig {
                listen: s.listen,
                jobs: Jobs {
                    data_dir: g.data_dir.clone(),
                    sources: source_cfg,
                    exclusions: Arc::new(ex),
                    zone: g.timezone,
                    fetch_timeout: DEFAULT_FETCH_TIMEOUT,
                    harvest_interval,
                    rebuild: (!s.no_rebuild).then_some(WeeklySchedule {
                        weekday: s.rebuild_day,
                        time: s.rebuild_time,
                        zone: g.timezone,
                    }),
                    build,
                },
                limits: Limits {
                    max_patterns: s.max_patterns,
                    bigram_limit: s.bigram_limit,
                },
                cors,
            };
            feedgram_server::serve(config).await.context("serving")?;
            Ok(())
        }
    }
}
