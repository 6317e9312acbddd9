//! Sequential vs parallel timing with output-equivalence gating.

use std::fmt::Write as _;
use std::time::Duration;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

use crate::corpus::Document;
use crate::pipeline::{run_pipeline, sequential_baseline, Outcome, PipelineConfig};
use crate::{Error, Result};

/// `t1 / tp`. Both times must be positive and finite.
pub fn speedup(t1: f64, tp: f64) -> Result<f64> {
    check_time(t1)?;
    check_time(tp)?;
    Ok(t1 / tp)
}

fn check_time(t: f64) -> Result<()> {
    if t > 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("times must be positive, got {t}")))
    }
}

/// Speedup in hundredths, rounded half-up. Computed as `t1 * 100 / tp` so
/// that exact halves in whole seconds stay exact.
pub fn speedup_hundredths(t1: f64, tp: f64) -> Result<u64> {
    speedup(t1, tp)?;
    Ok((t1 * 100.0 / tp + 0.5).floor() as u64)
}

/// Two-decimal rendering of the speedup, e.g. `42.58`.
pub fn format_speedup(t1: f64, tp: f64) -> Result<String> {
    let h = speedup_hundredths(t1, tp)?;
    Ok(format!("{}.{:02}", h / 100, h % 100))
}

/// Parses `1h 4m 41s`-style durations into seconds. Components are optional
/// but must appear in h, m, s order.
pub fn parse_duration(text: &str) -> Result<u64> {
    let bad = || Error::InvalidInput(format!("malformed duration `{text}`"));
    let mut total: u64 = 0;
    let mut last_rank = 0;
    let mut parts = 0;
    for part in text.split_whitespace() {
        let (digits, unit) = part.split_at(part.len().saturating_sub(1));
        let (rank, scale) = match unit {
            "h" => (1, 3600),
            "m" => (2, 60),
            "s" => (3, 1),
            _ => return Err(bad()),
        };
        if rank <= last_rank || digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let value: u64 = digits.parse().map_err(|_| bad())?;
        total = value.checked_mul(scale).and_then(|v| total.checked_add(v)).ok_or_else(bad)?;
        last_rank = rank;
        parts += 1;
    }
    if parts == 0 {
        return Err(bad());
    }
    Ok(total)
}

/// Canonical rendering: every component from the largest non-zero one down
/// to seconds, e.g. `1h 4m 41s`, `56m 46s`, `0s`.
pub fn format_duration(seconds: u64) -> String {
    let (h, m, s) = (seconds / 3600, seconds % 3600 / 60, seconds % 60);
    if h > 0 {
        format!("{h}h {m}m {s}s")
    } else if m > 0 {
        format!("{m}m {s}s")
    } else {
        format!("{s}s")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkResult {
    pub task: String,
    pub workers: usize,
    /// Median single-worker time in seconds.
    pub t1: f64,
    /// Median time at `workers` in seconds.
    pub tp: f64,
    pub speedup: f64,
    pub outputs_equal: bool,
}

impl BenchmarkResult {
    pub fn speedup_text(&self) -> String {
        format_speedup(self.t1, self.tp).unwrap_or_else(|_| "n/a".into())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkOptions {
    pub worker_counts: Vec<usize>,
    pub repetitions: usize,
    pub batch_size: usize,
}

impl Default for BenchmarkOptions {
    fn default() -> Self {
        BenchmarkOptions { worker_counts: vec![1], repetitions: 3, batch_size: crate::pipeline::DEFAULT_BATCH_SIZE }
    }
}

/// Seq-numbered transcript lines and their hash.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transcript {
    pub lines: Vec<String>,
    pub digest: String,
}

impl Transcript {
    fn from_lines(lines: Vec<String>) -> Self {
        let mut h = Sha256::new();
        for l in &lines {
            h.update(l.as_bytes());
            h.update(b"\n");
        }
        Transcript { lines, digest: hex::encode(h.finalize()) }
    }

    /// First differing line, for error messages.
    pub fn first_difference(&self, other: &Transcript) -> Option<String> {
        let n = self.lines.len().max(other.lines.len());
        (0..n).find_map(|i| {
            let (a, b) = (self.lines.get(i), other.lines.get(i));
            (a != b).then(|| format!("line {}: expected {:?}, got {:?}", i + 1, a, b))
        })
    }
}

fn render_line<R>(seq: u64, outcome: &Outcome<R>, render: &impl Fn(&R) -> String) -> String {
    match outcome {
        Ok(r) => format!("{seq}\t{}", render(r)),
        Err(e) => format!("{seq}\terror: {e}"),
    }
}

/// One pipeline run over `corpus`, returning its transcript and wall time.
pub fn timed_run<T, R, W>(
    corpus: &[T],
    work: &W,
    render: &impl Fn(&R) -> String,
    config: &PipelineConfig,
) -> Result<(Transcript, Duration)>
where
    T: Clone + Send + Sync,
    R: Send,
    W: Fn(T) -> Result<R> + Sync,
{
    let mut lines = Vec::with_capacity(corpus.len());
    let stats = run_pipeline(
        corpus.iter().cloned().map(Ok),
        work,
        |seq, o| {
            lines.push(render_line(seq, &o, render));
            Ok(())
        },
        config,
    )?;
    Ok((Transcript::from_lines(lines), stats.wall))
}

fn median(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(f64::total_cmp);
    let n = xs.len();
    if n % 2 == 1 {
        xs[n / 2]
    } else {
        (xs[n / 2 - 1] + xs[n / 2]) / 2.0
    }
}

/// Times `work` over `corpus` at each worker count.
///
/// Each count gets one discarded warm-up run and `repetitions` timed runs;
/// the median is reported. `T1` is the single-worker median, measured even
/// when 1 is not among the requested counts. Every transcript is compared
/// with the sequential baseline and any divergence aborts the benchmark.
pub fn run_benchmark<T, R, W>(
    task: &str,
    corpus: &[T],
    work: W,
    render: impl Fn(&R) -> String,
    options: &BenchmarkOptions,
) -> Result<Vec<BenchmarkResult>>
where
    T: Clone + Send + Sync,
    R: Send,
    W: Fn(T) -> Result<R> + Sync,
{
    if corpus.is_empty() {
        return Err(Error::InvalidInput("benchmark corpus is empty".into()));
    }
    if options.repetitions == 0 || options.worker_counts.is_empty() || options.worker_counts.contains(&0) {
        return Err(Error::Config("need at least one repetition and positive worker counts".into()));
    }

    let mut lines = Vec::with_capacity(corpus.len());
    sequential_baseline(corpus.iter().cloned().map(Ok), &work, |seq, o| {
        lines.push(render_line(seq, &o, &render));
        Ok(())
    })?;
    let reference = Transcript::from_lines(lines);

    let measure = |workers: usize| -> Result<f64> {
        let config = PipelineConfig::with_workers(workers).batch_size(options.batch_size);
        let mut times = Vec::with_capacity(options.repetitions);
        for rep in 0..=options.repetitions {
            let (transcript, wall) = timed_run(corpus, &work, &render, &config)?;
            if transcript.digest != reference.digest {
                let detail = reference.first_difference(&transcript).unwrap_or_else(|| "digest mismatch".into());
                return Err(Error::Divergent { workers, detail });
            }
            if rep > 0 {
                times.push(wall.as_secs_f64().max(1e-9));
            }
        }
        Ok(median(times))
    };

    let t1 = measure(1)?;
    let mut results = Vec::with_capacity(options.worker_counts.len());
    for &workers in &options.worker_counts {
        let tp = if workers == 1 { t1 } else { measure(workers)? };
        results.push(BenchmarkResult {
            task: task.to_string(),
            workers,
            t1,
            tp,
            speedup: speedup(t1, tp)?,
            outputs_equal: true,
        });
    }
    Ok(results)
}

/// Plain-text table: task, workers, time, speedup.
pub fn render_table(results: &[BenchmarkResult]) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{:<12} {:>7} {:>12} {:>10} {:>8}", "task", "workers", "time", "seconds", "speedup");
    for r in results {
        let _ = writeln!(
            out,
            "{:<12} {:>7} {:>12} {:>10.3} {:>8}",
            r.task,
            r.workers,
            format_duration(r.tp.round() as u64),
            r.tp,
            r.speedup_text()
        );
    }
    out
}

/// Machine-readable CSV with header `task,workers,seconds,speedup,outputs_equal`.
pub fn render_csv(results: &[BenchmarkResult]) -> String {
    let mut out = String::from("task,workers,seconds,speedup,outputs_equal\n");
    for r in results {
        let _ = writeln!(out, "{},{},{:.6},{},{}", r.task, r.workers, r.tp, r.speedup_text(), r.outputs_equal);
    }
    out
}

const FILLER: &[&str] = &[
    "the", "build", "fails", "when", "i", "run", "tests", "on", "linux", "with", "this", "config", "file", "and",
    "compiler", "version", "after", "update", "query", "returns", "null", "for", "every", "row", "in", "table",
    "thread", "blocks", "until", "timeout", "server", "logs", "show", "error", "code", "function", "call", "value",
    "array", "index", "memory", "usage", "grows", "over", "time", "cache", "is", "cleared", "docs", "say",
];
const SENTIMENT: &[&str] = &[
    "love",
    "great",
    "thanks",
    "awesome",
    "happy",
    "glad",
    "hate",
    "annoying",
    "awful",
    "angry",
    "afraid",
    "worried",
    "sad",
    "sorry",
    "wow",
    "surprised",
    "please",
    "could",
    "would",
    "not",
    "never",
];

/// Seeded synthetic corpus of short technical-sounding documents, mixing
/// filler words with sentiment and emotion cues. Ids are `s1`, `s2`, ...
pub fn synthetic_corpus(n: usize, seed: u64) -> Vec<Document> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (1..=n)
        .map(|i| {
            let sentences = rng.gen_range(1..=3);
            let mut text = String::new();
            for s in 0..sentences {
                if s > 0 {
                    text.push(' ');
                }
                let len = rng.gen_range(4..=12);
                let words: Vec<&str> = (0..len)
                    .map(|_| {
                        let pool = if rng.gen_bool(0.2) { SENTIMENT } else { FILLER };
                        *pool.choose(&mut rng).expect("word pools are non-empty")
                    })
                    .collect();
                text.push_str(&words.join(" "));
                text.push(*['.', '!', '?'].choose(&mut rng).expect("non-empty"));
            }
            Document::new(format!("s{i}"), text)
        })
        .collect()
}
