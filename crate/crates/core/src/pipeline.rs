//! Ordered parallel executor.
//!
//! A run has four stages connected by bounded channels:
//!
//! ```text
//! reader --batches--> router --round robin--> worker 0..N --results--> writer
//!    ^                                                                    |
//!    +------------------------------ credits ----------------------------+
//! ```
//!
//! The reader numbers documents and groups them into batches, the router
//! deals batches to per-worker mailboxes, workers apply the work function,
//! and the writer (the calling thread) restores input order before handing
//! results to the sink. A batch may only leave the reader once it holds a
//! credit, and the writer returns the credit when the batch has been
//! written, so the reorder buffer never holds more than
//! `workers * channel_capacity` batches.

use std::collections::BTreeMap;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::Mutex;
use std::thread;
use std::time::{Duration, Instant};

use crossbeam_channel::{bounded, Receiver, Sender};

use crate::{Error, Result};

/// Per-document result handed to the sink: the work output or an error message.
pub type Outcome<R> = std::result::Result<R, String>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PipelineConfig {
    pub workers: usize,
    pub batch_size: usize,
    pub channel_capacity: usize,
}

pub const DEFAULT_BATCH_SIZE: usize = 64;

pub fn available_cores() -> usize {
    thread::available_parallelism().map_or(1, |n| n.get())
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self::with_workers(available_cores())
    }
}

impl PipelineConfig {
    pub fn with_workers(workers: usize) -> Self {
        PipelineConfig { workers, batch_size: DEFAULT_BATCH_SIZE, channel_capacity: 4 * workers.max(1) }
    }

    pub fn batch_size(mut self, batch_size: usize) -> Self {
        self.batch_size = batch_size;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.workers == 0 || self.batch_size == 0 || self.channel_capacity == 0 {
            return Err(Error::Config(format!("pipeline settings must all be positive: {self:?}")));
        }
        Ok(())
    }

    /// Maximum number of batches in flight between reader and writer.
    pub fn window(&self) -> usize {
        self.workers * self.channel_capacity
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunStats {
    pub processed: usize,
    pub errors: usize,
    pub wall: Duration,
    pub reader: Duration,
    pub router: Duration,
    /// Summed compute time across workers.
    pub workers: Duration,
    pub writer: Duration,
    /// Largest number of batches held for reordering.
    pub max_reorder: usize,
}

struct Batch<T> {
    index: usize,
    first_seq: u64,
    items: Vec<T>,
}

fn panic_message(payload: Box<dyn std::any::Any + Send>) -> String {
    match payload.downcast::<String>() {
        Ok(s) => format!("worker panicked: {s}"),
        Err(p) => match p.downcast::<&str>() {
            Ok(s) => format!("worker panicked: {s}"),
            Err(_) => "worker panicked".to_string(),
        },
    }
}

fn apply<T, R>(work: &(impl Fn(T) -> Result<R> + ?Sized), item: T) -> Outcome<R> {
    match catch_unwind(AssertUnwindSafe(|| work(item))) {
        Ok(Ok(r)) => Ok(r),
        Ok(Err(e)) => Err(e.to_string()),
        Err(payload) => Err(panic_message(payload)),
    }
}

/// Runs `work` over every item of `source` on `config.workers` threads and
/// feeds `sink` with `(seq, outcome)` pairs in input order.
///
/// A failing or panicking document becomes an `Err` outcome for its seq.
/// A source error stops reading, drains what is in flight, and returns
/// [`Error::Aborted`]; so does a sink error.
pub fn run_pipeline<T, R, S, W, K>(source: S, work: W, mut sink: K, config: &PipelineConfig) -> Result<RunStats>
where
    T: Send,
    R: Send,
    S: IntoIterator<Item = Result<T>>,
    S::IntoIter: Send,
    W: Fn(T) -> Result<R> + Sync,
    K: FnMut(u64, Outcome<R>) -> Result<()>,
{
    config.validate()?;
    let started = Instant::now();
    let window = config.window();
    let mailbox = config.channel_capacity.div_ceil(config.workers).max(1);

    let (credit_tx, credit_rx) = bounded::<()>(window);
    for _ in 0..window {
        credit_tx.send(()).expect("credit channel has room for the window");
    }
    let (batch_tx, batch_rx) = bounded::<Batch<T>>(config.channel_capacity);
    let (result_tx, result_rx) = bounded::<Batch<Outcome<R>>>(config.channel_capacity);
    let source_error: Mutex<Option<Error>> = Mutex::new(None);
    let worker_time: Mutex<Duration> = Mutex::new(Duration::ZERO);
    let source = source.into_iter();
    let work = &work;

    let mut stats = RunStats::default();
    let mut sink_error = None;

    thread::scope(|scope| {
        let reader = {
            let source_error = &source_error;
            let batch_size = config.batch_size;
            scope.spawn(move || {
                let t0 = Instant::now();
                read_batches(source, batch_size, &batch_tx, &credit_rx, source_error);
                t0.elapsed()
            })
        };

        let mut mailboxes: Vec<Sender<Batch<T>>> = Vec::with_capacity(config.workers);
        let mut workers = Vec::with_capacity(config.workers);
        for _ in 0..config.workers {
            let (tx, rx) = bounded::<Batch<T>>(mailbox);
            mailboxes.push(tx);
            let result_tx = result_tx.clone();
            let worker_time = &worker_time;
            workers.push(scope.spawn(move || run_worker(rx, result_tx, work, worker_time)));
        }
        drop(result_tx);

        let router = scope.spawn(move || {
            let t0 = Instant::now();
            for (i, batch) in batch_rx.iter().enumerate() {
                if mailboxes[i % mailboxes.len()].send(batch).is_err() {
                    break;
                }
            }
            t0.elapsed()
        });

        let t0 = Instant::now();
        let mut pending: BTreeMap<usize, Batch<Outcome<R>>> = BTreeMap::new();
        let mut next = 0;
        'write: for batch in result_rx.iter() {
            pending.insert(batch.index, batch);
            stats.max_reorder = stats.max_reorder.max(pending.len());
            while let Some(ready) = pending.remove(&next) {
                for (offset, outcome) in ready.items.into_iter().enumerate() {
                    if outcome.is_err() {
                        stats.errors += 1;
                    }
                    if let Err(e) = sink(ready.first_seq + offset as u64, outcome) {
                        sink_error = Some(e);
                        break 'write;
                    }
                    stats.processed += 1;
                }
                next += 1;
                // the reader may already be gone
                let _ = credit_tx.send(());
            }
        }
        // unblock every upstream stage if the writer stopped early
        drop(result_rx);
        drop(credit_tx);
        stats.writer = t0.elapsed();
        stats.reader = reader.join().expect("reader thread panicked");
        stats.router = router.join().expect("router thread panicked");
        for w in workers {
            w.join().expect("worker thread panicked");
        }
    });

    stats.workers = *worker_time.lock().expect("worker timer poisoned");
    stats.wall = started.elapsed();
    let cause = sink_error.or_else(|| source_error.into_inner().expect("source error slot poisoned"));
    match cause {
        Some(cause) => Err(Error::Aborted { processed: stats.processed, cause: Box::new(cause) }),
        None => Ok(stats),
    }
}

fn read_batches<T>(
    source: impl Iterator<Item = Result<T>>,
    batch_size: usize,
    out: &Sender<Batch<T>>,
    credits: &Receiver<()>,
    error: &Mutex<Option<Error>>,
) {
    let mut seq = 0u64;
    let mut index = 0;
    let mut items = Vec::with_capacity(batch_size);
    let mut first_seq = 0;
    let flush = |items: &mut Vec<T>, first_seq: u64, index: &mut usize| -> bool {
        if credits.recv().is_err() {
            return false;
        }
        let batch = Batch { index: *index, first_seq, items: std::mem::take(items) };
        *index += 1;
        out.send(batch).is_ok()
    };
    for item in source {
        match item {
            Ok(item) => {
                if items.is_empty() {
                    first_seq = seq;
                }
                items.push(item);
                seq += 1;
                if items.len() == batch_size && !flush(&mut items, first_seq, &mut index) {
                    return;
                }
            }
            Err(e) => {
                *error.lock().expect("source error slot poisoned") = Some(e);
                break;
            }
        }
    }
    if !items.is_empty() {
        flush(&mut items, first_seq, &mut index);
    }
}

fn run_worker<T, R>(
    inbox: Receiver<Batch<T>>,
    out: Sender<Batch<Outcome<R>>>,
    work: &(impl Fn(T) -> Result<R> + Sync),
    busy: &Mutex<Duration>,
) {
    let mut spent = Duration::ZERO;
    for batch in inbox.iter() {
        let t0 = Instant::now();
        let items = batch.items.into_iter().map(|item| apply(work, item)).collect();
        spent += t0.elapsed();
        if out.send(Batch { index: batch.index, first_seq: batch.first_seq, items }).is_err() {
            break;
        }
    }
    *busy.lock().expect("worker timer poisoned") += spent;
}

/// Single-threaded reference with the same contract as [`run_pipeline`].
pub fn sequential_baseline<T, R, S, W, K>(source: S, work: W, mut sink: K) -> Result<RunStats>
where
    S: IntoIterator<Item = Result<T>>,
    W: Fn(T) -> Result<R>,
    K: FnMut(u64, Outcome<R>) -> Result<()>,
{
    let started = Instant::now();
    let mut stats = RunStats::default();
    for (seq, item) in source.into_iter().enumerate() {
        let item = match item {
            Ok(item) => item,
            Err(e) => {
                stats.wall = started.elapsed();
                return Err(Error::Aborted { processed: stats.processed, cause: Box::new(e) });
            }
        };
        let t0 = Instant::now();
        let outcome = apply(&work, item);
        stats.workers += t0.elapsed();
        if outcome.is_err() {
            stats.errors += 1;
        }
        if let Err(e) = sink(seq as u64, outcome) {
            return Err(Error::Aborted { processed: stats.processed, cause: Box::new(e) });
        }
        stats.processed += 1;
    }
    stats.wall = started.elapsed();
    Ok(stats)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn items(n: usize) -> Vec<Result<u64>> {
        (0..n as u64).map(Ok).collect()
    }

    fn square(x: u64) -> Result<u64> {
        Ok(x * x)
    }

    fn transcript(
        n: usize,
        config: &PipelineConfig,
        work: impl Fn(u64) -> Result<u64> + Sync,
    ) -> (Vec<(u64, Outcome<u64>)>, RunStats) {
        let mut out = Vec::new();
        let stats = run_pipeline(
            items(n),
            work,
            |seq, o| {
                out.push((seq, o));
                Ok(())
            },
            config,
        )
        .unwrap();
        (out, stats)
    }

    #[test]
    fn order_is_preserved_with_eight_workers() {
        let (out, stats) = transcript(1000, &PipelineConfig::with_workers(8).batch_size(7), square);
        assert_eq!(out.len(), 1000);
        for (i, (seq, o)) in out.iter().enumerate() {
            assert_eq!(*seq, i as u64);
            assert_eq!(o.as_ref().unwrap(), &((i * i) as u64));
        }
        assert_eq!(stats.processed, 1000);
    }

    #[test]
    fn single_worker_matches_sequential_loop() {
        let (out, _) = transcript(300, &PipelineConfig::with_workers(1), square);
        let mut seq_out = Vec::new();
        sequential_baseline(items(300), square, |s, o| {
            seq_out.push((s, o));
            Ok(())
        })
        .unwrap();
        assert_eq!(out, seq_out);
    }

    #[test]
    fn empty_source() {
        let (out, stats) = transcript(0, &PipelineConfig::with_workers(3), square);
        assert!(out.is_empty());
        assert_eq!((stats.processed, stats.errors), (0, 0));
        let stats = sequential_baseline(items(0), square, |_, _| Ok(())).unwrap();
        assert_eq!(stats.processed, 0);
    }

    #[test]
    fn ten_thousand_documents() {
        let stats = sequential_baseline(items(10_000), square, |_, _| Ok(())).unwrap();
        assert_eq!(stats.processed, 10_000);
        let (_, stats) = transcript(10_000, &PipelineConfig::with_workers(4), square);
        assert_eq!(stats.processed, 10_000);
    }

    #[test]
    fn failures_and_panics_become_outcomes() {
        let work = |x: u64| {
            if x == 13 {
                panic!("unlucky");
            }
            if x.is_multiple_of(10) {
                return Err(Error::InvalidInput(format!("bad {x}")));
            }
            Ok(x)
        };
        let prev = std::panic::take_hook();
        std::panic::set_hook(Box::new(|_| {}));
        let (out, stats) = transcript(50, &PipelineConfig::with_workers(3).batch_size(4), work);
        std::panic::set_hook(prev);
        assert_eq!(out.len(), 50);
        assert_eq!(stats.errors, 6);
        assert!(out[13].1.as_ref().unwrap_err().contains("unlucky"));
        assert!(out[20].1.is_err());
        assert_eq!(out[21].1, Ok(21));
    }

    #[test]
    fn source_failure_drains_and_reports_partial_count() {
        let mut source: Vec<Result<u64>> = items(100);
        source[70] = Err(Error::InvalidInput("disk on fire".into()));
        let mut seen = 0;
        let err = run_pipeline(
            source,
            square,
            |_, _| {
                seen += 1;
                Ok(())
            },
            &PipelineConfig::with_workers(4).batch_size(8),
        )
        .unwrap_err();
        match err {
            Error::Aborted { processed, .. } => assert_eq!(processed, 70),
            other => panic!("{other:?}"),
        }
        assert_eq!(seen, 70);
    }

    #[test]
    fn sink_failure_stops_the_run() {
        let err = run_pipeline(
            items(10_000),
            square,
            |seq, _| if seq == 5 { Err(Error::InvalidInput("full".into())) } else { Ok(()) },
            &PipelineConfig::with_workers(2).batch_size(1),
        )
        .unwrap_err();
        assert!(matches!(err, Error::Aborted { processed: 5, .. }));
    }

    #[test]
    fn invalid_config_is_rejected() {
        let cfg = PipelineConfig { workers: 0, batch_size: 1, channel_capacity: 1 };
        assert!(run_pipeline(items(1), square, |_, _| Ok(()), &cfg).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn transcripts_identical_across_workers(n in 0usize..400, batch in 1usize..20, workers in 1usize..9) {
            let cfg = PipelineConfig::with_workers(workers).batch_size(batch);
            let (out, stats) = transcript(n, &cfg, square);
            let (reference, _) = transcript(n, &PipelineConfig::with_workers(1).batch_size(batch), square);
            prop_assert_eq!(out, reference);
            prop_assert!(stats.max_reorder <= cfg.window());
        }
    }
}
