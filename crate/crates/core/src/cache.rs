//! Memoized simulation results keyed by canonical layout.
//!
//! Every distinct design is simulated at most once per cache, including
//! concurrent requests for the same key. The miss counter is the number of
//! simulator invocations and is what run budgets are measured in.

use crate::geometry::{Action, Layout, Mode};
use crate::reward::{self, TargetSpec};
use crate::simulator::{Metrics, SimError};
use log::warn;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex, OnceLock};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CacheError {
    #[error("simulation failed: {reason}")]
    Simulation { reason: String, was_simulated: bool },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CacheRecord {
    pub key: String,
    pub mode: Mode,
    pub actions: Vec<Action>,
    pub valid: bool,
    pub metrics: Option<Metrics>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reward_at_reference: Option<f64>,
}

/// Deterministic key from mode, wire width, layer and the drawn node chain.
///
/// For symmetric layouts only the drawn half is encoded, so a mirrored layout
/// and the half it came from share a key.
pub fn canonical_key(layout: &Layout) -> String {
    let canvas = layout.canvas();
    let nodes = layout.nodes();
    let nodes = if layout.is_mirrored() && layout.mode() == Mode::Symmetric {
        &nodes[..nodes.len() / 2 + 1]
    } else {
        nodes
    };
    let mut key = format!(
        "{}|w={}|layer={}|",
        layout.mode(),
        canvas.wire_width,
        canvas.layer
    );
    for (i, &g) in nodes.iter().enumerate() {
        if i > 0 {
            key.push(';');
        }
        let p = canvas.to_point(g);
        key.push_str(&format!("{},{}", p.x, p.y));
    }
    key
}

type Outcome = Result<Metrics, String>;

struct Slot {
    mode: Mode,
    actions: Vec<Action>,
    outcome: OnceLock<Outcome>,
}

#[derive(Default)]
struct Inner {
    index: HashMap<String, Arc<Slot>>,
    order: Vec<String>,
    writer: Option<BufWriter<File>>,
}

/// Outcome of [`SimCache::load`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct LoadReport {
    pub loaded: usize,
    pub corrupt_lines: usize,
}

pub struct SimCache {
    inner: Mutex<Inner>,
    simulations: AtomicU64,
    reference: Option<TargetSpec>,
}

impl Default for SimCache {
    fn default() -> Self {
        Self::new()
    }
}

impl SimCache {
    pub fn new() -> Self {
        SimCache {
            inner: Mutex::new(Inner::default()),
            simulations: AtomicU64::new(0),
            reference: None,
        }
    }

    /// Records will carry their reward against `target`.
    pub fn with_reference(mut self, target: TargetSpec) -> Self {
        self.reference = Some(target);
        self
    }

    /// Number of simulator invocations made through this cache.
    pub fn simulations(&self) -> u64 {
        self.simulations.load(Ordering::SeqCst)
    }

    pub fn len(&self) -> usize {
        self.inner.lock().unwrap().index.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn contains(&self, layout: &Layout) -> bool {
        let key = canonical_key(layout);
        let inner = self.inner.lock().unwrap();
        inner.index.get(&key).is_some_and(|s| s.outcome.get().is_some())
    }

    /// Returns cached metrics, or runs `simulate` exactly once for a new key.
    ///
    /// The boolean is `true` when this call performed the simulation. Failed
    /// simulations are cached as invalid and reported as errors on every hit.
    pub fn get_or_simulate<F>(&self, layout: &Layout, simulate: F) -> Result<(Metrics, bool), CacheError>
    where
        F: FnOnce(&Layout) -> Result<Metrics, SimError>,
    {
        let key = canonical_key(layout);
        let slot = {
            let mut inner = self.inner.lock().unwrap();
            if let Some(slot) = inner.index.get(&key) {
                Arc::clone(slot)
            } else {
                let slot = Arc::new(Slot {
                    mode: layout.mode(),
                    actions: layout.actions().to_vec(),
                    outcome: OnceLock::new(),
                });
                inner.index.insert(key.clone(), Arc::clone(&slot));
                inner.order.push(key.clone());
                slot
            }
        };

        let mut ran = false;
        let outcome = slot.outcome.get_or_init(|| {
            ran = true;
            self.simulations.fetch_add(1, Ordering::SeqCst);
            simulate(layout).map_err(|e| e.to_string())
        });
        if ran {
            let record = self.make_record(&key, &slot, outcome);
            let mut inner = self.inner.lock().unwrap();
            if let Some(w) = inner.writer.as_mut() {
                write_record(w, &record)?;
                w.flush()?;
            }
        }
        match outcome {
            Ok(m) => Ok((*m, ran)),
            Err(reason) => Err(CacheError::Simulation {
                reason: reason.clone(),
                was_simulated: ran,
            }),
        }
    }

    fn make_record(&self, key: &str, slot: &Slot, outcome: &Outcome) -> CacheRecord {
        let metrics = outcome.as_ref().ok().copied();
        CacheRecord {
            key: key.to_string(),
            mode: slot.mode,
            actions: slot.actions.clone(),
            valid: metrics.is_some(),
            metrics,
            reward_at_reference: match (metrics, &self.reference) {
                (Some(m), Some(t)) => reward::reward(&m, t).ok(),
                _ => None,
            },
        }
    }

    /// All settled records in insertion order.
    pub fn records(&self) -> Vec<CacheRecord> {
        let inner = self.inner.lock().unwrap();
        inner
            .order
            .iter()
            .filter_map(|key| {
                let slot = &inner.index[key];
                slot.outcome.get().map(|o| self.make_record(key, slot, o))
            })
            .collect()
    }

    /// Best reward any valid cached design achieves against `target`.
    pub fn best_reward(&self, target: &TargetSpec) -> Option<f64> {
        self.records()
            .iter()
            .filter_map(|r| r.metrics.as_ref())
            .filter_map(|m| reward::reward(m, target).ok())
            .fold(None, |best, r| Some(best.map_or(r, |b: f64| b.max(r))))
    }

    /// Inserts a record without counting a simulation. Existing keys win.
    pub fn insert_record(&self, record: CacheRecord) {
        let mut inner = self.inner.lock().unwrap();
        if inner.index.contains_key(&record.key) {
            return;
        }
        let outcome = match record.metrics {
            Some(m) if record.valid => Ok(m),
            _ => Err("cached invalid design".to_string()),
        };
        let cell = OnceLock::new();
        let _ = cell.set(outcome);
        inner.order.push(record.key.clone());
        inner.index.insert(
            record.key,
            Arc::new(Slot {
                mode: record.mode,
                actions: record.actions,
                outcome: cell,
            }),
        );
    }

    /// Writes every record to `path`, replacing its contents.
    pub fn persist(&self, path: &Path) -> Result<(), CacheError> {
        let mut w = BufWriter::new(File::create(path)?);
        for record in self.records() {
            write_record(&mut w, &record)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Reads a JSONL cache file. Unparseable lines are skipped and counted.
    pub fn load(path: &Path) -> Result<(SimCache, LoadReport), CacheError> {
        let cache = SimCache::new();
        let report = cache.merge_file(path)?;
        Ok((cache, report))
    }

    pub fn merge_file(&self, path: &Path) -> Result<LoadReport, CacheError> {
        let reader = BufReader::new(File::open(path)?);
        let mut report = LoadReport::default();
        for (lineno, line) in reader.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            match serde_json::from_str::<CacheRecord>(&line) {
                Ok(record) => {
                    self.insert_record(record);
                    report.loaded += 1;
                }
                Err(e) => {
                    warn!("{}:{}: skipping corrupt cache line: {e}", path.display(), lineno + 1);
                    report.corrupt_lines += 1;
                }
            }
        }
        Ok(report)
    }

    /// Appends each newly simulated record to `path` from now on.
    pub fn append_to(&self, path: &Path) -> Result<(), CacheError> {
        let file = OpenOptions::new().create(true).append(true).open(path)?;
        self.inner.lock().unwrap().writer = Some(BufWriter::new(file));
        Ok(())
    }

    /// Loads `path` if it exists and appends new records to it.
    pub fn open(path: &Path) -> Result<(SimCache, LoadReport), CacheError> {
        let (cache, report) = if path.exists() {
            SimCache::load(path)?
        } else {
            (SimCache::new(), LoadReport::default())
        };
        cache.append_to(path)?;
        Ok((cache, report))
    }

    /// Independent copy of the settled records, with a fresh miss counter.
    pub fn snapshot(&self) -> SimCache {
        let copy = SimCache {
            reference: self.reference,
            ..SimCache::new()
        };
        for r in self.records() {
            copy.insert_record(r);
        }
        copy
    }
}

fn write_record<W: Write>(w: &mut W, record: &CacheRecord) -> Result<(), CacheError> {
    let line = serde_json::to_string(record).map_err(std::io::Error::other)?;
    writeln!(w, "{line}")?;
    Ok(())
}
