use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::config::ScenarioConfig;
use crate::equilibrium::SupplySchedule;
use crate::error::{Error, Result};
use crate::market::{revenue, DemandModel};

/// Everything that happened in one round.
#[derive(Debug, Clone, PartialEq)]
pub struct RoundRecord {
    pub t: usize,
    pub prices: Vec<f64>,
    pub demands: Vec<f64>,
    pub revenues: Vec<f64>,
    pub gradients: Vec<f64>,
    pub supplies: Vec<f64>,
}

/// Append-only record of a run plus the scenario that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    config: ScenarioConfig,
    rounds: Vec<RoundRecord>,
}

impl Trace {
    pub fn new(config: ScenarioConfig) -> Self {
        Trace {
            config,
            rounds: Vec::new(),
        }
    }

    pub fn push(&mut self, record: RoundRecord) -> Result<()> {
        let n = self.config.n();
        let expected_t = self.rounds.len() + 1;
        if record.t != expected_t {
            return Err(Error::Config(format!(
                "round {} appended out of order (expected {expected_t})",
                record.t
            )));
        }
        for v in [
            &record.prices,
            &record.demands,
            &record.revenues,
            &record.gradients,
            &record.supplies,
        ] {
            if v.len() != n {
                return Err(Error::LengthMismatch {
                    expected: n,
                    actual: v.len(),
                });
            }
        }
        self.rounds.push(record);
        Ok(())
    }

    pub fn config(&self) -> &ScenarioConfig {
        &self.config
    }

    pub fn model(&self) -> &DemandModel {
        &self.config.model
    }

    pub fn rounds(&self) -> &[RoundRecord] {
        &self.rounds
    }

    pub fn len(&self) -> usize {
        self.rounds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rounds.is_empty()
    }

    pub fn sellers(&self) -> usize {
        self.config.n()
    }

    /// Rounds `start..end` (0-based, half-open) as a standalone trace numbered from 1.
    pub fn window(&self, start: usize, end: usize) -> Trace {
        let end = end.min(self.rounds.len());
        let start = start.min(end);
        let rounds = self.rounds[start..end]
            .iter()
            .enumerate()
            .map(|(k, r)| RoundRecord { t: k + 1, ..r.clone() })
            .collect();
        Trace {
            config: self.config.clone(),
            rounds,
        }
    }

    pub fn prices(&self, i: usize) -> Vec<f64> {
        self.rounds.iter().map(|r| r.prices[i]).collect()
    }

    pub fn log_prices(&self, i: usize) -> Vec<f64> {
        self.rounds.iter().map(|r| r.prices[i].ln()).collect()
    }

    pub fn gradients(&self, i: usize) -> Vec<f64> {
        self.rounds.iter().map(|r| r.gradients[i]).collect()
    }

    pub fn revenues(&self, i: usize) -> Vec<f64> {
        self.rounds.iter().map(|r| r.revenues[i]).collect()
    }

    pub fn supply_schedule(&self) -> Result<SupplySchedule> {
        SupplySchedule::new(
            self.rounds.iter().map(|r| r.supplies.clone()).collect(),
            "trace",
            self.config.seed,
        )
    }

    /// Largest relative discrepancy between stored demands/revenues and values
    /// recomputed from the stored prices and supplies.
    pub fn consistency_error(&self) -> Result<f64> {
        let model = self.model();
        let mut worst = 0.0_f64;
        for r in &self.rounds {
            let demand = model.demand(&r.prices)?;
            for (i, &x) in demand.iter().enumerate() {
                let rev = revenue(r.prices[i], x, r.supplies[i]);
                let rel = |a: f64, b: f64| (a - b).abs() / b.abs().max(f64::MIN_POSITIVE);
                worst = worst
                    .max(rel(r.revenues[i], rev))
                    .max(rel(r.demands[i], x));
                let cap = r.prices[i] * r.supplies[i];
                if r.revenues[i] > cap * (1.0 + 1e-12) {
                    worst = worst.max(rel(r.revenues[i], cap));
                }
            }
        }
        Ok(worst)
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let n = self.sellers();
        let mut w = csv::Writer::from_writer(writer);
        let mut header = vec!["t".to_string()];
        for name in ["price", "demand", "revenue", "gradient", "supply"] {
            header.extend((0..n).map(|i| format!("{name}_{i}")));
        }
        w.write_record(&header)?;
        for r in &self.rounds {
            let mut row = vec![r.t.to_string()];
            for v in [&r.prices, &r.demands, &r.revenues, &r.gradients, &r.supplies] {
                row.extend(v.iter().map(|x| x.to_string()));
            }
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(config: ScenarioConfig, reader: R) -> Result<Self> {
        let n = config.n();
        let mut rdr = csv::Reader::from_reader(reader);
        let headers = rdr.headers()?.clone();
        if headers.len() != 1 + 5 * n {
            return Err(Error::LengthMismatch {
                expected: 1 + 5 * n,
                actual: headers.len(),
            });
        }
        let mut trace = Trace::new(config);
        for row in rdr.records() {
            let row = row?;
            let parse = |k: usize| -> Result<f64> {
                row[k].trim().parse::<f64>().map_err(|e| {
                    Error::Config(format!("column {} ('{}'): {e}", &headers[k], &row[k]))
                })
            };
            let block = |b: usize| -> Result<Vec<f64>> {
                (0..n).map(|i| parse(1 + b * n + i)).collect()
            };
            let t = row[0]
                .trim()
                .parse::<usize>()
                .map_err(|e| Error::Config(format!("column t ('{}'): {e}", &row[0])))?;
            trace.push(RoundRecord {
                t,
                prices: block(0)?,
                demands: block(1)?,
                revenues: block(2)?,
                gradients: block(3)?,
                supplies: block(4)?,
            })?;
        }
        Ok(trace)
    }
}

/// Reproducibility record written next to every trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunManifest {
    pub config: ScenarioConfig,
    pub seed: u64,
    pub horizon: usize,
    pub rounds: usize,
    pub trace_file: String,
    pub versions: Vec<(String, String)>,
}

impl RunManifest {
    pub fn for_trace(trace: &Trace, trace_file: impl Into<String>) -> Self {
        RunManifest {
            config: trace.config.clone(),
            seed: trace.config.seed,
            horizon: trace.config.horizon,
            rounds: trace.len(),
            trace_file: trace_file.into(),
            versions: vec![(
                env!("CARGO_PKG_NAME").to_string(),
                env!("CARGO_PKG_VERSION").to_string(),
            )],
        }
    }
}

/// Writes `trace.csv`-style output plus a JSON manifest.
pub fn write_run(trace: &Trace, trace_path: &Path, manifest_path: &Path) -> Result<()> {
    let file = std::fs::File::create(trace_path)?;
    trace.write_csv(std::io::BufWriter::new(file))?;
    let same_dir = trace_path.parent() == manifest_path.parent();
    let name = match trace_path.file_name() {
        Some(f) if same_dir => f.to_string_lossy().into_owned(),
        _ => std::fs::canonicalize(trace_path)?.to_string_lossy().into_owned(),
    };
    let manifest = RunManifest::for_trace(trace, name);
    let mut text = serde_json::to_string_pretty(&manifest)?;
    text.push('\n');
    std::fs::write(manifest_path, text)?;
    Ok(())
}

/// Loads a trace from its manifest; the CSV path is resolved relative to the manifest.
pub fn read_run(manifest_path: &Path) -> Result<Trace> {
    let manifest: RunManifest = serde_json::from_str(&std::fs::read_to_string(manifest_path)?)?;
    manifest.config.validate()?;
    let dir = manifest_path.parent().unwrap_or_else(|| Path::new("."));
    let file = std::fs::File::open(dir.join(&manifest.trace_file))?;
    Trace::read_csv(manifest.config, std::io::BufReader::new(file))
}
