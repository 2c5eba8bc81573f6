//! Timing harness for the correction methods.
//!
//! One input set is generated per run and shared by every method, so the
//! numbers differ only by algorithm. Calls are timed in batches of 1000
//! (a single call sits near clock resolution); the per-call figure is
//! batch time / batch size and the median is taken over batches. A running
//! checksum of every output keeps the optimizer from deleting the work and
//! doubles as a determinism witness.
//!
//! Timed sections are serialized process-wide and pinned to the current
//! logical CPU where the platform allows.

use std::sync::Mutex;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::bs::{bs_kernel, bs_lsvd_kernel, SvdEngine};
use crate::error::{Error, Result};
use crate::geometry::Method;
use crate::lmpc::{lmpc_kernel, DEFAULT_DEGENERACY_TOL};
use crate::rng::SplitMix64;

const BATCH: usize = 1000;

/// Memory budget for the pre-generated input set.
const MAX_INPUT_BYTES: usize = 2 << 30;

static TIMED_SECTION: Mutex<()> = Mutex::new(());

/// How the random inputs are drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InputDistribution {
    /// Componentwise uniform on [−1, 1].
    UniformCube,
    /// Componentwise standard normal.
    StandardNormal,
}

impl InputDistribution {
    pub fn name(&self) -> &'static str {
        match self {
            InputDistribution::UniformCube => "uniform-cube",
            InputDistribution::StandardNormal => "standard-normal",
        }
    }
}

impl std::fmt::Display for InputDistribution {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for InputDistribution {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "uniform-cube" | "uniform" | "cube" => Ok(InputDistribution::UniformCube),
            "standard-normal" | "normal" | "gaussian" => Ok(InputDistribution::StandardNormal),
            other => Err(Error::Config(format!("unknown distribution '{other}'"))),
        }
    }
}

/// Benchmark run parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchConfig {
    pub trials: usize,
    pub seed: u64,
    pub methods: Vec<Method>,
    pub warmup: usize,
    pub distribution: InputDistribution,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            trials: 1_000_000,
            seed: 0,
            methods: Method::ALL.to_vec(),
            warmup: 10_000,
            distribution: InputDistribution::UniformCube,
        }
    }
}

/// Timing figures for one method.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodTiming {
    pub method: Method,
    pub total_seconds: f64,
    pub median_call_us: f64,
    pub mean_call_us: f64,
    /// Sum of all output components over the timed trials.
    pub checksum: f64,
}

/// Ratio of two methods' median per-call times.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpeedupRatio {
    pub numerator: Method,
    pub denominator: Method,
    pub ratio: f64,
}

/// Where and how the run happened.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchEnvironment {
    pub cpu: String,
    /// "release" when debug assertions are compiled out, else "debug".
    pub build_profile: String,
    pub pinned: bool,
}

/// Full result of one benchmark run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub trials: usize,
    pub seed: u64,
    pub warmup: usize,
    pub distribution: InputDistribution,
    pub timings: Vec<MethodTiming>,
    /// All pairwise ratios median(numerator)/median(denominator), taken in
    /// configuration order so later (slower) methods sit in the numerator.
    pub ratios: Vec<SpeedupRatio>,
    pub environment: BenchEnvironment,
}

/// Output formats for [`emit_report`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Markdown,
    Csv,
    Json,
}

/// Materialize the shared input set for a configuration.
pub fn generate_inputs(config: &BenchConfig) -> Result<Vec<([f64; 3], [f64; 3])>> {
    validate(config)?;
    let mut rng = SplitMix64::new(config.seed);
    let mut inputs = Vec::with_capacity(config.trials);
    for _ in 0..config.trials {
        let mut a = [0.0; 3];
        let mut b = [0.0; 3];
        match config.distribution {
            InputDistribution::UniformCube => {
                for v in a.iter_mut().chain(b.iter_mut()) {
                    *v = rng.uniform(-1.0, 1.0);
                }
            }
            InputDistribution::StandardNormal => {
                for v in a.iter_mut().chain(b.iter_mut()) {
                    *v = rng.normal();
                }
            }
        }
        inputs.push((a, b));
    }
    Ok(inputs)
}

fn validate(config: &BenchConfig) -> Result<()> {
    if config.trials == 0 {
        return Err(Error::Config("trials must be >= 1".into()));
    }
    if config.methods.is_empty() {
        return Err(Error::Config("no methods selected".into()));
    }
    let bytes = config.trials.saturating_mul(48);
    if bytes > MAX_INPUT_BYTES {
        return Err(Error::Config(format!(
            "{} trials need ~{} MiB of pre-generated inputs; split the run \
             into seeded chunks and combine the reports",
            config.trials,
            bytes >> 20
        )));
    }
    Ok(())
}

/// Run the timed comparison. Inputs are generated once, each method gets a
/// warmup pass, and the timed loops run strictly single-threaded.
pub fn run_benchmark(config: &BenchConfig) -> Result<BenchReport> {
    validate(config)?;
    let mut methods: Vec<Method> = Vec::new();
    for m in &config.methods {
        if !methods.contains(m) {
            methods.push(*m);
        }
    }
    let inputs = generate_inputs(config)?;

    let _guard = TIMED_SECTION
        .lock()
        .unwrap_or_else(|poisoned| poisoned.into_inner());
    let pinned = pin_to_current_cpu();

    let mut timings = Vec::with_capacity(methods.len());
    for &method in &methods {
        let (batches, checksum) = match method {
            Method::Lmpc => time_method(&inputs, config.warmup, |a, b, x, y| {
                lmpc_kernel(a, b, DEFAULT_DEGENERACY_TOL, x, y);
            }),
            Method::Bs => {
                let (mut c1, mut c2) = ([0.0; 3], [0.0; 3]);
                time_method(&inputs, config.warmup, move |a, b, x, y| {
                    bs_kernel(a, b, SvdEngine::ClosedForm, x, y, &mut c1, &mut c2)
                        .expect("nonzero input");
                })
            }
            Method::BsLsvd => time_method(&inputs, config.warmup, |a, b, x, y| {
                bs_lsvd_kernel(a, b, x, y).expect("nonzero input");
            }),
            Method::BsIter => {
                let (mut c1, mut c2) = ([0.0; 3], [0.0; 3]);
                time_method(&inputs, config.warmup, move |a, b, x, y| {
                    bs_kernel(a, b, SvdEngine::Jacobi, x, y, &mut c1, &mut c2)
                        .expect("nonzero input");
                })
            }
        };
        let total_seconds: f64 = batches.iter().map(|(dt, _)| dt).sum();
        let mut per_call: Vec<f64> = batches.iter().map(|(dt, n)| dt / *n as f64).collect();
        per_call.sort_by(|a, b| a.partial_cmp(b).expect("finite timings"));
        let median_s = median_of_sorted(&per_call);
        timings.push(MethodTiming {
            method,
            total_seconds,
            median_call_us: median_s * 1e6,
            mean_call_us: total_seconds / config.trials as f64 * 1e6,
            checksum,
        });
    }

    let mut ratios = Vec::new();
    for i in 0..timings.len() {
        for j in (i + 1)..timings.len() {
            ratios.push(SpeedupRatio {
                numerator: timings[j].method,
                denominator: timings[i].method,
                ratio: timings[j].median_call_us / timings[i].median_call_us,
            });
        }
    }

    Ok(BenchReport {
        trials: config.trials,
        seed: config.seed,
        warmup: config.warmup,
        distribution: config.distribution,
        timings,
        ratios,
        environment: BenchEnvironment {
            cpu: cpu_model(),
            build_profile: if cfg!(debug_assertions) {
                "debug".into()
            } else {
                "release".into()
            },
            pinned,
        },
    })
}

fn median_of_sorted(sorted: &[f64]) -> f64 {
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    }
}

fn time_method<F>(
    inputs: &[([f64; 3], [f64; 3])],
    warmup: usize,
    mut call: F,
) -> (Vec<(f64, usize)>, f64)
where
    F: FnMut(&[f64; 3], &[f64; 3], &mut [f64; 3], &mut [f64; 3]),
{
    let mut x = [0.0; 3];
    let mut y = [0.0; 3];
    let mut checksum = 0.0;
    for k in 0..warmup {
        let (a, b) = &inputs[k % inputs.len()];
        call(a, b, &mut x, &mut y);
        checksum += x[0] + x[1] + x[2] + y[0] + y[1] + y[2];
    }
    // The warmup checksum is discarded; the reported one covers exactly the
    // timed trials.
    checksum = 0.0;
    let mut batches = Vec::with_capacity(inputs.len() / BATCH + 1);
    let mut start = 0;
    while start < inputs.len() {
        let end = (start + BATCH).min(inputs.len());
        let t0 = Instant::now();
        for (a, b) in &inputs[start..end] {
            call(a, b, &mut x, &mut y);
            checksum += x[0] + x[1] + x[2] + y[0] + y[1] + y[2];
        }
        batches.push((t0.elapsed().as_secs_f64(), end - start));
        start = end;
    }
    (batches, checksum)
}

#[cfg(target_os = "linux")]
fn pin_to_current_cpu() -> bool {
    unsafe {
        let cpu = libc::sched_getcpu();
        if cpu < 0 {
            return false;
        }
        let mut set: libc::cpu_set_t = std::mem::zeroed();
        libc::CPU_ZERO(&mut set);
        libc::CPU_SET(cpu as usize, &mut set);
        libc::sched_setaffinity(0, std::mem::size_of::<libc::cpu_set_t>(), &set) == 0
    }
}

#[cfg(not(target_os = "linux"))]
fn pin_to_current_cpu() -> bool {
    false
}

fn cpu_model() -> String {
    if let Ok(info) = std::fs::read_to_string("/proc/cpuinfo") {
        for line in info.lines() {
            if let Some(rest) = line.strip_prefix("model name") {
                if let Some((_, value)) = rest.split_once(':') {
                    return value.trim().to_string();
                }
            }
        }
    }
    "unknown".to_string()
}

/// Render a report. Markdown mirrors the timing-table layout (method,
/// total, median per call) plus a ratios row; CSV and JSON carry identical
/// fields with stable names.
pub fn emit_report(report: &BenchReport, format: ReportFormat) -> String {
    match format {
        ReportFormat::Markdown => emit_markdown(report),
        ReportFormat::Csv => emit_csv(report),
        ReportFormat::Json => {
            let mut s = serde_json::to_string_pretty(report).expect("report serializes");
            s.push('\n');
            s
        }
    }
}

fn emit_markdown(report: &BenchReport) -> String {
    use std::fmt::Write;
    let mut out = String::new();
    writeln!(out, "# Plücker correction benchmark").unwrap();
    writeln!(out).unwrap();
    writeln!(
        out,
        "- trials: {}, seed: {}, warmup: {}, distribution: {}",
        report.trials, report.seed, report.warmup, report.distribution
    )
    .unwrap();
    writeln!(
        out,
        "- cpu: {}, profile: {}, pinned: {}",
        report.environment.cpu, report.environment.build_profile, report.environment.pinned
    )
    .unwrap();
    writeln!(out).unwrap();
    writeln!(
        out,
        "| Algorithm | Total (s) | Median per call (µs) | Mean per call (µs) |"
    )
    .unwrap();
    writeln!(out, "|---|---|---|---|").unwrap();
    for t in &report.timings {
        writeln!(
            out,
            "| {} | {:.4} | {:.4} | {:.4} |",
            t.method, t.total_seconds, t.median_call_us, t.mean_call_us
        )
        .unwrap();
    }
    if !report.ratios.is_empty() {
        writeln!(out).unwrap();
        let rendered: Vec<String> = report
            .ratios
            .iter()
            .map(|r| format!("{}/{} = {:.2}x", r.numerator, r.denominator, r.ratio))
            .collect();
        writeln!(out, "Ratios (median per call): {}", rendered.join(", ")).unwrap();
    }
    out
}

fn csv_escape(value: &str) -> String {
    if value.contains(',') || value.contains('"') || value.contains('\n') {
        format!("\"{}\"", value.replace('"', "\"\""))
    } else {
        value.to_string()
    }
}

fn csv_unescape(value: &str) -> String {
    let v = value.trim();
    if v.starts_with('"') && v.ends_with('"') && v.len() >= 2 {
        v[1..v.len() - 1].replace("\"\"", "\"")
    } else {
        v.to_string()
    }
}

fn emit_csv(report: &BenchReport) -> String {
    use std::fmt::Write;
    let mut out = String::new();
    writeln!(out, "field,value").unwrap();
    writeln!(out, "schema,plucker-bench-v1").unwrap();
    writeln!(out, "trials,{}", report.trials).unwrap();
    writeln!(out, "seed,{}", report.seed).unwrap();
    writeln!(out, "warmup,{}", report.warmup).unwrap();
    writeln!(out, "distribution,{}", report.distribution).unwrap();
    writeln!(out, "cpu,{}", csv_escape(&report.environment.cpu)).unwrap();
    writeln!(out, "profile,{}", report.environment.build_profile).unwrap();
    writeln!(out, "pinned,{}", report.environment.pinned).unwrap();
    for t in &report.timings {
        writeln!(out, "method.{}.total_seconds,{}", t.method, t.total_seconds).unwrap();
        writeln!(
            out,
            "method.{}.median_call_us,{}",
            t.method, t.median_call_us
        )
        .unwrap();
        writeln!(out, "method.{}.mean_call_us,{}", t.method, t.mean_call_us).unwrap();
        writeln!(out, "method.{}.checksum,{}", t.method, t.checksum).unwrap();
    }
    for r in &report.ratios {
        writeln!(out, "ratio.{}/{},{}", r.numerator, r.denominator, r.ratio).unwrap();
    }
    out
}

/// Parse a CSV report back; exact inverse of the CSV emitter for all
/// numeric fields.
pub fn parse_report_csv(text: &str) -> Result<BenchReport> {
    let mut fields: Vec<(String, String)> = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        if idx == 0 {
            if line.trim() != "field,value" {
                return Err(Error::Config("missing 'field,value' header".into()));
            }
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once(',')
            .ok_or_else(|| Error::Config(format!("bad csv line: '{line}'")))?;
        fields.push((key.trim().to_string(), csv_unescape(value)));
    }
    let lookup = |key: &str| -> Result<String> {
        fields
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.clone())
            .ok_or_else(|| Error::Config(format!("missing field '{key}'")))
    };
    let parse_num = |key: &str| -> Result<f64> {
        lookup(key)?
            .parse::<f64>()
            .map_err(|e| Error::Config(format!("field '{key}': {e}")))
    };
    if lookup("schema")? != "plucker-bench-v1" {
        return Err(Error::Config("unknown report schema".into()));
    }

    let mut methods: Vec<Method> = Vec::new();
    for (k, _) in &fields {
        if let Some(rest) = k.strip_prefix("method.") {
            if let Some((name, _)) = rest.split_once('.') {
                let m: Method = name.parse()?;
                if !methods.contains(&m) {
                    methods.push(m);
                }
            }
        }
    }
    let mut timings = Vec::new();
    for m in &methods {
        timings.push(MethodTiming {
            method: *m,
            total_seconds: parse_num(&format!("method.{m}.total_seconds"))?,
            median_call_us: parse_num(&format!("method.{m}.median_call_us"))?,
            mean_call_us: parse_num(&format!("method.{m}.mean_call_us"))?,
            checksum: parse_num(&format!("method.{m}.checksum"))?,
        });
    }
    let mut ratios = Vec::new();
    for (k, v) in &fields {
        if let Some(rest) = k.strip_prefix("ratio.") {
            let (num, den) = rest
                .split_once('/')
                .ok_or_else(|| Error::Config(format!("bad ratio key '{k}'")))?;
            ratios.push(SpeedupRatio {
                numerator: num.parse()?,
                denominator: den.parse()?,
                ratio: v
                    .parse::<f64>()
                    .map_err(|e| Error::Config(format!("ratio '{k}': {e}")))?,
            });
        }
    }
    Ok(BenchReport {
        trials: lookup("trials")?
            .parse()
            .map_err(|e| Error::Config(format!("trials: {e}")))?,
        seed: lookup("seed")?
            .parse()
            .map_err(|e| Error::Config(format!("seed: {e}")))?,
        warmup: lookup("warmup")?
            .parse()
            .map_err(|e| Error::Config(format!("warmup: {e}")))?,
        distribution: lookup("distribution")?.parse()?,
        timings,
        ratios,
        environment: BenchEnvironment {
            cpu: lookup("cpu")?,
            build_profile: lookup("profile")?,
            pinned: lookup("pinned")? == "true",
        },
    })
}

/// Parse a JSON report (inverse of the JSON emitter).
pub fn parse_report_json(text: &str) -> Result<BenchReport> {
    serde_json::from_str(text).map_err(|e| Error::Config(format!("bad json report: {e}")))
}
