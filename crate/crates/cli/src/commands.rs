use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Serialize;

use primeseries::dirichlet::{g_hybrid, path_sample, Branch, PathQuery, TimeChange};
use primeseries::harness::{
    lindeberg_profile, run_corollary_experiment, run_fclt_experiment, run_lil_trace, run_lil_variance,
    CorollaryReport, ExperimentConfig, FcltReport, LilConfig, LilReport, LilVarianceRow, DEFAULT_TOLERANCE_SE,
    KS_COEFFICIENT,
};
use primeseries::multiplicative::{euler_product, sieve_multiplicative, smooth_expansion_sum, CSV_EXPORT_LIMIT};
use primeseries::report::{matrix_csv, Envelope};
use primeseries::{sieve_primes, NoiseModel, PrimeTable, SeedSpec, VarianceBreakdown};

use crate::settings::{key, KeySpec, Settings};
use crate::{CliError, Output, NOISE, SEED};

pub const SUBCOMMANDS: [(&str, &str); 7] = [
    ("variance", "Truncated variance against log(1/s)"),
    ("fclt", "Covariance and marginal normality of the time-changed process"),
    ("lil", "Normalized trajectory along the doubly exponential sequence"),
    ("euler", "Euler product against its smooth k-free expansion"),
    ("decompose", "Log-decomposition of the Euler product"),
    ("lindeberg", "Lindeberg profile in closed form"),
    ("sieve", "Prime table, counts and cache"),
];

pub fn specs(command: &str) -> Vec<KeySpec> {
    let mut v = match command {
        "variance" => vec![
            key("s", "s", None, "Comma-separated shifts in (0, 1/e)"),
            key("cutoff", "cutoff", Some("1e8"), "Prime cutoff P"),
            key("band", "band", Some("0.15"), "Pass iff |ratio - 1| <= band"),
            key("grid", "grid", None, "Time grid for a sampled path (needs --seed)"),
            key("mode", "mode", Some("exponential"), "Time change: power or exponential"),
            key("scale", "scale", None, "Exponential rate S (default ln(1/s))"),
            key("base", "base", None, "Power-mode base (default s)"),
            SEED,
        ],
        "fclt" => vec![
            key("replicas", "replicas", Some("2000"), "Number of replicas (>= 2)"),
            key("cutoff", "cutoff", Some("1e7"), "Prime cutoff P"),
            key("grid", "grid", Some("0.25,0.5,1"), "Ascending time grid"),
            key("mode", "mode", Some("exponential"), "Time change: power or exponential"),
            key("scale", "scale", Some("10"), "Exponential rate S"),
            key("base", "base", None, "Power-mode base"),
            key("tolerance_se", "tolerance-se", Some("4"), "Covariance tolerance in standard errors"),
            key("ks_coefficient", "ks-coefficient", Some("1.95"), "KS threshold is c/sqrt(replicas)"),
            SEED,
        ],
        "lil" => vec![
            key("gamma", "gamma", Some("0.5"), "Exponent gamma in (0, 1)"),
            key("branch", "branch", Some("minus"), "minus or plus"),
            key("n", "n", Some("1..12"), "Index range a..b"),
            key("cutoff", "cutoff", Some("1e6"), "Prime cutoff P"),
            key("replicas", "replicas", Some("0"), "Replicas for the variance check (0 skips it)"),
            key("tolerance_se", "tolerance-se", Some("4"), "Variance tolerance in standard errors"),
            SEED,
        ],
        "euler" => vec![
            key("P", "P", Some("13"), "Largest prime in the product"),
            key("k", "k", Some("2"), "Freeness order k >= 2"),
            key("s", "s", Some("0.01,0.5,2"), "Comma-separated shifts"),
            key("seeds", "seeds", Some("100"), "Number of independent streams"),
            key("tolerance", "tolerance", Some("1e-12"), "Relative tolerance"),
            SEED,
        ],
        "decompose" => vec![
            key("k", "k", Some("2"), "Freeness order k >= 2"),
            key("s", "s", None, "Comma-separated shifts"),
            key("s_grid", "s-grid", None, "Alias of --s"),
            key("cutoff", "cutoff", Some("1e5"), "Prime cutoff P"),
            key("seeds", "seeds", Some("1"), "Number of independent streams"),
            key("bound", "bound", Some("1"), "Bound on the discrepancy track"),
            key("table_bound", "table-bound", None, "Also export f(n) for n up to this bound (<= 10000)"),
            SEED,
        ],
        "lindeberg" => vec![
            key("eps", "eps", Some("0.5"), "Lindeberg epsilon"),
            key("norms", "norms", Some("10,100,1000"), "Normalizations; the shift is exp(-norm)"),
            key("cutoff", "cutoff", Some("1e6"), "Prime cutoff P"),
            key("threshold", "threshold", Some("1e-3"), "Pass iff the last value is at most this"),
        ],
        "sieve" => vec![key("count_at", "count-at", None, "Comma-separated points x for pi(x)")],
        _ => Vec::new(),
    };
    if matches!(command, "variance" | "fclt" | "lil" | "lindeberg") {
        v.extend_from_slice(&NOISE);
    }
    v
}

pub fn dispatch(command: &str, settings: &Settings) -> Result<Output, CliError> {
    match command {
        "variance" => variance(settings),
        "fclt" => fclt(settings),
        "lil" => lil(settings),
        "euler" => euler(settings),
        "decompose" => decompose(settings),
        "lindeberg" => lindeberg(settings),
        "sieve" => sieve(settings),
        other => Err(CliError::usage(format!("unknown subcommand `{other}`"))),
    }
}

fn envelope<R: Serialize>(command: &str, settings: &Settings, report: R, pass: bool) -> Result<String, CliError> {
    let env = Envelope::new(command, settings.echo(), report, pass);
    serde_json::to_string_pretty(&env).map_err(|e| CliError::usage(e.to_string()))
}

fn seed(settings: &Settings) -> Result<SeedSpec, CliError> {
    Ok(SeedSpec::new(settings.u64("seed")?, 0))
}

pub(crate) fn noise(settings: &Settings) -> Result<NoiseModel, CliError> {
    let sigma2 = settings.opt_f64("noise.sigma2")?;
    let model = match settings.require("noise.kind")? {
        "rademacher" => NoiseModel::scaled_rademacher(sigma2.unwrap_or(1.0))?,
        "gaussian" => NoiseModel::gaussian(sigma2.unwrap_or(1.0))?,
        "centered_uniform" => NoiseModel::centered_uniform(sigma2.unwrap_or(1.0))?,
        "two_point" => {
            let q = settings.f64("noise.two_point.q")?;
            match (settings.opt_f64("noise.two_point.a")?, settings.opt_f64("noise.two_point.b")?) {
                (Some(a), Some(b)) => {
                    let m = NoiseModel::two_point(a, b, q)?;
                    if let Some(v) = sigma2 {
                        if (v - m.sigma2).abs() > 1e-12 * m.sigma2 {
                            return Err(CliError::usage(format!(
                                "sigma2 = {v} contradicts the two-point atoms (variance {})",
                                m.sigma2
                            )));
                        }
                    }
                    m
                }
                (None, None) => NoiseModel::two_point_from_variance(q, sigma2.unwrap_or(1.0))?,
                _ => return Err(CliError::usage("two_point needs both atoms or neither")),
            }
        }
        other => return Err(CliError::usage(format!("unknown noise kind `{other}`"))),
    };
    Ok(model)
}

fn time_change(settings: &Settings, default_rate: Option<f64>) -> Result<TimeChange<f64>, CliError> {
    let tc = match settings.require("mode")? {
        "exponential" => {
            let scale = match settings.opt_f64("scale")? {
                Some(v) => v,
                None => default_rate.ok_or_else(|| CliError::usage("exponential mode needs --scale"))?,
            };
            TimeChange::Exponential { scale }
        }
        "power" => {
            let base = match settings.opt_f64("base")? {
                Some(v) => v,
                None => default_rate
                    .map(|r| (-r).exp())
                    .ok_or_else(|| CliError::usage("power mode needs --base"))?,
            };
            TimeChange::Power { base }
        }
        other => return Err(CliError::usage(format!("unknown mode `{other}`"))),
    };
    tc.validate()?;
    Ok(tc)
}

fn prime_table(settings: &Settings, needed: u64) -> Result<PrimeTable, CliError> {
    let limit = settings.opt_u64("prime.limit")?.unwrap_or(needed);
    if limit < needed {
        return Err(CliError::usage(format!("prime limit {limit} is below the cutoff {needed}")));
    }
    let Some(path) = settings.get("prime.cache") else {
        return Ok(sieve_primes(limit)?);
    };
    if std::path::Path::new(path).exists() {
        let table = PrimeTable::read_cache(path)?;
        if table.limit() >= needed {
            return Ok(table);
        }
    }
    let table = sieve_primes(limit)?;
    table.write_cache(path)?;
    Ok(table)
}

fn csv_rows<I: IntoIterator<Item = String>>(header: &str, rows: I) -> String {
    let mut out = format!("{header}\n");
    for row in rows {
        out.push_str(&row);
        out.push('\n');
    }
    out
}

fn positive_count(settings: &Settings, key: &str, min: u64) -> Result<u64, CliError> {
    let v = settings.u64(key)?;
    if v < min {
        return Err(CliError::usage(format!("`{key}` must be >= {min}, got {v}")));
    }
    Ok(v)
}

#[derive(Serialize)]
struct VarianceReport {
    breakdowns: Vec<VarianceBreakdown>,
    path: Option<Vec<primeseries::PathPoint>>,
}

fn variance(settings: &Settings) -> Result<Output, CliError> {
    let shifts = settings.f64_list("s")?;
    let cutoff = settings.u64("cutoff")?;
    let band = settings.f64("band")?;
    let model = noise(settings)?;
    if let Some(&bad) = shifts.iter().find(|&&s| s <= 0.0) {
        return Err(CliError::usage(format!("shift s must be > 0, got {bad}")));
    }
    let table = prime_table(settings, cutoff)?;
    let breakdowns = shifts
        .iter()
        .map(|&s| g_hybrid(&table, s, cutoff, model.sigma2))
        .collect::<primeseries::Result<Vec<_>>>()?;
    let pass = breakdowns.iter().all(|b| (b.ratio - 1.0).abs() <= band);

    let path = if settings.contains("grid") {
        let query = PathQuery {
            mode: time_change(settings, Some(-shifts[0].ln()))?,
            grid: settings.f64_list("grid")?,
            cutoff,
            seed: seed(settings)?,
            model,
        };
        Some(path_sample(&table, &query)?)
    } else {
        None
    };

    let mut csv = vec![(
        "variance".to_string(),
        csv_rows(
            "s,partial,tail_estimate,total,asymptote,ratio",
            shifts.iter().zip(&breakdowns).map(|(s, b)| {
                format!("{s:e},{:e},{:e},{:e},{:e},{}", b.partial, b.tail_estimate, b.total, b.asymptote, b.ratio)
            }),
        ),
    )];
    if let Some(points) = &path {
        csv.push((
            "path".to_string(),
            csv_rows(
                "t,shift,raw,normalized",
                points.iter().map(|p| format!("{},{:e},{:e},{:e}", p.t, p.shift, p.raw, p.normalized)),
            ),
        ));
    }
    let summary = breakdowns
        .iter()
        .zip(&shifts)
        .map(|(b, s)| format!("s={s:e} ratio={:.6}", b.ratio))
        .collect::<Vec<_>>()
        .join("\n");
    let report = VarianceReport { breakdowns, path };
    Ok(Output {
        name: "variance",
        json: envelope("variance", settings, &report, pass)?,
        csv,
        pass,
        summary,
    })
}

fn fclt(settings: &Settings) -> Result<Output, CliError> {
    let replicas = settings.u64("replicas")?;
    let config = ExperimentConfig {
        replicas: replicas as usize,
        cutoff: settings.u64("cutoff")?,
        time_change: time_change(settings, None)?,
        grid: settings.f64_list("grid")?,
        noise: noise(settings)?,
        master_seed: settings.u64("seed")?,
        tolerance_se: settings.opt_f64("tolerance_se")?.unwrap_or(DEFAULT_TOLERANCE_SE),
        ks_coefficient: settings.opt_f64("ks_coefficient")?.unwrap_or(KS_COEFFICIENT),
    };
    config.validate()?;
    let table = prime_table(settings, config.cutoff)?;
    let report: FcltReport = run_fclt_experiment(&table, &config)?;
    let marginals = csv_rows(
        "t,shift,mean,variance,oracle_variance,skewness,excess_kurtosis,ks_statistic,ks_pass",
        report.marginals.iter().map(|m| {
            format!(
                "{},{:e},{:e},{:e},{:e},{:e},{:e},{},{}",
                m.t,
                m.shift,
                m.mean,
                m.variance,
                m.oracle_variance,
                m.skewness,
                m.excess_kurtosis,
                m.ks_statistic.map_or(String::new(), |d| format!("{d:e}")),
                m.ks_pass
            )
        }),
    );
    let csv = vec![
        ("fclt_marginals".to_string(), marginals),
        ("fclt_cov_empirical".to_string(), matrix_csv(&report.grid, &report.empirical_covariance)),
        ("fclt_cov_oracle".to_string(), matrix_csv(&report.grid, &report.oracle_covariance)),
        ("fclt_cov_deviation_se".to_string(), matrix_csv(&report.grid, &report.deviation_se)),
    ];
    let worst = report.deviation_se.iter().flatten().fold(0.0f64, |a, &b| a.max(b));
    let summary = format!(
        "fclt: covariance_pass={} (max deviation {worst:.2} SE) normality_pass={}",
        report.covariance_pass, report.normality_pass
    );
    let pass = report.pass;
    Ok(Output {
        name: "fclt",
        json: envelope("fclt", settings, &report, pass)?,
        csv,
        pass,
        summary,
    })
}

fn parse_range(raw: &str) -> Result<(u64, u64), CliError> {
    let bad = || CliError::usage(format!("`n`: expected a range a..b, got `{raw}`"));
    let (a, b) = raw.split_once("..").ok_or_else(bad)?;
    let a = a.trim().parse().map_err(|_| bad())?;
    let b = b.trim().parse().map_err(|_| bad())?;
    Ok((a, b))
}

#[derive(Serialize)]
struct LilOutput {
    trace: LilReport,
    variance: Option<Vec<LilVarianceRow>>,
    variance_pass: bool,
}

fn lil(settings: &Settings) -> Result<Output, CliError> {
    let (n_first, n_last) = parse_range(settings.require("n")?)?;
    let branch: Branch = settings
        .require("branch")?
        .parse()
        .map_err(|e: primeseries::Error| CliError::usage(e.to_string()))?;
    let config = LilConfig {
        cutoff: settings.u64("cutoff")?,
        noise: noise(settings)?,
        seed: seed(settings)?,
        gamma: settings.f64("gamma")?,
        branch,
        n_first,
        n_last,
    };
    config.validate()?;
    let replicas = settings.u64("replicas")? as usize;
    let tolerance = settings.f64("tolerance_se")?;
    let table = prime_table(settings, config.cutoff)?;
    let trace = run_lil_trace(&table, &config)?;
    let variance = if replicas > 0 {
        Some(run_lil_variance(&table, &config, replicas)?)
    } else {
        None
    };
    let variance_pass = variance
        .as_ref()
        .is_none_or(|rows| rows.iter().all(|r| r.deviation_se <= tolerance));
    let pass = trace.extremes_monotone && trace.normalization_defect <= 1e-12 && variance_pass;

    let mut csv = vec![(
        "lil".to_string(),
        csv_rows(
            "n,s_n,normalized,running_max,running_min,predicted_sd",
            trace.entries.iter().map(|e| {
                format!(
                    "{},{:e},{:e},{:e},{:e},{:e}",
                    e.n, e.s, e.normalized, e.running_max, e.running_min, e.predicted_sd
                )
            }),
        ),
    )];
    if let Some(rows) = &variance {
        csv.push((
            "lil_variance".to_string(),
            csv_rows(
                "n,s_n,sample_variance,expected,standard_error,deviation_se",
                rows.iter().map(|r| {
                    format!(
                        "{},{:e},{:e},{:e},{:e},{:.3}",
                        r.n, r.s, r.sample_variance, r.expected, r.standard_error, r.deviation_se
                    )
                }),
            ),
        ));
    }
    let summary = format!(
        "lil: {} usable points, {} excluded, running extremes monotone={}",
        trace.entries.len(),
        trace.excluded.len(),
        trace.extremes_monotone
    );
    let report = LilOutput {
        trace,
        variance,
        variance_pass,
    };
    Ok(Output {
        name: "lil",
        json: envelope("lil", settings, &report, pass)?,
        csv,
        pass,
        summary,
    })
}

#[derive(Serialize)]
struct EulerRow {
    stream_label: u64,
    s: f64,
    product: f64,
    expansion: f64,
    relative_gap: f64,
    nonpositive_at: Option<u64>,
}

#[derive(Serialize)]
struct EulerReport {
    rows: Vec<EulerRow>,
    max_relative_gap: f64,
    tolerance: f64,
}

fn euler(settings: &Settings) -> Result<Output, CliError> {
    let cutoff = positive_count(settings, "P", 2)?;
    let k = positive_count(settings, "k", 2)?;
    let k = u32::try_from(k).map_err(|_| CliError::usage("`k` is too large"))?;
    let shifts = settings.f64_list("s")?;
    let seeds = positive_count(settings, "seeds", 1)?;
    let tolerance = settings.f64("tolerance")?;
    let base = seed(settings)?;
    let table = prime_table(settings, cutoff)?;
    let mut rows = Vec::new();
    for &s in &shifts {
        for label in 0..seeds {
            let seed = base.with_label(label);
            let product = euler_product(&table, seed, s, cutoff, k)?;
            let expansion = smooth_expansion_sum(&table, seed, s, cutoff, k)?;
            let scale = product.value.abs().max(expansion.abs()).max(f64::MIN_POSITIVE);
            rows.push(EulerRow {
                stream_label: label,
                s,
                product: product.value,
                expansion,
                relative_gap: (product.value - expansion).abs() / scale,
                nonpositive_at: product.nonpositive_at,
            });
        }
    }
    let max_relative_gap = rows.iter().map(|r| r.relative_gap).fold(0.0, f64::max);
    let pass = max_relative_gap <= tolerance;
    let csv = vec![(
        "euler".to_string(),
        csv_rows(
            "s,stream_label,product,expansion,relative_gap",
            rows.iter().map(|r| {
                format!("{},{},{:e},{:e},{:e}", r.s, r.stream_label, r.product, r.expansion, r.relative_gap)
            }),
        ),
    )];
    let summary = format!("euler: {} rows, max relative gap {max_relative_gap:e}", rows.len());
    let report = EulerReport {
        rows,
        max_relative_gap,
        tolerance,
    };
    Ok(Output {
        name: "euler",
        json: envelope("euler", settings, &report, pass)?,
        csv,
        pass,
        summary,
    })
}

#[derive(Serialize)]
struct DecomposeReport {
    max_residual: f64,
    remainder_bound_pass: bool,
    corollary: CorollaryReport,
}

pub const RESIDUAL_TOLERANCE: f64 = 1e-10;

fn decompose(settings: &Settings) -> Result<Output, CliError> {
    let shifts = match (settings.contains("s"), settings.contains("s_grid")) {
        (true, false) => settings.f64_list("s")?,
        (false, true) => settings.f64_list("s_grid")?,
        (true, true) => return Err(CliError::usage("give either --s or --s-grid, not both")),
        (false, false) => return Err(CliError::usage("missing required setting `s`")),
    };
    let k = u32::try_from(positive_count(settings, "k", 2)?).map_err(|_| CliError::usage("`k` is too large"))?;
    let cutoff = positive_count(settings, "cutoff", 2)?;
    let seeds = positive_count(settings, "seeds", 1)?;
    let bound = settings.f64("bound")?;
    let base = seed(settings)?;
    let table_bound = settings.opt_u64("table_bound")?;
    if let Some(b) = table_bound {
        if b == 0 || b > CSV_EXPORT_LIMIT {
            return Err(CliError::usage(format!("`table_bound` must lie in 1..={CSV_EXPORT_LIMIT}, got {b}")));
        }
        if settings.get("out").is_none() {
            return Err(CliError::usage("`table_bound` needs --out"));
        }
    }
    let table = prime_table(settings, cutoff)?;
    let corollary = run_corollary_experiment(&table, base, seeds, &shifts, cutoff, k, bound)?;
    let max_residual = corollary
        .rows
        .iter()
        .map(|r| r.decomposition.residual.abs())
        .fold(0.0, f64::max);
    let remainder_bound_pass = corollary.rows.iter().all(|r| {
        r.decomposition
            .remainder_bound
            .is_none_or(|b| r.decomposition.remainder.abs() <= b)
    });
    let pass = max_residual <= RESIDUAL_TOLERANCE && remainder_bound_pass && corollary.pass;

    let mut csv = vec![(
        "decompose".to_string(),
        csv_rows(
            "s,stream_label,log_product,prime_sum,half_variance_sum,remainder,residual,discrepancy",
            corollary.rows.iter().map(|r| {
                let d = &r.decomposition;
                format!(
                    "{},{},{:e},{:e},{:e},{:e},{:e},{:e}",
                    d.s, r.stream_label, d.log_product, d.prime_sum, d.half_variance_sum, d.remainder, d.residual,
                    r.discrepancy
                )
            }),
        ),
    )];
    if let Some(b) = table_bound {
        let mt = sieve_multiplicative(base, b, k)?;
        let mut body = Vec::new();
        mt.write_csv(&mut body)?;
        csv.push(("f_table".to_string(), String::from_utf8_lossy(&body).into_owned()));
    }
    let summary = format!(
        "decompose: max residual {max_residual:e}, max |discrepancy| {:.4}",
        corollary.max_abs_discrepancy
    );
    let report = DecomposeReport {
        max_residual,
        remainder_bound_pass,
        corollary,
    };
    let mut out = Output {
        name: "decompose",
        json: envelope("decompose", settings, &report, pass)?,
        csv,
        pass,
        summary,
    };
    // The f(n) table is only useful as a file.
    if table_bound.is_some() {
        let dir = std::path::PathBuf::from(settings.require("out")?);
        std::fs::create_dir_all(&dir)?;
        if let Some((_, body)) = out.csv.iter().find(|(n, _)| n == "f_table") {
            std::fs::write(dir.join("f_table.csv"), body)?;
        }
        out.csv.retain(|(n, _)| n != "f_table");
    }
    Ok(out)
}

#[derive(Serialize)]
struct LindebergRow {
    norm: f64,
    shift: f64,
    value: f64,
}

#[derive(Serialize)]
struct LindebergReport {
    eps: f64,
    rows: Vec<LindebergRow>,
    strictly_decreasing: bool,
    identically_zero: bool,
    final_value: f64,
    threshold: f64,
}

fn lindeberg(settings: &Settings) -> Result<Output, CliError> {
    let model = noise(settings)?;
    let eps = settings.f64("eps")?;
    let norms = settings.f64_list("norms")?;
    let cutoff = positive_count(settings, "cutoff", 2)?;
    let threshold = settings.f64("threshold")?;
    let table = prime_table(settings, cutoff)?;
    let mut rows = Vec::with_capacity(norms.len());
    for &norm in &norms {
        let shift = (-norm).exp();
        let value = lindeberg_profile(&table, &model, &[shift], eps, cutoff, norm)?[0];
        rows.push(LindebergRow { norm, shift, value });
    }
    let strictly_decreasing = rows.windows(2).all(|w| w[1].value < w[0].value);
    let identically_zero = rows.iter().all(|r| r.value == 0.0);
    let final_value = rows.last().map_or(0.0, |r| r.value);
    let pass = (strictly_decreasing || identically_zero) && final_value <= threshold;
    let csv = vec![(
        "lindeberg".to_string(),
        csv_rows(
            "norm,shift,value",
            rows.iter().map(|r| format!("{},{:e},{:e}", r.norm, r.shift, r.value)),
        ),
    )];
    let summary = format!("lindeberg: final value {final_value:e}");
    let report = LindebergReport {
        eps,
        rows,
        strictly_decreasing,
        identically_zero,
        final_value,
        threshold,
    };
    Ok(Output {
        name: "lindeberg",
        json: envelope("lindeberg", settings, &report, pass)?,
        csv,
        pass,
        summary,
    })
}

#[derive(Serialize)]
struct SieveReport {
    limit: u64,
    count: usize,
    largest: Option<u32>,
    counts: BTreeMap<String, usize>,
}

fn sieve(settings: &Settings) -> Result<Output, CliError> {
    let limit = settings.opt_u64("prime.limit")?.unwrap_or(1_000_000);
    let table = prime_table(settings, limit)?;
    let mut counts = BTreeMap::new();
    if settings.contains("count_at") {
        for x in settings.f64_list("count_at")? {
            counts.insert(x.to_string(), table.prime_count(x)?);
        }
    }
    let mut body = String::from("x,pi\n");
    for (x, c) in &counts {
        let _ = writeln!(body, "{x},{c}");
    }
    let report = SieveReport {
        limit: table.limit(),
        count: table.len(),
        largest: table.primes().last().copied(),
        counts,
    };
    let summary = format!("sieve: {} primes up to {}", report.count, report.limit);
    Ok(Output {
        name: "sieve",
        json: envelope("sieve", settings, &report, true)?,
        csv: vec![("sieve".to_string(), body)],
        pass: true,
        summary,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use primeseries::NoiseKind;

    #[test]
    fn noise_kinds_resolve() {
        let mk = |pairs: &[(&str, &str)]| {
            let specs = specs("fclt");
            let flags = pairs.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect();
            Settings::merge(&specs, BTreeMap::new(), flags).unwrap()
        };
        assert_eq!(noise(&mk(&[])).unwrap(), NoiseModel::rademacher());
        let g = noise(&mk(&[("noise.kind", "gaussian"), ("noise.sigma2", "2")])).unwrap();
        assert_eq!(g.kind, NoiseKind::Gaussian);
        assert_eq!(g.sigma2, 2.0);
        let tp = noise(&mk(&[
            ("noise.kind", "two_point"),
            ("noise.two_point.a", "1"),
            ("noise.two_point.b", "-1"),
            ("noise.two_point.q", "0.5"),
        ]))
        .unwrap();
        assert!((tp.sigma2 - 1.0).abs() < 1e-15);
        assert!(noise(&mk(&[("noise.kind", "cauchy")])).is_err());
        assert!(noise(&mk(&[("noise.kind", "two_point"), ("noise.two_point.q", "0.5"), ("noise.two_point.a", "1")])).is_err());
    }

    #[test]
    fn range_parsing() {
        assert_eq!(parse_range("1..12").unwrap(), (1, 12));
        assert!(parse_range("1-12").is_err());
        assert!(parse_range("a..3").is_err());
    }
}
