//! Subcommand bodies. Each writes CSV files whose first line is
//! `# config_hash=<sha256> seed=<seed>`, followed by a header row.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use semimix::clt::{clt_limit_moment, empirical_clt_moments, MeanCovarianceProfile};
use semimix::moments::mean_moment;
use semimix::montecarlo::{mean_cauchy, MeanTransformResult};
use semimix::rmt::{ensemble_spectrum, BlockMatrixSpec};
use semimix::spectral::{ks_distance, l1_density_distance, EmpiricalDistribution};
use semimix::{uniform_grid, Error};

use crate::config::{ConfigError, RunConfig};

#[derive(Debug)]
pub enum Failure {
    Config(ConfigError),
    Numeric(Error),
    Io(std::io::Error),
}

impl Failure {
    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Config(_) => 2,
            Failure::Numeric(Error::AllDrawsDiscarded { .. }) => 3,
            Failure::Numeric(Error::WorkGuard { .. }) => 4,
            Failure::Numeric(_) | Failure::Io(_) => 1,
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Config(e) => write!(f, "config: {e}"),
            Failure::Numeric(e) => write!(f, "{e}"),
            Failure::Io(e) => write!(f, "io: {e}"),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Numeric(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Io(e)
    }
}

impl From<csv::Error> for Failure {
    fn from(e: csv::Error) -> Self {
        Failure::Io(e.into())
    }
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Config(e)
    }
}

/// Output directory plus the provenance line stamped on every file.
pub struct Output {
    dir: PathBuf,
    stamp: String,
}

impl Output {
    pub fn new(dir: &Path, config: &RunConfig) -> Self {
        Self {
            dir: dir.to_path_buf(),
            stamp: format!("# config_hash={} seed={}", config.hash(), config.seed()),
        }
    }

    fn write<R: IntoIterator<Item = Vec<String>>>(
        &self,
        name: &str,
        header: &[&str],
        rows: R,
    ) -> Result<PathBuf, Failure> {
        let path = self.dir.join(name);
        let mut file = BufWriter::new(File::create(&path)?);
        writeln!(file, "{}", self.stamp)?;
        let mut w = csv::Writer::from_writer(file);
        w.write_record(header)?;
        for row in rows {
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(path)
    }
}

fn s(v: impl ToString) -> String {
    v.to_string()
}

fn mean_transform(config: &RunConfig) -> Result<MeanTransformResult, Failure> {
    let g = &config.grid;
    let xs = uniform_grid(g.x_min, g.x_max, g.step)?;
    let result = mean_cauchy(
        &config.profile_sampler()?,
        &xs,
        &config.solver_settings()?,
        config.monte_carlo.draws,
        config.seed(),
    )?;
    if result.discarded > 0 {
        eprintln!("warning: {} of {} draws did not converge and were discarded", result.discarded, result.draws);
    }
    Ok(result)
}

fn spectrum(config: &RunConfig) -> Result<EmpiricalDistribution, Failure> {
    let spec = BlockMatrixSpec::new(config.d, config.simulate.block_n)?;
    Ok(ensemble_spectrum(
        &config.profile_sampler()?,
        &spec,
        config.simulate.n_matrices,
        config.seed(),
    )?)
}

pub fn solve(config: &RunConfig, out: &Output) -> Result<Vec<PathBuf>, Failure> {
    let r = mean_transform(config)?;
    let c = &r.curve;
    let cauchy = out.write(
        "cauchy.csv",
        &["x", "re_g", "im_g", "stderr"],
        (0..c.len()).map(|k| {
            let g = c.g_values()[k];
            vec![s(c.xs()[k]), s(g.re), s(g.im), s(r.per_point_stderr[k])]
        }),
    )?;
    let mut header = vec!["x".to_string()];
    for i in 0..config.d {
        header.push(format!("re_g{i}"));
        header.push(format!("im_g{i}"));
    }
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    let diagonal = out.write(
        "diagonal.csv",
        &header,
        r.mean_diagonals.iter().zip(c.xs()).map(|(g, x)| {
            let mut row = vec![s(x)];
            for v in g.values() {
                row.push(s(v.re));
                row.push(s(v.im));
            }
            row
        }),
    )?;
    Ok(vec![cauchy, diagonal])
}

pub fn density(config: &RunConfig, out: &Output) -> Result<Vec<PathBuf>, Failure> {
    let r = mean_transform(config)?;
    let c = &r.curve;
    let path = out.write(
        "density.csv",
        &["x", "re_g", "im_g", "density", "stderr"],
        (0..c.len()).map(|k| {
            let g = c.g_values()[k];
            vec![s(c.xs()[k]), s(g.re), s(g.im), s(c.density()[k]), s(r.per_point_stderr[k])]
        }),
    )?;
    Ok(vec![path])
}

pub fn moments(config: &RunConfig, out: &Output) -> Result<Vec<PathBuf>, Failure> {
    let sampler = config.profile_sampler()?;
    let mut rows = Vec::new();
    for &m in &config.moments.orders {
        let e = mean_moment(&sampler, m, config.monte_carlo.draws, config.seed())?;
        rows.push(vec![s(m), s(e.mean), s(e.stderr)]);
    }
    Ok(vec![out.write("moments.csv", &["m", "mean_moment", "stderr"], rows)?])
}

pub fn simulate(config: &RunConfig, out: &Output) -> Result<Vec<PathBuf>, Failure> {
    let emp = spectrum(config)?;
    let eigen = out.write("eigenvalues.csv", &["eigenvalue"], emp.samples().iter().map(|v| vec![s(v)]))?;
    let hist = emp.histogram(config.compare.bin_width)?;
    let w = hist.bin_width;
    let histogram = out.write(
        "histogram.csv",
        &["bin_left", "bin_right", "count", "density"],
        hist.densities()
            .into_iter()
            .zip(&hist.counts)
            .map(|((left, dens), count)| vec![s(left), s(left + w), s(count), s(dens)]),
    )?;
    Ok(vec![eigen, histogram])
}

pub fn clt_check(config: &RunConfig, out: &Output) -> Result<Vec<PathBuf>, Failure> {
    let sampler = config.profile_sampler()?;
    let cov = MeanCovarianceProfile::from_sampler(&sampler);
    let clt = &config.clt;
    let mut rows = Vec::new();
    for &n_sum in &clt.n_sums {
        let est = empirical_clt_moments(&sampler, n_sum, clt.matrix_n, &clt.moments, clt.trials, config.seed())?;
        for (m, e) in est.estimates {
            let limit = clt_limit_moment(&cov, m).normalized_trace().re;
            rows.push(vec![s(n_sum), s(m), s(e.mean), s(limit), s(e.stderr)]);
        }
    }
    Ok(vec![out.write("clt.csv", &["N_sum", "m", "empirical", "limit", "stderr"], rows)?])
}

pub fn compare(config: &RunConfig, out: &Output) -> Result<Vec<PathBuf>, Failure> {
    let r = mean_transform(config)?;
    let emp = spectrum(config)?;
    let w = config.compare.bin_width;
    let l1 = l1_density_distance(&r.curve, &emp, w)?;
    let ks = ks_distance(&r.curve, &emp);
    let hist = emp.histogram(w)?;
    let densities = hist.densities();
    let hist_density_at = |x: f64| {
        let k = ((x - hist.origin) / w).floor();
        if k < 0.0 || k as usize >= densities.len() {
            0.0
        } else {
            densities[k as usize].1
        }
    };
    let c = &r.curve;
    let side_by_side = out.write(
        "compare.csv",
        &["x", "density", "histogram_density"],
        (0..c.len()).map(|k| vec![s(c.xs()[k]), s(c.density()[k]), s(hist_density_at(c.xs()[k]))]),
    )?;
    let distances = out.write(
        "distances.csv",
        &["metric", "value"],
        [
            vec![s("l1"), s(l1)],
            vec![s("ks"), s(ks)],
            vec![s("draws"), s(r.draws)],
            vec![s("discarded"), s(r.discarded)],
            vec![s("eigenvalues"), s(emp.len())],
        ],
    )?;
    Ok(vec![side_by_side, distances])
}
