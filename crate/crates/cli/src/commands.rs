use std::io::Write;
use std::path::Path;

use potts_core::estimator::{mpl_limit_law, simulate_mpl_from_law};
use potts_core::free_energy::{
    beta_c, classify, find_maximizers, lambda_matrix, locate_special_points, null_direction,
    x_profile, DEFAULT_TIE_TOL,
};
use potts_core::limit_laws::{cdf_table, write_cdf_csv, GenNormalLaw};
use potts_core::metrics::{
    berry_esseen_experiment, kolmogorov_distance_1d, law_for, sort_atoms, ExperimentOptions,
};
use potts_core::model::io::format_f64;
use potts_core::model::ChainConfig;
use potts_core::ModelParams;
use serde::Serialize;
use serde_json::json;

use crate::cache::exact_law_cached;
use crate::config::{override_with, ExperimentConfig};
use crate::error::{CliError, CliResult};
use crate::{Command, LawFormat};

/// Chain settings used by `--mcmc` when the config has no `mcmc` block.
fn default_chain(seed: u64) -> ChainConfig {
    ChainConfig {
        burn_in_sweeps: 200,
        thinning: 1,
        samples: 100_000,
        replicates: 8,
        seed,
    }
}

fn chain_for(cfg: &ExperimentConfig, enabled: bool) -> CliResult<Option<ChainConfig>> {
    if !enabled {
        return Ok(None);
    }
    match cfg.mcmc {
        Some(chain) => Ok(Some(chain)),
        None => Ok(Some(default_chain(cfg.seed()?))),
    }
}

fn write_text(out: Option<&Path>, text: &str) -> CliResult<()> {
    match out {
        Some(path) => {
            std::fs::write(path, text).map_err(|e| CliError::io(path.display().to_string(), e))
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .map_err(|e| CliError::io("stdout", e))
        }
    }
}

fn to_json<T: Serialize>(value: &T) -> CliResult<String> {
    Ok(serde_json::to_string_pretty(value)? + "\n")
}

fn ensure_dir(dir: &Path) -> CliResult<()> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir.display().to_string(), e))
}

fn create(path: &Path) -> CliResult<std::fs::File> {
    std::fs::File::create(path).map_err(|e| CliError::io(path.display().to_string(), e))
}

fn dry_run(cfg: &ExperimentConfig) -> CliResult<()> {
    write_text(None, &to_json(cfg)?)
}

pub fn run(command: Command, dry: bool) -> CliResult<()> {
    match command {
        Command::Classify { common, tol_zero } => {
            let cfg = ExperimentConfig::from_common(&common)?;
            let params = cfg.params()?;
            if dry {
                return dry_run(&cfg);
            }
            let point = classify(&params, tol_zero)?;
            eprintln!("{}", point.kind);
            write_text(cfg.out.as_deref(), &to_json(&point)?)
        }
        Command::Maximize { common } => {
            let cfg = ExperimentConfig::from_common(&common)?;
            let params = cfg.params()?;
            if dry {
                return dry_run(&cfg);
            }
            write_text(
                cfg.out.as_deref(),
                &to_json(&find_maximizers(&params, DEFAULT_TIE_TOL))?,
            )
        }
        Command::BetaC { common } => {
            let cfg = ExperimentConfig::from_common(&common)?;
            let (p, q) = cfg.pq()?;
            if dry {
                return dry_run(&cfg);
            }
            let value = beta_c(p, q, 1e-12)?;
            write_text(
                cfg.out.as_deref(),
                &to_json(&json!({ "p": p, "q": q, "beta_c": value }))?,
            )
        }
        Command::ExactLaw {
            common,
            n,
            cap,
            mcmc,
            format,
        } => {
            let mut cfg = ExperimentConfig::from_common(&common)?;
            override_with(&mut cfg.n, n);
            override_with(&mut cfg.enumeration_cap, cap);
            let params = cfg.params()?;
            let n = cfg.n()?;
            let chain = chain_for(&cfg, mcmc)?;
            if dry {
                return dry_run(&cfg);
            }
            let law = match chain {
                Some(chain) => law_for(&params, n, cfg.cap(), Some(&chain))?,
                None => exact_law_cached(&params, n, cfg.cap())?,
            };
            match format {
                LawFormat::Json => write_text(cfg.out.as_deref(), &(law.to_json()? + "\n")),
                LawFormat::Csv => {
                    let mut buf = Vec::new();
                    law.write_csv(&mut buf)?;
                    write_text(cfg.out.as_deref(), &String::from_utf8_lossy(&buf))
                }
            }
        }
        Command::Rates {
            common,
            ns,
            eps,
            expected,
            cap,
            mcmc,
        } => {
            let mut cfg = ExperimentConfig::from_common(&common)?;
            override_with(&mut cfg.ns, ns);
            override_with(&mut cfg.eps, eps);
            override_with(&mut cfg.expected, expected);
            override_with(&mut cfg.enumeration_cap, cap);
            let params = cfg.params()?;
            let ns = cfg.ns()?;
            let dir = cfg.out()?.to_path_buf();
            let chain = chain_for(&cfg, mcmc)?;
            if dry {
                return dry_run(&cfg);
            }
            let options = ExperimentOptions {
                eps: cfg.eps,
                expected: cfg.expected,
                enumeration_cap: cfg.cap(),
                mcmc: chain,
                ..Default::default()
            };
            let report = berry_esseen_experiment(&params, &ns, &options)?;
            ensure_dir(&dir)?;
            report.write_csv(create(&dir.join("rates.csv"))?)?;
            write_text(Some(&dir.join("rates.json")), &to_json(&report)?)?;
            eprintln!(
                "{}: slope {:?}, log-corrected slope {:?}",
                report.regime,
                report.fitted_slope(),
                report.fitted_slope_with_log_correction()
            );
            Ok(())
        }
        Command::Mpl {
            common,
            n,
            replicates,
            eps,
        } => {
            let mut cfg = ExperimentConfig::from_common(&common)?;
            override_with(&mut cfg.n, n);
            override_with(&mut cfg.replicates, replicates);
            override_with(&mut cfg.eps, eps);
            let params = cfg.params()?;
            let n = cfg.n()?;
            let seed = cfg.seed()?;
            let replicates = cfg.replicates.unwrap_or(10_000);
            let dir = cfg.out()?.to_path_buf();
            if params.h != 0.0 {
                return Err(CliError::Config(
                    "the estimator experiment needs h = 0".into(),
                ));
            }
            if dry {
                return dry_run(&cfg);
            }
            let law = exact_law_cached(&params, n, cfg.cap())?;
            let limit = mpl_limit_law(&law, cfg.eps)?;
            let sample = simulate_mpl_from_law(&law, replicates, seed)?;
            let w = 1.0 / sample.sqrt_n_errors.len().max(1) as f64;
            let atoms = sort_atoms(sample.sqrt_n_errors.iter().map(|&e| (e, w)).collect());
            let distance = kolmogorov_distance_1d(&atoms, |x| limit.cdf(x));
            ensure_dir(&dir)?;
            let mut csv = String::from("sqrt_n_error\n");
            for e in &sample.sqrt_n_errors {
                csv.push_str(&format_f64(*e));
                csv.push('\n');
            }
            write_text(Some(&dir.join("mpl.csv")), &csv)?;
            let summary = json!({
                "params": params,
                "n": n,
                "replicates": replicates,
                "seed": seed,
                "retained": sample.sqrt_n_errors.len(),
                "degenerate": sample.degenerate,
                "failures": sample.failures,
                "median": sample.median(),
                "kolmogorov_distance": distance,
                "limit": limit,
            });
            write_text(Some(&dir.join("mpl.json")), &to_json(&summary)?)
        }
        Command::Lambda {
            common,
            s,
            special,
            index,
        } => {
            let cfg = ExperimentConfig::from_common(&common)?;
            let (p, q) = cfg.pq()?;
            let (params, m): (ModelParams, Option<Vec<f64>>) = if special {
                (ModelParams::new(p, q, 1.0, 0.0)?, None)
            } else {
                let params = cfg.params()?;
                (params, s.map(|s| x_profile(s, params.qn())))
            };
            if dry {
                return dry_run(&cfg);
            }
            let (params, m) = if special {
                let points = locate_special_points(p, q)?;
                let sp = points.get(index).ok_or_else(|| {
                    CliError::Config(format!(
                        "special point {index} requested, {} located",
                        points.len()
                    ))
                })?;
                (sp.params(p, q), x_profile(sp.s, q as usize))
            } else {
                let m = m.unwrap_or_else(|| {
                    find_maximizers(&params, DEFAULT_TIE_TOL).expanded[0].clone()
                });
                (params, m)
            };
            let lam = lambda_matrix(&m, &params)?;
            let lu = lam
                .apply(&null_direction(q as usize))
                .iter()
                .fold(0.0f64, |a, v| a.max(v.abs()));
            let rows: Vec<Vec<f64>> = (0..lam.q())
                .map(|r| lam.full.row(r).iter().cloned().collect())
                .collect();
            let out = json!({
                "params": params,
                "m": m,
                "a": lam.a,
                "b": lam.b,
                "b_prime": lam.b_prime,
                "c": lam.c,
                "d": lam.d,
                "matrix": rows,
                "closed_form_det": lam.closed_form_det(),
                "dense_det": lam.dense_det(),
                "rank": lam.rank(1e-8),
                "lambda_u_inf_norm": lu,
            });
            write_text(cfg.out.as_deref(), &to_json(&out)?)
        }
        Command::LimitCdf {
            shape,
            moment,
            from,
            to,
            points,
            out,
        } => {
            let law = GenNormalLaw::new(shape, moment)?;
            if !(from < to) || points < 2 {
                return Err(CliError::Config(
                    "need from < to and at least 2 points".into(),
                ));
            }
            if dry {
                return write_text(
                    None,
                    &to_json(
                        &json!({ "shape": shape, "moment": moment, "from": from, "to": to, "points": points }),
                    )?,
                );
            }
            let grid: Vec<f64> = (0..points)
                .map(|i| from + (to - from) * i as f64 / (points - 1) as f64)
                .collect();
            let mut buf = Vec::new();
            write_cdf_csv(&cdf_table(&grid, |x| law.cdf(x)), &mut buf)?;
            write_text(out.as_deref(), &String::from_utf8_lossy(&buf))
        }
    }
}
