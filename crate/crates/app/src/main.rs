use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand, ValueEnum};
use hwl::bundle::{AnalysisBundle, CertificateDto};
use hwl::config::{normalize_analyses, Format, Group, ScenarioConfig};
use hwl::parallel::init_thread_pool;
use hwl::scenario::{run_certificate_parallel, run_scenario};
use hwl::search::{search_separation, SearchParams, SearchTarget};
use hwl::{export, selftest};
use hwl_core::bellman::{embedding_fun_constant, CertificateId, SamplerConfig, DEFAULT_REGIME};

const EXIT_CONFIG: u8 = 1;
const EXIT_CAPACITY: u8 = 2;
const EXIT_MARGIN: u8 = 3;

#[derive(Parser)]
#[command(name = "hwl", version, about = "Dyadic two-weight Haar analysis")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every analysis of a scenario config.
    Analyze {
        config: PathBuf,
        /// Exit with status 2 if any analysis hit a size cap.
        #[arg(long)]
        strict: bool,
    },
    /// Run only the norm analyses of a scenario config.
    Norms {
        config: PathBuf,
        #[arg(long)]
        strict: bool,
    },
    /// Run one Bellman certificate and print its report.
    Certify {
        #[arg(long)]
        cert: CertKind,
        /// Required for alpha_small and alpha_large.
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1.0)]
        c_dom: f64,
        #[arg(long, default_value_t = 8)]
        shards: usize,
    },
    /// Search for weight pairs maximizing one condition over another.
    Search {
        #[arg(long)]
        from: SearchTarget,
        #[arg(long)]
        to: SearchTarget,
        #[arg(long)]
        budget: u64,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        depth: u32,
        #[arg(long, default_value_t = 5)]
        top: usize,
    },
    /// Run the invariant suite at depths up to 4 and short certificate runs.
    Selftest,
}

#[derive(Clone, Copy, ValueEnum)]
enum CertKind {
    #[value(name = "alpha_small")]
    AlphaSmall,
    #[value(name = "alpha_large")]
    AlphaLarge,
    Embedding,
    Seven,
    Nine,
}

fn certificate(kind: CertKind, alpha: Option<f64>, c_dom: f64) -> anyhow::Result<CertificateId> {
    let need_alpha = || alpha.context("--alpha is required for this certificate");
    Ok(match kind {
        CertKind::AlphaSmall => CertificateId::AlphaSmall {
            alpha: need_alpha()?,
        },
        CertKind::AlphaLarge => CertificateId::AlphaLarge {
            alpha: need_alpha()?,
        },
        CertKind::Embedding => CertificateId::Embedding {
            c_dom,
            c_fun: embedding_fun_constant(c_dom),
        },
        CertKind::Seven => CertificateId::Seven {
            c_dom,
            c_reg: DEFAULT_REGIME,
        },
        CertKind::Nine => CertificateId::Nine { c_dom },
    })
}

fn emit(text: &str, path: Option<&Path>) -> anyhow::Result<()> {
    match path {
        Some(p) => std::fs::write(p, text).with_context(|| format!("cannot write {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn scenario(config: &Path, strict: bool, norms_only: bool) -> anyhow::Result<u8> {
    let mut cfg = match ScenarioConfig::load(config) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return Ok(EXIT_CONFIG);
        }
    };
    if norms_only {
        cfg.analyses = normalize_analyses(&cfg.analyses)
            .into_iter()
            .filter(|a| a.group() == Group::Norms)
            .collect();
        if cfg.analyses.is_empty() {
            eprintln!("error: invalid config: no norm analyses requested");
            return Ok(EXIT_CONFIG);
        }
    }
    let bundle = match run_scenario(&cfg) {
        Ok(b) => b,
        Err(e) => {
            eprintln!("error: {e}");
            return Ok(EXIT_CONFIG);
        }
    };
    let text = match cfg.output.format {
        Format::Json => bundle.to_json(),
        Format::Csv => export::to_csv(&bundle)?,
    };
    emit(&text, cfg.output.path.as_deref())?;
    Ok(status(&bundle, strict))
}

fn status(bundle: &AnalysisBundle, strict: bool) -> u8 {
    for c in bundle.failed_certificates() {
        eprintln!(
            "certificate {} failed: worst margin {}",
            c.certificate, c.worst_margin.0
        );
    }
    if !bundle.failed_certificates().is_empty() {
        EXIT_MARGIN
    } else if strict && bundle.has_capacity_skips() {
        for r in bundle.analyses.iter().filter(|r| r.skip.is_some()) {
            eprintln!(
                "skipped {}: {}",
                r.id.name(),
                r.skip.as_ref().map(|s| s.reason.as_str()).unwrap_or("")
            );
        }
        EXIT_CAPACITY
    } else {
        0
    }
}

fn run(cli: Cli) -> anyhow::Result<u8> {
    match cli.command {
        Command::Analyze { config, strict } => scenario(&config, strict, false),
        Command::Norms { config, strict } => scenario(&config, strict, true),
        Command::Certify {
            cert,
            alpha,
            samples,
            seed,
            c_dom,
            shards,
        } => {
            let id = match certificate(cert, alpha, c_dom) {
                Ok(id) => id,
                Err(e) => {
                    eprintln!("error: {e}");
                    return Ok(EXIT_CONFIG);
                }
            };
            let cfg = SamplerConfig {
                samples,
                seed,
                shards,
            };
            let report = match run_certificate_parallel(id, &cfg) {
                Ok(r) => CertificateDto::from(&r),
                Err(e) => {
                    eprintln!("error: {e}");
                    return Ok(EXIT_CONFIG);
                }
            };
            println!("{}", serde_json::to_string_pretty(&report)?);
            Ok(if report.margins_ok { 0 } else { EXIT_MARGIN })
        }
        Command::Search {
            from,
            to,
            budget,
            seed,
            depth,
            top,
        } => {
            let params = SearchParams {
                from,
                to,
                budget,
                seed,
                depth,
                top,
            };
            match search_separation(&params) {
                Ok(r) => {
                    print!("{}", r.to_json());
                    Ok(0)
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    Ok(EXIT_CONFIG)
                }
            }
        }
        Command::Selftest => {
            let report = selftest::run_selftest()?;
            print!("{}", report.to_json());
            Ok(if report.passed { 0 } else { EXIT_MARGIN })
        }
    }
}

fn main() -> ExitCode {
    init_thread_pool();
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write(name: &str, text: &str) -> PathBuf {
        let dir = std::env::temp_dir().join(format!("hwl-main-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let p = dir.join(name);
        std::fs::write(&p, text).unwrap();
        p
    }

    const BASE: &str = "depth = 6\nanalyses = [\"joint_a2\", \"sup_sign_norm\"]\n\
        [weight_spec_v]\nkind = \"constant\"\nvalue = 1.0\n\
        [weight_spec_w]\nkind = \"constant\"\nvalue = 1.0\n";

    fn with_output(text: &str, out: &Path) -> String {
        format!("{text}[output]\npath = {:?}\n", out.to_str().unwrap())
    }

    #[test]
    fn invalid_config_exits_one() {
        let p = write(
            "bad.toml",
            &BASE.replace("depth = 6", "depth = 6\nspeed = 1"),
        );
        assert_eq!(scenario(&p, false, false).unwrap(), EXIT_CONFIG);
        let missing = Path::new("/nonexistent/hwl.toml");
        assert_eq!(scenario(missing, false, false).unwrap(), EXIT_CONFIG);
    }

    #[test]
    fn capacity_skip_exits_two_only_when_strict() {
        let out = write("out.json", "");
        let p = write("cap.toml", &with_output(BASE, &out));
        assert_eq!(scenario(&p, false, false).unwrap(), 0);
        assert_eq!(scenario(&p, true, false).unwrap(), EXIT_CAPACITY);
        let b = AnalysisBundle::from_json(&std::fs::read_to_string(&out).unwrap()).unwrap();
        assert_eq!(b.analyses.len(), 2);
    }

    #[test]
    fn norms_keeps_only_norm_analyses() {
        let out = write("norms.json", "");
        let text = BASE.replace("depth = 6", "depth = 3");
        let p = write("norms.toml", &with_output(&text, &out));
        assert_eq!(scenario(&p, true, true).unwrap(), 0);
        let b = AnalysisBundle::from_json(&std::fs::read_to_string(&out).unwrap()).unwrap();
        assert_eq!(b.analyses.len(), 1);
        assert_eq!(b.analyses[0].id.name(), "sup_sign_norm");
    }

    #[test]
    fn failed_certificate_exits_three() {
        let out = write("cert.json", "");
        let text = format!(
            "{}[mode]\ncertificate_seed = 1\ncertificate_samples = 200\n",
            BASE.replace("depth = 6", "depth = 2")
                .replace("\"sup_sign_norm\"", "\"cert_nine\"")
        );
        let p = write("cert.toml", &with_output(&text, &out));
        assert_eq!(scenario(&p, true, false).unwrap(), 0);
        let text = std::fs::read_to_string(&out).unwrap().replacen(
            "\"margins_ok\": true",
            "\"margins_ok\": false",
            1,
        );
        let b = AnalysisBundle::from_json(&text).unwrap();
        assert_eq!(status(&b, false), EXIT_MARGIN);
    }

    #[test]
    fn cli_parses_subcommands() {
        let cli = Cli::try_parse_from([
            "hwl", "search", "--from", "joint_a2", "--to", "cond_12", "--budget", "5", "--seed",
            "1", "--depth", "3",
        ]);
        assert!(cli.is_ok());
        assert!(Cli::try_parse_from([
            "hwl",
            "certify",
            "--cert",
            "alpha_small",
            "--alpha",
            "0.25"
        ])
        .is_ok());
        assert!(Cli::try_parse_from(["hwl", "certify", "--cert", "ten"]).is_err());
    }
}
